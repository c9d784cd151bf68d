#include "bspde/problem.hpp"

#include "bspde/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bspde {

void ProblemSpec::validate() const {
    if (grid.num_nodes < 5) throw ConfigError("problem: grid not initialized");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError("problem: horizon must be positive");
    if (!(kappa > 0.0 && kappa < 1.0))
        throw ConfigError("problem: kappa must lie in (0,1), got " + format_g17(kappa));
    if (!(delta1 > 0.0))
        throw ConfigError("problem: delta1 must be positive, got " + format_g17(delta1));
    if (phi.size() != static_cast<std::size_t>(grid.num_nodes))
        throw ConfigError("problem: terminal field length " + std::to_string(phi.size()) +
                          " does not match grid size " + std::to_string(grid.num_nodes));
    require_finite(phi, "terminal field");
    if (lambda.num_marks() != levy.num_marks())
        throw ConfigError("problem: lambda weight covers " + std::to_string(lambda.num_marks()) +
                          " marks, levy model has " + std::to_string(levy.num_marks()));
    // Terminal data must agree with the Dirichlet data at t = T on the two
    // boundary nodes; tolerance absorbs rounding of expression-sampled data.
    const double scale = std::max(1.0, max_abs(phi));
    const double gl = boundary(horizon, grid.x(0));
    const double gr = boundary(horizon, grid.x(grid.num_nodes - 1));
    if (std::fabs(phi.front() - gl) > 1e-9 * scale || std::fabs(phi.back() - gr) > 1e-9 * scale)
        throw ConfigError("problem: terminal field does not match boundary data at t = T");
}

namespace {

double jump_aggregate(const ProblemSpec& spec, double t, std::span<const double> r) {
    if (r.size() != static_cast<std::size_t>(spec.levy.num_marks()))
        throw ConfigError("driver input: r has " + std::to_string(r.size()) +
                          " entries, levy model has " + std::to_string(spec.levy.num_marks()) +
                          " marks");
    double acc = 0.0;
    for (int j = 0; j < spec.levy.num_marks(); ++j)
        acc += r[j] * spec.lambda(t, j) * spec.levy.intensities[j];
    return acc;
}

} // namespace

double eval_driver_with_rint(const ProblemSpec& spec, double t, double x, double u, double v,
                             double Z, double rint) {
    if (const auto* lin = std::get_if<LinearDriver>(&spec.driver)) {
        return lin->c0(t, x) + lin->c_u * u + lin->c_v * v + lin->c_Z * Z + rint;
    }
    if (const auto* con = std::get_if<ConcaveDriver>(&spec.driver)) {
        return con->c0(t, x) - con->gamma * std::fabs(Z) + rint;
    }
    const auto& body = std::get<ExpressionDriver>(spec.driver).body;
    expr::Env env;
    env.t = t;
    env.x = x;
    env.u = u;
    env.ux = v;
    env.Z = Z;
    env.rint = rint;
    return expr::eval(body, env);
}

double eval_driver(const ProblemSpec& spec, const DriverInput& in) {
    return eval_driver_with_rint(spec, in.t, in.x, in.u, in.v, in.Z,
                                 jump_aggregate(spec, in.t, in.r));
}

bool driver_uses_u(const DriverSpec& d) {
    if (const auto* lin = std::get_if<LinearDriver>(&d)) return lin->c_u != 0.0;
    if (std::holds_alternative<ConcaveDriver>(d)) return false;
    return expr::uses(std::get<ExpressionDriver>(d).body, expr::Ident::U);
}

bool driver_uses_v(const DriverSpec& d) {
    if (const auto* lin = std::get_if<LinearDriver>(&d)) return lin->c_v != 0.0;
    if (std::holds_alternative<ConcaveDriver>(d)) return false;
    return expr::uses(std::get<ExpressionDriver>(d).body, expr::Ident::Ux);
}

bool driver_uses_Z(const DriverSpec& d) {
    if (const auto* lin = std::get_if<LinearDriver>(&d)) return lin->c_Z != 0.0;
    if (const auto* con = std::get_if<ConcaveDriver>(&d)) return con->gamma != 0.0;
    return expr::uses(std::get<ExpressionDriver>(d).body, expr::Ident::Z);
}

bool driver_uses_rint(const DriverSpec& d) {
    if (std::holds_alternative<LinearDriver>(d) || std::holds_alternative<ConcaveDriver>(d))
        return true; // the jump aggregate enters additively
    return expr::uses(std::get<ExpressionDriver>(d).body, expr::Ident::Rint);
}

bool jump_term_active(const ProblemSpec& spec, std::span<const double> t_samples) {
    if (!driver_uses_rint(spec.driver)) return false;
    for (double t : t_samples)
        for (int j = 0; j < spec.levy.num_marks(); ++j)
            if (spec.lambda(t, j) * spec.levy.intensities[j] != 0.0) return true;
    return false;
}

EllipticityReport check_ellipticity(const ProblemSpec& spec, std::span<const double> t_samples,
                                    std::span<const double> x_samples) {
    if (t_samples.empty() || x_samples.empty())
        throw PreconditionError("check_ellipticity: empty sample set");
    EllipticityReport report;
    bool first = true;
    for (double t : t_samples) {
        const double b = spec.beta(t);
        const double threshold = b * b / (2.0 * spec.kappa) + spec.delta1;
        for (double x : x_samples) {
            const double a = spec.a_diff(t, x);
            if (!std::isfinite(a))
                throw NumericError("diffusion coefficient non-finite at t=" + format_g17(t) +
                                   ", x=" + format_g17(x));
            const double margin = a - threshold;
            if (first || margin < report.worst_margin) {
                report.worst_margin = margin;
                report.worst_t = t;
                report.worst_x = x;
                first = false;
            }
        }
    }
    report.pass = report.worst_margin >= 0.0;
    return report;
}

EllipticityReport check_ellipticity_default(const ProblemSpec& spec, int num_steps) {
    std::vector<double> ts(static_cast<std::size_t>(num_steps) + 1);
    const double dt = spec.horizon / num_steps;
    for (int k = 0; k <= num_steps; ++k) ts[k] = k * dt;
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(2 * spec.grid.num_nodes));
    for (int i = 0; i < spec.grid.num_nodes; ++i) {
        xs.push_back(spec.grid.x(i));
        if (i + 1 < spec.grid.num_nodes) xs.push_back(spec.grid.midpoint(i));
    }
    return check_ellipticity(spec, ts, xs);
}

LipschitzEstimate estimate_lipschitz(const ProblemSpec& spec, int n_samples, std::uint64_t seed,
                                     std::optional<double> against_constant) {
    if (n_samples < 100)
        throw PreconditionError("estimate_lipschitz: need at least 100 samples");
    LipschitzEstimate est;
    if (const auto* lin = std::get_if<LinearDriver>(&spec.driver)) {
        est.exact_u = std::fabs(lin->c_u);
        est.exact_v = std::fabs(lin->c_v);
        est.exact_Z = std::fabs(lin->c_Z);
    } else if (const auto* con = std::get_if<ConcaveDriver>(&spec.driver)) {
        est.exact_u = 0.0;
        est.exact_v = 0.0;
        est.exact_Z = con->gamma;
    }

    CounterRng rng{seed};
    const int num_marks = spec.levy.num_marks();
    std::vector<double> r(static_cast<std::size_t>(num_marks));
    const double lo = -1.0, hi = 1.0; // sample box per argument
    for (int s = 0; s < n_samples; ++s) {
        const double t = rng.next_in(0.0, spec.horizon);
        const double x = rng.next_in(spec.grid.x_left, spec.grid.x_right);
        double u = rng.next_in(lo, hi);
        double v = rng.next_in(lo, hi);
        double Z = rng.next_in(lo, hi);
        for (double& rj : r) rj = rng.next_in(lo, hi);
        const double rint = jump_aggregate(spec, t, r);
        const double base = eval_driver_with_rint(spec, t, x, u, v, Z, rint);

        auto probe = [&](double* slot, double& out) {
            const double saved = *slot;
            // Wide quotient against an independent draw.
            const double other = rng.next_in(lo, hi);
            if (std::fabs(other - saved) > 1e-12) {
                *slot = other;
                const double moved = eval_driver_with_rint(spec, t, x, u, v, Z, rint);
                out = std::max(out, std::fabs(moved - base) / std::fabs(other - saved));
            }
            // Narrow centered quotient near the base point.
            const double eps = 1e-6;
            *slot = saved + eps;
            const double up = eval_driver_with_rint(spec, t, x, u, v, Z, rint);
            *slot = saved - eps;
            const double dn = eval_driver_with_rint(spec, t, x, u, v, Z, rint);
            out = std::max(out, std::fabs(up - dn) / (2.0 * eps));
            *slot = saved;
        };
        probe(&u, est.est_u);
        probe(&v, est.est_v);
        probe(&Z, est.est_Z);
    }
    if (against_constant) {
        const double c = *against_constant;
        if (est.exact_u) {
            est.pass = std::max({*est.exact_u, *est.exact_v, *est.exact_Z}) <= c;
        } else {
            est.pass = std::max({est.est_u, est.est_v, est.est_Z}) <= c + 1e-9;
        }
    }
    return est;
}

JumpBoundReport check_jump_bound(const ProblemSpec& spec, int n_samples, std::uint64_t seed) {
    JumpBoundReport report;
    std::vector<double> ts;
    const int steps = 16;
    for (int k = 0; k <= steps; ++k) ts.push_back(spec.horizon * k / steps);
    report.lambda_report = check_lambda_bound(spec.levy, spec.lambda, ts);

    if (!std::holds_alternative<ExpressionDriver>(spec.driver)) {
        // Built-in drivers carry the jump aggregate additively, so the
        // r-difference bound holds with equality; only the envelope matters.
        report.pass = report.lambda_report.pass;
        report.worst_violation = 0.0;
        return report;
    }

    report.randomized = true;
    const int num_marks = spec.levy.num_marks();
    CounterRng rng{seed};
    std::vector<double> r1(static_cast<std::size_t>(num_marks));
    std::vector<double> r2(static_cast<std::size_t>(num_marks));
    for (int s = 0; s < n_samples; ++s) {
        const double t = rng.next_in(0.0, spec.horizon);
        const double x = rng.next_in(spec.grid.x_left, spec.grid.x_right);
        const double u = rng.next_in(-1.0, 1.0);
        const double v = rng.next_in(-1.0, 1.0);
        const double Z = rng.next_in(-1.0, 1.0);
        double bound = 0.0;
        for (int j = 0; j < num_marks; ++j) {
            r2[j] = rng.next_in(-1.0, 1.0);
            const double incr = rng.next_in(0.0, 1.0); // r1 >= r2
            r1[j] = r2[j] + incr;
            bound += incr * spec.lambda(t, j) * spec.levy.intensities[j];
        }
        const double b1 = eval_driver_with_rint(spec, t, x, u, v, Z, jump_aggregate(spec, t, r1));
        const double b2 = eval_driver_with_rint(spec, t, x, u, v, Z, jump_aggregate(spec, t, r2));
        report.worst_violation = std::max(report.worst_violation, (b1 - b2) - bound);
    }
    report.pass = report.lambda_report.pass && report.worst_violation <= 1e-10;
    return report;
}

} // namespace bspde
