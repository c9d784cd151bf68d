#include "bspde/solver.hpp"

#include "bspde/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bspde {

TridiagFactor::TridiagFactor(std::vector<double> lower, std::vector<double> diag,
                             std::vector<double> upper)
    : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)) {
    const std::size_t m = diag_.size();
    if (lower_.size() != m - 1 || upper_.size() != m - 1)
        throw LogicError("tridiagonal factor: band lengths inconsistent");
    // In-place LU: lower_ becomes the elimination multipliers, diag_ the pivots.
    for (std::size_t i = 1; i < m; ++i) {
        if (diag_[i - 1] == 0.0) throw NumericError("tridiagonal solve: zero pivot");
        const double mult = lower_[i - 1] / diag_[i - 1];
        lower_[i - 1] = mult;
        diag_[i] -= mult * upper_[i - 1];
    }
    if (diag_[m - 1] == 0.0) throw NumericError("tridiagonal solve: zero pivot");
}

void TridiagFactor::solve(Field& rhs) const {
    const std::size_t m = diag_.size();
    if (rhs.size() != m) throw LogicError("tridiagonal solve: rhs length mismatch");
    for (std::size_t i = 1; i < m; ++i) rhs[i] -= lower_[i - 1] * rhs[i - 1];
    rhs[m - 1] /= diag_[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - upper_[i] * rhs[i + 1]) / diag_[i];
}

namespace {

void check_params(const SchemeParams& params) {
    if (!(params.theta >= 0.0 && params.theta <= 1.0))
        throw ConfigError("scheme: theta must lie in [0,1], got " + format_g17(params.theta));
    if (params.num_steps < 1) throw ConfigError("scheme: need at least one time step");
}

void check_ellipticity_or_throw(const ProblemSpec& spec, const SchemeParams& params,
                                const SolveOptions& opts) {
    const EllipticityReport rep = check_ellipticity_default(spec, params.num_steps);
    if (!rep.pass && !opts.force_unchecked)
        throw PreconditionError(
            "ellipticity check failed (worst margin " + format_g17(rep.worst_margin) + " at t=" +
            format_g17(rep.worst_t) + ", x=" + format_g17(rep.worst_x) +
            "); pass force_unchecked to run anyway");
}

// State shared by every node step at one time level.
struct LevelContext {
    double t = 0.0;
    double dt = 0.0;
    double theta = 1.0;
    double beta = 0.0;
    double g_left = 0.0;
    double g_right = 0.0;
    std::vector<double> a_mid;       // midpoint diffusion samples at t
    std::vector<double> jump_weight; // lambda_j(t) * nu_j
    TridiagFactor factor{{}, {1.0}, {}};
};

LevelContext make_level_context(const ProblemSpec& spec, double t, double dt, double theta) {
    LevelContext ctx;
    ctx.t = t;
    ctx.dt = dt;
    ctx.theta = theta;
    ctx.beta = spec.beta(t);
    if (!std::isfinite(ctx.beta))
        throw NumericError("beta non-finite at t=" + format_g17(t));
    ctx.g_left = spec.boundary(t, spec.grid.x(0));
    ctx.g_right = spec.boundary(t, spec.grid.x(spec.grid.num_nodes - 1));
    ctx.a_mid = sample_midpoints(spec.grid, spec.a_diff, t);

    const int m = spec.grid.num_nodes;
    const double s = theta * dt / (spec.grid.h * spec.grid.h);
    std::vector<double> lower(m - 1, 0.0), diag(m, 1.0), upper(m - 1, 0.0);
    for (int i = 1; i + 1 < m; ++i) {
        lower[i - 1] = -s * ctx.a_mid[i - 1];
        diag[i] = 1.0 + s * (ctx.a_mid[i - 1] + ctx.a_mid[i]);
        upper[i] = -s * ctx.a_mid[i];
    }
    // Rows 0 and m-1 stay [1] with zero off-diagonals: Dirichlet pins.
    ctx.factor = TridiagFactor(std::move(lower), std::move(diag), std::move(upper));

    ctx.jump_weight.resize(static_cast<std::size_t>(spec.levy.num_marks()));
    for (int j = 0; j < spec.levy.num_marks(); ++j)
        ctx.jump_weight[j] = spec.lambda(t, j) * spec.levy.intensities[j];
    return ctx;
}

// One backward step for one node: predictor data (ubar, Z, r) in, u_k out.
Field step_node(const ProblemSpec& spec, const LevelContext& ctx, const Field& ubar,
                const Field& z, const MarkField& r) {
    const Grid& grid = spec.grid;
    const int m = grid.num_nodes;
    const Field grad_u = gradient(grid, ubar);
    const Field grad_z = gradient(grid, z);

    Field rhs(static_cast<std::size_t>(m), 0.0);
    for (int i = 1; i + 1 < m; ++i) {
        double rint = 0.0;
        for (std::size_t j = 0; j < ctx.jump_weight.size(); ++j)
            rint += r.per_mark[j][i] * ctx.jump_weight[j];
        const double drift =
            eval_driver_with_rint(spec, ctx.t, grid.x(i), ubar[i], grad_u[i], z[i], rint);
        rhs[i] = ubar[i] + ctx.dt * (drift + ctx.beta * grad_z[i]);
    }
    if (ctx.theta < 1.0) {
        const Field a_ubar = apply_diffusion_sampled(grid, ctx.a_mid, ubar);
        const double w = (1.0 - ctx.theta) * ctx.dt;
        for (int i = 1; i + 1 < m; ++i) rhs[i] += w * a_ubar[i];
    }
    rhs[0] = ctx.g_left;
    rhs[m - 1] = ctx.g_right;
    ctx.factor.solve(rhs);
    return rhs;
}

Field terminal_level_field(const ProblemSpec& spec) {
    Field u_terminal = spec.phi;
    // Boundary slots carry the Dirichlet data exactly; validate() has already
    // checked that phi agrees with it up to tolerance.
    u_terminal.front() = spec.boundary(spec.horizon, spec.grid.x(0));
    u_terminal.back() = spec.boundary(spec.horizon, spec.grid.x(spec.grid.num_nodes - 1));
    return u_terminal;
}

} // namespace

SolutionBundle solve_stochastic(const ProblemSpec& spec, const NoiseTree& tree,
                                const SchemeParams& params, const SolveOptions& opts) {
    spec.validate();
    check_params(params);
    if (params.num_steps != tree.num_steps())
        throw ConfigError("solve: scheme has " + std::to_string(params.num_steps) +
                          " steps but the tree has " + std::to_string(tree.num_steps()));
    if (tree.horizon() != spec.horizon)
        throw ConfigError("solve: tree horizon does not match the problem horizon");
    if (!tree.levy().same_as(spec.levy))
        throw ConfigError("solve: tree was built from a different jump model");
    check_ellipticity_or_throw(spec, params, opts);

    const int n_steps = params.num_steps;
    const int branching = tree.branching();
    const double dt = tree.dt();

    SolutionBundle bundle;
    bundle.u.resize(static_cast<std::size_t>(n_steps) + 1);
    bundle.z.resize(static_cast<std::size_t>(n_steps));
    bundle.r.resize(static_cast<std::size_t>(n_steps));

    bundle.u[n_steps].assign(static_cast<std::size_t>(tree.level_size(n_steps)),
                             terminal_level_field(spec));

    for (int k = n_steps - 1; k >= 0; --k) {
        const LevelContext ctx = make_level_context(spec, tree.time_at(k), dt, params.theta);
        const std::int64_t nodes = tree.level_size(k);
        auto& level_u = bundle.u[k];
        auto& level_z = bundle.z[k];
        auto& level_r = bundle.r[k];
        level_u.resize(static_cast<std::size_t>(nodes));
        level_z.resize(static_cast<std::size_t>(nodes));
        level_r.resize(static_cast<std::size_t>(nodes));
        const auto& next = bundle.u[k + 1];

        parallel_for(nodes, opts.threads, [&](std::int64_t begin, std::int64_t end) {
            for (std::int64_t n = begin; n < end; ++n) {
                const std::span<const Field> children(&next[static_cast<std::size_t>(n) * branching],
                                                      static_cast<std::size_t>(branching));
                Field ubar = tree.cond_expect(children);
                Field z = tree.extract_brownian_integrand(children);
                MarkField r = tree.extract_jump_amplitudes(children);
                z.front() = 0.0;
                z.back() = 0.0;
                for (auto& rj : r.per_mark) {
                    rj.front() = 0.0;
                    rj.back() = 0.0;
                }
                Field u = step_node(spec, ctx, ubar, z, r);
                for (double v : u)
                    if (!std::isfinite(v))
                        throw NumericError("solve: non-finite value at level " +
                                           std::to_string(k) + ", node " + std::to_string(n));
                level_u[static_cast<std::size_t>(n)] = std::move(u);
                level_z[static_cast<std::size_t>(n)] = std::move(z);
                level_r[static_cast<std::size_t>(n)] = std::move(r);
            }
        });
    }
    return bundle;
}

std::vector<Field> solve_deterministic(const ProblemSpec& spec, const SchemeParams& params,
                                       const SolveOptions& opts) {
    spec.validate();
    check_params(params);
    check_ellipticity_or_throw(spec, params, opts);

    const int n_steps = params.num_steps;
    const double dt = spec.horizon / n_steps;
    const Field zero_z = make_field(spec.grid, 0.0);
    const MarkField zero_r = MarkField::zeros(spec.grid, spec.levy.num_marks());

    std::vector<Field> trajectory(static_cast<std::size_t>(n_steps) + 1);
    trajectory[n_steps] = terminal_level_field(spec);
    for (int k = n_steps - 1; k >= 0; --k) {
        const LevelContext ctx = make_level_context(spec, k * dt, dt, params.theta);
        trajectory[k] = step_node(spec, ctx, trajectory[k + 1], zero_z, zero_r);
        require_finite(trajectory[k], "deterministic solve");
    }
    return trajectory;
}

double residual_check(const ProblemSpec& spec, const SolutionBundle& bundle,
                      const NoiseTree& tree, const Field& psi, double theta) {
    const Grid& grid = spec.grid;
    require_on_grid(grid, psi, "residual_check");
    if (psi.front() != 0.0 || psi.back() != 0.0)
        throw PreconditionError("residual_check: test function must vanish at the boundary");
    const int n_steps = tree.num_steps();
    if (bundle.num_levels() != n_steps + 1)
        throw ConfigError("residual_check: bundle does not match the tree depth");
    for (int k = 0; k <= n_steps; ++k)
        if (bundle.u[k].size() != static_cast<std::size_t>(tree.level_size(k)))
            throw ConfigError("residual_check: bundle level " + std::to_string(k) +
                              " does not match the tree layout");

    const int branching = tree.branching();
    const double dt = tree.dt();
    const Field grad_psi = gradient(grid, psi);
    const int m = grid.num_nodes;

    // Leaf anchor: deviation of the stored terminal level from phi.
    const double phi_psi = l2_inner(grid, spec.phi, psi);
    std::vector<double> max_acc(bundle.u[n_steps].size());
    std::vector<double> min_acc(bundle.u[n_steps].size());
    for (std::size_t n = 0; n < max_acc.size(); ++n) {
        const double leaf = l2_inner(grid, bundle.u[n_steps][n], psi) - phi_psi;
        max_acc[n] = leaf;
        min_acc[n] = leaf;
    }

    for (int k = n_steps - 1; k >= 0; --k) {
        const LevelContext ctx = make_level_context(spec, tree.time_at(k), dt, theta);
        const std::int64_t nodes = tree.level_size(k);
        std::vector<double> next_max(static_cast<std::size_t>(nodes));
        std::vector<double> next_min(static_cast<std::size_t>(nodes));
        Field b_field(static_cast<std::size_t>(m), 0.0);
        Field u_theta(static_cast<std::size_t>(m), 0.0);
        for (std::int64_t n = 0; n < nodes; ++n) {
            const std::span<const Field> children(
                &bundle.u[k + 1][static_cast<std::size_t>(n) * branching],
                static_cast<std::size_t>(branching));
            const Field ubar = tree.cond_expect(children);
            const Field grad_u = gradient(grid, ubar);
            const Field& z = bundle.z[k][static_cast<std::size_t>(n)];
            const MarkField& r = bundle.r[k][static_cast<std::size_t>(n)];
            const Field& u_here = bundle.u[k][static_cast<std::size_t>(n)];

            for (int i = 1; i + 1 < m; ++i) {
                double rint = 0.0;
                for (std::size_t j = 0; j < ctx.jump_weight.size(); ++j)
                    rint += r.per_mark[j][i] * ctx.jump_weight[j];
                b_field[i] =
                    eval_driver_with_rint(spec, ctx.t, grid.x(i), ubar[i], grad_u[i], z[i], rint);
            }
            for (int i = 0; i < m; ++i)
                u_theta[i] = theta * u_here[i] + (1.0 - theta) * ubar[i];
            const Field a_u_theta = apply_diffusion_sampled(grid, ctx.a_mid, u_theta);

            const double step_defect = l2_inner(grid, u_here, psi) - l2_inner(grid, ubar, psi) -
                                       dt * l2_inner(grid, b_field, psi) -
                                       dt * l2_inner(grid, a_u_theta, psi) +
                                       dt * ctx.beta * l2_inner(grid, z, grad_psi);

            double child_max = max_acc[static_cast<std::size_t>(n) * branching];
            double child_min = min_acc[static_cast<std::size_t>(n) * branching];
            for (int b = 1; b < branching; ++b) {
                child_max = std::max(child_max, max_acc[static_cast<std::size_t>(n) * branching + b]);
                child_min = std::min(child_min, min_acc[static_cast<std::size_t>(n) * branching + b]);
            }
            next_max[static_cast<std::size_t>(n)] = step_defect + child_max;
            next_min[static_cast<std::size_t>(n)] = step_defect + child_min;
        }
        max_acc = std::move(next_max);
        min_acc = std::move(next_min);
    }
    return std::max(std::fabs(max_acc[0]), std::fabs(min_acc[0]));
}

} // namespace bspde
