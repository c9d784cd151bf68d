#include "bspde/risk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bspde {

namespace {

void require_u_independent(const ProblemSpec& spec) {
    if (driver_uses_u(spec.driver))
        throw PreconditionError(
            "risk measure: the driver must not depend on u (set c_u = 0 or drop u from the "
            "expression)");
}

ProblemSpec with_terminal(const ProblemSpec& spec, const Field& phi) {
    ProblemSpec out = spec;
    out.phi = phi;
    return out;
}

} // namespace

Field rho(const ProblemSpec& spec, const Field& phi, const NoiseTree& tree,
          const SchemeParams& params, const SolveOptions& opts) {
    require_u_independent(spec);
    const SolutionBundle bundle = solve_stochastic(with_terminal(spec, phi), tree, params, opts);
    Field out = bundle.u[0][0];
    for (double& v : out) v = -v;
    return out;
}

MonotonicityReport test_monotonicity(const ProblemSpec& spec, const Field& phi1,
                                     const Field& phi2, const NoiseTree& tree,
                                     const SchemeParams& params, const SolveOptions& opts) {
    require_u_independent(spec);
    require_on_grid(spec.grid, phi1, "test_monotonicity");
    require_on_grid(spec.grid, phi2, "test_monotonicity");
    for (int i = 0; i < spec.grid.num_nodes; ++i)
        if (phi1[i] > phi2[i])
            throw PreconditionError("test_monotonicity: terminal fields must satisfy phi1 <= "
                                    "phi2 at every node");

    MonotonicityReport report;
    report.comparison =
        run_comparison(with_terminal(spec, phi1), with_terminal(spec, phi2), tree, params, opts);
    // rho(phi1) >= rho(phi2) - tol is exactly u1(0) <= u2(0) + tol.
    report.worst_violation = report.comparison.level_worst_positive_part[0];
    report.tolerance = report.comparison.tolerance;
    report.pass = report.comparison.verdict == Verdict::Pass;
    return report;
}

ConvexityReport test_convexity(const ProblemSpec& spec, const Field& phi1, const Field& phi2,
                               std::span<const double> lambdas, const NoiseTree& tree,
                               const SchemeParams& params, const SolveOptions& opts) {
    require_u_independent(spec);
    require_on_grid(spec.grid, phi1, "test_convexity");
    require_on_grid(spec.grid, phi2, "test_convexity");
    if (std::holds_alternative<ExpressionDriver>(spec.driver))
        throw PreconditionError(
            "test_convexity: driver concavity in (Z, r) cannot be established for expression "
            "drivers; use the linear or concave family");

    ConvexityReport report;
    report.affine = std::holds_alternative<LinearDriver>(spec.driver);
    report.lambdas.assign(lambdas.begin(), lambdas.end());

    const Field rho1 = rho(spec, phi1, tree, params, opts);
    const Field rho2 = rho(spec, phi2, tree, params, opts);
    double scale = 1.0;
    scale = std::max({scale, max_abs(rho1), max_abs(rho2)});

    const int m = spec.grid.num_nodes;
    Field blend = make_field(spec.grid, 0.0);
    for (double lam : lambdas) {
        if (lam < 0.0 || lam > 1.0)
            throw PreconditionError("test_convexity: lambda grid must lie in [0,1]");
        for (int i = 0; i < m; ++i) blend[i] = lam * phi1[i] + (1.0 - lam) * phi2[i];
        const Field rho_blend = rho(spec, blend, tree, params, opts);
        double viol = 0.0, gap = 0.0;
        for (int i = 0; i < m; ++i) {
            const double combo = lam * rho1[i] + (1.0 - lam) * rho2[i];
            viol = std::max(viol, rho_blend[i] - combo);
            gap = std::max(gap, std::fabs(rho_blend[i] - combo));
        }
        report.per_lambda_violation.push_back(viol);
        report.worst_violation = std::max(report.worst_violation, viol);
        report.worst_equality_gap = std::max(report.worst_equality_gap, gap);
    }
    report.tolerance = report.affine ? kMonotoneTierTolerance : kGeneralTierFactor * scale;
    report.pass = report.affine ? report.worst_equality_gap <= report.tolerance
                                : report.worst_violation <= report.tolerance;
    return report;
}

TranslationReport test_translation(const ProblemSpec& spec, const Field& phi, double shift,
                                   const NoiseTree& tree, const SchemeParams& params,
                                   const SolveOptions& opts) {
    require_u_independent(spec);
    require_on_grid(spec.grid, phi, "test_translation");

    const Field base = rho(spec, phi, tree, params, opts);

    ProblemSpec shifted = spec;
    const CoefficientField g = spec.boundary;
    shifted.boundary = CoefficientField::from_function(
        [g, shift](double t, double x) { return g(t, x) + shift; },
        "(" + g.source() + ")+(" + format_g17(shift) + ")");
    Field phi_shifted = phi;
    for (double& v : phi_shifted) v += shift;

    const Field moved = rho(shifted, phi_shifted, tree, params, opts);

    TranslationReport report;
    report.shift = shift;
    double scale = std::max(1.0, max_abs(base));
    scale = std::max(scale, std::fabs(shift));
    for (std::size_t i = 0; i < base.size(); ++i)
        report.worst_gap = std::max(report.worst_gap, std::fabs(moved[i] - (base[i] - shift)));
    report.tolerance = 1e-10 * scale;
    report.pass = report.worst_gap <= report.tolerance;
    return report;
}

} // namespace bspde
