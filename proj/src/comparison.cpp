#include "bspde/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bspde {

namespace {

void require_comparable(const ProblemSpec& spec1, const ProblemSpec& spec2,
                        const NoiseTree& tree) {
    if (!spec1.grid.same_as(spec2.grid))
        throw ConfigError("comparison: the two problems must share one grid");
    if (spec1.horizon != spec2.horizon)
        throw ConfigError("comparison: the two problems must share one horizon");
    if (!spec1.levy.same_as(spec2.levy))
        throw ConfigError("comparison: the two problems must share one jump model");
    if (!tree.levy().same_as(spec1.levy) || tree.horizon() != spec1.horizon)
        throw ConfigError("comparison: tree does not match the problems");
}

std::vector<double> level_times(const NoiseTree& tree) {
    std::vector<double> ts(static_cast<std::size_t>(tree.num_steps()) + 1);
    for (int k = 0; k <= tree.num_steps(); ++k) ts[k] = tree.time_at(k);
    return ts;
}

} // namespace

HypothesisReport verify_hypotheses(const ProblemSpec& spec1, const ProblemSpec& spec2,
                                   const SolutionBundle& bundle1, const NoiseTree& tree,
                                   std::uint64_t seed) {
    require_comparable(spec1, spec2, tree);
    if (bundle1.num_levels() != tree.num_steps() + 1)
        throw ConfigError("comparison: bundle does not match the tree");

    HypothesisReport report;
    const Grid& grid = spec1.grid;
    const int m = grid.num_nodes;

    double terminal_gap = spec1.phi[0] - spec2.phi[0];
    for (int i = 1; i < m; ++i)
        terminal_gap = std::max(terminal_gap, spec1.phi[i] - spec2.phi[i]);
    report.terminal_worst_gap = terminal_gap;
    report.terminal_ordered = terminal_gap <= 0.0;

    // Driver dominance along solution 1: both drivers see exactly the data
    // the scheme fed to problem 1 (conditional mean, its gradient, Z, r).
    const int n_steps = tree.num_steps();
    const int branching = tree.branching();
    bool first = true;
    double worst = 0.0;
    for (int k = 0; k < n_steps; ++k) {
        const double t = tree.time_at(k);
        std::vector<double> w1(static_cast<std::size_t>(spec1.levy.num_marks()));
        std::vector<double> w2(static_cast<std::size_t>(spec2.levy.num_marks()));
        for (int j = 0; j < spec1.levy.num_marks(); ++j) {
            w1[j] = spec1.lambda(t, j) * spec1.levy.intensities[j];
            w2[j] = spec2.lambda(t, j) * spec2.levy.intensities[j];
        }
        for (std::int64_t n = 0; n < tree.level_size(k); ++n) {
            const std::span<const Field> children(
                &bundle1.u[k + 1][static_cast<std::size_t>(n) * branching],
                static_cast<std::size_t>(branching));
            const Field ubar = tree.cond_expect(children);
            const Field grad_u = gradient(grid, ubar);
            const Field& z = bundle1.z[k][static_cast<std::size_t>(n)];
            const MarkField& r = bundle1.r[k][static_cast<std::size_t>(n)];
            for (int i = 1; i + 1 < m; ++i) {
                double rint1 = 0.0, rint2 = 0.0;
                for (std::size_t j = 0; j < w1.size(); ++j) {
                    rint1 += r.per_mark[j][i] * w1[j];
                    rint2 += r.per_mark[j][i] * w2[j];
                }
                const double b1 =
                    eval_driver_with_rint(spec1, t, grid.x(i), ubar[i], grad_u[i], z[i], rint1);
                const double b2 =
                    eval_driver_with_rint(spec2, t, grid.x(i), ubar[i], grad_u[i], z[i], rint2);
                const double gap = b1 - b2;
                if (first || gap > worst) {
                    worst = gap;
                    first = false;
                }
            }
        }
    }
    report.driver_worst_gap = worst;
    report.driver_dominated = worst <= 0.0;

    const auto ts = level_times(tree);
    std::vector<double> xs;
    for (int i = 0; i < m; ++i) {
        xs.push_back(grid.x(i));
        if (i + 1 < m) xs.push_back(grid.midpoint(i));
    }
    report.ellipticity = check_ellipticity(spec2, ts, xs);
    report.lipschitz = estimate_lipschitz(spec2, 500, seed);
    report.jump_bound = check_jump_bound(spec2, 2000, seed);
    return report;
}

bool monotone_scheme_pair(const ProblemSpec& spec1, const ProblemSpec& spec2,
                          const SchemeParams& params) {
    if (params.theta != 1.0) return false;
    const double dt = spec1.horizon / params.num_steps;
    std::vector<double> ts;
    for (int k = 0; k <= params.num_steps; ++k) ts.push_back(k * dt);
    for (const ProblemSpec* spec : {&spec1, &spec2}) {
        const auto* lin = std::get_if<LinearDriver>(&spec->driver);
        if (!lin) return false;
        if (lin->c_v != 0.0 || lin->c_Z != 0.0) return false;
        if (dt * std::fabs(lin->c_u) >= 1.0) return false;
        if (jump_term_active(*spec, ts)) return false;
    }
    return true;
}

ComparisonReport run_comparison(const ProblemSpec& spec1, const ProblemSpec& spec2,
                                const NoiseTree& tree, const SchemeParams& params,
                                const SolveOptions& opts, std::uint64_t seed) {
    require_comparable(spec1, spec2, tree);
    const SolutionBundle bundle1 = solve_stochastic(spec1, tree, params, opts);
    const SolutionBundle bundle2 = solve_stochastic(spec2, tree, params, opts);

    ComparisonReport report;
    report.hypotheses = verify_hypotheses(spec1, spec2, bundle1, tree, seed);

    const Grid& grid = spec1.grid;
    const int n_steps = tree.num_steps();
    report.level_worst_positive_part.assign(static_cast<std::size_t>(n_steps) + 1, 0.0);
    report.level_expected_defect.assign(static_cast<std::size_t>(n_steps) + 1, 0.0);

    double scale = 1.0;
    Field diff = make_field(grid, 0.0);
    for (int k = 0; k <= n_steps; ++k) {
        double worst = 0.0;
        double defect = 0.0;
        for (std::int64_t n = 0; n < tree.level_size(k); ++n) {
            const Field& u1 = bundle1.u[k][static_cast<std::size_t>(n)];
            const Field& u2 = bundle2.u[k][static_cast<std::size_t>(n)];
            scale = std::max({scale, max_abs(u1), max_abs(u2)});
            for (int i = 0; i < grid.num_nodes; ++i) diff[i] = u1[i] - u2[i];
            worst = std::max(worst, max_positive_part(diff));
            defect += tree.path_prob(k, n) * positive_part_defect(grid, diff);
        }
        report.level_worst_positive_part[k] = worst;
        report.level_expected_defect[k] = defect;
    }
    report.worst_positive_part =
        *std::max_element(report.level_worst_positive_part.begin(),
                          report.level_worst_positive_part.end());
    report.defect_t0 = report.level_expected_defect[0];
    report.scale = scale;
    report.monotone_tier = monotone_scheme_pair(spec1, spec2, params);
    report.tolerance = report.monotone_tier ? kMonotoneTierTolerance
                                            : kGeneralTierFactor * report.scale;

    if (!report.hypotheses.all_pass()) {
        report.verdict = Verdict::Void;
    } else if (report.worst_positive_part <= report.tolerance) {
        report.verdict = Verdict::Pass;
    } else {
        report.verdict = Verdict::Fail;
    }
    return report;
}

} // namespace bspde
