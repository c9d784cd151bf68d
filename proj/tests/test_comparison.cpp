#include "bspde/comparison.hpp"
#include "bspde/rng.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace bspde;
using bspde::testing::heat_spec;
using bspde::testing::jumpy_spec;

namespace {

ProblemSpec with_bumped_terminal(const ProblemSpec& spec, double amplitude) {
    ProblemSpec out = spec;
    for (int i = 0; i < spec.grid.num_nodes; ++i) {
        const double x = spec.grid.x(i);
        out.phi[i] += amplitude * x * (std::numbers::pi - x);
    }
    return out;
}

} // namespace

TEST_CASE("comparison: identical problems pass with zero gaps") {
    const ProblemSpec spec = jumpy_spec(21);
    SchemeParams params;
    params.num_steps = 4;
    const NoiseTree tree = NoiseTree::build(4, spec.horizon, spec.levy);
    const ComparisonReport rep = run_comparison(spec, spec, tree, params);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.hypotheses.terminal_worst_gap == 0.0);
    CHECK(rep.hypotheses.driver_worst_gap == 0.0);
    CHECK(rep.worst_positive_part == 0.0);
    CHECK(rep.defect_t0 == 0.0);
}

TEST_CASE("comparison: ordered terminals give an ordered pair on the monotone tier") {
    const ProblemSpec spec1 = jumpy_spec(41);
    const ProblemSpec spec2 = with_bumped_terminal(spec1, 0.1);
    SchemeParams params;
    params.num_steps = 6;
    const NoiseTree tree = NoiseTree::build(6, spec1.horizon, spec1.levy);

    const SolutionBundle b1 = solve_stochastic(spec1, tree, params);
    const HypothesisReport hyp = verify_hypotheses(spec1, spec2, b1, tree);
    CHECK(hyp.terminal_ordered);
    // Worst gap is -0.1 * max x(pi - x) over grid nodes; the midpoint node
    // realizes the continuum maximum (pi/2)^2 exactly.
    CHECK(hyp.terminal_worst_gap ==
          doctest::Approx(-0.1 * std::pow(std::numbers::pi / 2.0, 2)).epsilon(1e-12));
    CHECK(hyp.driver_dominated);
    CHECK(hyp.ellipticity.pass);
    CHECK(hyp.jump_bound.pass);

    const ComparisonReport rep = run_comparison(spec1, spec2, tree, params);
    CHECK(rep.monotone_tier);
    CHECK(rep.tolerance == kMonotoneTierTolerance);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.worst_positive_part <= 1e-10);
    CHECK(rep.defect_t0 <= 1e-20);
}

TEST_CASE("comparison: dominance failure voids the verdict") {
    // b1 = 0.1 > b2 = 0: the driver hypothesis fails, ordering is not judged.
    ProblemSpec spec1 = jumpy_spec(21);
    std::get<LinearDriver>(spec1.driver).c0 = CoefficientField::constant(0.1);
    const ProblemSpec spec2 = jumpy_spec(21);
    SchemeParams params;
    params.num_steps = 4;
    const NoiseTree tree = NoiseTree::build(4, spec1.horizon, spec1.levy);
    const ComparisonReport rep = run_comparison(spec1, spec2, tree, params);
    CHECK_FALSE(rep.hypotheses.driver_dominated);
    CHECK(rep.hypotheses.driver_worst_gap == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(rep.verdict == Verdict::Void);
}

TEST_CASE("comparison: misordered terminals void the verdict") {
    const ProblemSpec spec1 = jumpy_spec(21);
    ProblemSpec spec2 = spec1;
    spec2.phi[10] -= 0.05; // phi1 > phi2 somewhere
    SchemeParams params;
    params.num_steps = 4;
    const NoiseTree tree = NoiseTree::build(4, spec1.horizon, spec1.levy);
    const ComparisonReport rep = run_comparison(spec1, spec2, tree, params);
    CHECK_FALSE(rep.hypotheses.terminal_ordered);
    CHECK(rep.verdict == Verdict::Void);
}

TEST_CASE("comparison: general tier with active jumps and concave drivers") {
    ProblemSpec spec1 = jumpy_spec(41, 0.5, 0.4, 0.3, 1.0);
    spec1.driver = ConcaveDriver{CoefficientField::constant(0.0), 0.7};
    ProblemSpec spec2 = with_bumped_terminal(spec1, 0.08);
    std::get<ConcaveDriver>(spec2.driver).c0 = CoefficientField::constant(0.05); // b1 <= b2

    SchemeParams params;
    params.num_steps = 6;
    const NoiseTree tree = NoiseTree::build(6, spec1.horizon, spec1.levy);
    const ComparisonReport rep = run_comparison(spec1, spec2, tree, params);
    CHECK_FALSE(rep.monotone_tier);
    CHECK(rep.tolerance == kGeneralTierFactor * rep.scale);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.defect_t0 <= rep.tolerance * rep.tolerance);
}

TEST_CASE("comparison: swapped pair flips the conclusion") {
    const ProblemSpec spec1 = jumpy_spec(21);
    const ProblemSpec spec2 = with_bumped_terminal(spec1, 0.1);
    SchemeParams params;
    params.num_steps = 4;
    const NoiseTree tree = NoiseTree::build(4, spec1.horizon, spec1.levy);

    const ComparisonReport forward = run_comparison(spec1, spec2, tree, params);
    const ComparisonReport swapped = run_comparison(spec2, spec1, tree, params);
    CHECK(forward.verdict == Verdict::Pass);
    CHECK(forward.worst_positive_part <= 1e-12);
    // Reversed hypotheses fail, and the positive part now shows the true gap.
    CHECK(swapped.verdict == Verdict::Void);
    CHECK(swapped.hypotheses.terminal_worst_gap ==
          doctest::Approx(0.1 * std::pow(std::numbers::pi / 2.0, 2)).epsilon(1e-12));
    CHECK(swapped.worst_positive_part >=
          0.9 * 0.1 * std::exp(-1.0) * std::pow(std::numbers::pi / 2.0, 2) * 0.1);
}

TEST_CASE("comparison: expected defect does not grow backward in time on passing runs") {
    const ProblemSpec spec1 = jumpy_spec(21);
    const ProblemSpec spec2 = with_bumped_terminal(spec1, 0.05);
    SchemeParams params;
    params.num_steps = 5;
    const NoiseTree tree = NoiseTree::build(5, spec1.horizon, spec1.levy);
    const ComparisonReport rep = run_comparison(spec1, spec2, tree, params);
    CHECK(rep.verdict == Verdict::Pass);
    const double tol = rep.tolerance * rep.tolerance;
    CHECK(rep.level_expected_defect.front() <= rep.level_expected_defect.back() + tol);
}

TEST_CASE("comparison: coarse-mesh transport violation is detected, not hidden") {
    // Both drivers carry a strong gradient term; the scheme is not monotone
    // for it, and a spiky ordered terminal produces a discrete ordering
    // violation above the general tier. Hypotheses hold, so the verdict is a
    // detector-grade fail.
    ProblemSpec spec1 = jumpy_spec(41);
    spec1.grid = make_grid(0.0, 1.0, 41);
    spec1.phi = make_field(spec1.grid, 0.0);
    std::get<LinearDriver>(spec1.driver).c_v = 30.0;
    spec1.horizon = 0.5;
    ProblemSpec spec2 = spec1;
    spec2.phi[20] = 1.0; // tall thin nonnegative bump

    SchemeParams params;
    params.num_steps = 4;
    const NoiseTree tree = NoiseTree::build(4, spec1.horizon, spec1.levy);
    const ComparisonReport rep = run_comparison(spec1, spec2, tree, params);
    CHECK(rep.hypotheses.all_pass());
    CHECK_FALSE(rep.monotone_tier);
    CHECK(rep.verdict == Verdict::Fail);
    CHECK(rep.worst_positive_part > rep.tolerance);
}

TEST_CASE("comparison: mismatched discretizations are rejected") {
    const ProblemSpec spec1 = jumpy_spec(21);
    ProblemSpec spec2 = jumpy_spec(31);
    SchemeParams params;
    params.num_steps = 4;
    const NoiseTree tree = NoiseTree::build(4, spec1.horizon, spec1.levy);
    CHECK_THROWS_AS(run_comparison(spec1, spec2, tree, params), ConfigError);

    ProblemSpec spec3 = jumpy_spec(21, 0.7); // different mark
    CHECK_THROWS_AS(run_comparison(spec1, spec3, tree, params), ConfigError);
}
