#include "bspde/solver.hpp"
#include "bspde/rng.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace bspde;
using bspde::testing::heat_spec;
using bspde::testing::jumpy_spec;

namespace {

double max_level_diff(const std::vector<Field>& level, const Field& ref) {
    double worst = 0.0;
    for (const Field& f : level)
        for (std::size_t i = 0; i < f.size(); ++i)
            worst = std::max(worst, std::fabs(f[i] - ref[i]));
    return worst;
}

} // namespace

TEST_CASE("tridiagonal solver: matches dense elimination") {
    CounterRng rng{41};
    for (int trial = 0; trial < 30; ++trial) {
        const int m = static_cast<int>(rng.next_int(3, 12));
        std::vector<double> lower(m - 1), diag(m), upper(m - 1);
        for (int i = 0; i < m - 1; ++i) {
            lower[i] = rng.next_in(-1.0, 1.0);
            upper[i] = rng.next_in(-1.0, 1.0);
        }
        for (int i = 0; i < m; ++i) diag[i] = 3.0 + rng.next_unit(); // dominant
        Field rhs(m);
        for (double& v : rhs) v = rng.next_in(-2.0, 2.0);

        // Dense Gaussian elimination as the oracle.
        std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
        for (int i = 0; i < m; ++i) {
            a[i][i] = diag[i];
            if (i > 0) a[i][i - 1] = lower[i - 1];
            if (i + 1 < m) a[i][i + 1] = upper[i];
            a[i][m] = rhs[i];
        }
        for (int col = 0; col < m; ++col)
            for (int row = col + 1; row < m; ++row) {
                const double f = a[row][col] / a[col][col];
                for (int k = col; k <= m; ++k) a[row][k] -= f * a[col][k];
            }
        std::vector<double> expect(m);
        for (int i = m - 1; i >= 0; --i) {
            double s = a[i][m];
            for (int k = i + 1; k < m; ++k) s -= a[i][k] * expect[k];
            expect[i] = s / a[i][i];
        }

        TridiagFactor factor(lower, diag, upper);
        factor.solve(rhs);
        for (int i = 0; i < m; ++i)
            CHECK(rhs[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
}

TEST_CASE("solver: zero data gives the zero solution everywhere") {
    ProblemSpec spec = jumpy_spec(21);
    spec.phi = make_field(spec.grid, 0.0);

    SchemeParams params;
    params.num_steps = 4;
    const NoiseTree tree = NoiseTree::build(4, spec.horizon, spec.levy);
    const SolutionBundle bundle = solve_stochastic(spec, tree, params);
    for (int k = 0; k < bundle.num_levels(); ++k)
        for (const Field& f : bundle.u[k])
            for (double v : f) CHECK(v == 0.0);
    for (const auto& level : bundle.z)
        for (const Field& f : level)
            for (double v : f) CHECK(v == 0.0);

    const auto traj = solve_deterministic(spec, params);
    for (const Field& f : traj)
        for (double v : f) CHECK(v == 0.0);
}

TEST_CASE("solver: deterministic data collapses the tree") {
    // Driver blind to (Z, r): every node of a level carries one field and the
    // martingale components vanish identically.
    ProblemSpec spec = jumpy_spec(21);
    std::get<LinearDriver>(spec.driver).c_u = 0.8;
    std::get<LinearDriver>(spec.driver).c0 = CoefficientField::from_expression("0.2*sin(x)");

    SchemeParams params;
    params.num_steps = 5;
    const NoiseTree tree = NoiseTree::build(5, spec.horizon, spec.levy);
    const SolutionBundle bundle = solve_stochastic(spec, tree, params);
    for (int k = 0; k <= 5; ++k) {
        const Field& first = bundle.u[k][0];
        CHECK(max_level_diff(bundle.u[k], first) <= 1e-12);
    }
    for (const auto& level : bundle.z)
        for (const Field& f : level)
            for (double v : f) CHECK(v == 0.0);
    for (const auto& level : bundle.r)
        for (const MarkField& mf : level)
            for (const Field& f : mf.per_mark)
                for (double v : f) CHECK(v == 0.0);
}

TEST_CASE("solver: oracle equivalence of the stochastic and deterministic paths") {
    ProblemSpec spec = jumpy_spec(21);
    std::get<LinearDriver>(spec.driver).c_u = -0.4;

    SchemeParams params;
    params.num_steps = 8;
    const NoiseTree tree = NoiseTree::build(8, spec.horizon, spec.levy);
    const SolutionBundle bundle = solve_stochastic(spec, tree, params);
    const auto traj = solve_deterministic(spec, params);
    for (int k = 0; k <= 8; ++k)
        CHECK(max_level_diff(bundle.u[k], traj[k]) <= 1e-10);
}

TEST_CASE("solver: heat benchmark against the separated solution") {
    const ProblemSpec spec = heat_spec(101);
    SchemeParams params;
    params.num_steps = 64;
    const auto traj = solve_deterministic(spec, params);
    double worst = 0.0;
    for (int i = 0; i < spec.grid.num_nodes; ++i)
        worst = std::max(worst,
                         std::fabs(traj[0][i] - std::exp(-1.0) * std::sin(spec.grid.x(i))));
    CHECK(worst <= 0.02);

    // Stochastic route on a small two-branch tree hits the same solution.
    SchemeParams p10;
    p10.num_steps = 10;
    const NoiseTree tree = NoiseTree::build(10, spec.horizon, spec.levy);
    const SolutionBundle bundle = solve_stochastic(spec, tree, p10);
    double worst10 = 0.0;
    for (int i = 0; i < spec.grid.num_nodes; ++i)
        worst10 = std::max(worst10, std::fabs(bundle.u[0][0][i] -
                                              std::exp(-1.0) * std::sin(spec.grid.x(i))));
    CHECK(worst10 <= 0.02);
}

TEST_CASE("solver: reaction exactly cancels diffusion for the sine mode") {
    ProblemSpec spec = heat_spec(101);
    std::get<LinearDriver>(spec.driver).c_u = 1.0;
    SchemeParams params;
    params.num_steps = 64;
    const auto traj = solve_deterministic(spec, params);
    double worst = 0.0;
    for (int i = 0; i < spec.grid.num_nodes; ++i)
        worst = std::max(worst, std::fabs(traj[0][i] - std::sin(spec.grid.x(i))));
    CHECK(worst <= 0.02);
}

TEST_CASE("solver: constants are preserved when the boundary matches") {
    ProblemSpec spec = jumpy_spec(21);
    spec.a_diff = CoefficientField::from_expression("0.6 + 0.2*cos(x)");
    spec.phi = make_field(spec.grid, 5.0);
    spec.boundary = CoefficientField::constant(5.0);

    SchemeParams params;
    params.num_steps = 6;
    const NoiseTree tree = NoiseTree::build(6, spec.horizon, spec.levy);
    const SolutionBundle bundle = solve_stochastic(spec, tree, params);
    for (int k = 0; k <= 6; ++k)
        for (const Field& f : bundle.u[k])
            for (double v : f) CHECK(std::fabs(v - 5.0) <= 1e-12);
    for (const auto& level : bundle.z)
        for (const Field& f : level)
            for (double v : f) CHECK(std::fabs(v) <= 1e-12);
}

TEST_CASE("solver: boundary rows carry the Dirichlet data at every level") {
    ProblemSpec spec = heat_spec(41);
    spec.grid = make_grid(0.0, 1.0, 41);
    spec.boundary = CoefficientField::from_expression("t*x");
    spec.phi = make_field(spec.grid);
    for (int i = 0; i < 41; ++i) spec.phi[i] = spec.grid.x(i) * spec.grid.x(i); // matches t*x at T=1
    SchemeParams params;
    params.num_steps = 8;
    const auto traj = solve_deterministic(spec, params);
    const double dt = spec.horizon / 8;
    for (int k = 0; k <= 8; ++k) {
        CHECK(traj[k][0] == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(traj[k][40] == doctest::Approx(k * dt).epsilon(1e-13));
    }
}

TEST_CASE("solver: scheme-level ordering for monotone drivers") {
    // theta = 1, (Z,r)-blind linear driver with dt|c_u| < 1, ordered terminal
    // and boundary data: ordering holds to rounding at every node.
    CounterRng rng{53};
    for (int trial = 0; trial < 5; ++trial) {
        ProblemSpec spec1 = jumpy_spec(21);
        std::get<LinearDriver>(spec1.driver).c_u = rng.next_in(-0.9, 0.9);
        ProblemSpec spec2 = spec1;
        Field bump = make_field(spec1.grid);
        for (int i = 0; i < spec1.grid.num_nodes; ++i) {
            const double x = spec1.grid.x(i);
            bump[i] = rng.next_in(0.0, 0.5) * std::sin(x) * std::sin(x);
        }
        for (int i = 0; i < spec1.grid.num_nodes; ++i) spec2.phi[i] += bump[i];

        SchemeParams params;
        params.num_steps = 6;
        const NoiseTree tree = NoiseTree::build(6, spec1.horizon, spec1.levy);
        const SolutionBundle b1 = solve_stochastic(spec1, tree, params);
        const SolutionBundle b2 = solve_stochastic(spec2, tree, params);
        for (int k = 0; k <= 6; ++k)
            for (std::size_t n = 0; n < b1.u[k].size(); ++n)
                for (int i = 0; i < spec1.grid.num_nodes; ++i)
                    CHECK(b1.u[k][n][i] <= b2.u[k][n][i] + 1e-12);
    }
}

TEST_CASE("solver: refuses to run when the ellipticity check fails") {
    ProblemSpec spec = heat_spec(41);
    spec.beta = TimeFunction::constant(1.0); // threshold 1/(2*0.5) + 0.05 > 1
    SchemeParams params;
    params.num_steps = 4;
    CHECK_THROWS_AS(solve_deterministic(spec, params), PreconditionError);

    SolveOptions forced;
    forced.force_unchecked = true;
    CHECK_NOTHROW(solve_deterministic(spec, params, forced));
}

TEST_CASE("solver: thread count does not change the bits") {
    ProblemSpec spec = jumpy_spec(21, 0.5, 0.4, 0.3, 1.0);
    spec.driver = ConcaveDriver{CoefficientField::constant(0.05), 0.6};
    SchemeParams params;
    params.num_steps = 6;
    const NoiseTree tree = NoiseTree::build(6, spec.horizon, spec.levy);

    SolveOptions one;
    one.threads = 1;
    SolveOptions many;
    many.threads = 4;
    const SolutionBundle a = solve_stochastic(spec, tree, params, one);
    const SolutionBundle b = solve_stochastic(spec, tree, params, many);
    for (int k = 0; k <= 6; ++k)
        for (std::size_t n = 0; n < a.u[k].size(); ++n)
            for (int i = 0; i < spec.grid.num_nodes; ++i)
                CHECK(a.u[k][n][i] == b.u[k][n][i]); // bitwise
}

TEST_CASE("residual check: scheme identity and detector sensitivity") {
    const ProblemSpec zero = [] {
        ProblemSpec s = heat_spec(31);
        s.phi = make_field(s.grid, 0.0);
        return s;
    }();
    SchemeParams params;
    params.num_steps = 6;
    const NoiseTree tree0 = NoiseTree::build(6, zero.horizon, zero.levy);
    const SolutionBundle empty = solve_stochastic(zero, tree0, params);
    Field psi = make_field(zero.grid, 0.0);
    psi[15] = 1.0;
    CHECK(residual_check(zero, empty, tree0, psi) == 0.0);

    // Heat run: the telescoped weak form closes to rounding.
    const ProblemSpec spec = heat_spec(101);
    SchemeParams p8;
    p8.num_steps = 8;
    const NoiseTree tree = NoiseTree::build(8, spec.horizon, spec.levy);
    const SolutionBundle bundle = solve_stochastic(spec, tree, p8);
    Field hat = make_field(spec.grid, 0.0);
    hat[50] = 1.0;
    CHECK(residual_check(spec, bundle, tree, hat) <= 1e-8);

    // Corruption is detected: one interior value moved by 1e-3.
    SolutionBundle corrupted = bundle;
    corrupted.u[4][1][50] += 1e-3;
    double scale = 0.0;
    for (const auto& level : bundle.u)
        for (const Field& f : level) scale = std::max(scale, max_abs(f));
    CHECK(residual_check(spec, corrupted, tree, hat) >= 1e-4 * scale);

    // Test function must vanish at the boundary.
    Field bad = make_field(spec.grid, 0.0);
    bad[0] = 0.1;
    CHECK_THROWS_AS(residual_check(spec, bundle, tree, bad), PreconditionError);
}

TEST_CASE("residual check: closes with jumps, drift transport and concave driver active") {
    ProblemSpec spec = jumpy_spec(41, 0.5, 0.6, 0.3, 1.0);
    spec.driver = ConcaveDriver{CoefficientField::from_expression("0.1*sin(x)"), 0.8};
    spec.beta = TimeFunction::constant(0.5); // a = 1 >= 0.25/(2*0.5) + delta1
    SchemeParams params;
    params.num_steps = 5;
    const NoiseTree tree = NoiseTree::build(5, spec.horizon, spec.levy);
    const SolutionBundle bundle = solve_stochastic(spec, tree, params);
    Field psi = make_field(spec.grid, 0.0);
    for (int i = 1; i + 1 < spec.grid.num_nodes; ++i) psi[i] = std::sin(spec.grid.x(i));
    CHECK(residual_check(spec, bundle, tree, psi) <= 1e-8);
}

TEST_CASE("solver: first-order time convergence on the heat benchmark") {
    const ProblemSpec spec = heat_spec(101);
    auto error_at = [&](int steps) {
        SchemeParams params;
        params.num_steps = steps;
        const auto traj = solve_deterministic(spec, params);
        double worst = 0.0;
        for (int i = 0; i < spec.grid.num_nodes; ++i)
            worst = std::max(worst,
                             std::fabs(traj[0][i] - std::exp(-1.0) * std::sin(spec.grid.x(i))));
        return worst;
    };
    const double e16 = error_at(16), e32 = error_at(32), e64 = error_at(64),
                 e128 = error_at(128);
    CHECK(e16 / e32 >= 1.7);
    CHECK(e16 / e32 <= 2.3);
    CHECK(e32 / e64 >= 1.7);
    CHECK(e32 / e64 <= 2.3);
    CHECK(e64 / e128 >= 1.7);
    CHECK(e64 / e128 <= 2.3);
}
