#include "bspde/levy.hpp"
#include "bspde/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace bspde;

TEST_CASE("levy model: construction invariants") {
    CHECK(make_levy_model({}, {}).num_marks() == 0);
    const LevyModel m = make_levy_model({-1.0, 0.5}, {0.2, 0.4});
    CHECK(m.total_intensity() == doctest::Approx(0.6).epsilon(1e-15));

    CHECK_THROWS_AS(make_levy_model({0.0}, {1.0}), ConfigError);        // zero mark
    CHECK_THROWS_AS(make_levy_model({1.0, 1.0}, {1.0, 1.0}), ConfigError); // duplicate
    CHECK_THROWS_AS(make_levy_model({1.0}, {-0.1}), ConfigError);       // negative intensity
    CHECK_THROWS_AS(make_levy_model({1.0, 2.0}, {1.0}), ConfigError);   // length mismatch
}

TEST_CASE("lambda bound check: worked envelope cases") {
    const std::vector<double> ts = {0.0, 0.5, 1.0};

    {
        const LevyModel m = make_levy_model({0.5, 2.0}, {1.0, 1.0});
        const auto rep = check_lambda_bound(m, LambdaWeight::zero(2), ts);
        CHECK(rep.pass);
        CHECK(rep.worst_ratio == 0.0);
    }
    {
        // 0.5 <= 1 * min(1, 0.5): boundary of the envelope still passes.
        const LevyModel m = make_levy_model({0.5}, {1.0});
        const auto rep = check_lambda_bound(m, LambdaWeight::constants({0.5}, 1.0), ts);
        CHECK(rep.pass);
        CHECK(rep.worst_ratio == doctest::Approx(1.0).epsilon(1e-15));
    }
    {
        // 1.5 > 1 * min(1, 2) = 1: fails with ratio 1.5.
        const LevyModel m = make_levy_model({2.0}, {1.0});
        const auto rep = check_lambda_bound(m, LambdaWeight::constants({1.5}, 1.0), ts);
        CHECK_FALSE(rep.pass);
        CHECK(rep.worst_ratio == doctest::Approx(1.5).epsilon(1e-15));
        CHECK(rep.worst_mark == 0);
    }
    {
        // Negative weights violate the lower bound regardless of the envelope.
        const LevyModel m = make_levy_model({0.5}, {1.0});
        const auto rep = check_lambda_bound(m, LambdaWeight::constants({-0.1}, 1.0), ts);
        CHECK_FALSE(rep.pass);
    }
    CHECK_THROWS_AS(
        check_lambda_bound(make_levy_model({0.5}, {1.0}), LambdaWeight::zero(1), {}),
        PreconditionError);
}

TEST_CASE("jump integral: worked values") {
    const Grid g = make_grid(0.0, 1.0, 11);

    {
        const LevyModel m = make_levy_model({-1.0, 0.5}, {0.2, 0.4});
        const auto w = LambdaWeight::constants({0.5, 0.3}, 1.0);
        MarkField r;
        r.per_mark = {make_field(g, 1.0), make_field(g, 2.0)};
        const Field out = jump_integral(g, m, w, r, 0.0);
        // 1*0.5*0.2 + 2*0.3*0.4 = 0.34
        for (double v : out) CHECK(v == doctest::Approx(0.34).epsilon(1e-15));
    }
    {
        const LevyModel m = make_levy_model({-1.0}, {1.0});
        const auto w = LambdaWeight::constants({1.0}, 2.0);
        MarkField r;
        Field f = make_field(g);
        for (int i = 0; i < g.num_nodes; ++i) f[i] = std::sin(3.0 * g.x(i));
        r.per_mark = {f};
        const Field out = jump_integral(g, m, w, r, 0.7);
        for (int i = 0; i < g.num_nodes; ++i) CHECK(out[i] == f[i]); // identity weights
    }
    {
        const LevyModel m = make_levy_model({0.5}, {2.0});
        MarkField r;
        r.per_mark = {make_field(g, 0.0)};
        const Field out = jump_integral(g, m, LambdaWeight::constants({0.5}, 1.0), r, 0.0);
        for (double v : out) CHECK(v == 0.0);
    }
    {
        MarkField r;
        r.per_mark = {make_field(g, 1.0)};
        CHECK_THROWS_AS(
            jump_integral(g, make_levy_model({0.5, 1.0}, {1.0, 1.0}),
                          LambdaWeight::constants({0.5, 0.5}, 1.0), r, 0.0),
            ConfigError); // mark-count mismatch
    }
}

TEST_CASE("jump integral: linearity and monotonicity") {
    const Grid g = make_grid(0.0, 1.0, 21);
    const LevyModel m = make_levy_model({-0.5, 0.25, 1.5}, {0.3, 0.7, 0.1});
    const auto w = LambdaWeight::constants({0.2, 0.25, 0.9}, 1.0);
    CounterRng rng{23};

    for (int trial = 0; trial < 20; ++trial) {
        MarkField r1, r2;
        for (int j = 0; j < 3; ++j) {
            Field f1 = make_field(g), f2 = make_field(g);
            for (int i = 0; i < g.num_nodes; ++i) {
                f1[i] = rng.next_in(-1.0, 1.0);
                f2[i] = rng.next_in(-1.0, 1.0);
            }
            r1.per_mark.push_back(f1);
            r2.per_mark.push_back(f2);
        }
        const double a = rng.next_in(-2.0, 2.0), b = rng.next_in(-2.0, 2.0);
        MarkField combo;
        for (int j = 0; j < 3; ++j) {
            Field f = make_field(g);
            for (int i = 0; i < g.num_nodes; ++i)
                f[i] = a * r1.per_mark[j][i] + b * r2.per_mark[j][i];
            combo.per_mark.push_back(f);
        }
        const Field lhs = jump_integral(g, m, w, combo, 0.4);
        const Field j1 = jump_integral(g, m, w, r1, 0.4);
        const Field j2 = jump_integral(g, m, w, r2, 0.4);
        for (int i = 0; i < g.num_nodes; ++i) {
            const double want = a * j1[i] + b * j2[i];
            CHECK(std::fabs(lhs[i] - want) <= 1e-12 * std::max(1.0, std::fabs(want)));
        }

        // Monotone: raising r pointwise never lowers the integral.
        MarkField raised = r1;
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < g.num_nodes; ++i)
                raised.per_mark[j][i] += rng.next_in(0.0, 1.0);
        const Field jr = jump_integral(g, m, w, raised, 0.4);
        for (int i = 0; i < g.num_nodes; ++i) CHECK(jr[i] >= j1[i] - 1e-14);
    }
}
