#include "bspde/expr.hpp"
#include "bspde/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

using namespace bspde;
using expr::Env;

namespace {
double ev(const std::string& src, Env env = {}) {
    return expr::eval(expr::parse(src), env);
}
} // namespace

TEST_CASE("expression: literals, precedence and associativity") {
    CHECK(ev("1+2*3") == 7.0);
    CHECK(ev("2*3+4*5") == 26.0);
    CHECK(ev("1-2-3") == -4.0);
    CHECK(ev("8/4/2") == 1.0);
    CHECK(ev("2^3^2") == 512.0); // right associative
    CHECK(ev("2^3*4") == 32.0);
    // '^' binds tighter than unary minus, which binds tighter than '*'.
    Env e;
    e.x = 3.0;
    CHECK(ev("-x^2", e) == -9.0);
    CHECK(ev("-x*2", e) == -6.0);
    CHECK(ev("--x", e) == 3.0);
    CHECK(ev("2^-1") == 0.5);
    CHECK(ev("1.5e2") == 150.0);
    CHECK(ev("pi") == std::numbers::pi);
}

TEST_CASE("expression: identifiers and calls") {
    Env e;
    e.x = 3.0;
    CHECK(ev("2*x", e) == 6.0);
    e.Z = -2.0;
    CHECK(ev("max(Z, -Z)", e) == 2.0); // |Z|
    CHECK(ev("min(Z, -Z)", e) == -2.0);
    Env heat;
    heat.t = 0.0;
    heat.x = std::numbers::pi / 2.0;
    CHECK(ev("exp(-(1-t))*sin(x)", heat) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    Env half;
    half.x = std::numbers::pi / 2.0;
    CHECK(ev("sin(x)^2", half) == doctest::Approx(1.0).epsilon(1e-15));
    Env u2;
    u2.u = 0.25;
    u2.ux = -0.5;
    u2.rint = 0.125;
    CHECK(ev("u + 2*ux + 4*rint", u2) == doctest::Approx(-0.25).epsilon(1e-15));
}

TEST_CASE("expression: parse errors carry byte offsets") {
    auto offset_of = [](const std::string& src) -> std::size_t {
        try {
            expr::parse(src);
        } catch (const expr::ParseError& e) {
            return e.offset();
        }
        FAIL("expected a parse error for: ", src);
        return SIZE_MAX;
    };
    CHECK(offset_of("foo(x)") == 0);   // unknown call
    CHECK(offset_of("y") == 0);        // unknown identifier
    CHECK(offset_of("1 + y") == 4);    // offset points at the identifier
    CHECK(offset_of("sin(1,2)") == 0); // arity
    CHECK(offset_of("min(1)") == 0);   // arity
    CHECK(offset_of("(1+2") == 0);     // unbalanced parenthesis
    CHECK(offset_of("1 $ 2") == 2);    // stray character
    CHECK(offset_of("1+") == 2);       // truncated input
    CHECK_THROWS_AS(expr::parse("1 2"), expr::ParseError);
}

TEST_CASE("expression: evaluation domain errors") {
    Env e;
    e.x = -1.0;
    CHECK_THROWS_AS(ev("log(x)", e), DriverError);
    CHECK_THROWS_AS(ev("sqrt(x)", e), DriverError);
    e.x = 0.0;
    CHECK_THROWS_AS(ev("1/x", e), DriverError);
    try {
        ev("1 + 1/x", e);
        FAIL("expected division by zero");
    } catch (const DriverError& err) {
        CHECK(err.offset() == 5); // the '/' inside the expression
    }
    CHECK(ev("log(x+1)", e) == 0.0);
}

TEST_CASE("expression: identifier usage is reported structurally") {
    const auto e = expr::parse("0*Z + sin(x)");
    CHECK(expr::uses(e, expr::Ident::Z));
    CHECK(expr::uses(e, expr::Ident::X));
    CHECK_FALSE(expr::uses(e, expr::Ident::U));
    CHECK_FALSE(expr::uses(e, expr::Ident::Rint));
}

namespace {

// Random source via the grammar itself; depth-limited.
std::string random_source(CounterRng& rng, int depth) {
    const char* idents[] = {"t", "x", "u", "ux", "Z", "rint", "pi"};
    if (depth <= 0 || rng.next_unit() < 0.25) {
        if (rng.next_unit() < 0.5) return idents[rng.next_int(0, 6)];
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", rng.next_in(0.0, 9.5));
        return buf;
    }
    switch (rng.next_int(0, 6)) {
        case 0: return random_source(rng, depth - 1) + "+" + random_source(rng, depth - 1);
        case 1: return random_source(rng, depth - 1) + "-" + random_source(rng, depth - 1);
        case 2: return random_source(rng, depth - 1) + "*" + random_source(rng, depth - 1);
        case 3:
            return "(" + random_source(rng, depth - 1) + ")/(4+" + random_source(rng, depth - 1) +
                   ")";
        case 4: return "-(" + random_source(rng, depth - 1) + ")";
        case 5: return "sin(" + random_source(rng, depth - 1) + ")";
        default:
            return "max(" + random_source(rng, depth - 1) + "," + random_source(rng, depth - 1) +
                   ")";
    }
}

} // namespace

TEST_CASE("expression: print/reparse is a structural fixpoint") {
    CounterRng rng{20240917};
    for (int trial = 0; trial < 200; ++trial) {
        const std::string src = random_source(rng, 4);
        const expr::Expr first = expr::parse(src);
        const std::string printed = expr::to_string(first);
        const expr::Expr second = expr::parse(printed);
        CHECK_MESSAGE(expr::structurally_equal(first, second), "source: ", src,
                      " printed: ", printed);
        CHECK(expr::to_string(second) == printed);
    }
}

TEST_CASE("expression: evaluation is deterministic") {
    const auto e = expr::parse("sin(x)*exp(t) + max(Z, rint) - u/(1+ux*ux)");
    Env env;
    env.t = 0.3;
    env.x = 1.1;
    env.u = -0.2;
    env.ux = 0.7;
    env.Z = 0.4;
    env.rint = 0.1;
    const double a = expr::eval(e, env);
    const double b = expr::eval(e, env);
    CHECK(a == b); // bitwise
}
