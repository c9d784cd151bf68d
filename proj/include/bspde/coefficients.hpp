#pragma once

#include "bspde/errors.hpp"
#include "bspde/expr.hpp"
#include "bspde/util.hpp"

#include <functional>
#include <string>
#include <utility>

namespace bspde {

// Deterministic scalar coefficient of (t, x): diffusion a(t,x), Dirichlet
// data g(t,x), driver offset c0(t,x).
class CoefficientField {
public:
    CoefficientField() = default; // zero coefficient

    static CoefficientField constant(double v) {
        return from_function([v](double, double) { return v; }, format_g17(v));
    }

    // Expression over {t, x, pi}.
    static CoefficientField from_expression(const std::string& src) {
        expr::Expr e = expr::parse(src);
        for (auto id : {expr::Ident::U, expr::Ident::Ux, expr::Ident::Z, expr::Ident::Rint}) {
            if (expr::uses(e, id))
                throw ConfigError("coefficient '" + src + "' may only reference t, x, pi");
        }
        return from_function(
            [e](double t, double x) {
                expr::Env env;
                env.t = t;
                env.x = x;
                return expr::eval(e, env);
            },
            src);
    }

    static CoefficientField from_function(std::function<double(double, double)> fn,
                                          std::string label = "<native>") {
        CoefficientField c;
        c.fn_ = std::move(fn);
        c.source_ = std::move(label);
        return c;
    }

    double operator()(double t, double x) const { return fn_(t, x); }
    const std::string& source() const { return source_; }

private:
    std::function<double(double, double)> fn_ = [](double, double) { return 0.0; };
    std::string source_ = "0";
};

// Deterministic function of time only: beta(t) and per-mark lambda weights.
class TimeFunction {
public:
    TimeFunction() = default; // zero function

    static TimeFunction constant(double v) {
        return from_function([v](double) { return v; }, format_g17(v));
    }

    // Expression over {t, pi}.
    static TimeFunction from_expression(const std::string& src) {
        expr::Expr e = expr::parse(src);
        for (auto id : {expr::Ident::X, expr::Ident::U, expr::Ident::Ux, expr::Ident::Z,
                        expr::Ident::Rint}) {
            if (expr::uses(e, id))
                throw ConfigError("time function '" + src + "' may only reference t, pi");
        }
        return from_function(
            [e](double t) {
                expr::Env env;
                env.t = t;
                return expr::eval(e, env);
            },
            src);
    }

    static TimeFunction from_function(std::function<double(double)> fn,
                                      std::string label = "<native>") {
        TimeFunction f;
        f.fn_ = std::move(fn);
        f.source_ = std::move(label);
        return f;
    }

    double operator()(double t) const { return fn_(t); }
    const std::string& source() const { return source_; }

private:
    std::function<double(double)> fn_ = [](double) { return 0.0; };
    std::string source_ = "0";
};

} // namespace bspde
