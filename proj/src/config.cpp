#include "bspde/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace bspde {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw ConfigError("config: field '" + field + "': " + why);
}

const json& require(const json& j, const std::string& field) {
    auto it = j.find(field);
    if (it == j.end()) fail(field, "missing");
    return *it;
}

double number_at(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
}

// Scalars may be written as numbers or as constant expressions ("pi/4").
double scalar_from(const json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const expr::Expr e = expr::parse(j.get<std::string>());
        for (auto id : {expr::Ident::T, expr::Ident::X, expr::Ident::U, expr::Ident::Ux,
                        expr::Ident::Z, expr::Ident::Rint})
            if (expr::uses(e, id)) fail(field, "must be a constant (only 'pi' allowed)");
        return expr::eval(e, expr::Env{});
    }
    fail(field, "expected a number or a constant expression string");
}

CoefficientField coeff_from(const json& j, const std::string& field) {
    if (j.is_number()) return CoefficientField::constant(j.get<double>());
    if (j.is_string()) {
        try {
            return CoefficientField::from_expression(j.get<std::string>());
        } catch (const Error& e) {
            fail(field, e.what());
        }
    }
    fail(field, "expected a number or an expression string over (t, x)");
}

TimeFunction timefn_from(const json& j, const std::string& field) {
    if (j.is_number()) return TimeFunction::constant(j.get<double>());
    if (j.is_string()) {
        try {
            return TimeFunction::from_expression(j.get<std::string>());
        } catch (const Error& e) {
            fail(field, e.what());
        }
    }
    fail(field, "expected a number or an expression string over t");
}

Field field_from(const json& j, const Grid& grid, double t_eval, const std::string& field) {
    if (j.is_array()) {
        if (j.size() != static_cast<std::size_t>(grid.num_nodes))
            fail(field, "array length " + std::to_string(j.size()) + " does not match grid size " +
                            std::to_string(grid.num_nodes));
        Field out(j.size());
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) fail(field, "array entries must be numbers");
            out[i] = j[i].get<double>();
        }
        require_finite(out, field.c_str());
        return out;
    }
    if (j.is_number() || j.is_string()) {
        const CoefficientField c = coeff_from(j, field);
        return sample_field(grid, c, t_eval);
    }
    fail(field, "expected an expression string, a number, or an array of node values");
}

ProblemSpec problem_from(const json& j) {
    ProblemSpec spec;
    const json& jgrid = require(j, "grid");
    spec.grid = make_grid(scalar_from(require(jgrid, "x_left"), "grid.x_left"),
                          scalar_from(require(jgrid, "x_right"), "grid.x_right"),
                          static_cast<int>(number_at(require(jgrid, "M"), "grid.M")));
    spec.horizon = scalar_from(require(j, "T"), "T");
    spec.a_diff = coeff_from(require(j, "a_diff"), "a_diff");
    spec.beta = j.contains("beta") ? timefn_from(j["beta"], "beta") : TimeFunction::constant(0.0);
    spec.kappa = j.contains("kappa") ? scalar_from(j["kappa"], "kappa") : 0.5;
    spec.delta1 = j.contains("delta1") ? scalar_from(j["delta1"], "delta1") : 0.01;
    spec.boundary = j.contains("boundary") ? coeff_from(j["boundary"], "boundary")
                                           : CoefficientField::constant(0.0);

    if (j.contains("levy")) {
        const json& jl = j["levy"];
        std::vector<double> marks, intensities;
        for (const auto& v : require(jl, "marks")) marks.push_back(number_at(v, "levy.marks"));
        for (const auto& v : require(jl, "intensities"))
            intensities.push_back(number_at(v, "levy.intensities"));
        spec.levy = make_levy_model(std::move(marks), std::move(intensities));
    }

    if (j.contains("lambda")) {
        const json& jw = j["lambda"];
        LambdaWeight w;
        w.bound = scalar_from(require(jw, "C"), "lambda.C");
        for (const auto& v : require(jw, "values"))
            w.per_mark.push_back(timefn_from(v, "lambda.values"));
        spec.lambda = std::move(w);
    } else {
        spec.lambda = LambdaWeight::zero(spec.levy.num_marks());
    }

    const json& jd = require(j, "driver");
    const std::string type = require(jd, "type").get<std::string>();
    if (type == "linear") {
        LinearDriver d;
        if (jd.contains("c0")) d.c0 = coeff_from(jd["c0"], "driver.c0");
        if (jd.contains("c_u")) d.c_u = scalar_from(jd["c_u"], "driver.c_u");
        if (jd.contains("c_v")) d.c_v = scalar_from(jd["c_v"], "driver.c_v");
        if (jd.contains("c_Z")) d.c_Z = scalar_from(jd["c_Z"], "driver.c_Z");
        spec.driver = std::move(d);
    } else if (type == "concave") {
        ConcaveDriver d;
        if (jd.contains("c0")) d.c0 = coeff_from(jd["c0"], "driver.c0");
        if (jd.contains("gamma")) d.gamma = scalar_from(jd["gamma"], "driver.gamma");
        if (d.gamma < 0.0) fail("driver.gamma", "must be nonnegative");
        spec.driver = std::move(d);
    } else if (type == "expression") {
        try {
            spec.driver = ExpressionDriver::from_source(require(jd, "source").get<std::string>());
        } catch (const expr::ParseError& e) {
            fail("driver.source", e.what());
        }
    } else {
        fail("driver.type", "unknown driver type '" + type + "'");
    }

    spec.phi = field_from(require(j, "phi"), spec.grid, spec.horizon, "phi");
    spec.validate();
    return spec;
}

RunConfig config_from(const json& j) {
    RunConfig cfg;
    cfg.schema_version = static_cast<int>(number_at(require(j, "schema_version"), "schema_version"));
    if (cfg.schema_version != 1)
        fail("schema_version", "unsupported version " + std::to_string(cfg.schema_version));

    if (j.contains("scheme")) {
        const json& js = j["scheme"];
        if (js.contains("theta")) cfg.scheme.theta = scalar_from(js["theta"], "scheme.theta");
        if (js.contains("N"))
            cfg.scheme.num_steps = static_cast<int>(number_at(js["N"], "scheme.N"));
        if (js.contains("method")) {
            const std::string m = js["method"].get<std::string>();
            if (m == "auto")
                cfg.method = SolveMethod::Auto;
            else if (m == "stochastic")
                cfg.method = SolveMethod::Stochastic;
            else if (m == "deterministic")
                cfg.method = SolveMethod::Deterministic;
            else
                fail("scheme.method", "expected auto|stochastic|deterministic");
        }
    }
    if (j.contains("outputs")) {
        const json& jo = j["outputs"];
        if (jo.contains("dir")) cfg.outputs.dir = jo["dir"].get<std::string>();
        if (jo.contains("full_bundle")) cfg.outputs.full_bundle = jo["full_bundle"].get<bool>();
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();

    if (j.contains("problem")) cfg.problem = problem_from(j["problem"]);
    if (j.contains("problem2")) cfg.problem2 = problem_from(j["problem2"]);

    if (j.contains("risk")) {
        if (!cfg.problem) fail("risk", "requires a 'problem' section");
        const json& jr = j["risk"];
        RiskParams rp;
        const Grid& grid = cfg.problem->grid;
        const double T = cfg.problem->horizon;
        rp.phi1 = jr.contains("phi1") ? field_from(jr["phi1"], grid, T, "risk.phi1")
                                      : cfg.problem->phi;
        rp.phi2 = jr.contains("phi2") ? field_from(jr["phi2"], grid, T, "risk.phi2")
                                      : cfg.problem->phi;
        if (jr.contains("lambdas")) {
            rp.lambdas.clear();
            for (const auto& v : jr["lambdas"]) rp.lambdas.push_back(number_at(v, "risk.lambdas"));
        }
        if (jr.contains("shift")) rp.shift = scalar_from(jr["shift"], "risk.shift");
        cfg.risk = std::move(rp);
    }

    if (j.contains("check")) {
        const json& jc = j["check"];
        if (jc.contains("n_samples"))
            cfg.check.n_samples = static_cast<int>(number_at(jc["n_samples"], "check.n_samples"));
        if (jc.contains("lipschitz_constant"))
            cfg.check.lipschitz_constant = scalar_from(jc["lipschitz_constant"],
                                                       "check.lipschitz_constant");
    }
    return cfg;
}

json parse_json_or_fail(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config: " + origin + ": " + e.what());
    }
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
    return config_from(parse_json_or_fail(json_text, "invalid JSON"));
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

ProblemSpec problem_from_json_text(const std::string& json_text) {
    return problem_from(parse_json_or_fail(json_text, "invalid JSON"));
}

} // namespace bspde
