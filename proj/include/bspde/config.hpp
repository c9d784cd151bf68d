#pragma once

#include "bspde/problem.hpp"
#include "bspde/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bspde {

enum class SolveMethod { Auto, Stochastic, Deterministic };

struct OutputOptions {
    std::string dir = "out";
    bool full_bundle = false;
};

struct RiskParams {
    Field phi1;
    Field phi2;
    std::vector<double> lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
    double shift = 1.0;
};

struct CheckParams {
    int n_samples = 1000;
    std::optional<double> lipschitz_constant;
};

struct RunConfig {
    int schema_version = 1;
    SchemeParams scheme;
    SolveMethod method = SolveMethod::Auto;
    OutputOptions outputs;
    std::uint64_t seed = 0;
    std::optional<ProblemSpec> problem;
    std::optional<ProblemSpec> problem2;
    std::optional<RiskParams> risk;
    CheckParams check;
};

// Parses and validates a JSON run configuration; every failure surfaces as
// ConfigError with the offending field named.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

// Exposed for the python bindings: a problem object from its JSON form.
ProblemSpec problem_from_json_text(const std::string& json_text);

} // namespace bspde
