#pragma once

#include "bspde/comparison.hpp"

#include <span>
#include <vector>

namespace bspde {

// Space-dependent risk of a terminal position: -u(0,.) from a fresh solve
// with the given terminal field. Requires a u-independent driver.
Field rho(const ProblemSpec& spec, const Field& phi, const NoiseTree& tree,
          const SchemeParams& params, const SolveOptions& opts = {});

struct MonotonicityReport {
    bool pass = false;
    double worst_violation = 0.0; // max_x (rho(phi1) shortfall), from level 0
    double tolerance = 0.0;
    ComparisonReport comparison; // the underlying ordered-solutions run
};

// phi1 <= phi2 must hold nodewise; asserts rho(phi1) >= rho(phi2) - tol by
// reducing to the comparison run with identical drivers.
MonotonicityReport test_monotonicity(const ProblemSpec& spec, const Field& phi1,
                                     const Field& phi2, const NoiseTree& tree,
                                     const SchemeParams& params, const SolveOptions& opts = {});

struct ConvexityReport {
    bool pass = false;
    bool affine = false; // linear driver: equality tier
    double tolerance = 0.0;
    double worst_violation = 0.0; // max over lambdas/x of rho(blend) - combo
    double worst_equality_gap = 0.0; // max |rho(blend) - combo| (affine diagnostics)
    std::vector<double> lambdas;
    std::vector<double> per_lambda_violation;
};

// Driver must be concave in (Z, r): the concave family, or a linear driver
// (affine, where the inequality tightens to equality). Terminal fields must
// agree at the boundary so all blends stay compatible with the shared
// Dirichlet data.
ConvexityReport test_convexity(const ProblemSpec& spec, const Field& phi1, const Field& phi2,
                               std::span<const double> lambdas, const NoiseTree& tree,
                               const SchemeParams& params, const SolveOptions& opts = {});

struct TranslationReport {
    bool pass = false;
    double worst_gap = 0.0; // max_x |rho(phi + c) - (rho(phi) - c)|
    double tolerance = 0.0;
    double shift = 0.0;
};

// Cash-shift identity with the boundary data shifted by the same constant.
TranslationReport test_translation(const ProblemSpec& spec, const Field& phi, double shift,
                                   const NoiseTree& tree, const SchemeParams& params,
                                   const SolveOptions& opts = {});

} // namespace bspde
