#pragma once

#include "bspde/problem.hpp"
#include "bspde/tree.hpp"

#include <vector>

namespace bspde {

struct SchemeParams {
    double theta = 1.0; // implicitness of the diffusion operator; 1 = backward Euler
    int num_steps = 1;  // N
};

struct SolveOptions {
    int threads = 0;             // 0 = hardware concurrency
    bool force_unchecked = false; // run even if the ellipticity check fails
};

// The discrete solution triple on the noise tree, level-major. Level k holds
// one field per node; the martingale components are absent at the terminal
// level and pinned to zero at the two boundary nodes.
struct SolutionBundle {
    std::vector<std::vector<Field>> u;     // levels 0..N
    std::vector<std::vector<Field>> z;     // levels 0..N-1
    std::vector<std::vector<MarkField>> r; // levels 0..N-1

    int num_levels() const { return static_cast<int>(u.size()); }
};

// Backward sweep over the tree: conditional expectation, martingale
// extraction, explicit driver/beta terms, implicit diffusion via a
// tridiagonal solve with Dirichlet rows pinned to the boundary data.
SolutionBundle solve_stochastic(const ProblemSpec& spec, const NoiseTree& tree,
                                const SchemeParams& params, const SolveOptions& opts = {});

// The single-branch reduction: same stepping with the conditional
// expectation replaced by the previous level and Z = 0, r = 0 substituted
// into the driver. Returns the trajectory u(t_k, .) for k = 0..N.
std::vector<Field> solve_deterministic(const ProblemSpec& spec, const SchemeParams& params,
                                       const SolveOptions& opts = {});

// Maximal absolute weak-form residual over all tree paths, pairing against a
// boundary-zero test function. The per-step identity is telescoped with the
// beta term integrated by parts onto the test function, so a bundle produced
// by solve_stochastic yields a residual at rounding level.
double residual_check(const ProblemSpec& spec, const SolutionBundle& bundle,
                      const NoiseTree& tree, const Field& psi, double theta = 1.0);

// Tridiagonal LU (Thomas) factorization; reusable across right-hand sides.
// Requires a nonsingular factorization pivot; the schemes here produce
// strictly diagonally dominant rows.
class TridiagFactor {
public:
    TridiagFactor(std::vector<double> lower, std::vector<double> diag,
                  std::vector<double> upper);
    void solve(Field& rhs_inout) const;
    int size() const { return static_cast<int>(diag_.size()); }

private:
    std::vector<double> lower_, diag_, upper_; // diag_ holds the elimination pivots
};

} // namespace bspde
