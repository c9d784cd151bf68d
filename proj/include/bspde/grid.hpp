#pragma once

#include "bspde/coefficients.hpp"
#include "bspde/errors.hpp"

#include <span>
#include <vector>

namespace bspde {

// Uniform mesh on a 1-D interval; both boundary nodes included.
struct Grid {
    double x_left = 0.0;
    double x_right = 1.0;
    int num_nodes = 0; // >= 5
    double h = 0.0;    // (x_right - x_left) / (num_nodes - 1)

    double x(int i) const { return x_left + i * h; }
    double midpoint(int i) const { return x_left + (i + 0.5) * h; } // between nodes i and i+1
    int size() const { return num_nodes; }
    double length() const { return x_right - x_left; }
    bool same_as(const Grid& o) const {
        return x_left == o.x_left && x_right == o.x_right && num_nodes == o.num_nodes;
    }
};

Grid make_grid(double x_left, double x_right, int num_nodes);

// A function sampled on the grid nodes. Length must equal Grid::num_nodes.
using Field = std::vector<double>;

Field make_field(const Grid& grid, double value = 0.0);

// Sample an expression/coefficient of x on the nodes (at time t).
Field sample_field(const Grid& grid, const CoefficientField& f, double t);

void require_on_grid(const Grid& grid, const Field& f, const char* what);
void require_finite(const Field& f, const char* what);

// Midpoint samples a(t, x_{i+1/2}) for i = 0..M-2, the conservative-form
// coefficients used by the divergence operator and the implicit matrix.
std::vector<double> sample_midpoints(const Grid& grid, const CoefficientField& a, double t);

// Divergence-form second difference with Dirichlet convention:
// interior i carries (a_{i+1/2}(u_{i+1}-u_i) - a_{i-1/2}(u_i-u_{i-1})) / h^2,
// boundary entries are 0 (boundary values are imposed elsewhere).
Field apply_diffusion(const Grid& grid, const CoefficientField& a, const Field& u, double t);
Field apply_diffusion_sampled(const Grid& grid, std::span<const double> a_mid, const Field& u);

// Central differences inside, first-order one-sided at the two boundary nodes.
Field gradient(const Grid& grid, const Field& u);

// Trapezoidal quadrature of the L2 pairing over the interval.
double l2_inner(const Grid& grid, const Field& f, const Field& g);

// Trapezoidal quadrature of the squared positive part; zero iff f <= 0 at
// every node.
double positive_part_defect(const Grid& grid, const Field& f);

double max_abs(const Field& f);
double max_positive_part(const Field& f);

} // namespace bspde
