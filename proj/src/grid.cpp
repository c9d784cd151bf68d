#include "bspde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bspde {

Grid make_grid(double x_left, double x_right, int num_nodes) {
    if (!(x_left < x_right))
        throw ConfigError("grid: x_left must be strictly less than x_right");
    if (num_nodes < 5)
        throw ConfigError("grid: need at least 5 nodes, got " + std::to_string(num_nodes));
    if (!std::isfinite(x_left) || !std::isfinite(x_right))
        throw ConfigError("grid: endpoints must be finite");
    Grid g;
    g.x_left = x_left;
    g.x_right = x_right;
    g.num_nodes = num_nodes;
    g.h = (x_right - x_left) / (num_nodes - 1);
    return g;
}

Field make_field(const Grid& grid, double value) {
    return Field(static_cast<std::size_t>(grid.num_nodes), value);
}

Field sample_field(const Grid& grid, const CoefficientField& f, double t) {
    Field out(static_cast<std::size_t>(grid.num_nodes));
    for (int i = 0; i < grid.num_nodes; ++i) out[i] = f(t, grid.x(i));
    require_finite(out, "sampled field");
    return out;
}

void require_on_grid(const Grid& grid, const Field& f, const char* what) {
    if (f.size() != static_cast<std::size_t>(grid.num_nodes))
        throw LogicError(std::string(what) + ": field length " + std::to_string(f.size()) +
                         " does not match grid size " + std::to_string(grid.num_nodes));
}

void require_finite(const Field& f, const char* what) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i]))
            throw NumericError(std::string(what) + ": non-finite value at node " +
                               std::to_string(i));
}

std::vector<double> sample_midpoints(const Grid& grid, const CoefficientField& a, double t) {
    std::vector<double> mid(static_cast<std::size_t>(grid.num_nodes - 1));
    for (int i = 0; i + 1 < grid.num_nodes; ++i) {
        mid[i] = a(t, grid.midpoint(i));
        if (!std::isfinite(mid[i]))
            throw NumericError("diffusion coefficient non-finite at t=" + format_g17(t) +
                               ", x=" + format_g17(grid.midpoint(i)));
    }
    return mid;
}

Field apply_diffusion_sampled(const Grid& grid, std::span<const double> a_mid, const Field& u) {
    require_on_grid(grid, u, "apply_diffusion");
    if (a_mid.size() != static_cast<std::size_t>(grid.num_nodes - 1))
        throw LogicError("apply_diffusion: midpoint sample count mismatch");
    Field out(u.size(), 0.0);
    const double inv_h2 = 1.0 / (grid.h * grid.h);
    for (int i = 1; i + 1 < grid.num_nodes; ++i) {
        out[i] = (a_mid[i] * (u[i + 1] - u[i]) - a_mid[i - 1] * (u[i] - u[i - 1])) * inv_h2;
    }
    return out;
}

Field apply_diffusion(const Grid& grid, const CoefficientField& a, const Field& u, double t) {
    return apply_diffusion_sampled(grid, sample_midpoints(grid, a, t), u);
}

Field gradient(const Grid& grid, const Field& u) {
    require_on_grid(grid, u, "gradient");
    const int m = grid.num_nodes;
    Field out(u.size());
    const double inv_2h = 1.0 / (2.0 * grid.h);
    const double inv_h = 1.0 / grid.h;
    out[0] = (u[1] - u[0]) * inv_h;
    for (int i = 1; i + 1 < m; ++i) out[i] = (u[i + 1] - u[i - 1]) * inv_2h;
    out[m - 1] = (u[m - 1] - u[m - 2]) * inv_h;
    return out;
}

double l2_inner(const Grid& grid, const Field& f, const Field& g) {
    require_on_grid(grid, f, "l2_inner");
    require_on_grid(grid, g, "l2_inner");
    const int m = grid.num_nodes;
    double acc = 0.5 * f[0] * g[0];
    for (int i = 1; i + 1 < m; ++i) acc += f[i] * g[i];
    acc += 0.5 * f[m - 1] * g[m - 1];
    return acc * grid.h;
}

double positive_part_defect(const Grid& grid, const Field& f) {
    require_on_grid(grid, f, "positive_part_defect");
    const int m = grid.num_nodes;
    auto sq_pos = [](double v) {
        const double p = v > 0.0 ? v : 0.0;
        return p * p;
    };
    double acc = 0.5 * sq_pos(f[0]);
    for (int i = 1; i + 1 < m; ++i) acc += sq_pos(f[i]);
    acc += 0.5 * sq_pos(f[m - 1]);
    return acc * grid.h;
}

double max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::fabs(v));
    return m;
}

double max_positive_part(const Field& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, v);
    return std::max(m, 0.0);
}

} // namespace bspde
