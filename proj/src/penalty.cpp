#include "bspde/penalty.hpp"

#include <string>

namespace bspde::penalty {

namespace {
void require_n(int n) {
    if (n < 1) throw PreconditionError("penalty: n must be >= 1, got " + std::to_string(n));
}
} // namespace

double psi(int n, double z) {
    require_n(n);
    if (z <= 0.0) return 0.0;
    const double knee = 1.0 / n;
    if (z <= knee) return 2.0 * n * z;
    return 2.0;
}

double f(int n, double x) {
    require_n(n);
    if (x <= 0.0) return 0.0;
    const double knee = 1.0 / n;
    if (x <= knee) return n * x * x * x / 3.0;
    return x * x - x / n + 1.0 / (3.0 * static_cast<double>(n) * n);
}

double f_prime(int n, double x) {
    require_n(n);
    if (x <= 0.0) return 0.0;
    const double knee = 1.0 / n;
    if (x <= knee) return n * x * x;
    return 2.0 * x - 1.0 / n;
}

double f_second(int n, double x) {
    return psi(n, x);
}

namespace {
template <class PointFn>
double trapezoid_of(const Grid& grid, PointFn&& fn) {
    const int m = grid.num_nodes;
    double acc = 0.5 * fn(0);
    for (int i = 1; i + 1 < m; ++i) acc += fn(i);
    acc += 0.5 * fn(m - 1);
    return acc * grid.h;
}
} // namespace

double functional(const Grid& grid, int n, const Field& h) {
    require_on_grid(grid, h, "penalty functional");
    return trapezoid_of(grid, [&](int i) { return f(n, h[i]); });
}

double functional_prime(const Grid& grid, int n, const Field& h, const Field& h1) {
    require_on_grid(grid, h, "penalty functional");
    require_on_grid(grid, h1, "penalty functional");
    return trapezoid_of(grid, [&](int i) { return f_prime(n, h[i]) * h1[i]; });
}

double functional_second(const Grid& grid, int n, const Field& h, const Field& h1,
                         const Field& h2) {
    require_on_grid(grid, h, "penalty functional");
    require_on_grid(grid, h1, "penalty functional");
    require_on_grid(grid, h2, "penalty functional");
    return trapezoid_of(grid, [&](int i) { return f_second(n, h[i]) * h1[i] * h2[i]; });
}

RatioBound ratio_bound(int n, double x, double y) {
    require_n(n);
    if (y < 0.0) throw PreconditionError("ratio_bound: y must be >= 0");
    RatioBound rb;
    const double fp = f_prime(n, x);
    const double xp = x > 0.0 ? x : 0.0;
    rb.rhs = 2.0 * xp * xp;
    if (fp == 0.0) {
        rb.lhs = 0.0; // covers f''(x+y) = 0, which forces x <= 0 and hence f'(x) = 0
    } else {
        rb.lhs = fp * fp / f_second(n, x + y);
    }
    rb.pass = rb.lhs <= rb.rhs + 1e-12;
    return rb;
}

} // namespace bspde::penalty
