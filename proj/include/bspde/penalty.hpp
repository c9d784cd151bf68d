#pragma once

#include "bspde/grid.hpp"

namespace bspde::penalty {

// Piecewise-linear slope profile: 0 for z <= 0, 2nz on [0, 1/n], 2 beyond.
double psi(int n, double z);

// C^1 penalty, the double integral of psi in closed form:
//   0              for x <= 0
//   n x^3 / 3      on [0, 1/n]
//   x^2 - x/n + 1/(3n^2)  for x > 1/n
// Increases to (x^+)^2 as n grows, with (x^+)^2 - f(n,x) <= x^+ / n.
double f(int n, double x);

double f_prime(int n, double x);  // 0 | n x^2 | 2x - 1/n
double f_second(int n, double x); // == psi(n, x)

// Trapezoidal functionals of the pointwise compositions.
double functional(const Grid& grid, int n, const Field& h);
double functional_prime(const Grid& grid, int n, const Field& h, const Field& h1);
double functional_second(const Grid& grid, int n, const Field& h, const Field& h1,
                         const Field& h2);

// The ratio f'(x)^2 / f''(x+y) for y >= 0 is bounded by 2 (x^+)^2; both sides
// are exposed so the constant stays auditable. lhs is 0 by convention when
// f'(x) = 0 (covers the 0/0 case at x <= 0).
struct RatioBound {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = true;
};

RatioBound ratio_bound(int n, double x, double y);

} // namespace bspde::penalty
