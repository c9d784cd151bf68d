#pragma once

#include "bspde/coefficients.hpp"
#include "bspde/grid.hpp"

#include <span>
#include <vector>

namespace bspde {

// Finite-support jump model: marks z_1..z_J (distinct, nonzero) with
// intensities nu_j >= 0. J = 0 means no jumps.
struct LevyModel {
    std::vector<double> marks;
    std::vector<double> intensities;

    int num_marks() const { return static_cast<int>(marks.size()); }
    double total_intensity() const;
    bool same_as(const LevyModel& o) const {
        return marks == o.marks && intensities == o.intensities;
    }
};

LevyModel make_levy_model(std::vector<double> marks, std::vector<double> intensities);

// Per-mark weight lambda_j(t) together with its bound constant C:
// admissible iff 0 <= lambda_j(t) <= C * min(1, |z_j|).
struct LambdaWeight {
    std::vector<TimeFunction> per_mark;
    double bound = 0.0; // C

    double operator()(double t, int mark) const { return per_mark.at(mark)(t); }
    int num_marks() const { return static_cast<int>(per_mark.size()); }

    static LambdaWeight zero(int num_marks);
    static LambdaWeight constants(const std::vector<double>& values, double bound);
};

// One field per mark: the jump-amplitude component r(., z_j).
struct MarkField {
    std::vector<Field> per_mark;

    int num_marks() const { return static_cast<int>(per_mark.size()); }
    static MarkField zeros(const Grid& grid, int num_marks);
};

struct LambdaBoundReport {
    bool pass = true;
    double worst_ratio = 0.0; // max over samples of lambda / (C * min(1, |z|))
    double worst_t = 0.0;
    int worst_mark = -1;
};

// Checks the admissibility envelope at the sampled times; failures are
// report content, not errors.
LambdaBoundReport check_lambda_bound(const LevyModel& model, const LambdaWeight& w,
                                     std::span<const double> t_samples);

// Pointwise sum_j r(x, z_j) * lambda(t, z_j) * nu_j.
Field jump_integral(const Grid& grid, const LevyModel& model, const LambdaWeight& w,
                    const MarkField& r, double t);

} // namespace bspde
