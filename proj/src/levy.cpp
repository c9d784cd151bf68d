#include "bspde/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bspde {

double LevyModel::total_intensity() const {
    double s = 0.0;
    for (double v : intensities) s += v;
    return s;
}

LevyModel make_levy_model(std::vector<double> marks, std::vector<double> intensities) {
    if (marks.size() != intensities.size())
        throw ConfigError("levy model: marks and intensities must have equal length");
    for (std::size_t j = 0; j < marks.size(); ++j) {
        if (!std::isfinite(marks[j]) || marks[j] == 0.0)
            throw ConfigError("levy model: mark " + std::to_string(j) +
                              " must be finite and nonzero");
        if (!std::isfinite(intensities[j]) || intensities[j] < 0.0)
            throw ConfigError("levy model: intensity " + std::to_string(j) +
                              " must be finite and nonnegative");
        for (std::size_t k = j + 1; k < marks.size(); ++k)
            if (marks[j] == marks[k])
                throw ConfigError("levy model: marks must be pairwise distinct");
    }
    LevyModel m;
    m.marks = std::move(marks);
    m.intensities = std::move(intensities);
    return m;
}

LambdaWeight LambdaWeight::zero(int num_marks) {
    LambdaWeight w;
    w.per_mark.assign(static_cast<std::size_t>(num_marks), TimeFunction::constant(0.0));
    w.bound = 0.0;
    return w;
}

LambdaWeight LambdaWeight::constants(const std::vector<double>& values, double bound) {
    LambdaWeight w;
    w.per_mark.reserve(values.size());
    for (double v : values) w.per_mark.push_back(TimeFunction::constant(v));
    w.bound = bound;
    return w;
}

LambdaBoundReport check_lambda_bound(const LevyModel& model, const LambdaWeight& w,
                                     std::span<const double> t_samples) {
    if (t_samples.empty()) throw PreconditionError("check_lambda_bound: no time samples");
    if (w.num_marks() != model.num_marks())
        throw ConfigError("check_lambda_bound: lambda weight has " +
                          std::to_string(w.num_marks()) + " marks, model has " +
                          std::to_string(model.num_marks()));
    LambdaBoundReport report;
    for (double t : t_samples) {
        for (int j = 0; j < model.num_marks(); ++j) {
            const double lam = w(t, j);
            const double envelope = w.bound * std::min(1.0, std::fabs(model.marks[j]));
            double ratio;
            if (lam < 0.0) {
                ratio = std::numeric_limits<double>::infinity(); // negative weights never pass
            } else if (lam == 0.0) {
                ratio = 0.0;
            } else if (envelope > 0.0) {
                ratio = lam / envelope;
            } else {
                ratio = std::numeric_limits<double>::infinity();
            }
            if (ratio > report.worst_ratio) {
                report.worst_ratio = ratio;
                report.worst_t = t;
                report.worst_mark = j;
            }
        }
    }
    report.pass = report.worst_ratio <= 1.0;
    return report;
}

MarkField MarkField::zeros(const Grid& grid, int num_marks) {
    MarkField r;
    r.per_mark.assign(static_cast<std::size_t>(num_marks), make_field(grid, 0.0));
    return r;
}

Field jump_integral(const Grid& grid, const LevyModel& model, const LambdaWeight& w,
                    const MarkField& r, double t) {
    if (r.num_marks() != model.num_marks() || w.num_marks() != model.num_marks())
        throw ConfigError("jump_integral: mark count mismatch");
    Field out = make_field(grid, 0.0);
    for (int j = 0; j < model.num_marks(); ++j) {
        require_on_grid(grid, r.per_mark[j], "jump_integral");
        const double weight = w(t, j) * model.intensities[j];
        if (weight == 0.0) continue;
        const Field& rj = r.per_mark[j];
        for (int i = 0; i < grid.num_nodes; ++i) out[i] += rj[i] * weight;
    }
    return out;
}

} // namespace bspde
