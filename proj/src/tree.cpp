#include "bspde/tree.hpp"

#include <cmath>
#include <string>

namespace bspde {

NoiseTree NoiseTree::build(int num_steps, double horizon, LevyModel levy) {
    if (num_steps < 1) throw ConfigError("noise tree: need at least one time step");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError("noise tree: horizon must be positive and finite");

    NoiseTree tree;
    tree.num_steps_ = num_steps;
    tree.horizon_ = horizon;
    tree.dt_ = horizon / num_steps;
    tree.sqrt_dt_ = std::sqrt(tree.dt_);
    tree.levy_ = std::move(levy);

    double total_jump_prob = 0.0;
    tree.jump_prob_.resize(static_cast<std::size_t>(tree.levy_.num_marks()));
    for (int j = 0; j < tree.levy_.num_marks(); ++j) {
        tree.jump_prob_[j] = tree.levy_.intensities[j] * tree.dt_;
        total_jump_prob += tree.jump_prob_[j];
    }
    if (total_jump_prob > 0.5)
        throw ConfigError("noise tree: per-step jump probability " +
                          format_g17(total_jump_prob) +
                          " exceeds 0.5; increase the number of time steps");
    tree.no_jump_prob_ = 1.0 - total_jump_prob;

    const std::int64_t branching = 2 * (static_cast<std::int64_t>(tree.levy_.num_marks()) + 1);
    std::int64_t nodes = 1, level_nodes = 1;
    for (int k = 1; k <= num_steps; ++k) {
        if (level_nodes > kMaxNodes / branching)
            throw ConfigError("noise tree: node budget of " + std::to_string(kMaxNodes) +
                              " exceeded; reduce steps or marks");
        level_nodes *= branching;
        nodes += level_nodes;
        if (nodes > kMaxNodes)
            throw ConfigError("noise tree: node budget of " + std::to_string(kMaxNodes) +
                              " exceeded; reduce steps or marks");
    }
    tree.total_nodes_ = nodes;

    tree.path_prob_.resize(static_cast<std::size_t>(num_steps) + 1);
    tree.path_prob_[0] = {1.0};
    for (int k = 1; k <= num_steps; ++k) {
        const auto& prev = tree.path_prob_[k - 1];
        auto& cur = tree.path_prob_[k];
        cur.resize(prev.size() * static_cast<std::size_t>(branching));
        for (std::size_t p = 0; p < prev.size(); ++p)
            for (std::int64_t b = 0; b < branching; ++b)
                cur[p * branching + b] = prev[p] * tree.branch_prob(static_cast<int>(b));
    }
    return tree;
}

std::int64_t NoiseTree::level_size(int level) const {
    return static_cast<std::int64_t>(path_prob_[static_cast<std::size_t>(level)].size());
}

double NoiseTree::branch_prob(int b) const {
    const int slot = b / 2;
    return 0.5 * (slot == 0 ? no_jump_prob_ : jump_prob_[slot - 1]);
}

double NoiseTree::brownian_increment(int b) const {
    return (b % 2 == 0) ? sqrt_dt_ : -sqrt_dt_;
}

void NoiseTree::require_children(std::span<const Field> children) const {
    if (children.size() != static_cast<std::size_t>(branching()))
        throw LogicError("noise tree: expected " + std::to_string(branching()) +
                         " child values, got " + std::to_string(children.size()));
    for (std::size_t b = 1; b < children.size(); ++b)
        if (children[b].size() != children[0].size())
            throw LogicError("noise tree: child fields have mismatched lengths");
}

Field NoiseTree::cond_expect(std::span<const Field> children) const {
    require_children(children);
    Field out(children[0].size(), 0.0);
    for (int b = 0; b < branching(); ++b) {
        const double p = branch_prob(b);
        const Field& c = children[b];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += p * c[i];
    }
    return out;
}

Field NoiseTree::extract_brownian_integrand(std::span<const Field> children) const {
    require_children(children);
    Field out(children[0].size(), 0.0);
    for (int b = 0; b < branching(); ++b) {
        const double w = branch_prob(b) * brownian_increment(b);
        const Field& c = children[b];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * c[i];
    }
    const double inv_dt = 1.0 / dt_;
    for (double& v : out) v *= inv_dt;
    return out;
}

MarkField NoiseTree::extract_jump_amplitudes(std::span<const Field> children) const {
    require_children(children);
    MarkField out;
    out.per_mark.resize(static_cast<std::size_t>(num_marks()));
    const Field& up0 = children[0];
    const Field& dn0 = children[1];
    for (int j = 0; j < num_marks(); ++j) {
        const Field& upj = children[2 * (j + 1)];
        const Field& dnj = children[2 * (j + 1) + 1];
        Field& rj = out.per_mark[j];
        rj.resize(up0.size());
        for (std::size_t i = 0; i < rj.size(); ++i)
            rj[i] = 0.5 * (upj[i] + dnj[i]) - 0.5 * (up0[i] + dn0[i]);
    }
    return out;
}

} // namespace bspde
