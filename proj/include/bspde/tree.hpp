#pragma once

#include "bspde/levy.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace bspde {

// Exact discrete model of the driving noise: a full (non-recombining) tree
// with a two-point Brownian increment (+/- sqrt(dt)) and at most one jump
// per step. Branch order is fixed: slot 0 is "no jump", slot j >= 1 is mark
// j-1; within a slot the + increment comes first. Branch b maps to
// slot = b/2, sign = (b even ? + : -). All reductions over children run in
// ascending branch order, so results are bit-reproducible.
class NoiseTree {
public:
    static constexpr std::int64_t kMaxNodes = 5'000'000;

    // Requires sum_j nu_j * dt <= 0.5 and the node budget; otherwise throws
    // ConfigError suggesting more steps / fewer steps respectively.
    static NoiseTree build(int num_steps, double horizon, LevyModel levy);

    int num_steps() const { return num_steps_; }
    double horizon() const { return horizon_; }
    double dt() const { return dt_; }
    double time_at(int level) const { return level * dt_; }
    const LevyModel& levy() const { return levy_; }

    int num_marks() const { return levy_.num_marks(); }
    int branching() const { return 2 * (num_marks() + 1); }
    std::int64_t level_size(int level) const;
    std::int64_t total_nodes() const { return total_nodes_; }

    double jump_prob(int mark) const { return jump_prob_[mark]; } // nu_j * dt
    double no_jump_prob() const { return no_jump_prob_; }         // 1 - sum_j p_j
    double branch_prob(int b) const;
    double brownian_increment(int b) const; // +/- sqrt(dt)
    int branch_mark(int b) const { return b / 2 - 1; } // -1 for the no-jump slot

    std::int64_t child(std::int64_t node_index, int b) const {
        return node_index * branching() + b;
    }
    std::int64_t parent(std::int64_t node_index) const { return node_index / branching(); }
    int branch_from_parent(std::int64_t node_index) const {
        return static_cast<int>(node_index % branching());
    }
    double path_prob(int level, std::int64_t node_index) const {
        return path_prob_[level][static_cast<std::size_t>(node_index)];
    }

    // Probability-weighted average of the children, pointwise.
    Field cond_expect(std::span<const Field> children) const;

    // E[u_next * dB | node] / dt, the Brownian martingale integrand.
    Field extract_brownian_integrand(std::span<const Field> children) const;

    // Per mark: mean over signs of the mark children minus mean over signs
    // of the no-jump children.
    MarkField extract_jump_amplitudes(std::span<const Field> children) const;

private:
    int num_steps_ = 0;
    double horizon_ = 0.0;
    double dt_ = 0.0;
    double sqrt_dt_ = 0.0;
    LevyModel levy_;
    std::vector<double> jump_prob_;
    double no_jump_prob_ = 1.0;
    std::int64_t total_nodes_ = 0;
    std::vector<std::vector<double>> path_prob_; // per level, per node

    void require_children(std::span<const Field> children) const;
};

} // namespace bspde
