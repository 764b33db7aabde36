#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "causal_bandits/arm.hpp"
#include "causal_bandits/error.hpp"
#include "causal_bandits/rng.hpp"

namespace causal_bandits {

// Reward depends on a single node: Bernoulli(mean_high) when it is 1,
// Bernoulli(mean_low) otherwise.
struct PivotReward {
    std::size_t node = 0;
    double mean_high = 0.5;
    double mean_low = 0.5;
};

// Bernoulli mean looked up from the values of a declared subset of nodes.
// The first listed node is the most significant bit of the table index.
struct TableReward {
    std::vector<std::size_t> nodes;
    std::vector<double> means;
};

using NoBackdoorReward = std::variant<PivotReward, TableReward>;

// M independent binary nodes X_i ~ Bernoulli(p_i), none with a backdoor path
// to the Bernoulli reward Y. Arms are do(X_i = x) at canonical index 2i + x,
// followed by the observational arm do() at index 2M.
class NoBackdoorEnv {
public:
    NoBackdoorEnv(std::vector<double> p, NoBackdoorReward reward)
        : p_(std::move(p)), reward_(std::move(reward)) {
        if (p_.empty()) throw config_error("no-backdoor environment needs at least one node");
        for (std::size_t i = 0; i < p_.size(); ++i) {
            if (!(p_[i] > 0.0 && p_[i] < 1.0)) {
                throw config_error("P(X" + std::to_string(i + 1) + "=1) must lie in (0,1), got " +
                                   std::to_string(p_[i]));
            }
        }
        auto check_mean = [](double m) {
            if (!(m >= 0.0 && m <= 1.0)) {
                throw config_error("reward mean " + std::to_string(m) + " outside [0,1]");
            }
        };
        if (const auto* pivot = std::get_if<PivotReward>(&reward_)) {
            if (pivot->node >= p_.size()) throw config_error("pivot node out of range");
            check_mean(pivot->mean_high);
            check_mean(pivot->mean_low);
        } else {
            const auto& table = std::get<TableReward>(reward_);
            if (table.nodes.empty()) throw config_error("reward table needs at least one node");
            if (table.nodes.size() > kMaxEnumeratedNodes) {
                throw config_error("reward table keyed on more than " +
                                   std::to_string(kMaxEnumeratedNodes) + " nodes");
            }
            for (std::size_t i = 0; i < table.nodes.size(); ++i) {
                if (table.nodes[i] >= p_.size()) throw config_error("reward table node out of range");
                for (std::size_t j = 0; j < i; ++j) {
                    if (table.nodes[i] == table.nodes[j]) {
                        throw config_error("reward table lists a node twice");
                    }
                }
            }
            if (table.means.size() != (std::size_t{1} << table.nodes.size())) {
                throw config_error("reward table needs 2^(number of nodes) means");
            }
            std::for_each(table.means.begin(), table.means.end(), check_mean);
        }
        arms_.reserve(2 * p_.size() + 1);
        for (std::size_t i = 0; i < p_.size(); ++i) {
            arms_.push_back(Arm::intervene(i, 0));
            arms_.push_back(Arm::intervene(i, 1));
        }
        arms_.push_back(Arm::observe());
    }

    std::size_t node_count() const { return p_.size(); }
    std::span<const double> probabilities() const { return p_; }
    const NoBackdoorReward& reward() const { return reward_; }

    // p_{i,x} = P(X_i = x)
    double probability(std::size_t node, int value) const {
        return value == 1 ? p_[node] : 1.0 - p_[node];
    }

    double min_probability() const {
        double lowest = 1.0;
        for (double pi : p_) lowest = std::min({lowest, pi, 1.0 - pi});
        return lowest;
    }

    std::size_t arm_count() const { return arms_.size(); }
    std::span<const Arm> arms() const { return arms_; }
    const Arm& arm(std::size_t index) const { return arms_.at(index); }
    static std::size_t arm_index(std::size_t node, int value) {
        return 2 * node + static_cast<std::size_t>(value);
    }
    std::size_t observe_arm() const { return 2 * p_.size(); }
    static double arm_cost(const Arm& arm, double gamma) { return arm.is_observe() ? 1.0 : gamma; }

    std::string node_name(std::size_t node) const { return "X" + std::to_string(node + 1); }
    std::string arm_label(std::size_t index) const {
        return arm(index).label([this](std::size_t n) { return node_name(n); });
    }

    double reward_mean(std::span<const int> values) const {
        if (const auto* pivot = std::get_if<PivotReward>(&reward_)) {
            return values[pivot->node] == 1 ? pivot->mean_high : pivot->mean_low;
        }
        const auto& table = std::get<TableReward>(reward_);
        std::size_t key = 0;
        for (std::size_t node : table.nodes) key = (key << 1) | (values[node] == 1 ? 1u : 0u);
        return table.means[key];
    }

    // Samples X_1..X_M in index order, then the reward. Consumes exactly
    // M + 1 uniforms whatever the arm.
    void sample_into(std::size_t arm_index, Rng& rng, Sample& out) const {
        const std::size_t m = p_.size();
        out.values.resize(m);
        const bool intervene = arm_index < 2 * m;
        const std::size_t forced_node = arm_index / 2;
        const int forced_value = static_cast<int>(arm_index % 2);
        for (std::size_t i = 0; i < m; ++i) {
            const int drawn = rng.bernoulli(p_[i]) ? 1 : 0;
            out.values[i] = (intervene && i == forced_node) ? forced_value : drawn;
        }
        out.reward = rng.bernoulli(reward_mean(out.values)) ? 1.0 : 0.0;
    }

    Sample sample(std::size_t arm_index, Rng& rng) const {
        if (arm_index >= arms_.size()) throw config_error("arm index out of range");
        Sample s;
        sample_into(arm_index, rng, s);
        return s;
    }

    Sample sample(const Arm& arm, Rng& rng) const { return sample(index_of(arm), rng); }

    std::size_t index_of(const Arm& arm) const {
        if (arm.is_observe()) return observe_arm();
        const auto assignments = arm.assignments();
        if (assignments.size() != 1) {
            throw config_error("no-backdoor arms intervene on exactly one node");
        }
        const auto [node, value] = assignments.front();
        if (node >= p_.size()) throw config_error("unknown node id " + std::to_string(node));
        if (value != 0 && value != 1) {
            throw config_error("value " + std::to_string(value) + " outside binary domain");
        }
        return arm_index(node, value);
    }

    // Exact E[Y | do(arm)] by enumerating the nodes the reward reads; every
    // other node is independent of Y and sums out.
    double true_mean(std::size_t arm_index) const {
        const std::vector<std::size_t> relevant = reward_nodes();
        const bool intervene = arm_index < 2 * p_.size();
        const std::size_t forced_node = arm_index / 2;
        const int forced_value = static_cast<int>(arm_index % 2);
        std::vector<int> values(p_.size(), 0);
        double total = 0.0;
        for (std::size_t mask = 0; mask < (std::size_t{1} << relevant.size()); ++mask) {
            double weight = 1.0;
            for (std::size_t j = 0; j < relevant.size(); ++j) {
                const std::size_t node = relevant[j];
                const int v = static_cast<int>((mask >> j) & 1u);
                values[node] = v;
                if (intervene && node == forced_node) {
                    weight *= (v == forced_value) ? 1.0 : 0.0;
                } else {
                    weight *= probability(node, v);
                }
            }
            if (weight > 0.0) total += weight * reward_mean(values);
        }
        return total;
    }

    double true_mean(const Arm& arm) const { return true_mean(index_of(arm)); }

    std::vector<double> true_means() const {
        std::vector<double> means(arms_.size());
        for (std::size_t a = 0; a < arms_.size(); ++a) means[a] = true_mean(a);
        return means;
    }

    // Rewards are Bernoulli, so E[Y^2] = E[Y].
    double reward_second_moment(std::size_t arm_index) const { return true_mean(arm_index); }

private:
    std::vector<std::size_t> reward_nodes() const {
        if (const auto* pivot = std::get_if<PivotReward>(&reward_)) return {pivot->node};
        return std::get<TableReward>(reward_).nodes;
    }

    std::vector<double> p_;
    NoBackdoorReward reward_;
    std::vector<Arm> arms_;
};

// Pivot reward with Y ~ Bernoulli(0.5 + eps) when X_pivot = 1 and
// Bernoulli(0.5 - eps') otherwise, where eps' = p_pivot * eps / (1 - p_pivot)
// keeps E[Y] at exactly 0.5.
inline PivotReward balanced_pivot_reward(std::span<const double> p, std::size_t pivot, double epsilon) {
    if (pivot >= p.size()) throw config_error("pivot node out of range");
    const double eps_low = p[pivot] * epsilon / (1.0 - p[pivot]);
    return PivotReward{pivot, 0.5 + epsilon, 0.5 - eps_low};
}

// Hardness index m(p): smallest tau in [2, M] such that at most tau nodes have
// min(p_i, 1 - p_i) < 1 / tau. Entries may be empirical estimates in [0, 1].
inline std::size_t m_index(std::span<const double> p) {
    const std::size_t m = p.size();
    if (m < 2) throw config_error("m(p) needs at least two nodes");
    for (double pi : p) {
        if (!(pi >= 0.0 && pi <= 1.0)) throw config_error("probability outside [0,1] in m(p)");
    }
    for (std::size_t tau = 2; tau <= m; ++tau) {
        const double threshold = 1.0 / static_cast<double>(tau);
        const auto rare = static_cast<std::size_t>(std::count_if(
            p.begin(), p.end(), [threshold](double pi) { return std::min(pi, 1.0 - pi) < threshold; }));
        if (rare <= tau) return tau;
    }
    return m;
}

}  // namespace causal_bandits
