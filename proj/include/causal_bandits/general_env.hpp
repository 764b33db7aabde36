#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "causal_bandits/arm.hpp"
#include "causal_bandits/error.hpp"
#include "causal_bandits/rng.hpp"

namespace causal_bandits {

// A discrete node. cpt has one row per assignment of `parents` (mixed radix,
// first parent most significant); each row is a distribution over
// 0..domain-1.
struct NodeSpec {
    std::string name;
    int domain = 2;
    std::vector<std::size_t> parents;
    std::vector<std::vector<double>> cpt;
};

// Y ~ Bernoulli(means[parent tuple]).
struct BernoulliTableReward {
    std::vector<double> means;
};

// Y = sum_j theta_j * Pa_j(Y) + N(0, sigma^2). Not clipped.
struct LinearGaussianReward {
    std::vector<double> theta;
    double sigma = 0.0;
};

struct RewardSpec {
    std::string name = "Y";
    std::vector<std::size_t> parents;
    std::variant<BernoulliTableReward, LinearGaussianReward> model;
};

// Discrete causal Bayesian network with a designated reward node whose parents
// share one domain size k. Arms are an explicit list; every arm must induce
// a parent distribution with the same support.
class GeneralCausalEnv {
public:
    GeneralCausalEnv(std::vector<NodeSpec> nodes, RewardSpec reward, std::vector<Arm> arms)
        : nodes_(std::move(nodes)), reward_(std::move(reward)), arms_(std::move(arms)) {
        validate_graph();
        validate_reward();
        validate_arms();
        if (nodes_.size() > kMaxEnumeratedNodes) {
            throw oracle_too_large("environment too large for exact oracle: " +
                                   std::to_string(nodes_.size()) + " nodes (cap " +
                                   std::to_string(kMaxEnumeratedNodes) + ")");
        }
        parent_dists_.reserve(arms_.size());
        for (const Arm& arm : arms_) parent_dists_.push_back(enumerate_parents(arm));
        validate_common_support();
    }

    std::size_t node_count() const { return nodes_.size(); }
    const NodeSpec& node(std::size_t i) const { return nodes_.at(i); }
    std::span<const NodeSpec> nodes() const { return nodes_; }
    const RewardSpec& reward() const { return reward_; }

    std::size_t arm_count() const { return arms_.size(); }
    std::span<const Arm> arms() const { return arms_; }
    const Arm& arm(std::size_t index) const { return arms_.at(index); }
    static double arm_cost(const Arm& arm, double gamma) { return arm.is_observe() ? 1.0 : gamma; }

    std::string node_name(std::size_t node) const { return nodes_.at(node).name; }
    std::string arm_label(std::size_t index) const {
        return arm(index).label([this](std::size_t n) { return node_name(n); });
    }

    std::size_t parent_count() const { return reward_.parents.size(); }
    int parent_domain() const { return nodes_[reward_.parents.front()].domain; }
    std::size_t tuple_count() const { return tuple_count_; }

    std::size_t parent_tuple(std::span<const int> values) const {
        std::size_t key = 0;
        for (std::size_t parent : reward_.parents) {
            key = key * static_cast<std::size_t>(parent_domain()) + static_cast<std::size_t>(values[parent]);
        }
        return key;
    }

    std::vector<int> tuple_values(std::size_t tuple) const {
        std::vector<int> out(parent_count());
        const auto k = static_cast<std::size_t>(parent_domain());
        for (std::size_t j = parent_count(); j-- > 0;) {
            out[j] = static_cast<int>(tuple % k);
            tuple /= k;
        }
        return out;
    }

    // E[Y | Pa(Y) = tuple]
    double tuple_mean(std::size_t tuple) const {
        if (const auto* table = std::get_if<BernoulliTableReward>(&reward_.model)) {
            return table->means[tuple];
        }
        const auto& linear = std::get<LinearGaussianReward>(reward_.model);
        const std::vector<int> values = tuple_values(tuple);
        double mean = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) mean += linear.theta[j] * values[j];
        return mean;
    }

    double tuple_second_moment(std::size_t tuple) const {
        if (std::holds_alternative<BernoulliTableReward>(reward_.model)) return tuple_mean(tuple);
        const double sigma = std::get<LinearGaussianReward>(reward_.model).sigma;
        const double mean = tuple_mean(tuple);
        return mean * mean + sigma * sigma;
    }

    // Ancestral sampling in topological order with causal surgery: forced
    // nodes ignore their CPT but still consume one uniform.
    void sample_into(std::size_t arm_index, Rng& rng, Sample& out) const { draw(arms_[arm_index], rng, out); }

    Sample sample(std::size_t arm_index, Rng& rng) const {
        if (arm_index >= arms_.size()) throw config_error("arm index out of range");
        Sample s;
        sample_into(arm_index, rng, s);
        return s;
    }

    // Samples under any arm over this graph, not only the listed ones.
    Sample sample(const Arm& arm, Rng& rng) const {
        check_arm(arm);
        Sample s;
        draw(arm, rng, s);
        return s;
    }

    // P(Pa(Y) = y | do(arm)) for every parent tuple y, precomputed for listed arms.
    std::span<const double> parent_distribution(std::size_t arm_index) const {
        return parent_dists_.at(arm_index);
    }

    std::vector<double> parent_distribution(const Arm& arm) const {
        check_arm(arm);
        return enumerate_parents(arm);
    }

    double true_mean(std::size_t arm_index) const { return expectation(parent_distribution(arm_index)); }
    double true_mean(const Arm& arm) const { return expectation(parent_distribution(arm)); }

    std::vector<double> true_means() const {
        std::vector<double> means(arms_.size());
        for (std::size_t a = 0; a < arms_.size(); ++a) means[a] = true_mean(a);
        return means;
    }

    double reward_second_moment(std::size_t arm_index) const {
        const auto dist = parent_distribution(arm_index);
        double total = 0.0;
        for (std::size_t y = 0; y < dist.size(); ++y) total += dist[y] * tuple_second_moment(y);
        return total;
    }

private:
    void draw(const Arm& arm, Rng& rng, Sample& out) const {
        out.values.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const auto& row = nodes_[i].cpt[row_index(i, out.values)];
            const int drawn = static_cast<int>(rng.categorical(row));
            const auto forced = arm.forced_value(i);
            out.values[i] = forced ? *forced : drawn;
        }
        const std::size_t tuple = parent_tuple(out.values);
        if (const auto* table = std::get_if<BernoulliTableReward>(&reward_.model)) {
            out.reward = rng.bernoulli(table->means[tuple]) ? 1.0 : 0.0;
        } else {
            const double sigma = std::get<LinearGaussianReward>(reward_.model).sigma;
            out.reward = tuple_mean(tuple) + rng.normal(0.0, 1.0) * sigma;
        }
    }

    std::size_t row_index(std::size_t node, std::span<const int> values) const {
        std::size_t key = 0;
        for (std::size_t parent : nodes_[node].parents) {
            key = key * static_cast<std::size_t>(nodes_[parent].domain) + static_cast<std::size_t>(values[parent]);
        }
        return key;
    }

    double expectation(std::span<const double> dist) const {
        double total = 0.0;
        for (std::size_t y = 0; y < dist.size(); ++y) total += dist[y] * tuple_mean(y);
        return total;
    }

    void check_arm(const Arm& arm) const {
        for (const auto& [node, value] : arm.assignments()) {
            if (node >= nodes_.size()) throw config_error("unknown node id " + std::to_string(node));
            if (value < 0 || value >= nodes_[node].domain) {
                throw config_error("value " + std::to_string(value) + " outside the domain of " +
                                   nodes_[node].name);
            }
        }
    }

    // Full enumeration of the post-surgery joint, accumulated onto Pa(Y).
    std::vector<double> enumerate_parents(const Arm& arm) const {
        std::vector<double> dist(tuple_count_, 0.0);
        std::vector<int> values(nodes_.size(), 0);
        std::function<void(std::size_t, double)> visit = [&](std::size_t i, double weight) {
            if (i == nodes_.size()) {
                dist[parent_tuple(values)] += weight;
                return;
            }
            if (const auto forced = arm.forced_value(i)) {
                values[i] = *forced;
                visit(i + 1, weight);
                return;
            }
            const auto& row = nodes_[i].cpt[row_index(i, values)];
            for (int v = 0; v < nodes_[i].domain; ++v) {
                if (row[static_cast<std::size_t>(v)] <= 0.0) continue;
                values[i] = v;
                visit(i + 1, weight * row[static_cast<std::size_t>(v)]);
            }
        };
        visit(0, 1.0);
        return dist;
    }

    void validate_graph() const {
        if (nodes_.empty()) throw config_error("general environment needs at least one node");
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const NodeSpec& n = nodes_[i];
            if (n.domain < 1) throw config_error("node " + n.name + " has an empty domain");
            std::size_t rows = 1;
            for (std::size_t parent : n.parents) {
                if (parent >= i) {
                    throw config_error("node " + n.name +
                                       " lists a parent that is not earlier in topological order "
                                       "(cycle or unordered nodes)");
                }
                rows *= static_cast<std::size_t>(nodes_[parent].domain);
            }
            if (n.cpt.size() != rows) {
                throw config_error("node " + n.name + " needs " + std::to_string(rows) + " CPT rows, got " +
                                   std::to_string(n.cpt.size()));
            }
            for (std::size_t r = 0; r < rows; ++r) {
                const auto& row = n.cpt[r];
                if (row.size() != static_cast<std::size_t>(n.domain)) {
                    throw config_error("node " + n.name + " CPT row " + std::to_string(r) +
                                       " has the wrong width");
                }
                double sum = 0.0;
                for (double p : row) {
                    if (!(p >= 0.0 && p <= 1.0)) {
                        throw config_error("node " + n.name + " CPT row " + std::to_string(r) +
                                           " has an entry outside [0,1]");
                    }
                    sum += p;
                }
                if (std::abs(sum - 1.0) > 1e-12) {
                    throw config_error("node " + n.name + " CPT row " + std::to_string(r) +
                                       " sums to " + std::to_string(sum));
                }
            }
        }
    }

    void validate_reward() {
        if (reward_.parents.empty()) throw config_error("reward node needs at least one parent");
        for (std::size_t j = 0; j < reward_.parents.size(); ++j) {
            if (reward_.parents[j] >= nodes_.size()) throw config_error("reward parent out of range");
            for (std::size_t l = 0; l < j; ++l) {
                if (reward_.parents[l] == reward_.parents[j]) throw config_error("reward parent listed twice");
            }
        }
        const int k = nodes_[reward_.parents.front()].domain;
        for (std::size_t parent : reward_.parents) {
            if (nodes_[parent].domain != k) {
                throw config_error("all parents of the reward node must share one domain size");
            }
        }
        tuple_count_ = 1;
        for (std::size_t j = 0; j < reward_.parents.size(); ++j) tuple_count_ *= static_cast<std::size_t>(k);
        if (const auto* table = std::get_if<BernoulliTableReward>(&reward_.model)) {
            if (table->means.size() != tuple_count_) {
                throw config_error("Bernoulli reward table needs k^n = " + std::to_string(tuple_count_) +
                                   " means");
            }
            for (double m : table->means) {
                if (!(m >= 0.0 && m <= 1.0)) throw config_error("Bernoulli reward mean outside [0,1]");
            }
        } else {
            const auto& linear = std::get<LinearGaussianReward>(reward_.model);
            if (linear.theta.size() != reward_.parents.size()) {
                throw config_error("linear-Gaussian reward needs one coefficient per parent");
            }
            if (!(linear.sigma >= 0.0)) throw config_error("noise standard deviation must be >= 0");
        }
    }

    void validate_arms() const {
        if (arms_.empty()) throw config_error("general environment needs at least one arm");
        for (const Arm& a : arms_) check_arm(a);
    }

    void validate_common_support() const {
        for (std::size_t a = 1; a < parent_dists_.size(); ++a) {
            for (std::size_t y = 0; y < tuple_count_; ++y) {
                if ((parent_dists_[a][y] > 0.0) != (parent_dists_[0][y] > 0.0)) {
                    throw config_error("arms " + arm_label(0) + " and " + arm_label(a) +
                                       " induce parent distributions with different supports");
                }
            }
        }
    }

    std::vector<NodeSpec> nodes_;
    RewardSpec reward_;
    std::vector<Arm> arms_;
    std::size_t tuple_count_ = 1;
    std::vector<std::vector<double>> parent_dists_;
};

// For each non-reward node X: true iff there is no open backdoor path from X
// to the reward node. With nothing conditioned on, such a path exists iff X
// and Y share an ancestor once the edges leaving X are cut.
inline std::vector<bool> classify_no_backdoor(const GeneralCausalEnv& env) {
    const std::size_t n = env.node_count();
    const std::size_t reward = n;  // reward node gets the next id
    std::vector<std::vector<std::size_t>> parents(n + 1);
    for (std::size_t i = 0; i < n; ++i) parents[i] = env.node(i).parents;
    parents[reward] = env.reward().parents;

    auto ancestors = [&](std::size_t start, std::size_t cut) {
        std::vector<bool> seen(n + 1, false);
        std::vector<std::size_t> stack{start};
        seen[start] = true;
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t parent : parents[v]) {
                if (parent == cut) continue;
                if (!seen[parent]) {
                    seen[parent] = true;
                    stack.push_back(parent);
                }
            }
        }
        return seen;
    };

    std::vector<bool> result(n, true);
    for (std::size_t x = 0; x < n; ++x) {
        const auto from_x = ancestors(x, x);
        const auto from_y = ancestors(reward, x);
        for (std::size_t v = 0; v <= n; ++v) {
            if (v != x && from_x[v] && from_y[v]) {
                result[x] = false;
                break;
            }
        }
    }
    return result;
}

}  // namespace causal_bandits
