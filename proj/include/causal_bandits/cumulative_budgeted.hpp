#pragma once

#include <cassert>
#include <cmath>
#include <vector>

#include "causal_bandits/no_backdoor_env.hpp"
#include "causal_bandits/policy_run.hpp"

namespace causal_bandits {

// Per-arm bookkeeping of CRM-NB-ALG. Canonical arm layout: a_{i,x} at 2i + x,
// a_0 at 2M. Effective pulls of a_{i,x} count its own pulls plus every
// observation round in which X_i came out as x.
class NbState {
public:
    NbState(std::size_t node_count, double gamma)
        : node_count_(node_count),
          gamma_(gamma),
          pulls_(2 * node_count, 0),
          effective_(2 * node_count, 0),
          direct_sums_(2 * node_count, 0.0),
          observed_sums_(2 * node_count, 0.0) {}

    std::size_t node_count() const { return node_count_; }
    std::size_t arm_count() const { return 2 * node_count_ + 1; }
    std::size_t observe_arm() const { return 2 * node_count_; }
    double gamma() const { return gamma_; }

    std::size_t pulls(std::size_t slot) const { return pulls_[slot]; }
    std::size_t effective_pulls(std::size_t slot) const { return effective_[slot]; }
    std::size_t observe_pulls() const { return observe_pulls_; }
    double spent() const { return spent_; }
    std::size_t rounds() const { return rounds_; }
    double beta() const { return beta_; }
    void set_beta(double beta) { beta_ = beta; }

    double mean(std::size_t slot) const {
        return effective_[slot] ? (direct_sums_[slot] + observed_sums_[slot]) / static_cast<double>(effective_[slot])
                                : 0.0;
    }
    double observe_mean() const {
        return observe_pulls_ ? observe_sum_ / static_cast<double>(observe_pulls_) : 0.0;
    }
    double best_intervention_mean() const {
        double best = 0.0;
        for (std::size_t s = 0; s < pulls_.size(); ++s) best = std::max(best, mean(s));
        return best;
    }

    void update(std::size_t arm, const Sample& sample) {
        ++rounds_;
        if (arm == observe_arm()) {
            ++observe_pulls_;
            observe_sum_ += sample.reward;
            spent_ += 1.0;
            for (std::size_t i = 0; i < node_count_; ++i) {
                const std::size_t slot = 2 * i + static_cast<std::size_t>(sample.values[i]);
                ++effective_[slot];
                observed_sums_[slot] += sample.reward;
            }
        } else {
            ++pulls_[arm];
            ++effective_[arm];
            direct_sums_[arm] += sample.reward;
            spent_ += gamma_;
        }
    }

private:
    std::size_t node_count_;
    double gamma_;
    std::vector<std::size_t> pulls_;
    std::vector<std::size_t> effective_;
    std::vector<double> direct_sums_;
    std::vector<double> observed_sums_;
    std::size_t observe_pulls_ = 0;
    double observe_sum_ = 0.0;
    double spent_ = 0.0;
    std::size_t rounds_ = 0;
    double beta_ = 1.0;
};

inline void crm_update_estimates(NbState& state, std::size_t arm, const Sample& sample) { state.update(arm, sample); }

// Cost-weighted UCB scores: interventions are divided by gamma, a_0 is not.
inline std::vector<double> crm_weighted_ucb(const NbState& state, std::size_t t) {
    assert(t >= 1);
    const double log_t = std::log(static_cast<double>(t));
    std::vector<double> scores(state.arm_count());
    for (std::size_t s = 0; s + 1 < scores.size(); ++s) {
        assert(state.effective_pulls(s) > 0);
        const double radius = std::sqrt(8.0 * log_t / static_cast<double>(state.effective_pulls(s)));
        scores[s] = (state.mean(s) + radius) / state.gamma();
    }
    assert(state.observe_pulls() > 0);
    scores.back() = state.observe_mean() + std::sqrt(8.0 * log_t / static_cast<double>(state.observe_pulls()));
    return scores;
}

// beta moves only while observing looks worse than the best intervention per
// unit cost.
inline double crm_beta_update(double best_mean, double observe_mean, double gamma, std::size_t t, double beta_prev) {
    const double gap = best_mean / gamma - observe_mean;
    if (!(gap > 0.0)) return beta_prev;
    return std::min(2.0 * std::sqrt(2.0) / gap, std::sqrt(std::log(static_cast<double>(t))));
}

// CRM-NB-ALG. Pulls every arm once, then keeps a_0 above the beta^2 log t
// floor and otherwise follows the weighted UCB until the budget is gone.
inline PolicyRun run_crm_nb_alg(const NoBackdoorEnv& env, double budget, double gamma, Rng& rng) {
    const std::size_t m = env.node_count();
    if (!(gamma >= 1.0)) throw config_error("intervention cost gamma must be >= 1");
    const double init_cost = 2.0 * gamma * static_cast<double>(m) + 1.0;
    if (!(budget > init_cost) || !std::isfinite(budget)) {
        throw config_error("CRM-NB-ALG needs B > 2*gamma*M + 1 = " + std::to_string(init_cost) +
                           " to pull every arm once");
    }
    NbState state(m, gamma);
    PolicyRun run;
    Sample s;
    const std::size_t a0 = env.observe_arm();
    for (std::size_t arm = 0; arm < env.arm_count(); ++arm) {
        env.sample_into(arm, rng, s);
        state.update(arm, s);
        run.record(arm, arm == a0 ? 1.0 : gamma, s.reward);
    }
    double remaining = budget - init_cost;
    while (remaining >= 1.0) {
        const std::size_t t = state.rounds() + 1;
        const double log_t = std::log(static_cast<double>(t));
        std::size_t arm = a0;
        const double floor = state.beta() * state.beta() * log_t;
        if (!(static_cast<double>(state.observe_pulls()) < floor || remaining < gamma)) {
            arm = best_arm(crm_weighted_ucb(state, t - 1));
        }
        env.sample_into(arm, rng, s);
        state.update(arm, s);
        const double cost = arm == a0 ? 1.0 : gamma;
        run.record(arm, cost, s.reward);
        state.set_beta(crm_beta_update(state.best_intervention_mean(), state.observe_mean(), gamma, t, state.beta()));
        remaining -= cost;
    }
    return run;
}

// Fractional KUBE-style baseline: UCB1 index divided by arm cost, restricted to
// affordable arms, with no side information from observations.
inline PolicyRun run_fkube(const NoBackdoorEnv& env, double budget, double gamma, Rng& rng) {
    const std::size_t m = env.node_count();
    if (!(gamma >= 1.0)) throw config_error("intervention cost gamma must be >= 1");
    const double init_cost = 2.0 * gamma * static_cast<double>(m) + 1.0;
    if (!(budget >= init_cost) || !std::isfinite(budget)) {
        throw config_error("F-KUBE needs B >= 2*gamma*M + 1 = " + std::to_string(init_cost) +
                           " to pull every arm once");
    }
    const std::size_t arms = env.arm_count();
    const std::size_t a0 = env.observe_arm();
    std::vector<std::size_t> counts(arms, 0);
    std::vector<double> sums(arms, 0.0);
    PolicyRun run;
    Sample s;
    double remaining = budget;
    auto pull = [&](std::size_t arm) {
        env.sample_into(arm, rng, s);
        const double cost = arm == a0 ? 1.0 : gamma;
        ++counts[arm];
        sums[arm] += s.reward;
        remaining -= cost;
        run.record(arm, cost, s.reward);
    };
    for (std::size_t arm = 0; arm < arms; ++arm) pull(arm);

    std::vector<ScoredArm> scored;
    scored.reserve(arms);
    while (remaining >= 1.0) {
        const double log_t = std::log(static_cast<double>(run.history.size()));
        scored.clear();
        for (std::size_t arm = 0; arm < arms; ++arm) {
            const double cost = arm == a0 ? 1.0 : gamma;
            if (cost > remaining) continue;
            const double n = static_cast<double>(counts[arm]);
            scored.push_back({arm, (sums[arm] / n + std::sqrt(2.0 * log_t / n)) / cost});
        }
        pull(best_arm(scored));
    }
    return run;
}

}  // namespace causal_bandits
