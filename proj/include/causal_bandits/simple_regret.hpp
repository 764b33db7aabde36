#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "causal_bandits/no_backdoor_env.hpp"
#include "causal_bandits/policy_run.hpp"

namespace causal_bandits {

// Ratio estimates built from observation rounds only. Per-node quantities are
// stored at the canonical arm index 2i + x.
struct ObservationalEstimates {
    double observe_mean = 0.0;         // mu_0
    std::vector<double> arm_means;     // mu_{i,x}
    std::vector<double> probabilities; // p_{i,x}
    std::size_t rounds = 0;

    double min_probability() const {
        return probabilities.empty() ? 0.0 : *std::min_element(probabilities.begin(), probabilities.end());
    }

    // (p_{1,1}, ..., p_{M,1}), the vector m(p) is evaluated on.
    std::vector<double> node_probabilities() const {
        std::vector<double> out(probabilities.size() / 2);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = probabilities[2 * i + 1];
        return out;
    }
};

class ObservationTally {
public:
    explicit ObservationTally(std::size_t node_count)
        : hits_(2 * node_count, 0), reward_sums_(2 * node_count, 0.0) {}

    void add(std::span<const int> values, double reward) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            const std::size_t slot = 2 * i + static_cast<std::size_t>(values[i]);
            ++hits_[slot];
            reward_sums_[slot] += reward;
        }
        ++rounds_;
        total_reward_ += reward;
    }

    // Zero counts give zero estimates.
    ObservationalEstimates estimates() const {
        ObservationalEstimates out;
        out.rounds = rounds_;
        out.observe_mean = rounds_ ? total_reward_ / static_cast<double>(rounds_) : 0.0;
        out.arm_means.resize(hits_.size());
        out.probabilities.resize(hits_.size());
        for (std::size_t s = 0; s < hits_.size(); ++s) {
            out.arm_means[s] = hits_[s] ? reward_sums_[s] / static_cast<double>(hits_[s]) : 0.0;
            out.probabilities[s] = rounds_ ? static_cast<double>(hits_[s]) / static_cast<double>(rounds_) : 0.0;
        }
        return out;
    }

private:
    std::vector<std::size_t> hits_;
    std::vector<double> reward_sums_;
    std::size_t rounds_ = 0;
    double total_reward_ = 0.0;
};

// history must hold observation rounds only; all samples share one node count.
inline ObservationalEstimates estimate_from_observations(std::span<const Sample> history, std::size_t node_count) {
    ObservationTally tally(node_count);
    for (const Sample& s : history) tally.add(s.values, s.reward);
    return tally.estimates();
}

// Scores over all 2M + 1 arms, observe last.
inline std::size_t recommend(const ObservationalEstimates& est) {
    std::vector<double> scores = est.arm_means;
    scores.push_back(est.observe_mean);
    return best_arm(scores);
}

inline GammaNbBranch gamma_nb_branch(double p_hat, std::size_t m_hat, double gamma) {
    return p_hat * static_cast<double>(m_hat) >= 1.0 / gamma ? GammaNbBranch::ObserveMore
                                                              : GammaNbBranch::InterveneSet;
}

namespace detail {

inline void check_budget_gamma(double budget, double gamma) {
    if (!(gamma >= 1.0)) throw config_error("intervention cost gamma must be >= 1");
    if (!(budget >= 1.0) || !std::isfinite(budget)) throw config_error("budget must be a finite value >= 1");
}

inline std::size_t observe_rounds(NoBackdoorEnv const& env, std::size_t rounds, Rng& rng, ObservationTally& tally,
                                  PolicyRun& run) {
    Sample s;
    const std::size_t a0 = env.observe_arm();
    for (std::size_t r = 0; r < rounds; ++r) {
        env.sample_into(a0, rng, s);
        tally.add(s.values, s.reward);
        run.record(a0, 1.0, s.reward);
    }
    return rounds;
}

// m(p-hat); a single node has no tau in [2, M], so it counts as m = 1.
inline std::size_t estimated_m(const ObservationalEstimates& est) {
    const auto p = est.node_probabilities();
    return p.size() < 2 ? 1 : m_index(p);
}

// A = { a_{i,x} : p-hat_{i,x} < 1 / m-hat }, in canonical order.
inline std::vector<std::size_t> rare_arms(const ObservationalEstimates& est, std::size_t m_hat) {
    std::vector<std::size_t> out;
    const double threshold = 1.0 / static_cast<double>(m_hat);
    for (std::size_t s = 0; s < est.probabilities.size(); ++s) {
        if (est.probabilities[s] < threshold) out.push_back(s);
    }
    return out;
}

// Plays every arm of A `pulls` times and overwrites their estimates with the
// interventional sample means.
inline void intervene_on_set(const NoBackdoorEnv& env, std::span<const std::size_t> set, std::size_t pulls,
                             double gamma, Rng& rng, ObservationalEstimates& est, PolicyRun& run) {
    Sample s;
    for (std::size_t arm : set) {
        double sum = 0.0;
        for (std::size_t r = 0; r < pulls; ++r) {
            env.sample_into(arm, rng, s);
            sum += s.reward;
            run.record(arm, gamma, s.reward);
        }
        est.arm_means[arm] = sum / static_cast<double>(pulls);
    }
}

}  // namespace detail

// OBS-ALG: spend the whole budget on do() and recommend the best estimate.
inline PolicyRun run_obs_alg(const NoBackdoorEnv& env, double budget, double gamma, Rng& rng) {
    detail::check_budget_gamma(budget, gamma);
    PolicyRun run;
    ObservationTally tally(env.node_count());
    detail::observe_rounds(env, static_cast<std::size_t>(std::floor(budget)), rng, tally, run);
    run.chosen_arm = recommend(tally.estimates());
    return run;
}

// gamma-NB-ALG: observe for half the budget, then either keep observing or
// spend the rest intervening on the rarely observed arms, depending on
// whether p-hat * m(p-hat) clears 1 / gamma.
inline PolicyRun run_gamma_nb_alg(const NoBackdoorEnv& env, double budget, double gamma, Rng& rng) {
    detail::check_budget_gamma(budget, gamma);
    if (budget < 2.0) throw config_error("gamma-NB-ALG needs a budget of at least 2");
    PolicyRun run;
    ObservationTally tally(env.node_count());
    const auto total = static_cast<std::size_t>(std::floor(budget));
    const std::size_t first_half = total / 2;
    detail::observe_rounds(env, first_half, rng, tally, run);

    ObservationalEstimates est = tally.estimates();
    const std::size_t m_hat = detail::estimated_m(est);
    GammaNbBranch branch = gamma_nb_branch(est.min_probability(), m_hat, gamma);
    std::vector<std::size_t> set;
    std::size_t pulls = 0;
    if (branch == GammaNbBranch::InterveneSet) {
        set = detail::rare_arms(est, m_hat);
        if (!set.empty()) {
            pulls = static_cast<std::size_t>(std::floor(budget / (2.0 * gamma * static_cast<double>(set.size()))));
        }
        if (pulls == 0) branch = GammaNbBranch::ObserveMore;
    }
    run.branch = branch;
    if (branch == GammaNbBranch::ObserveMore) {
        detail::observe_rounds(env, total - first_half, rng, tally, run);
        est = tally.estimates();
    } else {
        run.candidates = set;
        detail::intervene_on_set(env, set, pulls, gamma, rng, est, run);
    }
    run.chosen_arm = recommend(est);
    return run;
}

// Budgeted PB-ALG: B / (1 + gamma) observations, then the remaining budget
// split evenly over the rarely observed arms.
inline PolicyRun run_pb_alg_budgeted(const NoBackdoorEnv& env, double budget, double gamma, Rng& rng) {
    detail::check_budget_gamma(budget, gamma);
    if (budget < 1.0 + gamma) throw config_error("PB-ALG needs a budget of at least 1 + gamma");
    PolicyRun run;
    ObservationTally tally(env.node_count());
    const auto observations = static_cast<std::size_t>(std::floor(budget / (1.0 + gamma)));
    detail::observe_rounds(env, observations, rng, tally, run);

    ObservationalEstimates est = tally.estimates();
    const std::size_t m_hat = detail::estimated_m(est);
    const std::vector<std::size_t> set = detail::rare_arms(est, m_hat);
    if (!set.empty()) {
        const double remaining = budget - static_cast<double>(observations);
        const auto pulls = static_cast<std::size_t>(std::floor(remaining / (gamma * static_cast<double>(set.size()))));
        if (pulls > 0) {
            run.candidates = set;
            detail::intervene_on_set(env, set, pulls, gamma, rng, est, run);
        }
    }
    run.chosen_arm = recommend(est);
    return run;
}

}  // namespace causal_bandits
