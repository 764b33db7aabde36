#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "causal_bandits/environment.hpp"
#include "causal_bandits/policy_run.hpp"

namespace causal_bandits {

// max_a mu_a - mu_chosen
inline double simple_regret(const Environment& env, std::size_t chosen_arm) {
    const auto means = true_means(env);
    return *std::max_element(means.begin(), means.end()) - means.at(chosen_arm);
}

// Best single-arm spending plan: max over arms of floor(B / cost_a) * mu_a.
inline double budget_oracle_value(const Environment& env, double budget, double gamma) {
    const auto means = true_means(env);
    double best = 0.0;
    for (std::size_t a = 0; a < means.size(); ++a) {
        best = std::max(best, std::floor(budget / arm_cost(env, a, gamma)) * means[a]);
    }
    return best;
}

inline double expected_gain(const Environment& env, std::span<const Pull> history) {
    const auto means = true_means(env);
    double gain = 0.0;
    for (const Pull& p : history) gain += means.at(p.arm);
    return gain;
}

inline double realized_gain(std::span<const Pull> history) {
    double gain = 0.0;
    for (const Pull& p : history) gain += p.reward;
    return gain;
}

// G_B - sum_t mu_{a_t}
inline double cumulative_regret_budgeted(const Environment& env, std::span<const Pull> history, double budget,
                                         double gamma) {
    return budget_oracle_value(env, budget, gamma) - expected_gain(env, history);
}

// T * max_a mu_a - sum_t mu_{a_t}, with T = history length.
inline double cumulative_regret_horizon(const Environment& env, std::span<const Pull> history) {
    const auto means = true_means(env);
    const double best = *std::max_element(means.begin(), means.end());
    return static_cast<double>(history.size()) * best - expected_gain(env, history);
}

enum class HoeffdingForm {
    Sum,   // P(|S_T - E S_T| >= eps) <= exp(-2 eps^2 / T) per side
    Mean,  // P(|mean_T - mu| >= eps) <= exp(-2 eps^2 T) per side
};

inline double hoeffding_bound(double epsilon, double samples, HoeffdingForm form) {
    const double exponent = form == HoeffdingForm::Sum ? -2.0 * epsilon * epsilon / samples
                                                       : -2.0 * epsilon * epsilon * samples;
    return std::exp(exponent);
}

}  // namespace causal_bandits
