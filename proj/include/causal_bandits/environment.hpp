#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "causal_bandits/general_env.hpp"
#include "causal_bandits/no_backdoor_env.hpp"

namespace causal_bandits {

using Environment = std::variant<NoBackdoorEnv, GeneralCausalEnv>;

inline std::size_t arm_count(const Environment& env) {
    return std::visit([](const auto& e) { return e.arm_count(); }, env);
}

inline const Arm& arm_at(const Environment& env, std::size_t index) {
    return std::visit([index](const auto& e) -> const Arm& { return e.arm(index); }, env);
}

inline std::string arm_label(const Environment& env, std::size_t index) {
    return std::visit([index](const auto& e) { return e.arm_label(index); }, env);
}

inline double arm_cost(const Environment& env, std::size_t index, double gamma) {
    return arm_at(env, index).is_observe() ? 1.0 : gamma;
}

inline double true_mean(const Environment& env, std::size_t arm_index) {
    return std::visit([arm_index](const auto& e) { return e.true_mean(arm_index); }, env);
}

inline std::vector<double> true_means(const Environment& env) {
    return std::visit([](const auto& e) { return e.true_means(); }, env);
}

inline double reward_variance(const Environment& env, std::size_t arm_index) {
    const double mean = true_mean(env, arm_index);
    const double second = std::visit([arm_index](const auto& e) { return e.reward_second_moment(arm_index); }, env);
    return second - mean * mean;
}

inline Sample sample(const Environment& env, std::size_t arm_index, Rng& rng) {
    return std::visit([&](const auto& e) { return e.sample(arm_index, rng); }, env);
}

inline std::optional<std::size_t> observe_arm(const Environment& env) {
    const std::size_t n = arm_count(env);
    for (std::size_t a = 0; a < n; ++a) {
        if (arm_at(env, a).is_observe()) return a;
    }
    return std::nullopt;
}

}  // namespace causal_bandits
