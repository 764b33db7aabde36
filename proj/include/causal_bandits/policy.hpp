#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "causal_bandits/causal_ucb.hpp"
#include "causal_bandits/cumulative_budgeted.hpp"
#include "causal_bandits/environment.hpp"
#include "causal_bandits/simple_regret.hpp"

namespace causal_bandits {

enum class PolicyKind { ObsAlg, GammaNbAlg, CrmNbAlg, CUcb2, PbAlg, FKube, CUcb };

struct PolicyInfo {
    PolicyKind kind;
    std::string_view key;    // config spelling
    std::string_view label;  // report spelling
    bool budgeted;
    bool needs_no_backdoor;
};

inline constexpr std::array<PolicyInfo, 7> kPolicies{{
    {PolicyKind::ObsAlg, "obs_alg", "OBS-ALG", true, true},
    {PolicyKind::GammaNbAlg, "gamma_nb_alg", "gamma-NB-ALG", true, true},
    {PolicyKind::CrmNbAlg, "crm_nb_alg", "CRM-NB-ALG", true, true},
    {PolicyKind::CUcb2, "cucb2", "C-UCB-2", false, false},
    {PolicyKind::PbAlg, "pb_alg", "PB-ALG", true, true},
    {PolicyKind::FKube, "fkube", "F-KUBE", true, true},
    {PolicyKind::CUcb, "cucb", "C-UCB", false, false},
}};

inline const PolicyInfo& policy_info(PolicyKind kind) {
    for (const auto& info : kPolicies) {
        if (info.kind == kind) return info;
    }
    throw config_error("unknown policy kind");
}

inline PolicyKind policy_kind_from_key(std::string_view key) {
    for (const auto& info : kPolicies) {
        if (info.key == key) return info.kind;
    }
    throw config_error("unknown policy '" + std::string(key) +
                       "' (obs_alg | gamma_nb_alg | crm_nb_alg | cucb2 | pb_alg | fkube | cucb)");
}

// What one trial hands to a policy: budget and gamma for budgeted policies,
// a stopping horizon for the horizon-free ones.
struct PolicyBudget {
    double budget = 0.0;
    double gamma = 1.0;
    std::size_t horizon = 0;
};

// Throws config_error when the policy cannot run on this environment or with
// these parameters, before any sampling.
inline void check_policy(PolicyKind kind, const Environment& env, const PolicyBudget& b) {
    const PolicyInfo& info = policy_info(kind);
    if (info.needs_no_backdoor && !std::holds_alternative<NoBackdoorEnv>(env)) {
        throw config_error(std::string(info.label) + " needs a no_backdoor environment");
    }
    if (!info.budgeted) {
        if (!std::holds_alternative<GeneralCausalEnv>(env)) {
            throw config_error(std::string(info.label) +
                               " needs a general environment with precomputed parent distributions");
        }
        if (b.horizon < 1) throw config_error("horizon must be >= 1");
        return;
    }
    if (!(b.gamma >= 1.0)) throw config_error("gamma must be >= 1");
    const auto& nb = std::get<NoBackdoorEnv>(env);
    const double m = static_cast<double>(nb.node_count());
    switch (kind) {
        case PolicyKind::ObsAlg:
            if (b.budget < 1.0) throw config_error("OBS-ALG needs B >= 1");
            break;
        case PolicyKind::GammaNbAlg:
            if (b.budget < 2.0) throw config_error("gamma-NB-ALG needs B >= 2");
            break;
        case PolicyKind::PbAlg:
            if (b.budget < 1.0 + b.gamma) throw config_error("PB-ALG needs B >= 1 + gamma");
            break;
        case PolicyKind::CrmNbAlg:
            if (!(b.budget > 2.0 * b.gamma * m + 1.0)) throw config_error("CRM-NB-ALG needs B > 2*gamma*M + 1");
            break;
        case PolicyKind::FKube:
            if (b.budget < 2.0 * b.gamma * m + 1.0) throw config_error("F-KUBE needs B >= 2*gamma*M + 1");
            break;
        default:
            break;
    }
}

inline PolicyRun run_policy(PolicyKind kind, const Environment& env, const PolicyBudget& b, Rng& rng) {
    check_policy(kind, env, b);
    switch (kind) {
        case PolicyKind::ObsAlg:
            return run_obs_alg(std::get<NoBackdoorEnv>(env), b.budget, b.gamma, rng);
        case PolicyKind::GammaNbAlg:
            return run_gamma_nb_alg(std::get<NoBackdoorEnv>(env), b.budget, b.gamma, rng);
        case PolicyKind::CrmNbAlg:
            return run_crm_nb_alg(std::get<NoBackdoorEnv>(env), b.budget, b.gamma, rng);
        case PolicyKind::PbAlg:
            return run_pb_alg_budgeted(std::get<NoBackdoorEnv>(env), b.budget, b.gamma, rng);
        case PolicyKind::FKube:
            return run_fkube(std::get<NoBackdoorEnv>(env), b.budget, b.gamma, rng);
        case PolicyKind::CUcb2:
            return run_cucb2(std::get<GeneralCausalEnv>(env), b.horizon, rng);
        case PolicyKind::CUcb:
            return run_cucb_baseline(std::get<GeneralCausalEnv>(env), b.horizon, rng);
    }
    throw config_error("unknown policy kind");
}

}  // namespace causal_bandits
