#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "causal_bandits/env_json.hpp"
#include "causal_bandits/metrics.hpp"
#include "causal_bandits/policy.hpp"

namespace causal_bandits {

enum class SweepVariable { Budget, Horizon, Gamma, MinProbability };
enum class Metric { SimpleRegret, CumulativeRegretBudgeted, CumulativeRegretHorizon };

inline std::string_view to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::Budget: return "budget";
        case SweepVariable::Horizon: return "horizon";
        case SweepVariable::Gamma: return "gamma";
        case SweepVariable::MinProbability: return "min_probability";
    }
    return "?";
}

inline std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::SimpleRegret: return "simple_regret";
        case Metric::CumulativeRegretBudgeted: return "cumulative_regret_budgeted";
        case Metric::CumulativeRegretHorizon: return "cumulative_regret_horizon";
    }
    return "?";
}

struct PolicySpec {
    PolicyKind kind;
    std::optional<double> gamma;  // overrides the experiment's gamma

    std::string label() const { return std::string(policy_info(kind).label); }
};

struct ExperimentConfig {
    std::string name;
    nlohmann::json env;
    std::vector<PolicySpec> policies;
    SweepVariable sweep = SweepVariable::Budget;
    std::vector<double> grid;
    Metric metric = Metric::SimpleRegret;
    double budget = 0.0;
    double gamma = 1.0;
    std::size_t horizon = 0;
    std::size_t trials = 1;
    std::size_t full_scale_trials = 0;  // 0: same as trials
    std::uint64_t base_seed = 1;
};

struct TrialResult {
    std::uint64_t seed = 0;
    std::string policy;
    double sweep_value = 0.0;
    std::vector<std::size_t> pull_counts;
    double total_cost = 0.0;
    std::size_t rounds = 0;
    double regret = 0.0;           // from true means of pulled / chosen arms
    double realized_regret = 0.0;  // from realized rewards
    std::optional<std::size_t> chosen_arm;
};

struct AggregateResult {
    std::string policy;
    double sweep_value = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t trials = 0;
    bool single_trial = false;  // stderr undefined, reported as 0
};

struct ExperimentResult {
    std::string experiment;
    SweepVariable sweep = SweepVariable::Budget;
    Metric metric = Metric::SimpleRegret;
    std::uint64_t base_seed = 0;
    std::vector<AggregateResult> rows;
    std::vector<TrialResult> trials;  // filled when RunOptions::keep_trials
};

struct RunOptions {
    std::size_t jobs = 0;  // 0: hardware concurrency
    bool keep_trials = false;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

// Mean and standard error (sample std / sqrt(n)).
inline AggregateResult aggregate(std::span<const double> regrets) {
    AggregateResult out;
    out.trials = regrets.size();
    if (regrets.empty()) return out;
    double sum = 0.0;
    for (double r : regrets) sum += r;
    out.mean = sum / static_cast<double>(regrets.size());
    if (regrets.size() < 2) {
        out.single_trial = true;
        return out;
    }
    double sq = 0.0;
    for (double r : regrets) sq += (r - out.mean) * (r - out.mean);
    const double n = static_cast<double>(regrets.size());
    out.stderr_ = std::sqrt(sq / (n - 1.0)) / std::sqrt(n);
    return out;
}

namespace detail {

struct SweepPoint {
    Environment env;
    double value;
};

inline Environment env_for(const ExperimentConfig& cfg, double value) {
    if (cfg.sweep == SweepVariable::MinProbability) return environment_from_json(with_min_probability(cfg.env, value));
    return environment_from_json(cfg.env);
}

inline PolicyBudget budget_for(const ExperimentConfig& cfg, const PolicySpec& policy, double value) {
    PolicyBudget b{cfg.budget, policy.gamma.value_or(cfg.gamma), cfg.horizon};
    switch (cfg.sweep) {
        case SweepVariable::Budget: b.budget = value; break;
        case SweepVariable::Horizon: b.horizon = static_cast<std::size_t>(value); break;
        case SweepVariable::Gamma: b.gamma = value; break;
        case SweepVariable::MinProbability: break;
    }
    return b;
}

inline bool is_simple_regret_policy(PolicyKind k) {
    return k == PolicyKind::ObsAlg || k == PolicyKind::GammaNbAlg || k == PolicyKind::PbAlg;
}

inline TrialResult run_trial(const ExperimentConfig& cfg, const PolicySpec& policy, const SweepPoint& point,
                             std::uint64_t seed) {
    const PolicyBudget b = budget_for(cfg, policy, point.value);
    Rng rng(seed);
    const PolicyRun run = run_policy(policy.kind, point.env, b, rng);
    TrialResult t;
    t.seed = seed;
    t.policy = policy.label();
    t.sweep_value = point.value;
    t.pull_counts = run.pull_counts(arm_count(point.env));
    t.total_cost = run.spent;
    t.rounds = run.history.size();
    t.chosen_arm = run.chosen_arm;
    switch (cfg.metric) {
        case Metric::SimpleRegret:
            t.regret = simple_regret(point.env, run.chosen_arm.value());
            t.realized_regret = t.regret;
            break;
        case Metric::CumulativeRegretBudgeted: {
            const double oracle = budget_oracle_value(point.env, b.budget, b.gamma);
            t.regret = oracle - expected_gain(point.env, run.history);
            t.realized_regret = oracle - realized_gain(run.history);
            break;
        }
        case Metric::CumulativeRegretHorizon: {
            const auto means = true_means(point.env);
            const double best = *std::max_element(means.begin(), means.end());
            t.regret = cumulative_regret_horizon(point.env, run.history);
            t.realized_regret = static_cast<double>(run.history.size()) * best - realized_gain(run.history);
            break;
        }
    }
    return t;
}

inline std::vector<SweepPoint> build_points(const ExperimentConfig& cfg) {
    std::vector<SweepPoint> points;
    points.reserve(cfg.grid.size());
    for (double v : cfg.grid) points.push_back({env_for(cfg, v), v});
    return points;
}

}  // namespace detail

// Rejects anything that would fail mid-run: bad grid, unknown environment,
// policy/environment or policy/metric mismatches, unaffordable budgets.
inline void validate(const ExperimentConfig& cfg) {
    if (cfg.policies.empty()) throw config_error("policies: at least one policy is required");
    if (cfg.trials < 1) throw config_error("trials: must be >= 1");
    if (cfg.grid.empty()) throw config_error("sweep.values: empty grid");
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        if (!(cfg.grid[i] > 0.0) || !std::isfinite(cfg.grid[i])) {
            throw config_error("sweep.values: grid values must be positive");
        }
        if (i > 0 && !(cfg.grid[i] > cfg.grid[i - 1])) {
            throw config_error("sweep.values: grid values must be strictly increasing");
        }
        if (cfg.sweep == SweepVariable::Horizon && cfg.grid[i] != std::floor(cfg.grid[i])) {
            throw config_error("sweep.values: horizons must be integers");
        }
        if (cfg.sweep == SweepVariable::MinProbability && !(cfg.grid[i] < 1.0)) {
            throw config_error("sweep.values: probabilities must lie in (0,1)");
        }
    }
    const auto points = detail::build_points(cfg);
    for (const PolicySpec& policy : cfg.policies) {
        const PolicyInfo& info = policy_info(policy.kind);
        switch (cfg.metric) {
            case Metric::SimpleRegret:
                if (!detail::is_simple_regret_policy(policy.kind)) {
                    throw config_error("metric: " + policy.label() + " does not recommend an arm");
                }
                break;
            case Metric::CumulativeRegretBudgeted:
                if (!info.budgeted) throw config_error("metric: " + policy.label() + " is not a budgeted policy");
                break;
            case Metric::CumulativeRegretHorizon:
                if (info.budgeted) throw config_error("metric: " + policy.label() + " is a budgeted policy");
                break;
        }
        for (const auto& point : points) {
            check_policy(policy.kind, point.env, detail::budget_for(cfg, policy, point.value));
        }
    }
}

// Runs every (policy, sweep value, trial) with seed base_seed + trial index
// and folds the results in that fixed order, so the output does not depend on
// the number of workers or their completion order.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {}) {
    validate(cfg);
    const auto points = detail::build_points(cfg);
    const std::size_t per_point = cfg.trials;
    const std::size_t total = cfg.policies.size() * points.size() * per_point;
    std::vector<TrialResult> results(total);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    auto worker = [&] {
        for (std::size_t task = next++; task < total; task = next++) {
            const std::size_t trial = task % per_point;
            const std::size_t point = (task / per_point) % points.size();
            const std::size_t policy = task / (per_point * points.size());
            results[task] = detail::run_trial(cfg, cfg.policies[policy], points[point], cfg.base_seed + trial);
            const std::size_t finished = ++done;
            if (options.progress) options.progress(finished, total);
        }
    };
    std::size_t jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, std::max<std::size_t>(total, 1));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    ExperimentResult out;
    out.experiment = cfg.name;
    out.sweep = cfg.sweep;
    out.metric = cfg.metric;
    out.base_seed = cfg.base_seed;
    std::vector<double> regrets(per_point);
    for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
        for (std::size_t s = 0; s < points.size(); ++s) {
            const std::size_t offset = (p * points.size() + s) * per_point;
            for (std::size_t k = 0; k < per_point; ++k) regrets[k] = results[offset + k].regret;
            AggregateResult row = aggregate(regrets);
            row.policy = cfg.policies[p].label();
            row.sweep_value = points[s].value;
            out.rows.push_back(std::move(row));
        }
    }
    if (options.keep_trials) out.trials = std::move(results);
    return out;
}

// Shortest round-trip decimal form; never locale-formatted.
inline std::string format_number(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

inline constexpr std::string_view kCsvHeader = "experiment,policy,sweep_name,sweep_value,metric,mean,stderr,trials,base_seed";

inline std::string to_csv(const ExperimentResult& result) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const AggregateResult& row : result.rows) {
        out += result.experiment;
        out += ',';
        out += row.policy;
        out += ',';
        out += to_string(result.sweep);
        out += ',';
        out += format_number(row.sweep_value);
        out += ',';
        out += to_string(result.metric);
        out += ',';
        out += format_number(row.mean);
        out += ',';
        out += format_number(row.stderr_);
        out += ',';
        out += std::to_string(row.trials);
        out += ',';
        out += std::to_string(result.base_seed);
        out += '\n';
    }
    return out;
}

inline nlohmann::json trials_to_json(const ExperimentResult& result) {
    nlohmann::json out = nlohmann::json::array();
    for (const TrialResult& t : result.trials) {
        nlohmann::json row{{"seed", t.seed},
                           {"policy", t.policy},
                           {"sweep_value", t.sweep_value},
                           {"pull_counts", t.pull_counts},
                           {"total_cost", t.total_cost},
                           {"rounds", t.rounds},
                           {"regret", t.regret},
                           {"realized_regret", t.realized_regret}};
        if (t.chosen_arm) row["chosen_arm"] = *t.chosen_arm;
        out.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config JSON

inline ExperimentConfig config_from_json(const nlohmann::json& doc) {
    using namespace json_detail;
    ExperimentConfig cfg;
    if (!doc.is_object()) throw config_error("config: expected an object");
    cfg.name = doc.contains("name") ? text(doc["name"], "name") : std::string("custom");
    if (cfg.name.find_first_of(",\n\"") != std::string::npos) throw config_error("name: must not contain , or quotes");
    cfg.env = field(doc, "env", "config");
    environment_from_json(cfg.env);  // surfaces env errors with their own paths

    const json& policies = field(doc, "policies", "config");
    if (!policies.is_array()) throw config_error("policies: expected an array");
    for (std::size_t i = 0; i < policies.size(); ++i) {
        const std::string path = "policies[" + std::to_string(i) + "]";
        const json& p = policies[i];
        if (p.is_string()) {
            cfg.policies.push_back({policy_kind_from_key(p.get<std::string>()), std::nullopt});
        } else {
            PolicySpec spec{policy_kind_from_key(text(field(p, "kind", path), path + ".kind")), std::nullopt};
            if (p.contains("gamma")) spec.gamma = number(p["gamma"], path + ".gamma");
            cfg.policies.push_back(spec);
        }
    }

    const std::string metric = text(field(doc, "metric", "config"), "metric");
    if (metric == "simple_regret") cfg.metric = Metric::SimpleRegret;
    else if (metric == "cumulative_regret_budgeted") cfg.metric = Metric::CumulativeRegretBudgeted;
    else if (metric == "cumulative_regret_horizon") cfg.metric = Metric::CumulativeRegretHorizon;
    else throw config_error("metric: unknown metric '" + metric + "'");

    if (doc.contains("budget")) cfg.budget = number(doc["budget"], "budget");
    if (doc.contains("gamma")) cfg.gamma = number(doc["gamma"], "gamma");
    if (doc.contains("horizon")) cfg.horizon = index(doc["horizon"], "horizon");

    const json& sweep = field(doc, "sweep", "config");
    const std::string variable = text(field(sweep, "variable", "sweep"), "sweep.variable");
    if (variable == "budget") cfg.sweep = SweepVariable::Budget;
    else if (variable == "horizon") cfg.sweep = SweepVariable::Horizon;
    else if (variable == "gamma") cfg.sweep = SweepVariable::Gamma;
    else if (variable == "min_probability") cfg.sweep = SweepVariable::MinProbability;
    else throw config_error("sweep.variable: unknown sweep variable '" + variable + "'");
    cfg.grid = numbers(field(sweep, "values", "sweep"), "sweep.values");

    cfg.trials = doc.contains("trials") ? index(doc["trials"], "trials") : 1;
    cfg.full_scale_trials = doc.contains("full_scale_trials") ? index(doc["full_scale_trials"], "full_scale_trials") : 0;
    if (doc.contains("base_seed")) cfg.base_seed = doc["base_seed"].get<std::uint64_t>();
    validate(cfg);
    return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json policies = nlohmann::json::array();
    for (const PolicySpec& p : cfg.policies) {
        nlohmann::json entry{{"kind", std::string(policy_info(p.kind).key)}};
        if (p.gamma) entry["gamma"] = *p.gamma;
        policies.push_back(entry);
    }
    return {{"name", cfg.name},
            {"env", cfg.env},
            {"policies", policies},
            {"metric", std::string(to_string(cfg.metric))},
            {"budget", cfg.budget},
            {"gamma", cfg.gamma},
            {"horizon", cfg.horizon},
            {"sweep", {{"variable", std::string(to_string(cfg.sweep))}, {"values", cfg.grid}}},
            {"trials", cfg.trials},
            {"full_scale_trials", cfg.full_scale_trials},
            {"base_seed", cfg.base_seed}};
}

// ---------------------------------------------------------------------------
// Built-in experiments

// M = 50 parallel binary parents; X1 and X2 rare, reward pivots on X1.
inline nlohmann::json parallel_pivot_env(double low_p, double epsilon) {
    return {{"type", "no_backdoor"},
            {"p", {{"count", 50}, {"default", 0.5}, {"low_nodes", {0, 1}}, {"low_value", low_p}}},
            {"reward", {{"kind", "pivot"}, {"node", 0}, {"epsilon", epsilon}}}};
}

// X1 -> X2, X1 -> W1, X2 -> W2, (W1, W2) -> Y with Y = 0.25 W1 + 0.25 W2 + N(0, 0.01^2).
inline nlohmann::json backdoor_graph_env() {
    using nlohmann::json;
    return {{"type", "general"},
            {"nodes", json::array({
                          {{"name", "X1"}, {"domain", 2}, {"parents", json::array()}, {"cpt", {{0.45, 0.55}}}},
                          {{"name", "X2"}, {"domain", 2}, {"parents", {"X1"}}, {"cpt", {{0.55, 0.45}, {0.45, 0.55}}}},
                          {{"name", "W1"}, {"domain", 2}, {"parents", {"X1"}}, {"cpt", {{0.46, 0.54}, {0.54, 0.46}}}},
                          {{"name", "W2"}, {"domain", 2}, {"parents", {"X2"}}, {"cpt", {{0.52, 0.48}, {0.48, 0.52}}}},
                      })},
            {"reward",
             {{"name", "Y"}, {"parents", {"W1", "W2"}}, {"kind", "linear_gaussian"}, {"theta", {0.25, 0.25}}, {"sigma", 0.01}}},
            {"arms", json::array({{{"do", {{"X1", 0}}}},
                                  {{"do", {{"X1", 1}}}},
                                  {{"do", {{"X2", 0}}}},
                                  {{"do", {{"X2", 1}}}}})}};
}

inline std::vector<std::string> builtin_names() { return {"exp1", "exp2a", "exp2b", "exp3", "exp4"}; }

inline ExperimentConfig builtin_experiment(const std::string& name) {
    ExperimentConfig cfg;
    cfg.name = name;
    cfg.base_seed = 1;
    if (name == "exp1") {
        cfg.env = parallel_pivot_env(0.02, 0.3);
        cfg.policies = {{PolicyKind::ObsAlg, {}}, {PolicyKind::PbAlg, {}}};
        cfg.metric = Metric::SimpleRegret;
        cfg.budget = 100;
        cfg.gamma = 1;
        cfg.sweep = SweepVariable::MinProbability;
        cfg.grid = {0.02, 0.1, 0.2, 0.3};
        cfg.trials = 300;
        cfg.full_scale_trials = 1000;
    } else if (name == "exp2a" || name == "exp2b") {
        cfg.env = parallel_pivot_env(0.02, 0.3);
        cfg.policies = {{PolicyKind::GammaNbAlg, {}}, {PolicyKind::PbAlg, {}}};
        cfg.metric = Metric::SimpleRegret;
        cfg.budget = 3000;
        cfg.gamma = 60;
        if (name == "exp2a") {
            cfg.sweep = SweepVariable::Budget;
            cfg.grid = {500, 1000, 1500, 2000, 2500, 3000};
        } else {
            cfg.sweep = SweepVariable::Gamma;
            cfg.grid = {1, 15, 30, 45, 60, 75};
        }
        cfg.trials = 300;
        cfg.full_scale_trials = 1000;
    } else if (name == "exp3") {
        cfg.env = parallel_pivot_env(0.02, 0.5);
        cfg.policies = {{PolicyKind::CrmNbAlg, {}}, {PolicyKind::FKube, {}}};
        cfg.metric = Metric::CumulativeRegretBudgeted;
        cfg.gamma = 1.5;
        cfg.sweep = SweepVariable::Budget;
        cfg.grid = {1000, 2000, 5000, 10000};
        cfg.trials = 50;
        cfg.full_scale_trials = 50;
    } else if (name == "exp4") {
        cfg.env = backdoor_graph_env();
        cfg.policies = {{PolicyKind::CUcb2, {}}, {PolicyKind::CUcb, {}}};
        cfg.metric = Metric::CumulativeRegretHorizon;
        cfg.sweep = SweepVariable::Horizon;
        for (int t = 5; t <= 100; t += 5) cfg.grid.push_back(t);
        cfg.horizon = 100;
        cfg.trials = 500;
        cfg.full_scale_trials = 500;
    } else {
        throw config_error("unknown builtin experiment '" + name + "' (exp1 | exp2a | exp2b | exp3 | exp4)");
    }
    return cfg;
}

}  // namespace causal_bandits
