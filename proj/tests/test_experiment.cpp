#include <gtest/gtest.h>

#include <algorithm>

#include "test_envs.hpp"

using namespace causal_bandits;
using nlohmann::json;

namespace {

ExperimentConfig small_exp4(std::size_t trials) {
    ExperimentConfig cfg = builtin_experiment("exp4");
    cfg.grid = {5, 10, 20};
    cfg.trials = trials;
    return cfg;
}

json small_config_json() {
    return {{"name", "tiny"},
            {"env", parallel_pivot_env(0.1, 0.3)},
            {"policies", {"obs_alg", {{"kind", "pb_alg"}, {"gamma", 2.0}}}},
            {"metric", "simple_regret"},
            {"budget", 200},
            {"gamma", 1},
            {"sweep", {{"variable", "budget"}, {"values", {100, 200}}}},
            {"trials", 4},
            {"base_seed", 7}};
}

RunOptions workers(std::size_t jobs, bool keep_trials = false) {
    RunOptions o;
    o.jobs = jobs;
    o.keep_trials = keep_trials;
    return o;
}

std::string config_error_of(const json& doc) {
    try {
        config_from_json(doc);
    } catch (const config_error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Aggregate, MeanAndStandardError) {
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const AggregateResult a = aggregate(xs);
    EXPECT_DOUBLE_EQ(a.mean, 2.5);
    // sample sd = sqrt(5/3)
    EXPECT_NEAR(a.stderr_, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_EQ(a.trials, 4u);
    EXPECT_FALSE(a.single_trial);
}

TEST(Aggregate, SingleTrialFlagsStderr) {
    const std::vector<double> one{0.7};
    const AggregateResult a = aggregate(one);
    EXPECT_DOUBLE_EQ(a.mean, 0.7);
    EXPECT_EQ(a.stderr_, 0.0);
    EXPECT_TRUE(a.single_trial);
}

TEST(Csv, HeaderAndRowShape) {
    const ExperimentResult r = run_experiment(small_exp4(3), workers(2));
    const std::string csv = to_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 3);
    EXPECT_NE(csv.find("exp4,C-UCB-2,horizon,5,cumulative_regret_horizon,"), std::string::npos);
    EXPECT_NE(csv.find(",3,1\n"), std::string::npos);
}

TEST(FormatNumber, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(3000), "3000");
    EXPECT_EQ(format_number(0.0061224489795918364), "0.006122448979591836");
}

TEST(RunExperiment, ByteIdenticalAcrossRunsAndWorkerCounts) {
    const ExperimentConfig cfg = small_exp4(20);
    const std::string a = to_csv(run_experiment(cfg, workers(1)));
    const std::string b = to_csv(run_experiment(cfg, workers(1)));
    const std::string c = to_csv(run_experiment(cfg, workers(4)));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
}

TEST(RunExperiment, TrialSeedsAreBasePlusIndex) {
    ExperimentConfig cfg = small_exp4(5);
    cfg.base_seed = 40;
    const ExperimentResult r = run_experiment(cfg, workers(3, true));
    ASSERT_EQ(r.trials.size(), 2u * 3u * 5u);
    for (std::size_t i = 0; i < r.trials.size(); ++i) EXPECT_EQ(r.trials[i].seed, 40 + i % 5);

    // Trial 3 on its own gives the same regret.
    const auto env = std::get<GeneralCausalEnv>(environment_from_json(cfg.env));
    Rng rng(43);
    const PolicyRun run = run_cucb2(env, 5, rng);
    EXPECT_DOUBLE_EQ(r.trials[3].regret, cumulative_regret_horizon(env, run.history));
}

TEST(RunExperiment, SweepsApplyToTheRightParameter) {
    ExperimentConfig cfg = builtin_experiment("exp2b");
    cfg.grid = {1, 30};
    cfg.trials = 2;
    const ExperimentResult r = run_experiment(cfg, workers(1, true));
    for (const TrialResult& t : r.trials) {
        EXPECT_LE(t.total_cost, 3000.0);
        if (t.policy == "PB-ALG") {
            // floor(3000 / (1 + gamma)) observations
            const std::size_t obs = t.pull_counts.back();
            EXPECT_EQ(obs, t.sweep_value == 1 ? 1500u : 96u);
        }
    }
    ExperimentConfig p = builtin_experiment("exp1");
    p.trials = 1;
    const auto points = detail::build_points(p);
    EXPECT_DOUBLE_EQ(std::get<NoBackdoorEnv>(points[2].env).probability(0, 1), 0.2);
    EXPECT_DOUBLE_EQ(std::get<NoBackdoorEnv>(points[2].env).probability(1, 1), 0.2);
}

TEST(ConfigJson, RoundTrip) {
    const ExperimentConfig cfg = config_from_json(small_config_json());
    EXPECT_EQ(cfg.name, "tiny");
    ASSERT_EQ(cfg.policies.size(), 2u);
    EXPECT_EQ(cfg.policies[1].kind, PolicyKind::PbAlg);
    EXPECT_EQ(cfg.policies[1].gamma, 2.0);
    EXPECT_EQ(cfg.base_seed, 7u);
    const ExperimentConfig again = config_from_json(config_to_json(cfg));
    EXPECT_EQ(to_csv(run_experiment(cfg, workers(1))), to_csv(run_experiment(again, workers(1))));
}

TEST(ConfigJson, RejectsBadInputBeforeRunning) {
    json doc = small_config_json();
    doc["policies"] = {"cucb2"};
    EXPECT_NE(config_error_of(doc).find("C-UCB-2"), std::string::npos);

    doc = small_config_json();
    doc["policies"] = {"crm_nb_alg"};
    EXPECT_NE(config_error_of(doc).find("does not recommend"), std::string::npos);

    doc = small_config_json();
    doc["sweep"]["values"] = {200, 100};
    EXPECT_NE(config_error_of(doc).find("strictly increasing"), std::string::npos);

    doc = small_config_json();
    doc["sweep"]["values"] = {-5};
    EXPECT_NE(config_error_of(doc).find("positive"), std::string::npos);

    doc = small_config_json();
    doc["policies"] = {"pb_alg"};
    doc["gamma"] = 150;
    EXPECT_NE(config_error_of(doc).find("PB-ALG needs"), std::string::npos);

    doc = small_config_json();
    doc["metric"] = "regret";
    EXPECT_NE(config_error_of(doc).find("metric"), std::string::npos);

    doc = small_config_json();
    doc["env"]["p"]["low_value"] = 1.5;
    EXPECT_FALSE(config_error_of(doc).empty());
}

TEST(Builtins, AllValidAndNamed) {
    for (const std::string& name : builtin_names()) {
        ExperimentConfig cfg = builtin_experiment(name);
        EXPECT_NO_THROW(validate(cfg)) << name;
        EXPECT_EQ(cfg.name, name);
    }
    EXPECT_THROW(builtin_experiment("exp9"), config_error);
}

TEST(Builtins, ParametersMatchTheExperiments) {
    const ExperimentConfig e1 = builtin_experiment("exp1");
    EXPECT_EQ(e1.grid.front(), 0.02);
    EXPECT_EQ(e1.grid.back(), 0.3);
    EXPECT_EQ(e1.budget, 100.0);
    EXPECT_EQ(e1.gamma, 1.0);

    const auto env2 = std::get<NoBackdoorEnv>(environment_from_json(builtin_experiment("exp2a").env));
    const auto& pivot = std::get<PivotReward>(env2.reward());
    EXPECT_NEAR(0.5 - pivot.mean_low, 0.02 * 0.3 / 0.98, 1e-15);
    EXPECT_EQ(m_index(env2.probabilities()), 2u);
    EXPECT_NEAR(env2.true_mean(env2.observe_arm()), 0.5, 1e-12);

    const ExperimentConfig e3 = builtin_experiment("exp3");
    const auto env3 = std::get<NoBackdoorEnv>(environment_from_json(e3.env));
    EXPECT_NEAR(env3.true_mean(NoBackdoorEnv::arm_index(0, 1)), 1.0, 1e-12);
    EXPECT_EQ(e3.gamma, 1.5);

    const ExperimentConfig e4 = builtin_experiment("exp4");
    EXPECT_EQ(e4.grid.size(), 20u);
    EXPECT_EQ(e4.trials, 500u);
    const auto env4 = std::get<GeneralCausalEnv>(environment_from_json(e4.env));
    const double table[] = {0.2595, 0.2405, 0.244, 0.254};
    for (std::size_t a = 0; a < 4; ++a) EXPECT_NEAR(env4.true_mean(a), table[a], 1e-9);
}
