#include <gtest/gtest.h>

#include "test_envs.hpp"

using namespace causal_bandits;
using cb_test::parallel_env;

namespace {

void check_ledger(const NbState& state) {
    for (std::size_t i = 0; i < state.node_count(); ++i) {
        std::size_t side = 0;
        for (std::size_t x = 0; x < 2; ++x) {
            const std::size_t slot = 2 * i + x;
            ASSERT_GE(state.effective_pulls(slot), state.pulls(slot));
            side += state.effective_pulls(slot) - state.pulls(slot);
        }
        ASSERT_EQ(side, state.observe_pulls());
    }
}

}  // namespace

TEST(NbState, ObservationFeedsEveryMatchingSlot) {
    NbState state(2, 1.0);
    state.update(state.observe_arm(), Sample{{1, 0}, 1.0});
    EXPECT_EQ(state.effective_pulls(1), 1u);  // (1,1)
    EXPECT_EQ(state.effective_pulls(2), 1u);  // (2,0)
    EXPECT_EQ(state.pulls(1), 0u);
    EXPECT_EQ(state.pulls(2), 0u);
    EXPECT_EQ(state.observe_pulls(), 1u);
    EXPECT_DOUBLE_EQ(state.mean(1), 1.0);

    state.update(1, Sample{{1, 1}, 0.0});
    EXPECT_EQ(state.pulls(1), 1u);
    EXPECT_EQ(state.effective_pulls(1), 2u);
    EXPECT_EQ(state.effective_pulls(3), 0u);  // interventions leave other slots alone
    EXPECT_DOUBLE_EQ(state.mean(1), 0.5);
    EXPECT_DOUBLE_EQ(state.spent(), 2.0);
}

TEST(NbState, LedgerHoldsAfterEveryRound) {
    const NoBackdoorEnv env = parallel_env(0.1, 0.3);
    NbState state(env.node_count(), 2.0);
    Rng rng(17);
    Sample s;
    for (int r = 0; r < 2000; ++r) {
        const std::size_t arm = rng.next() % env.arm_count();
        env.sample_into(arm, rng, s);
        crm_update_estimates(state, arm, s);
        check_ledger(state);
    }
}

TEST(CrmWeightedUcb, FormulaExamples) {
    // mu_{1,1} = 0.8 over 50 effective pulls, t = 100, gamma = 1.5
    NbState state(1, 1.5);
    for (int r = 0; r < 49; ++r) state.update(1, Sample{{1}, r < 40 ? 1.0 : 0.0});
    state.update(state.observe_arm(), Sample{{1}, 0.0});
    state.update(0, Sample{{0}, 0.0});
    ASSERT_EQ(state.effective_pulls(1), 50u);
    EXPECT_NEAR(crm_weighted_ucb(state, 100)[1], 1.10559, 1e-5);

    // mu_0 = 0.5 over 50 observations
    NbState obs(1, 1.5);
    for (int r = 0; r < 50; ++r) obs.update(obs.observe_arm(), Sample{{r % 2}, r < 25 ? 1.0 : 0.0});
    EXPECT_NEAR(crm_weighted_ucb(obs, 100)[2], 1.35839, 1e-5);
}

TEST(CrmWeightedUcb, RadiusVanishesWithManyPulls) {
    NbState state(1, 2.0);
    state.update(state.observe_arm(), Sample{{0}, 0.0});
    for (int r = 0; r < 2000000; ++r) state.update(1, Sample{{1}, r % 4 == 0 ? 1.0 : 0.0});
    const double radius = std::sqrt(8.0 * std::log(100.0) / 2000000.0);  // ~0.0043
    EXPECT_NEAR(crm_weighted_ucb(state, 100)[1], (state.mean(1) + radius) / 2.0, 1e-12);
    EXPECT_LT(radius / 2.0, 2.5e-3);
}

TEST(CrmBetaUpdate, Examples) {
    EXPECT_NEAR(crm_beta_update(1.0, 0.5, 1.0, 100, 1.0), 2.14597, 1e-5);
    EXPECT_DOUBLE_EQ(crm_beta_update(0.6, 0.5, 1.5, 100, 1.7), 1.7);  // 0.4 < 0.5
    EXPECT_DOUBLE_EQ(crm_beta_update(1.0, 1.0, 1.0, 100, 1.7), 1.7);  // equal, not below
    EXPECT_NEAR(crm_beta_update(0.5 + 1e-9, 0.5, 1.0, 10, 1.0), 1.51743, 1e-5);
    EXPECT_NEAR(crm_beta_update(1.0, 0.0, 1.0, 1000000, 1.0), 2.0 * std::sqrt(2.0), 1e-12);
}

TEST(CrmNbAlg, RejectsUnaffordableRoundRobin) {
    const NoBackdoorEnv env({0.5, 0.5}, PivotReward{0, 0.9, 0.1});
    Rng rng(1);
    EXPECT_THROW(run_crm_nb_alg(env, 2 * 2.0 * 2 + 1, 2.0, rng), config_error);
    EXPECT_NO_THROW(run_crm_nb_alg(env, 2 * 2.0 * 2 + 2, 2.0, rng));
    EXPECT_THROW(run_fkube(env, 2 * 2.0 * 2, 2.0, rng), config_error);
}

TEST(CrmNbAlg, RoundRobinComesFirst) {
    const NoBackdoorEnv env = parallel_env(0.1, 0.4);
    Rng rng(5);
    const PolicyRun run = run_crm_nb_alg(env, 1000.0, 1.5, rng);
    for (std::size_t a = 0; a < env.arm_count(); ++a) ASSERT_EQ(run.history[a].arm, a);
}

TEST(CrmNbAlg, ObservesWhenInterventionsAreUnaffordable) {
    // gamma = 3: after the round robin (cost 13) B_t = 1.5 < gamma, so every
    // remaining pull must be a_0 even though interventions look better.
    const NoBackdoorEnv env({0.5, 0.5}, PivotReward{0, 1.0, 0.0});
    Rng rng(2);
    const PolicyRun run = run_crm_nb_alg(env, 14.5, 3.0, rng);
    ASSERT_EQ(run.history.size(), env.arm_count() + 1);
    EXPECT_EQ(run.history.back().arm, env.observe_arm());
    EXPECT_LE(run.spent, 14.5);
}

TEST(CrmNbAlg, SpendAndRoundCountBounds) {
    const NoBackdoorEnv env = parallel_env(0.1, 0.4);
    for (double gamma : {1.0, 1.5, 4.0}) {
        Rng rng(9);
        const double budget = 2000.0;
        const PolicyRun run = run_crm_nb_alg(env, budget, gamma, rng);
        EXPECT_LE(run.spent, budget + 1e-9);
        EXPECT_GT(run.spent, budget - 1.0);
        const double t = static_cast<double>(run.history.size());
        EXPECT_LE(budget / gamma, t);
        EXPECT_LE(t, budget);
    }
}

TEST(FKube, StopsWhenNothingIsAffordable) {
    const NoBackdoorEnv env = parallel_env(0.1, 0.4);
    Rng rng(4);
    const PolicyRun run = run_fkube(env, 1000.0, 1.5, rng);
    EXPECT_LE(run.spent, 1000.0);
    EXPECT_GT(run.spent, 999.0);
    for (std::size_t a = 0; a < env.arm_count(); ++a) ASSERT_EQ(run.history[a].arm, a);
}

TEST(FKube, UnitCostIsPlainUcb) {
    // With gamma = 1 every arm costs 1, so the index is UCB1's. Replay it.
    const NoBackdoorEnv env({0.3, 0.6}, PivotReward{1, 0.7, 0.2});
    Rng rng(12);
    const PolicyRun run = run_fkube(env, 200.0, 1.0, rng);
    ASSERT_EQ(run.history.size(), 200u);
    std::vector<double> n(env.arm_count(), 0.0), sum(env.arm_count(), 0.0);
    for (std::size_t t = 0; t < run.history.size(); ++t) {
        if (t >= env.arm_count()) {
            std::size_t best = 0;
            double best_score = -1.0;
            for (std::size_t a = 0; a < n.size(); ++a) {
                const double score = sum[a] / n[a] + std::sqrt(2.0 * std::log(static_cast<double>(t)) / n[a]);
                if (score > best_score) {
                    best_score = score;
                    best = a;
                }
            }
            ASSERT_EQ(run.history[t].arm, best) << "round " << t;
        }
        n[run.history[t].arm] += 1.0;
        sum[run.history[t].arm] += run.history[t].reward;
    }
}

TEST(CrmNbAlg, Deterministic) {
    const NoBackdoorEnv env = parallel_env(0.1, 0.4);
    Rng a(3), b(3);
    const PolicyRun x = run_crm_nb_alg(env, 800.0, 1.5, a);
    const PolicyRun y = run_crm_nb_alg(env, 800.0, 1.5, b);
    ASSERT_EQ(x.history.size(), y.history.size());
    for (std::size_t i = 0; i < x.history.size(); ++i) ASSERT_EQ(x.history[i].arm, y.history[i].arm);
}
