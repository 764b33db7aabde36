#include <gtest/gtest.h>

#include <set>

#include "test_envs.hpp"

using namespace causal_bandits;
using cb_test::parallel_env;

namespace {

// Direct transcription of the m(p) definition: build I_tau as a set for every
// tau and take the smallest qualifying tau.
std::size_t m_index_oracle(const std::vector<double>& p) {
    const std::size_t m = p.size();
    std::vector<std::size_t> qualifying;
    for (std::size_t tau = 2; tau <= m; ++tau) {
        std::set<std::size_t> rare;
        for (std::size_t i = 0; i < m; ++i) {
            if (std::min(p[i], 1.0 - p[i]) < 1.0 / static_cast<double>(tau)) rare.insert(i);
        }
        if (rare.size() <= tau) qualifying.push_back(tau);
    }
    return qualifying.empty() ? m : qualifying.front();
}

}  // namespace

TEST(NoBackdoorEnv, InterventionForcesValue) {
    const NoBackdoorEnv env = parallel_env(0.02, 0.3);
    const std::size_t arm = NoBackdoorEnv::arm_index(2, 1);  // do(X3=1)
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        for (int r = 0; r < 20; ++r) ASSERT_EQ(env.sample(arm, rng).values[2], 1);
    }
    Rng rng(5);
    EXPECT_EQ(env.sample(Arm::intervene(2, 0), rng).values[2], 0);
}

TEST(NoBackdoorEnv, RejectsUnknownNodeOrValue) {
    const NoBackdoorEnv env = parallel_env(0.02, 0.3);
    Rng rng(1);
    EXPECT_THROW(env.sample(Arm::intervene(50, 1), rng), config_error);
    EXPECT_THROW(env.sample(Arm::intervene(3, 2), rng), config_error);
    EXPECT_THROW(env.sample(Arm::intervene({{0, 1}, {1, 1}}), rng), config_error);
}

TEST(NoBackdoorEnv, ValidatesProbabilitiesAndMeans) {
    EXPECT_THROW(NoBackdoorEnv({0.5, 1.0}, PivotReward{0, 0.6, 0.4}), config_error);
    EXPECT_THROW(NoBackdoorEnv({0.0, 0.5}, PivotReward{0, 0.6, 0.4}), config_error);
    EXPECT_THROW(NoBackdoorEnv({0.5, 0.5}, PivotReward{0, 1.2, 0.4}), config_error);
    EXPECT_THROW(NoBackdoorEnv({0.5, 0.5}, PivotReward{2, 0.6, 0.4}), config_error);
    EXPECT_THROW(NoBackdoorEnv({0.5, 0.5}, TableReward{{0}, {0.1, 0.2, 0.3}}), config_error);
}

TEST(NoBackdoorEnv, PivotTrueMeans) {
    const NoBackdoorEnv env = parallel_env(0.02, 0.3);
    EXPECT_NEAR(env.true_mean(NoBackdoorEnv::arm_index(0, 1)), 0.8, 1e-12);
    EXPECT_NEAR(env.true_mean(env.observe_arm()), 0.5, 1e-12);
    EXPECT_NEAR(env.true_mean(NoBackdoorEnv::arm_index(1, 1)), 0.5, 1e-12);
    EXPECT_NEAR(env.true_mean(NoBackdoorEnv::arm_index(0, 0)), 0.5 - 0.02 * 0.3 / 0.98, 1e-12);
}

TEST(NoBackdoorEnv, DoX2MatchesJointEnumeration) {
    const NoBackdoorEnv env = parallel_env(0.02, 0.3);
    const auto& pivot = std::get<PivotReward>(env.reward());
    // do(X2=1): sum over the joint of (X1, X2) with X2 clamped.
    double oracle = 0.0;
    for (int x1 = 0; x1 <= 1; ++x1) {
        for (int x2 = 0; x2 <= 1; ++x2) {
            const double w = (x1 ? 0.02 : 0.98) * (x2 == 1 ? 1.0 : 0.0);
            oracle += w * (x1 ? pivot.mean_high : pivot.mean_low);
        }
    }
    EXPECT_NEAR(oracle, 0.5, 1e-12);
    EXPECT_NEAR(env.true_mean(NoBackdoorEnv::arm_index(1, 1)), oracle, 1e-12);
}

TEST(NoBackdoorEnv, EpsilonPrimeBalancesObservation) {
    const NoBackdoorEnv env = parallel_env(0.02, 0.3);
    const auto& pivot = std::get<PivotReward>(env.reward());
    EXPECT_NEAR(0.5 - pivot.mean_low, 0.0061224489795918, 1e-12);
}

TEST(NoBackdoorEnv, TableRewardMatchesBruteForce) {
    const std::vector<double> p{0.3, 0.6, 0.2};
    const TableReward table{{2, 0}, {0.1, 0.4, 0.7, 0.9}};  // key = 2*X3 + X1
    const NoBackdoorEnv env(p, table);
    for (std::size_t arm = 0; arm < env.arm_count(); ++arm) {
        double oracle = 0.0;
        for (int mask = 0; mask < 8; ++mask) {
            int x[3] = {mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
            double w = 1.0;
            for (int i = 0; i < 3; ++i) {
                const bool forced = arm < 6 && arm / 2 == static_cast<std::size_t>(i);
                if (forced) w *= x[i] == static_cast<int>(arm % 2) ? 1.0 : 0.0;
                else w *= x[i] ? p[i] : 1 - p[i];
            }
            oracle += w * table.means[2 * x[2] + x[0]];
        }
        EXPECT_NEAR(env.true_mean(arm), oracle, 1e-12) << env.arm_label(arm);
    }
}

TEST(NoBackdoorEnv, MonteCarloAgreesWithEnumeration) {
    const NoBackdoorEnv env({0.3, 0.6, 0.2, 0.5}, TableReward{{0, 2}, {0.1, 0.4, 0.7, 0.9}});
    const int n = 100000;
    for (std::size_t arm = 0; arm < env.arm_count(); ++arm) {
        Rng rng(100 + arm);
        Sample s;
        double sum = 0.0;
        for (int r = 0; r < n; ++r) {
            env.sample_into(arm, rng, s);
            sum += s.reward;
        }
        const double mu = env.true_mean(arm);
        const double v = env.reward_second_moment(arm) - mu * mu;
        EXPECT_NEAR(sum / n, mu, 3 * std::sqrt(v / n)) << env.arm_label(arm);
    }
}

TEST(MIndex, Examples) {
    std::vector<double> exp1(50, 0.5);
    exp1[0] = exp1[1] = 0.02;
    EXPECT_EQ(m_index(exp1), 2u);
    EXPECT_EQ(m_index(std::vector<double>(5, 0.5)), 2u);
    std::vector<double> block(10, 0.5);
    for (int i = 0; i < 4; ++i) block[i] = 0.1;
    EXPECT_EQ(m_index_oracle(block), 4u);
    EXPECT_EQ(m_index(block), 4u);
}

TEST(MIndex, NeedsTwoNodes) {
    EXPECT_THROW(m_index(std::vector<double>{0.3}), config_error);
}

TEST(MIndex, FallsBackToMWhenNothingQualifies) {
    // every node rare at every tau: |I_tau| = 3 > tau for tau = 2, so tau = M = 3
    const std::vector<double> p{0.01, 0.01, 0.01};
    EXPECT_EQ(m_index_oracle(p), 3u);
    EXPECT_EQ(m_index(p), 3u);
}

TEST(MIndex, AgreesWithOracleAndStaysInRange) {
    Rng rng(77);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t m = 2 + rng.next() % 9;
        std::vector<double> p(m);
        for (double& q : p) q = 0.001 + 0.998 * rng.uniform();
        const std::size_t got = m_index(p);
        ASSERT_EQ(got, m_index_oracle(p));
        ASSERT_GE(got, 2u);
        ASSERT_LE(got, m);
    }
}

TEST(MIndex, RaisingAProbabilityToHalfNeverIncreasesIt) {
    // single block of small probabilities, as in the parallel experiments
    for (std::size_t m = 2; m <= 10; ++m) {
        for (std::size_t block = 1; block <= m; ++block) {
            for (double small : {0.01, 0.05, 0.1, 0.2, 0.3, 0.45}) {
                std::vector<double> p(m, 0.5);
                for (std::size_t i = 0; i < block; ++i) p[i] = small;
                const std::size_t base = m_index(p);
                for (std::size_t i = 0; i < m; ++i) {
                    auto q = p;
                    q[i] = 0.5;
                    ASSERT_LE(m_index(q), base) << "m=" << m << " block=" << block << " small=" << small;
                }
            }
        }
    }
}
