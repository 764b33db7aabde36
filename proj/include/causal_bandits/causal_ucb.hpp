#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "causal_bandits/general_env.hpp"
#include "causal_bandits/policy_run.hpp"

namespace causal_bandits {

// c_y = min_a P(y | do(a)) and zeta_a = sum_{c_y > 0} P(y | do(a)) / c_y.
struct ZetaTable {
    std::vector<double> floor;  // c_y
    std::vector<double> zeta;   // zeta_a
};

inline ZetaTable cucb2_zeta(std::span<const std::vector<double>> parent_dists) {
    if (parent_dists.empty()) throw config_error("zeta needs at least one arm");
    const std::size_t tuples = parent_dists.front().size();
    ZetaTable out;
    out.floor.assign(tuples, 1.0);
    for (const auto& dist : parent_dists) {
        if (dist.size() != tuples) throw config_error("parent distributions over different tuple sets");
        for (std::size_t y = 0; y < tuples; ++y) {
            if ((dist[y] > 0.0) != (parent_dists.front()[y] > 0.0)) {
                throw config_error("parent distributions do not share one support");
            }
            out.floor[y] = std::min(out.floor[y], dist[y]);
        }
    }
    out.zeta.reserve(parent_dists.size());
    for (const auto& dist : parent_dists) {
        double z = 0.0;
        for (std::size_t y = 0; y < tuples; ++y) {
            if (out.floor[y] > 0.0) z += dist[y] / out.floor[y];
        }
        out.zeta.push_back(z);
    }
    return out;
}

inline std::vector<std::vector<double>> listed_parent_distributions(const GeneralCausalEnv& env) {
    std::vector<std::vector<double>> dists;
    dists.reserve(env.arm_count());
    for (std::size_t a = 0; a < env.arm_count(); ++a) {
        const auto d = env.parent_distribution(a);
        dists.emplace_back(d.begin(), d.end());
    }
    return dists;
}

// Reward statistics per parent tuple; shared by C-UCB-2 and C-UCB.
class TupleStats {
public:
    explicit TupleStats(std::size_t tuples) : counts_(tuples, 0), sums_(tuples, 0.0) {}

    void update(std::size_t tuple, double reward) {
        ++counts_[tuple];
        sums_[tuple] += reward;
        ++rounds_;
    }

    std::size_t tuple_count() const { return counts_.size(); }
    std::size_t count(std::size_t tuple) const { return counts_[tuple]; }
    std::size_t rounds() const { return rounds_; }
    double mean(std::size_t tuple) const {
        return counts_[tuple] ? sums_[tuple] / static_cast<double>(counts_[tuple]) : 0.0;
    }

private:
    std::vector<std::size_t> counts_;
    std::vector<double> sums_;
    std::size_t rounds_ = 0;
};

// sqrt(log(k^n t^2 / 2) / t), the per-unit-zeta confidence radius of C-UCB-2.
inline double cucb2_radius(std::size_t tuple_count, std::size_t t) {
    const double td = static_cast<double>(t);
    return std::sqrt(std::max(0.0, std::log(static_cast<double>(tuple_count) * td * td / 2.0)) / td);
}

inline std::vector<double> cucb2_scores(const TupleStats& stats, std::span<const std::vector<double>> parent_dists,
                                        const ZetaTable& zeta, std::size_t t) {
    const double radius = cucb2_radius(stats.tuple_count(), t);
    std::vector<double> scores(parent_dists.size());
    for (std::size_t a = 0; a < parent_dists.size(); ++a) {
        double estimate = 0.0;
        for (std::size_t y = 0; y < stats.tuple_count(); ++y) estimate += stats.mean(y) * parent_dists[a][y];
        scores[a] = estimate + radius * zeta.zeta[a];
    }
    return scores;
}

// Per-tuple optimism weighted by each arm's parent distribution.
inline std::vector<double> cucb_scores(const TupleStats& stats, std::span<const std::vector<double>> parent_dists,
                                       std::size_t t) {
    const double log_t = std::log(static_cast<double>(t));
    std::vector<double> optimistic(stats.tuple_count());
    for (std::size_t y = 0; y < optimistic.size(); ++y) {
        const double n = static_cast<double>(std::max<std::size_t>(1, stats.count(y)));
        optimistic[y] = std::min(1.0, stats.mean(y) + std::sqrt(2.0 * log_t / n));
    }
    std::vector<double> scores(parent_dists.size());
    for (std::size_t a = 0; a < parent_dists.size(); ++a) {
        double total = 0.0;
        for (std::size_t y = 0; y < optimistic.size(); ++y) total += optimistic[y] * parent_dists[a][y];
        scores[a] = total;
    }
    return scores;
}

namespace detail {

template <typename ScoreFn>
PolicyRun run_tuple_ucb(const GeneralCausalEnv& env, std::size_t horizon, Rng& rng, ScoreFn&& score) {
    TupleStats stats(env.tuple_count());
    PolicyRun run;
    run.history.reserve(horizon);
    Sample s;
    for (std::size_t t = 0; t < horizon; ++t) {
        const std::size_t arm = t < env.arm_count() ? t : best_arm(score(stats, t));
        env.sample_into(arm, rng, s);
        stats.update(env.parent_tuple(s.values), s.reward);
        run.record(arm, 1.0, s.reward);
    }
    return run;
}

}  // namespace detail

// C-UCB-2: one UCB per intervention, built from shared per-tuple estimates with
// a zeta-scaled radius. Horizon-free; `horizon` only says when to stop.
inline PolicyRun run_cucb2(const GeneralCausalEnv& env, std::size_t horizon, Rng& rng) {
    const auto dists = listed_parent_distributions(env);
    const ZetaTable zeta = cucb2_zeta(dists);
    return detail::run_tuple_ucb(env, horizon, rng, [&](const TupleStats& stats, std::size_t t) {
        return cucb2_scores(stats, dists, zeta, t);
    });
}

inline PolicyRun run_cucb_baseline(const GeneralCausalEnv& env, std::size_t horizon, Rng& rng) {
    const auto dists = listed_parent_distributions(env);
    return detail::run_tuple_ucb(env, horizon, rng, [&](const TupleStats& stats, std::size_t t) {
        return cucb_scores(stats, dists, t);
    });
}

// Instance constants from the C-UCB-2 regret bound. Reported only.
struct Cucb2Diagnostics {
    double delta = 0.0;              // smallest positive c_y
    std::size_t l1 = 0;
    std::vector<std::size_t> l2;     // per arm; 0 for optimal arms
    std::vector<std::size_t> l;      // max(l1, l2)
};

inline Cucb2Diagnostics cucb2_diagnostics(const GeneralCausalEnv& env) {
    const auto dists = listed_parent_distributions(env);
    const ZetaTable zeta = cucb2_zeta(dists);
    const double kn = static_cast<double>(env.tuple_count());
    Cucb2Diagnostics out;
    out.delta = 1.0;
    for (double c : zeta.floor) {
        if (c > 0.0) out.delta = std::min(out.delta, c);
    }
    constexpr std::size_t kSearchCap = std::size_t{1} << 40;
    auto first_t = [](auto&& holds) {
        std::size_t t = 1;
        while (!holds(t) && t < kSearchCap) t *= 2;
        std::size_t lo = t / 2, hi = t;  // holds(hi), first crossing in (lo, hi]
        while (hi - lo > 1) {
            const std::size_t mid = lo + (hi - lo) / 2;
            (holds(mid) ? hi : lo) = mid;
        }
        return hi;
    };
    out.l1 = first_t([&](std::size_t t) {
        const double td = static_cast<double>(t);
        return td >= 2.0 * std::log(kn * td * td) / (out.delta * out.delta);
    });
    const auto means = env.true_means();
    const double best = *std::max_element(means.begin(), means.end());
    for (std::size_t a = 0; a < means.size(); ++a) {
        const double gap = best - means[a];
        std::size_t l2 = 0;
        if (gap > 0.0) {
            l2 = first_t([&](std::size_t t) {
                const double td = static_cast<double>(t);
                return td >= 4.0 * std::log(kn * td * td / 2.0) * zeta.zeta[a] * zeta.zeta[a] / (gap * gap);
            });
        }
        out.l2.push_back(l2);
        out.l.push_back(std::max(out.l1, l2));
    }
    return out;
}

}  // namespace causal_bandits
