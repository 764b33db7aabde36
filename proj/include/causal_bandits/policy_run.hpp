#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace causal_bandits {

struct Pull {
    std::size_t arm;
    double cost;
    double reward;
};

enum class GammaNbBranch { ObserveMore, InterveneSet };

// Outcome of one policy run: the full pull sequence, plus the recommended arm
// for simple-regret policies.
struct PolicyRun {
    std::vector<Pull> history;
    std::optional<std::size_t> chosen_arm;
    double spent = 0.0;
    std::optional<GammaNbBranch> branch;
    std::vector<std::size_t> candidates;  // the intervention set A, when one was formed

    void record(std::size_t arm, double cost, double reward) {
        history.push_back({arm, cost, reward});
        spent += cost;
    }

    std::vector<std::size_t> pull_counts(std::size_t arm_count) const {
        std::vector<std::size_t> counts(arm_count, 0);
        for (const Pull& p : history) ++counts[p.arm];
        return counts;
    }
};

struct ScoredArm {
    std::size_t canonical_index;
    double score;
};

// Highest score; ties go to the lowest canonical index, so the answer does not
// depend on the order candidates are listed in.
inline std::size_t best_arm(std::span<const ScoredArm> scored) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    double best_score = -std::numeric_limits<double>::infinity();
    for (const ScoredArm& s : scored) {
        if (s.score > best_score || (s.score == best_score && s.canonical_index < best)) {
            best = s.canonical_index;
            best_score = s.score;
        }
    }
    return best;
}

inline std::size_t best_arm(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < scores.size(); ++a) {
        if (scores[a] > scores[best]) best = a;
    }
    return best;
}

}  // namespace causal_bandits
