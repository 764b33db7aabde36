#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "causal_bandits/error.hpp"

namespace causal_bandits {

struct Assignment {
    std::size_t node;
    int value;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

enum class ArmKind { Observe, Intervene };

// One allowed action: pure observation do(), or a hard intervention
// do(X = x) over one or more distinct nodes.
class Arm {
public:
    static Arm observe() { return Arm{}; }

    static Arm intervene(std::vector<Assignment> assignments) {
        if (assignments.empty()) {
            throw config_error("intervention arm needs at least one assignment");
        }
        for (std::size_t i = 0; i < assignments.size(); ++i) {
            for (std::size_t j = i + 1; j < assignments.size(); ++j) {
                if (assignments[i].node == assignments[j].node) {
                    throw config_error("intervention assigns node " +
                                       std::to_string(assignments[i].node) + " twice");
                }
            }
        }
        Arm arm;
        arm.kind_ = ArmKind::Intervene;
        arm.assignments_ = std::move(assignments);
        return arm;
    }

    static Arm intervene(std::size_t node, int value) { return intervene({{node, value}}); }

    ArmKind kind() const { return kind_; }
    bool is_observe() const { return kind_ == ArmKind::Observe; }
    std::span<const Assignment> assignments() const { return assignments_; }

    std::optional<int> forced_value(std::size_t node) const {
        auto it = std::find_if(assignments_.begin(), assignments_.end(),
                               [node](const Assignment& a) { return a.node == node; });
        if (it == assignments_.end()) return std::nullopt;
        return it->value;
    }

    // "do()" or "do(X1=0, X3=1)" given a node naming function.
    template <typename NameFn>
    std::string label(NameFn&& name_of) const {
        std::string out = "do(";
        for (std::size_t i = 0; i < assignments_.size(); ++i) {
            if (i != 0) out += ", ";
            out += name_of(assignments_[i].node);
            out += '=';
            out += std::to_string(assignments_[i].value);
        }
        out += ')';
        return out;
    }

    friend bool operator==(const Arm&, const Arm&) = default;

private:
    Arm() = default;

    ArmKind kind_ = ArmKind::Observe;
    std::vector<Assignment> assignments_;
};

// Realized values of all non-reward nodes plus the reward.
struct Sample {
    std::vector<int> values;
    double reward = 0.0;
};

}  // namespace causal_bandits
