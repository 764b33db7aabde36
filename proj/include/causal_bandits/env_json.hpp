#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "causal_bandits/environment.hpp"

namespace causal_bandits {

namespace json_detail {

using nlohmann::json;

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw config_error(path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw config_error(path + "." + key + ": missing field '" + key + "'");
    return *it;
}

inline double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw config_error(path + ": expected a number");
    return v.get<double>();
}

inline std::size_t index(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw config_error(path + ": expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

inline std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) throw config_error(path + ": expected a string");
    return v.get<std::string>();
}

inline std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) throw config_error(path + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

}  // namespace json_detail

// Bernoulli parameters of a no-backdoor spec. Either an explicit array or the
// compact form {"count": M, "default": q, "low_nodes": [...], "low_value": p}.
inline std::vector<double> no_backdoor_probabilities(const nlohmann::json& spec) {
    using namespace json_detail;
    auto check = [](double q, const std::string& path) {
        if (!(q > 0.0 && q < 1.0)) throw config_error(path + ": probability must lie in (0,1)");
        return q;
    };
    const json& p = field(spec, "p", "env");
    if (p.is_array()) {
        std::vector<double> out = numbers(p, "env.p");
        for (std::size_t i = 0; i < out.size(); ++i) check(out[i], "env.p[" + std::to_string(i) + "]");
        return out;
    }
    const std::size_t count = index(field(p, "count", "env.p"), "env.p.count");
    std::vector<double> out(count, check(number(field(p, "default", "env.p"), "env.p.default"), "env.p.default"));
    if (p.contains("low_nodes")) {
        const double low = check(number(field(p, "low_value", "env.p"), "env.p.low_value"), "env.p.low_value");
        const json& nodes = p["low_nodes"];
        if (!nodes.is_array()) throw config_error("env.p.low_nodes: expected an array");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const std::size_t node = index(nodes[i], "env.p.low_nodes[" + std::to_string(i) + "]");
            if (node >= count) throw config_error("env.p.low_nodes: node " + std::to_string(node) + " out of range");
            out[node] = low;
        }
    }
    return out;
}

// Replaces the smallest Bernoulli parameter(s) of a no-backdoor spec.
inline nlohmann::json with_min_probability(nlohmann::json spec, double value) {
    using namespace json_detail;
    if (text(field(spec, "type", "env"), "env.type") != "no_backdoor") {
        throw config_error("env.type: the min-probability sweep needs a no_backdoor environment");
    }
    json& p = spec["p"];
    if (p.is_object() && p.contains("low_nodes")) {
        p["low_value"] = value;
        return spec;
    }
    std::vector<double> probs = no_backdoor_probabilities(spec);
    if (probs.empty()) throw config_error("env.p: empty");
    const double lowest = *std::min_element(probs.begin(), probs.end());
    for (double& q : probs) {
        if (q == lowest) q = value;
    }
    spec["p"] = probs;
    return spec;
}

// Prefixes constructor errors with a JSON path so callers can point at it.
template <typename Build>
auto with_path(const std::string& path, Build&& build) {
    try {
        return build();
    } catch (const config_error& e) {
        const std::string what = e.what();
        if (what.rfind("env", 0) == 0) throw;
        throw config_error(path + ": " + what);
    }
}

inline NoBackdoorEnv no_backdoor_from_json(const nlohmann::json& spec) {
    using namespace json_detail;
    std::vector<double> p = no_backdoor_probabilities(spec);
    const json& reward = field(spec, "reward", "env");
    const std::string kind = text(field(reward, "kind", "env.reward"), "env.reward.kind");
    if (kind == "pivot") {
        const std::size_t node = index(field(reward, "node", "env.reward"), "env.reward.node");
        if (reward.contains("epsilon")) {
            const double eps = number(reward["epsilon"], "env.reward.epsilon");
            return with_path("env.reward", [&] { return NoBackdoorEnv(p, balanced_pivot_reward(p, node, eps)); });
        }
        PivotReward pivot{node, number(field(reward, "high", "env.reward"), "env.reward.high"),
                          number(field(reward, "low", "env.reward"), "env.reward.low")};
        return with_path("env.reward", [&] { return NoBackdoorEnv(std::move(p), pivot); });
    }
    if (kind == "table") {
        const json& nodes = field(reward, "nodes", "env.reward");
        if (!nodes.is_array()) throw config_error("env.reward.nodes: expected an array");
        TableReward table;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            table.nodes.push_back(index(nodes[i], "env.reward.nodes[" + std::to_string(i) + "]"));
        }
        table.means = numbers(field(reward, "means", "env.reward"), "env.reward.means");
        return with_path("env.reward", [&] { return NoBackdoorEnv(std::move(p), std::move(table)); });
    }
    throw config_error("env.reward.kind: unknown reward kind '" + kind + "' (pivot | table)");
}

inline GeneralCausalEnv general_from_json(const nlohmann::json& spec) {
    using namespace json_detail;
    const json& nodes_json = field(spec, "nodes", "env");
    if (!nodes_json.is_array()) throw config_error("env.nodes: expected an array");
    std::map<std::string, std::size_t> ids;
    std::vector<NodeSpec> nodes;
    auto resolve = [&ids](const json& ref, const std::string& path) -> std::size_t {
        if (ref.is_string()) {
            auto it = ids.find(ref.get<std::string>());
            if (it == ids.end()) {
                throw config_error(path + ": unknown or later node '" + ref.get<std::string>() + "'");
            }
            return it->second;
        }
        return index(ref, path);
    };
    for (std::size_t i = 0; i < nodes_json.size(); ++i) {
        const std::string path = "env.nodes[" + std::to_string(i) + "]";
        const json& n = nodes_json[i];
        NodeSpec node;
        node.name = text(field(n, "name", path), path + ".name");
        if (ids.count(node.name)) throw config_error(path + ".name: duplicate node name '" + node.name + "'");
        node.domain = n.contains("domain") ? static_cast<int>(index(n["domain"], path + ".domain")) : 2;
        if (n.contains("parents")) {
            const json& parents = n["parents"];
            if (!parents.is_array()) throw config_error(path + ".parents: expected an array");
            for (std::size_t j = 0; j < parents.size(); ++j) {
                node.parents.push_back(resolve(parents[j], path + ".parents[" + std::to_string(j) + "]"));
            }
        }
        const json& cpt = field(n, "cpt", path);
        if (!cpt.is_array()) throw config_error(path + ".cpt: expected an array of rows");
        for (std::size_t r = 0; r < cpt.size(); ++r) {
            node.cpt.push_back(numbers(cpt[r], path + ".cpt[" + std::to_string(r) + "]"));
        }
        ids[node.name] = i;
        nodes.push_back(std::move(node));
    }

    const json& reward_json = field(spec, "reward", "env");
    RewardSpec reward;
    if (reward_json.contains("name")) reward.name = text(reward_json["name"], "env.reward.name");
    const json& parents = field(reward_json, "parents", "env.reward");
    if (!parents.is_array()) throw config_error("env.reward.parents: expected an array");
    for (std::size_t j = 0; j < parents.size(); ++j) {
        reward.parents.push_back(resolve(parents[j], "env.reward.parents[" + std::to_string(j) + "]"));
    }
    const std::string kind = text(field(reward_json, "kind", "env.reward"), "env.reward.kind");
    if (kind == "bernoulli_table") {
        reward.model = BernoulliTableReward{numbers(field(reward_json, "means", "env.reward"), "env.reward.means")};
    } else if (kind == "linear_gaussian") {
        reward.model = LinearGaussianReward{numbers(field(reward_json, "theta", "env.reward"), "env.reward.theta"),
                                            number(field(reward_json, "sigma", "env.reward"), "env.reward.sigma")};
    } else {
        throw config_error("env.reward.kind: unknown reward kind '" + kind + "' (bernoulli_table | linear_gaussian)");
    }

    const json& arms_json = field(spec, "arms", "env");
    if (!arms_json.is_array()) throw config_error("env.arms: expected an array");
    std::vector<Arm> arms;
    for (std::size_t a = 0; a < arms_json.size(); ++a) {
        const std::string path = "env.arms[" + std::to_string(a) + "]";
        const json& entry = arms_json[a];
        if (entry == "observe") {
            arms.push_back(Arm::observe());
            continue;
        }
        const json& assignments = field(entry, "do", path);
        if (!assignments.is_object() || assignments.empty()) {
            throw config_error(path + ".do: expected a non-empty object of node: value");
        }
        std::vector<Assignment> list;
        for (const auto& [name, value] : assignments.items()) {
            const std::size_t node = resolve(json(name), path + ".do");
            list.push_back({node, static_cast<int>(index(value, path + ".do." + name))});
        }
        arms.push_back(Arm::intervene(std::move(list)));
    }
    return with_path("env", [&] { return GeneralCausalEnv(std::move(nodes), std::move(reward), std::move(arms)); });
}

inline Environment environment_from_json(const nlohmann::json& spec) {
    using namespace json_detail;
    const std::string type = text(field(spec, "type", "env"), "env.type");
    if (type == "no_backdoor") return no_backdoor_from_json(spec);
    if (type == "general") return general_from_json(spec);
    throw config_error("env.type: unknown environment type '" + type + "' (no_backdoor | general)");
}

}  // namespace causal_bandits
