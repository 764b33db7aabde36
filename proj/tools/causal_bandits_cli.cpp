// causal-bandits: run the built-in or custom causal bandit experiments,
// inspect environments, list the built-ins.
//
//   causal-bandits list
//   causal-bandits run exp4 --trials 500 --seed 7 --out exp4.csv
//   causal-bandits run my_experiment.json --jobs 4
//   causal-bandits inspect exp4
//
// Exit codes: 0 success, 1 runtime error, 2 configuration error.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "causal_bandits/causal_bandits.hpp"

namespace cb = causal_bandits;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct ConfigFailure {
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigFailure{path + ": cannot open file"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Splits "env.nodes[1].cpt" into {"env", "nodes", "[1]", "cpt"}.
std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::string current;
    for (char c : path) {
        if (c == '.' || c == '[') {
            if (!current.empty()) out.push_back(current);
            current = c == '[' ? "[" : "";
        } else if (c == ']') {
            current += ']';
            out.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

// Walks the raw JSON text and returns the line where the deepest existing
// prefix of `path` starts. Good enough for diagnostics; assumes valid JSON.
std::size_t locate_path(const std::string& text, const std::vector<std::string>& path) {
    struct Frame {
        bool is_array;
        std::size_t index;
        std::string key;
    };
    std::vector<Frame> stack;
    std::size_t best_line = 1;
    std::size_t best_depth = 0;

    auto current_path_matches = [&](std::size_t& depth) {
        // compare stack (excluding root) to the path prefix
        depth = 0;
        for (std::size_t i = 0; i < stack.size(); ++i) {
            const Frame& f = stack[i];
            std::string component = f.is_array ? "[" + std::to_string(f.index) + "]" : f.key;
            if (component.empty()) continue;
            if (depth >= path.size() || path[depth] != component) return false;
            ++depth;
        }
        return true;
    };
    auto mark_value = [&](std::size_t pos) {
        std::size_t depth = 0;
        if (current_path_matches(depth) && depth > best_depth) {
            best_depth = depth;
            best_line = line_of_offset(text, pos);
        }
    };

    stack.push_back({false, 0, ""});
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '"') {
            std::size_t j = i + 1;
            std::string s;
            while (j < text.size() && text[j] != '"') {
                if (text[j] == '\\') ++j;
                if (j < text.size()) s += text[j];
                ++j;
            }
            std::size_t k = j + 1;
            while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
            if (k < text.size() && text[k] == ':' && !stack.back().is_array) {
                stack.back().key = s;
                mark_value(i);
            } else {
                mark_value(i);
            }
            i = j;
        } else if (c == '{' || c == '[') {
            mark_value(i);
            stack.push_back({c == '[', 0, ""});
        } else if (c == '}' || c == ']') {
            if (stack.size() > 1) stack.pop_back();
        } else if (c == ',') {
            if (stack.back().is_array) ++stack.back().index;
        } else if (!std::isspace(static_cast<unsigned char>(c)) && c != ':') {
            mark_value(i);
        }
    }
    return best_line;
}

std::string config_diagnostic(const std::string& file, const std::string& text, const std::string& message) {
    const auto colon = message.find(": ");
    std::size_t line = 1;
    if (colon != std::string::npos) {
        auto path = split_path(message.substr(0, colon));
        if (!path.empty() && path.front() == "config") path.erase(path.begin());
        line = locate_path(text, path);
    }
    return file + ":" + std::to_string(line) + ": " + message;
}

nlohmann::json parse_json_file(const std::string& path, std::string& text) {
    text = read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigFailure{path + ":" + std::to_string(line_of_offset(text, e.byte ? e.byte - 1 : 0)) +
                            ": invalid JSON: " + e.what()};
    }
}

bool looks_like_path(const std::string& target) {
    return target.find('/') != std::string::npos || target.find('\\') != std::string::npos ||
           (target.size() > 5 && target.ends_with(".json"));
}

cb::ExperimentConfig resolve_config(const std::string& target) {
    if (!looks_like_path(target)) {
        try {
            return cb::builtin_experiment(target);
        } catch (const cb::config_error& e) {
            throw ConfigFailure{e.what()};
        }
    }
    std::string text;
    const nlohmann::json doc = parse_json_file(target, text);
    try {
        cb::ExperimentConfig cfg = cb::config_from_json(doc);
        return cfg;
    } catch (const cb::config_error& e) {
        throw ConfigFailure{config_diagnostic(target, text, e.what())};
    } catch (const nlohmann::json::exception& e) {
        throw ConfigFailure{target + ":1: " + e.what()};
    }
}

nlohmann::json resolve_env_spec(const std::string& target) {
    if (!looks_like_path(target)) {
        try {
            return cb::builtin_experiment(target).env;
        } catch (const cb::config_error& e) {
            throw ConfigFailure{e.what()};
        }
    }
    std::string text;
    const nlohmann::json doc = parse_json_file(target, text);
    if (doc.is_object() && doc.contains("env")) return doc["env"];
    return doc;
}

void print_table(std::ostream& out, const cb::ExperimentResult& result) {
    out << "experiment " << result.experiment << " (" << cb::to_string(result.metric) << " vs "
        << cb::to_string(result.sweep) << ")\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-14s %14s %14s %12s %8s\n", "policy", "sweep_value", "mean", "stderr", "trials");
    out << line;
    for (const auto& row : result.rows) {
        std::snprintf(line, sizeof line, "%-14s %14.6g %14.6f %12.6f %8zu%s\n", row.policy.c_str(), row.sweep_value,
                      row.mean, row.stderr_, row.trials, row.single_trial ? "  (single trial: stderr undefined)" : "");
        out << line;
    }
}

int cmd_run(const std::string& target, std::optional<std::size_t> trials, std::optional<std::uint64_t> seed,
            std::string out_path, std::size_t jobs, bool full_scale, const std::string& trials_json, bool quiet) {
    cb::ExperimentConfig cfg = resolve_config(target);
    if (full_scale && cfg.full_scale_trials > 0) cfg.trials = cfg.full_scale_trials;
    if (trials) cfg.trials = *trials;
    if (seed) cfg.base_seed = *seed;
    try {
        cb::validate(cfg);
    } catch (const cb::config_error& e) {
        throw ConfigFailure{target + ": " + e.what()};
    }
    if (out_path.empty()) out_path = (std::filesystem::path("results") / (cfg.name + ".csv")).string();

    cb::RunOptions options;
    options.jobs = jobs;
    options.keep_trials = !trials_json.empty();
    if (!quiet) {
        options.progress = [](std::size_t done, std::size_t total) {
            if (done == total || done % 200 == 0) {
                std::fprintf(stderr, "\r%zu / %zu trials", done, total);
                if (done == total) std::fprintf(stderr, "\n");
            }
        };
    }
    const cb::ExperimentResult result = cb::run_experiment(cfg, options);

    const std::filesystem::path out_file(out_path);
    if (out_file.has_parent_path()) std::filesystem::create_directories(out_file.parent_path());
    std::ofstream csv(out_file, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + out_path);
    csv << cb::to_csv(result);
    if (!trials_json.empty()) {
        std::ofstream dump(trials_json, std::ios::binary);
        if (!dump) throw std::runtime_error("cannot write " + trials_json);
        dump << cb::trials_to_json(result).dump(1) << '\n';
    }
    print_table(std::cout, result);
    for (const auto& row : result.rows) {
        if (row.single_trial) {
            std::fprintf(stderr, "warning: one trial per point; stderr reported as 0\n");
            break;
        }
    }
    if (!quiet) std::fprintf(stderr, "wrote %s\n", out_path.c_str());
    return 0;
}

void print_means(std::ostream& out, const cb::Environment& env) {
    const auto means = cb::true_means(env);
    const double best = *std::max_element(means.begin(), means.end());
    char line[256];
    std::snprintf(line, sizeof line, "%-6s %-22s %12s %12s\n", "arm", "action", "mean", "gap");
    out << line;
    for (std::size_t a = 0; a < means.size(); ++a) {
        std::snprintf(line, sizeof line, "%-6zu %-22s %12.6f %12.6f\n", a, cb::arm_label(env, a).c_str(), means[a],
                      best - means[a]);
        out << line;
    }
}

int cmd_inspect(const std::string& target) {
    const nlohmann::json spec = resolve_env_spec(target);
    cb::Environment env = [&] {
        try {
            return cb::environment_from_json(spec);
        } catch (const cb::config_error& e) {
            throw ConfigFailure{target + ": " + e.what()};
        }
    }();
    std::ostream& out = std::cout;
    if (const auto* nb = std::get_if<cb::NoBackdoorEnv>(&env)) {
        out << "no-backdoor environment: M = " << nb->node_count() << ", min p = " << nb->min_probability();
        if (nb->node_count() >= 2) out << ", m(p) = " << cb::m_index(nb->probabilities());
        out << "\n";
        if (const auto* pivot = std::get_if<cb::PivotReward>(&nb->reward())) {
            out << "reward pivots on " << nb->node_name(pivot->node) << ": mean " << pivot->mean_high << " when 1, "
                << cb::format_number(pivot->mean_low) << " when 0\n";
        }
        out << "every node is no-backdoor (independent parents of Y)\n\n";
        print_means(out, env);
        return 0;
    }
    const auto& general = std::get<cb::GeneralCausalEnv>(env);
    out << "general environment: " << general.node_count() << " nodes, reward " << general.reward().name << " with "
        << general.parent_count() << " parents of domain size " << general.parent_domain() << "\n\n";
    print_means(out, env);

    out << "\nno-backdoor classification\n";
    const auto classes = cb::classify_no_backdoor(general);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        out << "  " << general.node_name(i) << ": " << (classes[i] ? "no backdoor" : "backdoor path to reward")
            << "\n";
    }

    const auto dists = cb::listed_parent_distributions(general);
    const auto zeta = cb::cucb2_zeta(dists);
    out << "\nparent distributions P(";
    for (std::size_t j = 0; j < general.parent_count(); ++j) {
        out << (j ? "," : "") << general.node_name(general.reward().parents[j]);
    }
    out << " | do(a))\n";
    for (std::size_t a = 0; a < dists.size(); ++a) {
        out << "  " << general.arm_label(a) << ":";
        for (double p : dists[a]) out << ' ' << cb::format_number(p);
        out << "   zeta = " << cb::format_number(zeta.zeta[a]) << "\n";
    }
    const auto diag = cb::cucb2_diagnostics(general);
    out << "\nC-UCB-2 constants: delta = " << diag.delta << ", L1 = " << diag.l1 << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal bandit simulations: budgeted and non-budgeted policies on discrete causal environments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a built-in experiment or a JSON experiment config");
    std::string run_target;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::size_t jobs = 0;
    bool full_scale = false;
    bool quiet = false;
    std::string trials_json;
    run->add_option("target", run_target, "Built-in name (see `list`) or path to a config .json")->required();
    run->add_option("--trials", trials, "Number of seeded trials per (policy, sweep value)");
    run->add_option("--seed", seed, "Base seed; trial k uses base_seed + k");
    run->add_option("--out", out_path, "CSV output path (default results/<name>.csv)");
    run->add_option("--jobs", jobs, "Worker threads (default: available parallelism)");
    run->add_flag("--full-scale", full_scale, "Use the larger full-scale trial counts");
    run->add_option("--trials-json", trials_json, "Also dump per-trial results as JSON to this path");
    run->add_flag("-q,--quiet", quiet, "No progress output on stderr");

    auto* inspect = app.add_subcommand("inspect", "Print arm means, gaps, m(p) or parent distributions and zeta");
    std::string inspect_target;
    inspect->add_option("target", inspect_target, "Built-in name, environment .json or config .json")->required();

    auto* list = app.add_subcommand("list", "List the built-in experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*list) {
            for (const auto& name : cb::builtin_names()) std::cout << name << "\n";
            return 0;
        }
        if (*run) return cmd_run(run_target, trials, seed, out_path, jobs, full_scale, trials_json, quiet);
        if (*inspect) return cmd_inspect(inspect_target);
    } catch (const ConfigFailure& e) {
        std::cerr << "config error: " << e.message << "\n";
        return kExitConfig;
    } catch (const cb::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
