#include "fedsb/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "fedsb/errors.hpp"

namespace fedsb {

namespace {

std::string trim(std::string s) {
    auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(key + ": expected a number, got '" + value + "'");
    }
    return out;
}

std::size_t to_size(const std::string& key, const std::string& value) {
    std::size_t out = 0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(key + ": expected a nonnegative integer, got '" + value + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "on" || value == "1") return true;
    if (value == "false" || value == "off" || value == "0") return false;
    throw ParseError(key + ": expected true/false, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) parts.push_back(trim(item));
    return parts;
}

std::vector<double> to_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& p : split_list(value)) out.push_back(to_double(key, p));
    return out;
}

std::vector<std::size_t> to_size_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    for (const std::string& p : split_list(value)) out.push_back(to_size(key, p));
    return out;
}

BudgetSpec to_budget(const std::string& key, const std::string& value) {
    BudgetSpec b;
    b.token = value;
    if (value == "OFF") {
        b.off = true;
        return b;
    }
    if (!value.empty() && value.back() == 'B') {
        b.in_batches = true;
        b.value = to_size(key, value.substr(0, value.size() - 1));
        if (b.value < 1) throw ParseError(key + ": batch multiple must be at least 1");
        return b;
    }
    b.value = to_size(key, value);
    if (b.value < 1) throw ParseError(key + ": sample budget must be at least 1");
    return b;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("line " + std::to_string(lineno) + ": expected key=value, got '" +
                             line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key)) throw ParseError("duplicate key '" + key + "'");
        kv[key] = value;
    }

    static const std::set<std::string> known = {
        "rounds",          "epsilon",        "smoothing_enabled", "budget_enabled",
        "budget_samples",  "batch_size",     "optimizer",         "eta",
        "beta1",           "beta2",          "stability_epsilon", "aggregation",
        "layer_sizes",     "master_seed",    "class_count",       "feature_dim",
        "domain_angles_deg", "domain_sizes", "noise_sigma",       "cluster_radius",
        "out_dir",         "epsilon_grid",   "s_grid",            "repeats",
        "quick",
    };
    for (const auto& [key, value] : kv) {
        if (!known.count(key)) throw ParseError("unknown key '" + key + "'");
    }

    RunConfig cfg;
    cfg.budget = {false, false, 1920, "1920"};
    cfg.s_grid = {to_budget("s_grid", "30B"), to_budget("s_grid", "45B"),
                  to_budget("s_grid", "60B")};

    auto has = [&kv](const char* k) { return kv.count(k) != 0; };
    auto get = [&kv](const char* k) { return kv.at(k); };

    if (has("class_count")) {
        cfg.task.class_count = static_cast<int>(to_size("class_count", get("class_count")));
    }
    if (has("feature_dim")) cfg.task.feature_dim = to_size("feature_dim", get("feature_dim"));
    if (has("domain_angles_deg")) {
        cfg.task.domain_angles_deg = to_double_list("domain_angles_deg", get("domain_angles_deg"));
    }
    if (has("domain_sizes")) cfg.task.domain_sizes = to_size_list("domain_sizes", get("domain_sizes"));
    if (has("noise_sigma")) cfg.task.noise_sigma = to_double("noise_sigma", get("noise_sigma"));
    if (has("cluster_radius")) cfg.task.cluster_radius = to_double("cluster_radius", get("cluster_radius"));

    if (has("rounds")) cfg.fed.rounds = to_size("rounds", get("rounds"));
    if (has("epsilon")) cfg.fed.epsilon = SmoothingCoefficient(to_double("epsilon", get("epsilon")));
    if (has("smoothing_enabled")) {
        cfg.fed.smoothing_enabled = to_bool("smoothing_enabled", get("smoothing_enabled"));
    }
    if (has("batch_size")) cfg.fed.batch_size = to_size("batch_size", get("batch_size"));
    if (has("budget_samples")) cfg.budget = to_budget("budget_samples", get("budget_samples"));
    if (has("budget_enabled")) {
        const bool enabled = to_bool("budget_enabled", get("budget_enabled"));
        if (!enabled) cfg.budget.off = true;
    }
    if (has("optimizer")) {
        const std::string v = get("optimizer");
        if (v == "adam") cfg.fed.optimizer.kind = OptimizerKind::adam;
        else if (v == "sgd") cfg.fed.optimizer.kind = OptimizerKind::sgd;
        else throw ParseError("optimizer: expected adam or sgd, got '" + v + "'");
    }
    if (has("eta")) cfg.fed.optimizer.eta = to_double("eta", get("eta"));
    if (has("beta1")) cfg.fed.optimizer.beta1 = to_double("beta1", get("beta1"));
    if (has("beta2")) cfg.fed.optimizer.beta2 = to_double("beta2", get("beta2"));
    if (has("stability_epsilon")) {
        cfg.fed.optimizer.stability_epsilon = to_double("stability_epsilon", get("stability_epsilon"));
    }
    if (has("aggregation")) {
        const std::string v = get("aggregation");
        if (v == "uniform") cfg.fed.aggregation = Aggregation::uniform;
        else if (v == "weighted") cfg.fed.aggregation = Aggregation::weighted;
        else throw ParseError("aggregation: expected uniform or weighted, got '" + v + "'");
    }
    if (has("layer_sizes")) cfg.fed.layer_sizes = to_size_list("layer_sizes", get("layer_sizes"));
    if (has("master_seed")) {
        cfg.fed.master_seed = static_cast<std::uint64_t>(to_size("master_seed", get("master_seed")));
    }

    if (has("out_dir")) cfg.out_dir = get("out_dir");
    if (has("epsilon_grid")) cfg.epsilon_grid = to_double_list("epsilon_grid", get("epsilon_grid"));
    if (has("s_grid")) {
        cfg.s_grid.clear();
        for (const std::string& tok : split_list(get("s_grid"))) {
            cfg.s_grid.push_back(to_budget("s_grid", tok));
        }
    }
    if (has("repeats")) cfg.repeats = to_size("repeats", get("repeats"));
    if (has("quick")) cfg.quick = to_bool("quick", get("quick"));

    if (cfg.fed.layer_sizes.empty()) {
        cfg.fed.layer_sizes = {cfg.task.feature_dim, 16,
                               static_cast<std::size_t>(cfg.task.class_count)};
    }
    cfg.fed.budget_enabled = !cfg.budget.off;
    if (!cfg.budget.off) cfg.fed.budget_samples = cfg.budget.resolve(cfg.fed.batch_size);

    cfg.task.validate();
    cfg.fed.validate();
    if (cfg.repeats < 1) throw ConfigError("repeats: must be at least 1");
    if (cfg.epsilon_grid.empty()) throw ConfigError("epsilon_grid: must not be empty");
    if (cfg.s_grid.empty()) throw ConfigError("s_grid: must not be empty");
    for (double e : cfg.epsilon_grid) {
        if (!(e >= 0.0 && e <= 1.0)) {
            throw ConfigError("epsilon_grid: every entry must be in [0, 1]");
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << file.rdbuf();
    return parse_config(buf.str());
}

} // namespace fedsb
