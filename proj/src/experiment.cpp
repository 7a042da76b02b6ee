#include "fedsb/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fedsb/errors.hpp"
#include "fedsb/rng.hpp"

namespace fedsb {

std::string format_double17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

struct Cell {
    std::string id;
    FedConfig fed;
};

std::string format_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// 10x scale-down for CI; floors keep every cell at one round and one step.
RunConfig apply_quick(RunConfig cfg) {
    if (!cfg.quick) return cfg;
    cfg.fed.rounds = std::max<std::size_t>(1, cfg.fed.rounds / 10);
    for (std::size_t& n : cfg.task.domain_sizes) {
        n = std::max<std::size_t>(static_cast<std::size_t>(cfg.task.class_count), n / 10);
    }
    return cfg;
}

std::size_t quick_budget(const RunConfig& cfg, std::size_t samples) {
    if (!cfg.quick) return samples;
    return std::max(cfg.fed.batch_size, samples / 10);
}

FedConfig toggled(const RunConfig& cfg, bool smoothing, bool budget) {
    FedConfig fed = cfg.fed;
    fed.smoothing_enabled = smoothing;
    fed.budget_enabled = budget;
    if (budget) fed.budget_samples = quick_budget(cfg, fed.budget_samples);
    return fed;
}

std::vector<Cell> ablation_cells(const RunConfig& cfg) {
    return {
        {"none", toggled(cfg, false, false)},
        {"budget", toggled(cfg, false, true)},
        {"smoothing", toggled(cfg, true, false)},
        {"smoothing+budget", toggled(cfg, true, true)},
    };
}

std::vector<Cell> sensitivity_cells(const RunConfig& cfg) {
    std::vector<Cell> cells;
    for (double e : cfg.epsilon_grid) {
        FedConfig fed = toggled(cfg, true, false);
        fed.epsilon = SmoothingCoefficient(e);
        cells.push_back({"eps=" + std::string(format_short(e)), std::move(fed)});
    }
    for (const BudgetSpec& s : cfg.s_grid) {
        if (s.off) throw ConfigError("s_grid: OFF is not a sweep value");
        FedConfig fed = toggled(cfg, false, true);
        fed.budget_samples = quick_budget(cfg, s.resolve(cfg.fed.batch_size));
        cells.push_back({"S=" + s.token, std::move(fed)});
    }
    return cells;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream file(tmp, std::ios::binary);
        if (!file) throw IoError("cannot open for writing: " + tmp.string());
        file << content;
        if (!file.flush()) throw IoError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

GridOutcome run_grid(const RunConfig& raw_cfg, const std::string& prefix,
                     const std::vector<Cell>& cells) {
    const RunConfig cfg = apply_quick(raw_cfg);

    GridOutcome out;
    // (cell, held_out) -> summed final accuracy over seeds, in first-seen order.
    std::map<std::string, std::vector<std::pair<std::string, double>>> cell_sums;

    for (const Cell& cell : cells) {
        auto& sums = cell_sums[cell.id];
        for (std::size_t s = 0; s < cfg.repeats; ++s) {
            const std::uint64_t run_seed =
                mix_seed(mix_seed(cfg.fed.master_seed, seed_salt::run), s);
            const std::vector<DomainDataset> task = generate_task(cfg.task, run_seed);

            FedConfig fed = cell.fed;
            fed.rounds = cfg.fed.rounds; // cells were built before the quick scale-down
            fed.master_seed = run_seed;
            const ExperimentResult result = run_experiment(task, fed);

            for (const HeldOutRun& run : result.runs) {
                for (const RoundReport& report : run.rounds) {
                    for (const ClientRoundStats& c : report.clients) {
                        out.rows.push_back({cell.id, s, run.held_out_id, report.round_index,
                                            c.client_id, c.steps_taken, c.mean_local_loss,
                                            c.nll_part, c.smooth_part,
                                            report.heldout_accuracy});
                    }
                }
                auto it = std::find_if(sums.begin(), sums.end(),
                                       [&](const auto& p) { return p.first == run.held_out_id; });
                if (it == sums.end()) {
                    sums.emplace_back(run.held_out_id, run.final_accuracy);
                } else {
                    it->second += run.final_accuracy;
                }
            }
        }
    }

    for (const Cell& cell : cells) {
        CellSummary summary;
        summary.cell = cell.id;
        double total = 0.0;
        for (const auto& [dom, sum] : cell_sums[cell.id]) {
            const double mean = sum / static_cast<double>(cfg.repeats);
            summary.domain_means.emplace_back(dom, mean);
            total += mean;
        }
        summary.average = total / static_cast<double>(summary.domain_means.size());
        out.summary.push_back(std::move(summary));
    }

    std::ostringstream csv;
    csv << kMetricsCsvHeader << "\n";
    for (const MetricsRow& r : out.rows) {
        csv << r.cell << "," << r.seed_index << "," << r.held_out << "," << r.round << ","
            << r.client_id << "," << r.steps << "," << format_double17(r.local_loss) << ","
            << format_double17(r.nll) << "," << format_double17(r.smooth) << ","
            << format_double17(r.global_acc) << "\n";
    }

    std::ostringstream json;
    json << "{\n";
    for (std::size_t i = 0; i < out.summary.size(); ++i) {
        const CellSummary& s = out.summary[i];
        json << "  \"" << json_escape(s.cell) << "\": {";
        for (const auto& [dom, mean] : s.domain_means) {
            json << "\"" << json_escape(dom) << "\": " << format_double17(mean) << ", ";
        }
        json << "\"ave\": " << format_double17(s.average) << "}";
        json << (i + 1 < out.summary.size() ? ",\n" : "\n");
    }
    json << "}\n";

    std::ostringstream table;
    {
        std::size_t cell_width = 4;
        for (const CellSummary& s : out.summary) cell_width = std::max(cell_width, s.cell.size());
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-*s", static_cast<int>(cell_width), "cell");
        table << buf;
        for (const auto& [dom, mean] : out.summary.front().domain_means) {
            std::snprintf(buf, sizeof(buf), "  %8s", dom.c_str());
            table << buf;
        }
        table << "      Ave.\n";
        for (const CellSummary& s : out.summary) {
            std::snprintf(buf, sizeof(buf), "%-*s", static_cast<int>(cell_width), s.cell.c_str());
            table << buf;
            for (const auto& [dom, mean] : s.domain_means) {
                std::snprintf(buf, sizeof(buf), "  %8.4f", mean);
                table << buf;
            }
            std::snprintf(buf, sizeof(buf), "  %8.4f\n", s.average);
            table << buf;
        }
    }

    out.csv_path = cfg.out_dir / (prefix + "_metrics.csv");
    out.json_path = cfg.out_dir / (prefix + "_summary.json");
    out.table_path = cfg.out_dir / (prefix + "_summary.txt");
    write_file_atomic(out.csv_path, csv.str());
    write_file_atomic(out.json_path, json.str());
    write_file_atomic(out.table_path, table.str());
    return out;
}

} // namespace

GridOutcome run_once(const RunConfig& cfg) {
    return run_grid(cfg, "run",
                    {{"run", toggled(cfg, cfg.fed.smoothing_enabled, cfg.fed.budget_enabled)}});
}

GridOutcome run_ablation(const RunConfig& cfg) {
    return run_grid(cfg, "ablation", ablation_cells(cfg));
}

GridOutcome run_sensitivity(const RunConfig& cfg) {
    return run_grid(cfg, "sensitivity", sensitivity_cells(cfg));
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kMetricsCsvHeader) {
        throw ParseError("metrics csv: missing or wrong header");
    }

    auto fields = [](const std::string& l) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream fs(l);
        while (std::getline(fs, item, ',')) out.push_back(item);
        return out;
    };
    auto num = [](const std::string& f) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc{} || ptr != f.data() + f.size()) {
            throw ParseError("metrics csv: bad number '" + f + "'");
        }
        return v;
    };
    auto integer = [&num](const std::string& f) { return static_cast<std::size_t>(num(f)); };

    std::vector<MetricsRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = fields(line);
        if (f.size() != 10) throw ParseError("metrics csv: expected 10 fields, got line '" + line + "'");
        rows.push_back({f[0], integer(f[1]), f[2], integer(f[3]), integer(f[4]), integer(f[5]),
                        num(f[6]), num(f[7]), num(f[8]), num(f[9])});
    }
    return rows;
}

} // namespace fedsb
