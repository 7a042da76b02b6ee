#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fedsb/config.hpp"

namespace fedsb {

/// One CSV record: a client's round inside one (cell, seed, held-out) run.
struct MetricsRow {
    std::string cell;
    std::size_t seed_index = 0;
    std::string held_out;
    std::size_t round = 0;
    std::size_t client_id = 0;
    std::size_t steps = 0;
    double local_loss = 0.0;
    double nll = 0.0;
    double smooth = 0.0;
    double global_acc = 0.0;

    bool operator==(const MetricsRow&) const = default;
};

inline constexpr const char* kMetricsCsvHeader =
    "cell,seed,held_out,round,client_id,steps,local_loss,nll,smooth,global_acc";

/// Mean final-round accuracy per held-out domain for one grid cell, plus
/// their average.
struct CellSummary {
    std::string cell;
    std::vector<std::pair<std::string, double>> domain_means; // (held_out id, mean acc)
    double average = 0.0;
};

struct GridOutcome {
    std::vector<MetricsRow> rows;
    std::vector<CellSummary> summary;
    std::filesystem::path csv_path;
    std::filesystem::path json_path;
    std::filesystem::path table_path;
};

/// Single experiment with the config's own toggles; files prefixed "run".
GridOutcome run_once(const RunConfig& cfg);

/// The 2x2 {smoothing on/off} x {budget on/off} grid; files prefixed
/// "ablation".
GridOutcome run_ablation(const RunConfig& cfg);

/// The epsilon sweep (budget off) and budget sweep (smoothing off); files
/// prefixed "sensitivity".
GridOutcome run_sensitivity(const RunConfig& cfg);

/// Shortest exact decimal serialization used in all emitted files: 17
/// significant digits.
std::string format_double17(double v);

/// Lossless re-read of an emitted metrics CSV.
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

} // namespace fedsb
