#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fedsb/domains.hpp"
#include "fedsb/losses.hpp"
#include "fedsb/mlp.hpp"
#include "fedsb/optim.hpp"

namespace fedsb {

enum class Aggregation { uniform, weighted };

/// All protocol hyperparameters for one federated run.
struct FedConfig {
    std::size_t client_count = 0; // K; filled by the harness
    std::size_t rounds = 100;     // T
    SmoothingCoefficient epsilon{0.1};
    bool smoothing_enabled = true;
    bool budget_enabled = true;
    std::size_t budget_samples = 1920; // S
    std::size_t batch_size = 64;       // B
    OptimizerConfig optimizer;
    Aggregation aggregation = Aggregation::uniform;
    std::vector<std::size_t> layer_sizes;
    std::uint64_t master_seed = 1;

    void validate() const;
};

struct ClientState {
    std::size_t client_id = 0;
    DomainDataset dataset;
};

struct GlobalModel {
    ParamVector params;
    std::size_t round_index = 0;
};

struct ClientRoundStats {
    std::size_t client_id = 0;
    std::size_t steps_taken = 0;
    double mean_local_loss = 0.0;
    double nll_part = 0.0;
    double smooth_part = 0.0;
    std::string warning; // set when the working set yields zero batches

    bool operator==(const ClientRoundStats&) const = default;
};

struct RoundReport {
    std::size_t round_index = 0;
    std::vector<ClientRoundStats> clients;
    double heldout_accuracy = 0.0;
    // Cross-boundary payload counts: exactly K each under full participation.
    std::size_t uploads = 0;
    std::size_t downloads = 0;

    bool operator==(const RoundReport&) const = default;
};

struct LocalTrainResult {
    ParamVector params;
    ClientRoundStats stats;
};

/// One client's local pass for the given round: initialize from the global
/// parameters, resample to the budget when enabled, take exactly
/// floor(|working set|/B) optimizer steps over deterministically shuffled
/// batches against smoothed (or one-hot) targets.
LocalTrainResult local_train(const ParamVector& global_params, const ClientState& client,
                             const FedConfig& cfg, std::size_t round);

/// Coordinatewise mean, (1/K) sum theta_i. Accumulated in extended precision
/// so K copies of the same vector average to that vector bit-exactly.
ParamVector aggregate_uniform(const std::vector<ParamVector>& params_list);

/// Coordinatewise mean weighted by sizes[i] / sum(sizes). Weights are divided
/// by their gcd first, so equal sizes reduce to the uniform path exactly.
ParamVector aggregate_weighted(const std::vector<ParamVector>& params_list,
                               const std::vector<std::size_t>& sizes);

/// One communication round: broadcast, independent local training in client
/// order, aggregation, evaluation on the held-out set.
std::pair<GlobalModel, RoundReport> run_round(const GlobalModel& global,
                                              const std::vector<ClientState>& clients,
                                              const FedConfig& cfg,
                                              const DomainDataset& eval_set);

/// Fraction of samples whose argmax logit equals the label; ties broken
/// toward the lowest class index.
double evaluate(const ParamVector& params, const DomainDataset& dataset);

struct HeldOutRun {
    std::string held_out_id;
    double final_accuracy = 0.0;
    double best_accuracy = 0.0;
    std::vector<RoundReport> rounds;

    bool operator==(const HeldOutRun&) const = default;
};

struct ExperimentResult {
    std::vector<HeldOutRun> runs;
    double mean_final_accuracy = 0.0;
    double mean_best_accuracy = 0.0;

    bool operator==(const ExperimentResult&) const = default;
};

/// Leave-one-domain-out harness: hold out each domain in turn, train the
/// remaining domains (one per client) for T rounds from a fresh model, and
/// record final and best held-out accuracy.
ExperimentResult run_experiment(const std::vector<DomainDataset>& task, const FedConfig& cfg);

} // namespace fedsb
