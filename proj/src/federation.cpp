#include "fedsb/federation.hpp"

#include <algorithm>
#include <numeric>

#include "fedsb/errors.hpp"
#include "fedsb/rng.hpp"

namespace fedsb {

void FedConfig::validate() const {
    if (rounds < 1) throw ConfigError("rounds: must be at least 1");
    if (batch_size < 1) throw ConfigError("batch_size: must be at least 1");
    if (budget_enabled && budget_samples < batch_size) {
        throw ConfigError("budget_samples: must be at least batch_size when the budget is enabled");
    }
    if (layer_sizes.size() < 2) {
        throw ConfigError("layer_sizes: need at least input and output layers");
    }
    for (std::size_t s : layer_sizes) {
        if (s < 1) throw ConfigError("layer_sizes: every layer needs at least one unit");
    }
    if (layer_sizes.back() < 2) {
        throw ConfigError("layer_sizes: output layer needs at least 2 classes");
    }
    optimizer.validate();
}

LocalTrainResult local_train(const ParamVector& global_params, const ClientState& client,
                             const FedConfig& cfg, std::size_t round) {
    if (client.dataset.held_out) {
        throw ValueError("held-out domain '" + client.dataset.domain_id +
                         "' reached local training");
    }

    const std::uint64_t seed = client_round_seed(cfg.master_seed, client.client_id, round);

    DomainDataset resampled;
    if (cfg.budget_enabled) {
        resampled = budget_resample(client.dataset, cfg.budget_samples,
                                    mix_seed(seed, seed_salt::resample));
    }
    const DomainDataset& ws = cfg.budget_enabled ? resampled : client.dataset;

    const std::vector<Batch> bs = batches(ws, cfg.batch_size, mix_seed(seed, seed_salt::shuffle));

    LocalTrainResult result;
    result.stats.client_id = client.client_id;
    result.stats.steps_taken = bs.size();
    if (bs.empty()) {
        result.params = global_params;
        result.stats.warning = "working set smaller than one batch; no local steps taken";
        return result;
    }

    const int m = client.dataset.class_count;
    const SmoothingCoefficient eps =
        cfg.smoothing_enabled ? cfg.epsilon : SmoothingCoefficient(0.0);

    MlpModel model = vec_to_params(global_params);
    OptimizerState opt = OptimizerState::for_param_count(global_params.size());

    double loss_sum = 0.0;
    double nll_sum = 0.0;
    double smooth_sum = 0.0;
    for (const Batch& batch : bs) {
        std::vector<ClassDistribution> targets;
        targets.reserve(batch.labels.size());
        for (int label : batch.labels) targets.push_back(smooth_labels(label, m, eps));

        BatchLoss bl = loss_and_grads(model, batch.features, targets);
        loss_sum += bl.loss;

        double nll_batch = 0.0;
        double smooth_batch = 0.0;
        for (std::size_t r = 0; r < batch.labels.size(); ++r) {
            auto row = bl.probs.row(r);
            ClassDistribution p(std::vector<double>(row.begin(), row.end()));
            LossDecomposition d = decompose_loss(p, batch.labels[r], eps);
            nll_batch += d.nll;
            smooth_batch += d.smooth;
        }
        nll_sum += nll_batch / static_cast<double>(batch.labels.size());
        smooth_sum += smooth_batch / static_cast<double>(batch.labels.size());

        ParamVector params = params_to_vec(model);
        auto [updated, next_state] = step(std::move(opt), params, bl.grads, cfg.optimizer);
        opt = std::move(next_state);
        model = vec_to_params(std::move(updated.values), global_params.layer_sizes);
    }

    const double steps = static_cast<double>(bs.size());
    result.params = params_to_vec(model);
    result.stats.mean_local_loss = loss_sum / steps;
    result.stats.nll_part = nll_sum / steps;
    result.stats.smooth_part = smooth_sum / steps;
    return result;
}

namespace {

void check_same_shape(const std::vector<ParamVector>& params_list) {
    if (params_list.empty()) throw ValueError("aggregate: empty parameter list");
    const ParamVector& first = params_list.front();
    for (const ParamVector& p : params_list) {
        if (p.layer_sizes != first.layer_sizes || p.size() != first.size()) {
            throw ShapeError("aggregate: parameter vectors disagree in shape");
        }
    }
}

} // namespace

ParamVector aggregate_uniform(const std::vector<ParamVector>& params_list) {
    check_same_shape(params_list);
    const std::size_t n = params_list.front().size();
    const long double k = static_cast<long double>(params_list.size());

    ParamVector out;
    out.layer_sizes = params_list.front().layer_sizes;
    out.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        long double acc = 0.0L;
        for (const ParamVector& p : params_list) acc += p.values[j];
        out.values[j] = static_cast<double>(acc / k);
    }
    return out;
}

ParamVector aggregate_weighted(const std::vector<ParamVector>& params_list,
                               const std::vector<std::size_t>& sizes) {
    check_same_shape(params_list);
    if (sizes.size() != params_list.size()) {
        throw ShapeError("aggregate: one size per parameter vector required");
    }
    std::size_t g = 0;
    for (std::size_t s : sizes) {
        if (s < 1) throw ValueError("aggregate: weights must be positive");
        g = std::gcd(g, s);
    }
    // Reduced integer weights: equal sizes become all-ones, which makes this
    // path bitwise identical to the uniform mean.
    std::vector<long double> w(sizes.size());
    long double total = 0.0L;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        w[i] = static_cast<long double>(sizes[i] / g);
        total += w[i];
    }

    const std::size_t n = params_list.front().size();
    ParamVector out;
    out.layer_sizes = params_list.front().layer_sizes;
    out.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < params_list.size(); ++i) {
            acc += w[i] * static_cast<long double>(params_list[i].values[j]);
        }
        out.values[j] = static_cast<double>(acc / total);
    }
    return out;
}

std::pair<GlobalModel, RoundReport> run_round(const GlobalModel& global,
                                              const std::vector<ClientState>& clients,
                                              const FedConfig& cfg,
                                              const DomainDataset& eval_set) {
    if (clients.empty()) throw ConfigError("run_round: no clients");
    if (cfg.client_count != 0 && cfg.client_count != clients.size()) {
        throw ConfigError("client_count: does not match the number of clients");
    }

    RoundReport report;
    report.round_index = global.round_index;
    report.downloads = clients.size();

    // Fixed client-id processing order: the report and the mean are invariant
    // to how the caller happened to order the client list.
    std::vector<std::size_t> order(clients.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&clients](std::size_t a, std::size_t b) {
        return clients[a].client_id < clients[b].client_id;
    });

    std::vector<ParamVector> locals;
    std::vector<std::size_t> sizes;
    locals.reserve(clients.size());
    sizes.reserve(clients.size());
    for (std::size_t i : order) {
        const ClientState& client = clients[i];
        LocalTrainResult r = [&] {
            try {
                return local_train(global.params, client, cfg, global.round_index);
            } catch (const Error& e) {
                throw Error("client " + std::to_string(client.client_id) + ": " + e.what());
            }
        }();
        locals.push_back(std::move(r.params));
        sizes.push_back(client.dataset.size());
        report.clients.push_back(std::move(r.stats));
        report.uploads += 1;
    }

    GlobalModel next;
    next.params = cfg.aggregation == Aggregation::uniform ? aggregate_uniform(locals)
                                                          : aggregate_weighted(locals, sizes);
    next.round_index = global.round_index + 1;
    report.heldout_accuracy = evaluate(next.params, eval_set);
    return {std::move(next), std::move(report)};
}

double evaluate(const ParamVector& params, const DomainDataset& dataset) {
    if (dataset.samples.empty()) throw ValueError("evaluate: dataset is empty");
    const MlpModel model = vec_to_params(params);
    const std::size_t n = dataset.size();
    const std::size_t d = dataset.feature_dim();

    Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) x(i, k) = dataset.samples[i].features[k];
    }
    const Matrix logits = forward(model, x);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto row = logits.row(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (row[c] > row[best]) best = c; // strict: ties keep the lowest index
        }
        if (static_cast<int>(best) == dataset.samples[i].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

ExperimentResult run_experiment(const std::vector<DomainDataset>& task, const FedConfig& cfg) {
    cfg.validate();
    if (task.size() < 2) throw ConfigError("run_experiment: need at least 2 domains");
    for (const DomainDataset& d : task) {
        if (d.samples.empty()) throw ConfigError("run_experiment: domain '" + d.domain_id + "' is empty");
        if (d.feature_dim() != cfg.layer_sizes.front()) {
            throw ConfigError("layer_sizes: input width does not match the task's feature_dim");
        }
        if (static_cast<std::size_t>(d.class_count) != cfg.layer_sizes.back()) {
            throw ConfigError("layer_sizes: output width does not match the task's class_count");
        }
    }

    FedConfig run_cfg = cfg;
    run_cfg.client_count = task.size() - 1;

    ExperimentResult result;
    for (std::size_t h = 0; h < task.size(); ++h) {
        std::vector<ClientState> clients;
        clients.reserve(task.size() - 1);
        for (std::size_t i = 0; i < task.size(); ++i) {
            if (i == h) continue;
            // client_id is the domain's index in the task, stable across
            // held-out choices, so seed schedules never shift between runs.
            clients.push_back({i, task[i]});
        }
        DomainDataset eval_set = task[h];
        eval_set.held_out = true;

        const std::uint64_t init_seed =
            mix_seed(mix_seed(cfg.master_seed, seed_salt::model_init), h);
        GlobalModel global{params_to_vec(init_model(cfg.layer_sizes, init_seed)), 0};

        HeldOutRun run;
        run.held_out_id = task[h].domain_id;
        run.rounds.reserve(cfg.rounds);
        for (std::size_t t = 0; t < cfg.rounds; ++t) {
            auto [next, report] = run_round(global, clients, run_cfg, eval_set);
            global = std::move(next);
            run.best_accuracy = std::max(run.best_accuracy, report.heldout_accuracy);
            run.rounds.push_back(std::move(report));
        }
        run.final_accuracy = run.rounds.back().heldout_accuracy;
        result.runs.push_back(std::move(run));
    }

    double final_sum = 0.0;
    double best_sum = 0.0;
    for (const HeldOutRun& r : result.runs) {
        final_sum += r.final_accuracy;
        best_sum += r.best_accuracy;
    }
    result.mean_final_accuracy = final_sum / static_cast<double>(result.runs.size());
    result.mean_best_accuracy = best_sum / static_cast<double>(result.runs.size());
    return result;
}

} // namespace fedsb
