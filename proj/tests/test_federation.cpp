#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fedsb/domains.hpp"
#include "fedsb/errors.hpp"
#include "fedsb/federation.hpp"
#include "fedsb/rng.hpp"
#include "oracles.hpp"

using namespace fedsb;

namespace {

DomainDataset cluster_dataset(std::size_t n, std::uint64_t seed, double angle = 0.0) {
    SyntheticTaskSpec spec;
    spec.domain_angles_deg = {angle, angle + 180.0};
    spec.domain_sizes = {n, n};
    return generate_task(spec, seed)[0];
}

FedConfig small_cfg() {
    FedConfig cfg;
    cfg.rounds = 2;
    cfg.layer_sizes = {2, 8, 4};
    cfg.batch_size = 64;
    cfg.budget_samples = 1920;
    cfg.master_seed = 5;
    return cfg;
}

ParamVector random_params(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
    return params_to_vec(init_model(sizes, seed));
}

} // namespace

TEST_CASE("fed config validation names the offending field") {
    FedConfig cfg = small_cfg();
    CHECK_NOTHROW(cfg.validate());
    cfg.rounds = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.budget_samples = 32; // below the batch size
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.layer_sizes = {2};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.layer_sizes = {2, 8, 1};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("budget equalizes local step counts") {
    FedConfig cfg = small_cfg();
    const ParamVector theta = random_params(cfg.layer_sizes, 1);
    for (std::size_t n : {256, 4096}) {
        const ClientState client{0, cluster_dataset(n, n)};
        const LocalTrainResult r = local_train(theta, client, cfg, 0);
        CHECK(r.stats.steps_taken == 30);
    }
}

TEST_CASE("without the budget, steps follow the dataset size") {
    FedConfig cfg = small_cfg();
    cfg.budget_enabled = false;
    const ParamVector theta = random_params(cfg.layer_sizes, 1);
    const ClientState client{0, cluster_dataset(256, 9)};
    const LocalTrainResult r = local_train(theta, client, cfg, 0);
    CHECK(r.stats.steps_taken == 4);
}

TEST_CASE("one sgd step matches the hand-computed update") {
    FedConfig cfg;
    cfg.layer_sizes = {2, 4};
    cfg.batch_size = 32;
    cfg.budget_enabled = false;
    cfg.smoothing_enabled = true;
    cfg.epsilon = SmoothingCoefficient(0.1);
    cfg.optimizer.kind = OptimizerKind::sgd;
    cfg.optimizer.eta = 0.25;
    cfg.master_seed = 77;

    const DomainDataset data = cluster_dataset(32, 123);
    const ParamVector theta = random_params(cfg.layer_sizes, 3);
    const LocalTrainResult r = local_train(theta, {4, data}, cfg, 6);
    REQUIRE(r.stats.steps_taken == 1);

    // Reproduce the shuffled batch through the documented seed derivation.
    const std::uint64_t seed = client_round_seed(cfg.master_seed, 4, 6);
    const auto bs = batches(data, 32, mix_seed(seed, seed_salt::shuffle));
    REQUIRE(bs.size() == 1);
    std::vector<ClassDistribution> targets;
    for (int label : bs[0].labels) targets.push_back(smooth_labels(label, 4, cfg.epsilon));
    const BatchLoss bl = loss_and_grads(vec_to_params(theta), bs[0].features, targets);
    ParamVector expected = theta;
    for (std::size_t j = 0; j < expected.size(); ++j) {
        expected.values[j] -= 0.25 * bl.grads.values[j];
    }
    CHECK(r.params == expected);
    CHECK(r.stats.mean_local_loss == bl.loss);
}

TEST_CASE("local loss decomposes into its parts") {
    FedConfig cfg = small_cfg();
    const ParamVector theta = random_params(cfg.layer_sizes, 2);
    const LocalTrainResult r = local_train(theta, {0, cluster_dataset(256, 4)}, cfg, 0);
    const double eps = cfg.epsilon.value();
    CHECK(r.stats.mean_local_loss ==
          doctest::Approx((1.0 - eps) * r.stats.nll_part + eps * r.stats.smooth_part)
              .epsilon(1e-9));
}

TEST_CASE("a working set below one batch warns and takes no steps") {
    FedConfig cfg = small_cfg();
    cfg.budget_enabled = false;
    const ParamVector theta = random_params(cfg.layer_sizes, 1);
    const LocalTrainResult r = local_train(theta, {0, cluster_dataset(63, 2)}, cfg, 0);
    CHECK(r.stats.steps_taken == 0);
    CHECK_FALSE(r.stats.warning.empty());
    CHECK(r.params == theta);
}

TEST_CASE("held-out data never reaches local training") {
    FedConfig cfg = small_cfg();
    const ParamVector theta = random_params(cfg.layer_sizes, 1);
    DomainDataset tainted = cluster_dataset(256, 3);
    tainted.held_out = true;
    CHECK_THROWS_AS(local_train(theta, {0, tainted}, cfg, 0), ValueError);
}

TEST_CASE("uniform aggregation on hand examples") {
    ParamVector a, b;
    a.layer_sizes = b.layer_sizes = {1, 2};
    a.values = {1.0, 3.0};
    b.values = {3.0, 5.0};
    const ParamVector mean = aggregate_uniform({a, b});
    CHECK(mean.values == std::vector<double>{2.0, 4.0});
}

TEST_CASE("averaging identical vectors is exact for any client count") {
    const ParamVector theta = random_params({2, 6, 3}, 8);
    for (std::size_t k : {1, 2, 3, 5, 17, 257}) {
        const std::vector<ParamVector> list(k, theta);
        CHECK(aggregate_uniform(list) == theta);
    }
}

TEST_CASE("uniform aggregation matches the brute-force mean") {
    std::vector<ParamVector> list;
    for (int i = 0; i < 5; ++i) list.push_back(random_params({3, 5, 4}, 100 + i));
    const ParamVector mean = aggregate_uniform(list);
    const std::vector<double> expected = oracles::mean_oracle(list);
    for (std::size_t j = 0; j < mean.size(); ++j) {
        CHECK(std::abs(mean.values[j] - expected[j]) <= 1e-15);
    }
}

TEST_CASE("aggregation commutes with constant shifts") {
    std::vector<ParamVector> list;
    for (int i = 0; i < 3; ++i) list.push_back(random_params({2, 4, 3}, 7 + i));
    const ParamVector base = aggregate_uniform(list);
    std::vector<ParamVector> shifted = list;
    for (ParamVector& p : shifted) {
        for (double& v : p.values) v += 0.75;
    }
    const ParamVector mean = aggregate_uniform(shifted);
    for (std::size_t j = 0; j < mean.size(); ++j) {
        CHECK(mean.values[j] == doctest::Approx(base.values[j] + 0.75).epsilon(1e-12));
    }
}

TEST_CASE("weighted aggregation on hand examples") {
    ParamVector a, b;
    a.layer_sizes = b.layer_sizes = {1, 1};
    a.values = {0.0};
    b.values = {4.0};
    const ParamVector mean = aggregate_weighted({a, b}, {1, 3});
    CHECK(mean.values[0] == 3.0);
}

TEST_CASE("equal sizes reduce weighted aggregation to the uniform mean") {
    std::vector<ParamVector> list;
    for (int i = 0; i < 4; ++i) list.push_back(random_params({2, 5, 3}, 50 + i));
    const ParamVector w = aggregate_weighted(list, {640, 640, 640, 640});
    const ParamVector u = aggregate_uniform(list);
    CHECK(w == u);
}

TEST_CASE("weighted aggregation matches the brute-force weighted mean") {
    std::vector<ParamVector> list;
    std::vector<std::size_t> sizes = {256, 512, 1024, 4096};
    for (int i = 0; i < 4; ++i) list.push_back(random_params({2, 4, 4}, 60 + i));
    const ParamVector mean = aggregate_weighted(list, sizes);
    const std::vector<double> expected = oracles::weighted_mean_oracle(list, sizes);
    for (std::size_t j = 0; j < mean.size(); ++j) {
        CHECK(std::abs(mean.values[j] - expected[j]) <= 1e-15);
    }
}

TEST_CASE("aggregation input validation") {
    CHECK_THROWS_AS(aggregate_uniform({}), ValueError);
    ParamVector a, b;
    a.layer_sizes = {1, 2};
    a.values = {1.0, 2.0};
    b.layer_sizes = {2, 1};
    b.values = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(aggregate_uniform({a, b}), ShapeError);
    CHECK_THROWS_AS(aggregate_weighted({a, a}, {1}), ShapeError);
    CHECK_THROWS_AS(aggregate_weighted({a, a}, {1, 0}), ValueError);
}

TEST_CASE("a round counts exactly one upload and one download per client") {
    FedConfig cfg = small_cfg();
    std::vector<ClientState> clients;
    for (std::size_t i = 0; i < 3; ++i) clients.push_back({i, cluster_dataset(256, i)});
    const DomainDataset eval_set = cluster_dataset(128, 9);
    GlobalModel global{random_params(cfg.layer_sizes, 1), 0};
    for (int r = 0; r < 3; ++r) {
        auto [next, report] = run_round(global, clients, cfg, eval_set);
        CHECK(report.uploads == 3);
        CHECK(report.downloads == 3);
        CHECK(report.round_index == static_cast<std::size_t>(r));
        CHECK(report.clients.size() == 3);
        global = std::move(next);
        CHECK(global.round_index == static_cast<std::size_t>(r + 1));
    }
}

TEST_CASE("identical clients with identical seeds collapse to one client") {
    FedConfig cfg = small_cfg();
    const DomainDataset data = cluster_dataset(256, 13);
    // Same client_id means the same derived round seed.
    const std::vector<ClientState> clients(3, ClientState{5, data});
    GlobalModel global{random_params(cfg.layer_sizes, 2), 0};
    auto [next, report] = run_round(global, clients, cfg, cluster_dataset(64, 1));
    const LocalTrainResult solo = local_train(global.params, clients[0], cfg, 0);
    CHECK(next.params == solo.params);
}

TEST_CASE("round reports are invariant to client list order") {
    FedConfig cfg = small_cfg();
    std::vector<ClientState> clients;
    for (std::size_t i = 0; i < 3; ++i) clients.push_back({i, cluster_dataset(128 + 64 * i, i)});
    std::vector<ClientState> shuffled = {clients[2], clients[0], clients[1]};
    const DomainDataset eval_set = cluster_dataset(64, 8);
    GlobalModel global{random_params(cfg.layer_sizes, 3), 0};
    auto [a, ra] = run_round(global, clients, cfg, eval_set);
    auto [b, rb] = run_round(global, shuffled, cfg, eval_set);
    CHECK(a.params == b.params);
    CHECK(ra == rb);
}

TEST_CASE("steps are equal across clients exactly when the budget is on") {
    std::vector<ClientState> clients;
    std::vector<std::size_t> sizes = {256, 512, 1024};
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        clients.push_back({i, cluster_dataset(sizes[i], i)});
    }
    const DomainDataset eval_set = cluster_dataset(64, 90);

    FedConfig cfg = small_cfg();
    GlobalModel global{random_params(cfg.layer_sizes, 4), 0};
    auto [on_model, on] = run_round(global, clients, cfg, eval_set);
    for (const ClientRoundStats& s : on.clients) CHECK(s.steps_taken == 30);

    cfg.budget_enabled = false;
    auto [off_model, off] = run_round(global, clients, cfg, eval_set);
    std::vector<std::size_t> steps;
    for (const ClientRoundStats& s : off.clients) steps.push_back(s.steps_taken);
    CHECK(steps == std::vector<std::size_t>{4, 8, 16});
}

TEST_CASE("round errors carry the client id") {
    FedConfig cfg = small_cfg();
    DomainDataset tainted = cluster_dataset(256, 2);
    tainted.held_out = true;
    const std::vector<ClientState> clients = {{7, tainted}};
    GlobalModel global{random_params(cfg.layer_sizes, 1), 0};
    try {
        run_round(global, clients, cfg, cluster_dataset(64, 3));
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("client 7") != std::string::npos);
    }
}

TEST_CASE("client count mismatches are rejected") {
    FedConfig cfg = small_cfg();
    cfg.client_count = 2;
    const std::vector<ClientState> clients = {{0, cluster_dataset(256, 1)}};
    GlobalModel global{random_params(cfg.layer_sizes, 1), 0};
    CHECK_THROWS_AS(run_round(global, clients, cfg, cluster_dataset(64, 2)), ConfigError);
}

TEST_CASE("evaluate counts argmax hits with low-index tie-breaks") {
    // Zero model: all logits zero, every tie resolves to class 0.
    ParamVector zero;
    zero.layer_sizes = {2, 4};
    zero.values.assign(param_count({2, 4}), 0.0);
    const DomainDataset balanced = cluster_dataset(64, 5);
    CHECK(evaluate(zero, balanced) == 0.25);

    DomainDataset single;
    single.domain_id = "one";
    single.class_count = 4;
    single.samples.push_back({{1.0, 0.0}, 0});
    CHECK(evaluate(zero, single) == 1.0);
    CHECK_THROWS_AS(evaluate(zero, DomainDataset{}), ValueError);
}

TEST_CASE("a linear prototype model solves the zero-noise task perfectly") {
    SyntheticTaskSpec spec;
    spec.domain_sizes = {32, 32};
    spec.domain_angles_deg = {0.0, 0.0};
    spec.noise_sigma = 0.0;
    const auto task = generate_task(spec, 7);

    // Rows of the weight matrix are the class centers; the correct class has
    // the largest dot product.
    MlpModel proto;
    proto.layer_sizes = {2, 4};
    Matrix w(4, 2);
    for (int c = 0; c < 4; ++c) {
        const double base = 2.0 * 3.14159265358979323846 * c / 4.0;
        w(c, 0) = std::cos(base);
        w(c, 1) = std::sin(base);
    }
    proto.weights.push_back(w);
    proto.biases.push_back(std::vector<double>(4, 0.0));
    CHECK(evaluate(params_to_vec(proto), task[0]) == 1.0);
}

TEST_CASE("experiment harness shape and determinism") {
    SyntheticTaskSpec spec;
    spec.domain_sizes = {64, 64, 64, 64};
    const auto task = generate_task(spec, 21);

    FedConfig cfg = small_cfg();
    cfg.rounds = 2;
    cfg.budget_samples = 64;
    const ExperimentResult a = run_experiment(task, cfg);
    CHECK(a.runs.size() == 4);
    double mean = 0.0;
    for (const HeldOutRun& r : a.runs) {
        CHECK(r.rounds.size() == 2);
        CHECK(r.final_accuracy == r.rounds.back().heldout_accuracy);
        CHECK(r.best_accuracy >= r.final_accuracy);
        mean += r.final_accuracy;
    }
    CHECK(a.mean_final_accuracy == doctest::Approx(mean / 4.0).epsilon(1e-15));

    const ExperimentResult b = run_experiment(task, cfg);
    CHECK(a == b);
}

TEST_CASE("experiment rejects degenerate inputs") {
    FedConfig cfg = small_cfg();
    SyntheticTaskSpec spec;
    spec.domain_angles_deg = {0.0, 40.0};
    spec.domain_sizes = {64, 64};
    const auto task = generate_task(spec, 3);
    CHECK_THROWS_AS(run_experiment({task[0]}, cfg), ConfigError);
    cfg.layer_sizes = {3, 8, 4};
    CHECK_THROWS_AS(run_experiment(task, cfg), ConfigError);
    cfg = small_cfg();
    cfg.layer_sizes = {2, 8, 5};
    CHECK_THROWS_AS(run_experiment(task, cfg), ConfigError);
}

TEST_CASE("no domain shift means held-out accuracy matches in-federation accuracy") {
    // Angles differing at the 1e-9-degree level draw independent streams from
    // what is distributionally the same domain.
    SyntheticTaskSpec spec;
    spec.domain_angles_deg = {0.0, 1e-9, 2e-9, 3e-9};
    spec.domain_sizes = {256, 256, 256, 256};

    FedConfig cfg = small_cfg();
    cfg.rounds = 20;
    cfg.budget_samples = 128;
    cfg.batch_size = 64;

    double out_sum = 0.0;
    double in_sum = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto task = generate_task(spec, 1000 + s);
        cfg.master_seed = 1000 + s;

        std::vector<ClientState> clients;
        for (std::size_t i = 1; i < task.size(); ++i) clients.push_back({i, task[i]});
        DomainDataset eval_set = task[0];
        eval_set.held_out = true;

        GlobalModel global{
            params_to_vec(init_model(cfg.layer_sizes,
                                     mix_seed(mix_seed(cfg.master_seed, seed_salt::model_init), 0))),
            0};
        double acc_out = 0.0;
        for (std::size_t t = 0; t < cfg.rounds; ++t) {
            auto [next, report] = run_round(global, clients, cfg, eval_set);
            global = std::move(next);
            acc_out = report.heldout_accuracy;
        }
        double acc_in = 0.0;
        for (std::size_t i = 1; i < task.size(); ++i) acc_in += evaluate(global.params, task[i]);
        out_sum += acc_out;
        in_sum += acc_in / 3.0;
    }
    CHECK(std::abs(out_sum / 5.0 - in_sum / 5.0) <= 0.03);
}
