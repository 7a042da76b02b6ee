#pragma once

#include <cstdint>
#include <vector>

#include "fedsb/losses.hpp"
#include "fedsb/matrix.hpp"

namespace fedsb {

/// Fully connected classifier with tanh hidden activations and a linear
/// output layer of width M (the class count).
struct MlpModel {
    std::vector<std::size_t> layer_sizes; // [d_in, h_1, ..., M]
    std::vector<Matrix> weights;          // weights[l] is layer_sizes[l+1] x layer_sizes[l]
    std::vector<std::vector<double>> biases;

    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t class_count() const { return layer_sizes.back(); }
};

/// Flat view of all parameters of an MlpModel, in layer order, each layer's
/// weights row-major followed by its biases. Carries the shape it was
/// flattened from so it can be restored exactly.
struct ParamVector {
    std::vector<double> values;
    std::vector<std::size_t> layer_sizes;

    std::size_t size() const { return values.size(); }
    bool operator==(const ParamVector&) const = default;
};

std::size_t param_count(const std::vector<std::size_t>& layer_sizes);

/// Weights uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)),
/// biases zero. Deterministic in `seed`.
MlpModel init_model(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

/// Logits for a batch (rows are samples). Pure function of (model, batch).
Matrix forward(const MlpModel& model, const Matrix& batch);

/// Row-wise softmax, stabilized by per-row max subtraction.
Matrix softmax(const Matrix& logits);

struct BatchLoss {
    double loss;       // mean smoothed cross-entropy over the batch
    ParamVector grads; // gradient of that mean w.r.t. all parameters
    Matrix probs;      // softmax outputs, batch x M
};

/// Mean cross-entropy against the given target distributions and its exact
/// analytic gradient (logit gradient is p - y', standard softmax algebra).
BatchLoss loss_and_grads(const MlpModel& model, const Matrix& batch,
                         const std::vector<ClassDistribution>& targets);

ParamVector params_to_vec(const MlpModel& model);
MlpModel vec_to_params(const ParamVector& vec);
MlpModel vec_to_params(std::vector<double> values, const std::vector<std::size_t>& layer_sizes);

} // namespace fedsb
