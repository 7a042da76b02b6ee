#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fedsb/mlp.hpp"

namespace fedsb {

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double eta = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double stability_epsilon = 1e-8;

    void validate() const;
};

/// Per-trajectory optimizer state; created fresh at the start of every
/// communication round.
struct OptimizerState {
    std::uint64_t steps = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;

    static OptimizerState for_param_count(std::size_t n) {
        return {0, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    }
};

/// One parameter update. SGD: params - eta * grads, exactly. Adam: standard
/// bias-corrected update with the configured betas.
std::pair<ParamVector, OptimizerState> step(OptimizerState state, const ParamVector& params,
                                            const ParamVector& grads,
                                            const OptimizerConfig& cfg);

} // namespace fedsb
