#include "fedsb/optim.hpp"

#include <cmath>

#include "fedsb/errors.hpp"

namespace fedsb {

void OptimizerConfig::validate() const {
    if (!(eta > 0.0)) throw ConfigError("eta: learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1: must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2: must be in [0, 1)");
    if (!(stability_epsilon > 0.0)) throw ConfigError("stability_epsilon: must be positive");
}

std::pair<ParamVector, OptimizerState> step(OptimizerState state, const ParamVector& params,
                                            const ParamVector& grads,
                                            const OptimizerConfig& cfg) {
    const std::size_t n = params.size();
    if (grads.size() != n) throw ShapeError("step: parameter and gradient lengths disagree");

    ParamVector out = params;
    if (cfg.kind == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < n; ++i) out.values[i] -= cfg.eta * grads.values[i];
        state.steps += 1;
        return {std::move(out), std::move(state)};
    }

    if (state.first_moment.size() != n || state.second_moment.size() != n) {
        throw ShapeError("step: optimizer state sized for a different parameter count");
    }
    state.steps += 1;
    const double t = static_cast<double>(state.steps);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads.values[i];
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        out.values[i] -= cfg.eta * m_hat / (std::sqrt(v_hat) + cfg.stability_epsilon);
    }
    return {std::move(out), std::move(state)};
}

} // namespace fedsb
