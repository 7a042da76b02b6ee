#include "fedsb/mlp.hpp"

#include <cmath>
#include <string>

#include "fedsb/errors.hpp"
#include "fedsb/rng.hpp"

namespace fedsb {

namespace {

void check_layer_sizes(const std::vector<std::size_t>& layer_sizes) {
    if (layer_sizes.size() < 2) throw ConfigError("layer_sizes: need at least [d_in, M]");
    for (std::size_t s : layer_sizes) {
        if (s < 1) throw ConfigError("layer_sizes: every layer needs at least one unit");
    }
}

// Forward pass keeping every layer's post-activation output; activations[0]
// is the input batch and activations.back() the logits.
std::vector<Matrix> forward_cached(const MlpModel& model, const Matrix& batch) {
    if (batch.cols() != model.input_dim()) {
        throw ShapeError("forward: batch has " + std::to_string(batch.cols()) +
                         " features, model expects " + std::to_string(model.input_dim()));
    }
    const std::size_t num_layers = model.weights.size();
    std::vector<Matrix> activations;
    activations.reserve(num_layers + 1);
    activations.push_back(batch);
    for (std::size_t l = 0; l < num_layers; ++l) {
        Matrix z = multiply_nt(activations.back(), model.weights[l]);
        const auto& bias = model.biases[l];
        for (std::size_t i = 0; i < z.rows(); ++i) {
            auto zi = z.row(i);
            for (std::size_t j = 0; j < z.cols(); ++j) zi[j] += bias[j];
        }
        if (l + 1 < num_layers) {
            for (double& v : z.data()) v = std::tanh(v);
        }
        activations.push_back(std::move(z));
    }
    return activations;
}

} // namespace

std::size_t param_count(const std::vector<std::size_t>& layer_sizes) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        n += layer_sizes[l + 1] * (layer_sizes[l] + 1);
    }
    return n;
}

MlpModel init_model(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
    check_layer_sizes(layer_sizes);
    MlpModel model;
    model.layer_sizes = layer_sizes;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const std::size_t fan_in = layer_sizes[l];
        const std::size_t fan_out = layer_sizes[l + 1];
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (double& v : w.data()) v = rng.uniform(-a, a);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }
    return model;
}

Matrix forward(const MlpModel& model, const Matrix& batch) {
    Matrix logits = forward_cached(model, batch).back();
    if (!all_finite(logits)) throw Error("forward: non-finite logits");
    return logits;
}

Matrix softmax(const Matrix& logits) {
    if (!all_finite(logits)) throw ValueError("softmax: logits must be finite");
    Matrix probs(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const auto li = logits.row(i);
        auto pi = probs.row(i);
        double m = li[0];
        for (double v : li) m = std::max(m, v);
        double sum = 0.0;
        for (std::size_t j = 0; j < li.size(); ++j) {
            pi[j] = std::exp(li[j] - m);
            sum += pi[j];
        }
        for (std::size_t j = 0; j < li.size(); ++j) pi[j] /= sum;
    }
    return probs;
}

BatchLoss loss_and_grads(const MlpModel& model, const Matrix& batch,
                         const std::vector<ClassDistribution>& targets) {
    const std::size_t n = batch.rows();
    const std::size_t m = model.class_count();
    if (targets.size() != n) throw ShapeError("loss_and_grads: one target per batch row required");
    for (const auto& t : targets) {
        if (t.size() != m) throw ShapeError("loss_and_grads: target length must equal class count");
    }

    std::vector<Matrix> activations = forward_cached(model, batch);
    Matrix probs = softmax(activations.back());

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loss += detail::cross_entropy_span(probs.row(i), targets[i].probs());
    }
    loss /= static_cast<double>(n);

    // dL/dlogits of the mean loss: (p - y') / n.
    Matrix dz(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto pi = probs.row(i);
        const auto ti = targets[i].probs();
        auto di = dz.row(i);
        for (std::size_t j = 0; j < m; ++j) di[j] = (pi[j] - ti[j]) / static_cast<double>(n);
    }

    const std::size_t num_layers = model.weights.size();
    std::vector<Matrix> weight_grads(num_layers);
    std::vector<std::vector<double>> bias_grads(num_layers);
    for (std::size_t li = num_layers; li-- > 0;) {
        weight_grads[li] = multiply_tn(dz, activations[li]);
        std::vector<double> bg(dz.cols(), 0.0);
        for (std::size_t i = 0; i < dz.rows(); ++i) {
            const auto di = dz.row(i);
            for (std::size_t j = 0; j < dz.cols(); ++j) bg[j] += di[j];
        }
        bias_grads[li] = std::move(bg);
        if (li > 0) {
            Matrix da = multiply(dz, model.weights[li]);
            const Matrix& a = activations[li]; // tanh outputs
            for (std::size_t i = 0; i < da.rows(); ++i) {
                auto dai = da.row(i);
                const auto ai = a.row(i);
                for (std::size_t j = 0; j < da.cols(); ++j) dai[j] *= 1.0 - ai[j] * ai[j];
            }
            dz = std::move(da);
        }
    }

    ParamVector grads;
    grads.layer_sizes = model.layer_sizes;
    grads.values.reserve(param_count(model.layer_sizes));
    for (std::size_t li = 0; li < num_layers; ++li) {
        const auto wd = weight_grads[li].data();
        grads.values.insert(grads.values.end(), wd.begin(), wd.end());
        grads.values.insert(grads.values.end(), bias_grads[li].begin(), bias_grads[li].end());
    }
    return {loss, std::move(grads), std::move(probs)};
}

ParamVector params_to_vec(const MlpModel& model) {
    ParamVector vec;
    vec.layer_sizes = model.layer_sizes;
    vec.values.reserve(param_count(model.layer_sizes));
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto wd = model.weights[l].data();
        vec.values.insert(vec.values.end(), wd.begin(), wd.end());
        vec.values.insert(vec.values.end(), model.biases[l].begin(), model.biases[l].end());
    }
    return vec;
}

MlpModel vec_to_params(const ParamVector& vec) {
    return vec_to_params(vec.values, vec.layer_sizes);
}

MlpModel vec_to_params(std::vector<double> values, const std::vector<std::size_t>& layer_sizes) {
    check_layer_sizes(layer_sizes);
    if (values.size() != param_count(layer_sizes)) {
        throw ShapeError("vec_to_params: " + std::to_string(values.size()) +
                         " values, shape descriptor implies " +
                         std::to_string(param_count(layer_sizes)));
    }
    MlpModel model;
    model.layer_sizes = layer_sizes;
    std::size_t pos = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const std::size_t fan_in = layer_sizes[l];
        const std::size_t fan_out = layer_sizes[l + 1];
        Matrix w(fan_out, fan_in);
        for (double& v : w.data()) v = values[pos++];
        model.weights.push_back(std::move(w));
        std::vector<double> b(fan_out);
        for (double& v : b) v = values[pos++];
        model.biases.push_back(std::move(b));
    }
    return model;
}

} // namespace fedsb
