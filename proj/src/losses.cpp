#include "fedsb/losses.hpp"

#include <cmath>
#include <string>

#include "fedsb/errors.hpp"

namespace fedsb {

SmoothingCoefficient::SmoothingCoefficient(double epsilon) : epsilon_(epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw ValueError("epsilon: must be in [0, 1], got " + std::to_string(epsilon));
    }
}

ClassDistribution::ClassDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw ValueError("class distribution: must be non-empty");
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0)) throw ValueError("class distribution: entries must be nonnegative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ValueError("class distribution: entries sum to " + std::to_string(sum) +
                         ", expected 1");
    }
}

ClassDistribution smooth_labels(int label, int class_count, SmoothingCoefficient eps) {
    if (class_count < 2) throw ValueError("smooth_labels: class count must be at least 2");
    if (label < 0 || label >= class_count) {
        throw ValueError("smooth_labels: label " + std::to_string(label) +
                         " outside [0, " + std::to_string(class_count) + ")");
    }
    const double e = eps.value();
    const double off = e / static_cast<double>(class_count);
    std::vector<double> probs(static_cast<std::size_t>(class_count), off);
    probs[static_cast<std::size_t>(label)] = 1.0 - e + off;
    return ClassDistribution(std::move(probs));
}

namespace detail {
double cross_entropy_span(std::span<const double> p, std::span<const double> target) {
    double loss = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        loss -= target[c] * std::log(std::max(p[c], kProbFloor));
    }
    return loss;
}
} // namespace detail

double smoothed_cross_entropy(const ClassDistribution& p, const ClassDistribution& y_smooth) {
    if (p.size() != y_smooth.size()) {
        throw ShapeError("smoothed_cross_entropy: distribution lengths disagree");
    }
    return detail::cross_entropy_span(p.probs(), y_smooth.probs());
}

LossDecomposition decompose_loss(const ClassDistribution& p, int label, SmoothingCoefficient eps) {
    const int m = static_cast<int>(p.size());
    if (m < 2) throw ValueError("decompose_loss: class count must be at least 2");
    if (label < 0 || label >= m) {
        throw ValueError("decompose_loss: label " + std::to_string(label) + " outside [0, " +
                         std::to_string(m) + ")");
    }
    const double nll = -std::log(std::max(p[static_cast<std::size_t>(label)], kProbFloor));
    double smooth = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        smooth -= std::log(std::max(p[c], kProbFloor));
    }
    smooth /= static_cast<double>(m);
    const double e = eps.value();
    return {nll, smooth, (1.0 - e) * nll + e * smooth};
}

} // namespace fedsb
