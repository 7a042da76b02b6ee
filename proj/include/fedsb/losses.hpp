#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fedsb {

/// Label-smoothing coefficient, valid range [0, 1].
class SmoothingCoefficient {
public:
    SmoothingCoefficient() = default;
    explicit SmoothingCoefficient(double epsilon);
    double value() const { return epsilon_; }

private:
    double epsilon_ = 0.0;
};

/// Probability vector over the M classes: nonnegative entries summing to 1
/// (within 1e-12). Holds both smoothed targets and softmax outputs.
class ClassDistribution {
public:
    ClassDistribution() = default;
    explicit ClassDistribution(std::vector<double> probs);

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> probs() const { return probs_; }

private:
    std::vector<double> probs_;
};

/// Mix of a one-hot vector at `label` with the uniform distribution:
/// entry `label` is 1 - eps + eps/M, every other entry is eps/M.
ClassDistribution smooth_labels(int label, int class_count, SmoothingCoefficient eps);

/// -sum_c y'_c log p_c with p clamped below at kProbFloor.
double smoothed_cross_entropy(const ClassDistribution& p, const ClassDistribution& y_smooth);

struct LossDecomposition {
    double nll;    // -log p_y
    double smooth; // -(1/M) sum_c log p_c
    double total;  // (1 - eps) * nll + eps * smooth
};

/// Splits the smoothed cross-entropy into its NLL and uniform-penalty parts.
LossDecomposition decompose_loss(const ClassDistribution& p, int label, SmoothingCoefficient eps);

/// Floor applied to probabilities before log; the loss is undefined at 0.
constexpr double kProbFloor = 1e-12;

namespace detail {
double cross_entropy_span(std::span<const double> p, std::span<const double> target);
}

} // namespace fedsb
