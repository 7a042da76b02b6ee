#include "fedsb/selftest.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "fedsb/domains.hpp"
#include "fedsb/federation.hpp"
#include "fedsb/losses.hpp"
#include "fedsb/mlp.hpp"
#include "fedsb/rng.hpp"

namespace fedsb {

namespace {

bool check(std::ostream& out, const std::string& name, const std::function<bool()>& body) {
    bool ok = false;
    try {
        ok = body();
    } catch (const std::exception& e) {
        out << "FAIL " << name << " (exception: " << e.what() << ")\n";
        return false;
    }
    out << (ok ? "PASS " : "FAIL ") << name << "\n";
    return ok;
}

} // namespace

int run_selftest(std::ostream& out) {
    int failures = 0;

    failures += !check(out, "label smoothing sums to one and matches the closed form", [] {
        for (int m = 2; m <= 16; ++m) {
            for (int y = 0; y < m; ++y) {
                const double eps = 0.25;
                ClassDistribution d = smooth_labels(y, m, SmoothingCoefficient(eps));
                double sum = 0.0;
                for (std::size_t c = 0; c < d.size(); ++c) {
                    const double want =
                        (static_cast<int>(c) == y) ? 1.0 - eps + eps / m : eps / m;
                    if (std::abs(d[c] - want) > 1e-15) return false;
                    sum += d[c];
                }
                if (std::abs(sum - 1.0) > 1e-12) return false;
            }
        }
        return true;
    });

    failures += !check(out, "loss decomposition matches the direct cross-entropy", [] {
        Rng rng(7);
        for (int trial = 0; trial < 100; ++trial) {
            const int m = 2 + static_cast<int>(rng.below(9));
            std::vector<double> raw(m);
            double sum = 0.0;
            for (double& v : raw) sum += (v = rng.uniform(0.01, 1.0));
            for (double& v : raw) v /= sum;
            ClassDistribution p(raw);
            const int y = static_cast<int>(rng.below(m));
            const SmoothingCoefficient eps(rng.uniform01());
            const double direct = smoothed_cross_entropy(p, smooth_labels(y, m, eps));
            const LossDecomposition d = decompose_loss(p, y, eps);
            if (std::abs(direct - d.total) > 1e-9 * std::max(1.0, std::abs(direct))) return false;
        }
        return true;
    });

    failures += !check(out, "analytic gradients agree with finite differences", [] {
        Rng rng(11);
        ParamVector theta = params_to_vec(init_model({3, 5, 4}, 21));
        Matrix x(4, 3);
        std::vector<ClassDistribution> targets;
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 3; ++c) x(r, c) = rng.uniform(-1.0, 1.0);
            targets.push_back(smooth_labels(static_cast<int>(rng.below(4)), 4,
                                            SmoothingCoefficient(0.1)));
        }
        const BatchLoss bl = loss_and_grads(vec_to_params(theta), x, targets);
        for (std::size_t j = 0; j < theta.size(); j += 7) {
            const double h = 1e-5;
            ParamVector plus = theta;
            ParamVector minus = theta;
            plus.values[j] += h;
            minus.values[j] -= h;
            const double up = loss_and_grads(vec_to_params(plus), x, targets).loss;
            const double dn = loss_and_grads(vec_to_params(minus), x, targets).loss;
            const double fd = (up - dn) / (2.0 * h);
            const double scale = std::max({1.0, std::abs(fd), std::abs(bl.grads.values[j])});
            if (std::abs(fd - bl.grads.values[j]) / scale > 1e-4) return false;
        }
        return true;
    });

    failures += !check(out, "budget resampling hits the exact target size", [] {
        SyntheticTaskSpec spec;
        spec.domain_sizes = {100, 2000};
        spec.domain_angles_deg = {0.0, 30.0};
        const auto task = generate_task(spec, 5);
        for (const DomainDataset& d : task) {
            if (budget_resample(d, 250, 9).size() != 250) return false;
        }
        return true;
    });

    failures += !check(out, "identical client parameters average to themselves bit-exactly", [] {
        ParamVector theta = params_to_vec(init_model({2, 4, 3}, 3));
        const ParamVector mean = aggregate_uniform({theta, theta, theta, theta, theta});
        return mean == theta;
    });

    return failures == 0 ? 0 : 1;
}

} // namespace fedsb
