#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedsb/matrix.hpp"

namespace fedsb {

struct Sample {
    std::vector<double> features;
    int label = 0;

    bool operator==(const Sample&) const = default;
};

/// One domain's labeled data. `held_out` is a taint flag: a dataset marked
/// held-out is the unseen target domain and must never reach local training.
struct DomainDataset {
    std::string domain_id;
    std::vector<Sample> samples;
    int class_count = 0;
    bool held_out = false;

    std::size_t size() const { return samples.size(); }
    std::size_t feature_dim() const { return samples.empty() ? 0 : samples.front().features.size(); }

    bool operator==(const DomainDataset&) const = default;
};

/// Rotated Gaussian-cluster task: M class clusters on a circle, one domain
/// per rotation angle. Domains share the labeling concept and differ only by
/// rotation of the feature plane (covariate shift).
struct SyntheticTaskSpec {
    int class_count = 4;
    std::size_t feature_dim = 2;
    std::vector<double> domain_angles_deg = {0.0, 25.0, 50.0, 75.0};
    std::vector<std::size_t> domain_sizes = {256, 512, 1024, 4096};
    double noise_sigma = 0.35;
    double cluster_radius = 1.0;

    void validate() const;
};

/// Domain d: class c's samples are isotropic Gaussians centered at radius
/// cluster_radius, base angle 2*pi*c/M, then the first two feature
/// coordinates are rotated by the domain's angle. Labels are balanced up to
/// remainder. Each domain's stream is seeded from (seed, angle bits), so two
/// domains with the same angle and size carry identical data.
std::vector<DomainDataset> generate_task(const SyntheticTaskSpec& spec, std::uint64_t seed);

/// Forces the dataset to exactly `budget` samples. Larger datasets are
/// subsampled uniformly without replacement; smaller ones receive
/// floor(S/|D|) copies of every sample plus S mod |D| extra distinct ones.
/// Output order is shuffled. Deterministic in `seed`.
DomainDataset budget_resample(const DomainDataset& dataset, std::size_t budget, std::uint64_t seed);

struct Batch {
    Matrix features; // B x d_in
    std::vector<int> labels;
};

/// Shuffles deterministically by seed, then yields exactly floor(|D|/B)
/// batches of size B; the trailing |D| mod B samples are dropped.
std::vector<Batch> batches(const DomainDataset& dataset, std::size_t batch_size, std::uint64_t seed);

/// Plain text export: header line `# domain=<id> d_in=<n> M=<m>` followed by
/// one `f1,...,fd,label` line per sample, doubles at 17 significant digits.
/// Round-trips bit-exactly.
void write_dataset(const std::filesystem::path& path, const DomainDataset& dataset);
DomainDataset read_dataset(const std::filesystem::path& path);

} // namespace fedsb
