#include "fedsb/domains.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "fedsb/errors.hpp"
#include "fedsb/rng.hpp"

namespace fedsb {

void SyntheticTaskSpec::validate() const {
    if (class_count < 2) throw ConfigError("class_count: need at least 2 classes");
    if (feature_dim < 2) throw ConfigError("feature_dim: rotation needs at least 2 dimensions");
    if (domain_angles_deg.size() != domain_sizes.size()) {
        throw ConfigError("domain_angles/domain_sizes: lists must have equal length");
    }
    if (domain_angles_deg.size() < 2) throw ConfigError("domain_angles: need at least 2 domains");
    for (std::size_t n : domain_sizes) {
        if (n < static_cast<std::size_t>(class_count)) {
            throw ConfigError("domain_sizes: every domain needs at least class_count samples");
        }
    }
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma: must be nonnegative");
    if (!(cluster_radius > 0.0)) throw ConfigError("cluster_radius: must be positive");
}

std::vector<DomainDataset> generate_task(const SyntheticTaskSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::uint64_t task_seed = mix_seed(seed, seed_salt::task);
    std::vector<DomainDataset> domains;
    domains.reserve(spec.domain_sizes.size());
    for (std::size_t d = 0; d < spec.domain_sizes.size(); ++d) {
        const double angle_deg = spec.domain_angles_deg[d];
        const double angle = angle_deg * std::numbers::pi / 180.0;
        const double ca = std::cos(angle);
        const double sa = std::sin(angle);
        // Stream keyed by the angle, not the domain slot: domains with the
        // same angle draw the same base cloud and differ only by rotation.
        Rng rng(mix_seed(task_seed, std::bit_cast<std::uint64_t>(angle_deg)));

        DomainDataset ds;
        ds.domain_id = "d" + std::to_string(d);
        ds.class_count = spec.class_count;
        ds.samples.reserve(spec.domain_sizes[d]);
        for (std::size_t i = 0; i < spec.domain_sizes[d]; ++i) {
            const int label = static_cast<int>(i % static_cast<std::size_t>(spec.class_count));
            const double base = 2.0 * std::numbers::pi * label / spec.class_count;
            std::vector<double> x(spec.feature_dim, 0.0);
            x[0] = spec.cluster_radius * std::cos(base);
            x[1] = spec.cluster_radius * std::sin(base);
            for (std::size_t k = 0; k < spec.feature_dim; ++k) {
                x[k] += spec.noise_sigma * rng.normal();
            }
            const double rx = ca * x[0] - sa * x[1];
            const double ry = sa * x[0] + ca * x[1];
            x[0] = rx;
            x[1] = ry;
            ds.samples.push_back({std::move(x), label});
        }
        domains.push_back(std::move(ds));
    }
    return domains;
}

DomainDataset budget_resample(const DomainDataset& dataset, std::size_t budget,
                              std::uint64_t seed) {
    if (budget < 1) throw ConfigError("budget: must be at least 1");
    if (dataset.samples.empty()) throw ConfigError("budget_resample: dataset is empty");

    const std::size_t n = dataset.size();
    Rng rng(seed);

    // Partial Fisher-Yates: the first `take` slots end up holding a uniform
    // ordered sample without replacement.
    auto draw_distinct = [&rng, n](std::size_t take) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < take; ++i) {
            std::swap(idx[i], idx[i + static_cast<std::size_t>(rng.below(n - i))]);
        }
        idx.resize(take);
        return idx;
    };

    std::vector<std::size_t> chosen;
    if (n >= budget) {
        chosen = draw_distinct(budget);
    } else {
        const std::size_t reps = budget / n;
        const std::size_t rem = budget % n;
        chosen.reserve(budget);
        for (std::size_t r = 0; r < reps; ++r) {
            for (std::size_t i = 0; i < n; ++i) chosen.push_back(i);
        }
        for (std::size_t i : draw_distinct(rem)) chosen.push_back(i);
        rng.shuffle(chosen);
    }

    DomainDataset out;
    out.domain_id = dataset.domain_id;
    out.class_count = dataset.class_count;
    out.held_out = dataset.held_out;
    out.samples.reserve(budget);
    for (std::size_t i : chosen) out.samples.push_back(dataset.samples[i]);
    return out;
}

std::vector<Batch> batches(const DomainDataset& dataset, std::size_t batch_size,
                           std::uint64_t seed) {
    if (batch_size < 1) throw ConfigError("batch size: must be at least 1");
    const std::size_t n = dataset.size();
    const std::size_t num_batches = n / batch_size;
    const std::size_t d = dataset.feature_dim();

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);

    std::vector<Batch> out;
    out.reserve(num_batches);
    for (std::size_t b = 0; b < num_batches; ++b) {
        Batch batch{Matrix(batch_size, d), std::vector<int>(batch_size)};
        for (std::size_t r = 0; r < batch_size; ++r) {
            const Sample& s = dataset.samples[idx[b * batch_size + r]];
            for (std::size_t k = 0; k < d; ++k) batch.features(r, k) = s.features[k];
            batch.labels[r] = s.label;
        }
        out.push_back(std::move(batch));
    }
    return out;
}

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_dataset(const std::filesystem::path& path, const DomainDataset& dataset) {
    std::ostringstream os;
    os << "# domain=" << dataset.domain_id << " d_in=" << dataset.feature_dim()
       << " M=" << dataset.class_count << "\n";
    for (const Sample& s : dataset.samples) {
        for (double f : s.features) os << fmt17(f) << ",";
        os << s.label << "\n";
    }
    std::ofstream file(path);
    if (!file) throw IoError("cannot open for writing: " + path.string());
    file << os.str();
    if (!file.flush()) throw IoError("write failed: " + path.string());
}

DomainDataset read_dataset(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open for reading: " + path.string());

    std::string header;
    std::getline(file, header);
    DomainDataset ds;
    std::size_t d_in = 0;
    {
        std::istringstream hs(header);
        std::string hash, dom, din, m;
        hs >> hash >> dom >> din >> m;
        auto field = [&](const std::string& tok, const char* key) {
            const std::string prefix = std::string(key) + "=";
            if (tok.rfind(prefix, 0) != 0) {
                throw ParseError("dataset header: expected " + prefix + "..., got '" + tok + "'");
            }
            return tok.substr(prefix.size());
        };
        if (hash != "#") throw ParseError("dataset header: must start with '#'");
        ds.domain_id = field(dom, "domain");
        d_in = std::stoul(field(din, "d_in"));
        ds.class_count = std::stoi(field(m, "M"));
    }

    std::string line;
    while (std::getline(file, line)) {
        if (line.empty()) continue;
        Sample s;
        s.features.reserve(d_in);
        const char* p = line.c_str();
        for (std::size_t k = 0; k < d_in; ++k) {
            char* end = nullptr;
            s.features.push_back(std::strtod(p, &end));
            if (end == p || *end != ',') throw ParseError("dataset line: malformed features");
            p = end + 1;
        }
        char* end = nullptr;
        s.label = static_cast<int>(std::strtol(p, &end, 10));
        if (end == p) throw ParseError("dataset line: missing label");
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

} // namespace fedsb
