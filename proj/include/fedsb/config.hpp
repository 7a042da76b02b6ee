#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedsb/domains.hpp"
#include "fedsb/federation.hpp"

namespace fedsb {

/// Training budget as written in a config file: "OFF", an absolute sample
/// count ("1920"), or a batch multiple ("30B", resolved against batch_B).
struct BudgetSpec {
    bool off = false;
    bool in_batches = false;
    std::size_t value = 0;
    std::string token; // original text; used as the cell id in grids

    std::size_t resolve(std::size_t batch_size) const { return in_batches ? value * batch_size : value; }
};

/// Everything a runner invocation needs: protocol config, task spec, grids,
/// output location, repeat count.
struct RunConfig {
    FedConfig fed;
    SyntheticTaskSpec task;
    BudgetSpec budget;
    std::filesystem::path out_dir = "out";
    std::vector<double> epsilon_grid = {0.1, 0.2, 0.3};
    std::vector<BudgetSpec> s_grid;
    std::size_t repeats = 3;
    bool quick = false; // scales rounds and sizes down 10x
};

/// Parses the documented flat key=value schema. Unknown keys, type
/// mismatches and invariant violations are hard errors naming the key.
RunConfig parse_config(const std::string& text);

/// parse_config over a file's bytes.
RunConfig load_config(const std::filesystem::path& path);

} // namespace fedsb
