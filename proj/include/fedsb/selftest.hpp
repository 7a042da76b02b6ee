#pragma once

#include <ostream>

namespace fedsb {

/// Compact built-in invariant suite (smoothing exactness, loss decomposition,
/// gradient checks, resampler sizing, aggregation oracles). Prints one line
/// per check; returns 0 when all pass.
int run_selftest(std::ostream& out);

} // namespace fedsb
