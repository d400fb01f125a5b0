#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bioscape/engine.hpp"

namespace bioscape {

struct BenchRow {
  std::size_t agents = 0;
  std::uint64_t steps = 0;
  double total_ms = 0.0;
  double ms_per_step = 0.0;
};

/// Runs `steps` parallel steps of `model` with every initial population
/// scaled so the total is close to each agent count. Placement is not timed.
std::vector<BenchRow> run_bench(const ModelFile& model, const std::vector<std::size_t>& agents,
                                std::uint64_t steps, const RunConfig& config);

/// Least-squares slope of log(ms_per_step) against log(agents).
double loglog_slope(const std::vector<BenchRow>& rows);

std::string format_bench_csv(const std::vector<BenchRow>& rows);

}  // namespace bioscape
