#include "bioscape/bench.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace bioscape {

std::vector<BenchRow> run_bench(const ModelFile& file, const std::vector<std::size_t>& agents,
                                std::uint64_t steps, const RunConfig& config) {
  std::int64_t base = 0;
  for (const auto& init : file.initial) base += init.count;
  if (base <= 0) throw std::invalid_argument("benchmark model has no initial population");

  std::vector<BenchRow> rows;
  for (auto n : agents) {
    ModelFile scaled = file;
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < scaled.initial.size(); ++i) {
      auto& init = scaled.initial[i];
      if (i + 1 == scaled.initial.size()) {
        init.count = std::max<std::int64_t>(0, static_cast<std::int64_t>(n) - assigned);
      } else {
        init.count = static_cast<std::int64_t>(std::llround(double(n) * double(init.count) / double(base)));
        assigned += init.count;
      }
    }
    const Model model(std::move(scaled));
    ExtendedConfiguration f = initial_configuration(model, config);

    BenchRow row;
    row.agents = n;
    double clock = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (std::uint64_t k = 1; k <= steps; ++k) {
      StepOutcome out = step(f, PhaseContext{model, config, k}, clock);
      f = std::move(out.configuration);
      clock += out.time_advanced;
      ++row.steps;
      if (out.terminated) break;
    }
    row.total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    row.ms_per_step = row.steps ? row.total_ms / double(row.steps) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(const std::vector<BenchRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.agents == 0 || r.ms_per_step <= 0.0) continue;
    const double x = std::log(double(r.agents));
    const double y = std::log(r.ms_per_step);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nan("");
  return (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
}

std::string format_bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "agents,steps,total_ms,ms_per_step\n";
  for (const auto& r : rows) {
    out << r.agents << ',' << r.steps << ',' << r.total_ms << ',' << r.ms_per_step << '\n';
  }
  return out.str();
}

}  // namespace bioscape
