#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bioscape/syntax.hpp"

namespace bioscape {

struct TraceRow {
  std::uint64_t step = 0;
  double time = 0.0;
  std::map<Name, std::int64_t> populations;
  std::uint64_t moves = 0;
  std::uint64_t reactions = 0;
  double wall_ms = 0.0;
  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct Snapshot {
  double time = 0.0;
  nlohmann::json configuration;
};

/// Per-step population record of a run. `entities` fixes the column set
/// (alphabetical); rows hold zero for entities that are absent.
struct Trace {
  std::vector<Name> entities;
  std::vector<TraceRow> rows;
  std::vector<Snapshot> snapshots;
};

enum class TraceFormat { Csv, Jsonl };

/// Csv for ".csv" (or anything else), Jsonl for ".jsonl"/".json".
TraceFormat format_for_path(const std::filesystem::path& path);

std::string format_trace(const Trace& trace, TraceFormat format);
/// Throws std::runtime_error on I/O failure.
void write_trace(const Trace& trace, TraceFormat format, const std::filesystem::path& path);
Trace parse_trace_csv(std::string_view text);

/// Population of `entity` at time t: the last row at or before t.
std::int64_t population_at(const Trace& trace, const Name& entity, double t);

/// Static population-vs-time line chart.
std::string population_svg(const Trace& trace);

}  // namespace bioscape
