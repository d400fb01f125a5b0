#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bioscape/configuration.hpp"
#include "bioscape/model.hpp"
#include "bioscape/reduction.hpp"
#include "bioscape/trace.hpp"

namespace bioscape {

struct RunConfig {
  std::uint64_t seed = 0;
  double t_max = std::numeric_limits<double>::infinity();
  std::uint64_t step_max = 100000;
  /// Snapshot period in time units; 0 disables snapshots.
  double sample_interval = 0.0;
  /// Translation samples tried per move redex and step.
  unsigned move_retries = 1;
  /// Scale communication propensity by the number of partners in range.
  bool counting_mode = false;
  /// Worker cap; 0 means BIOSCAPE_THREADS, else the hardware concurrency.
  unsigned threads = 0;
  /// Fill TraceRow::wall_ms. Off by default so traces are byte-stable.
  bool record_wall_time = false;
  /// Sampling box standing in for the unbounded region `all`.
  BoxRegion world{Vec3::Constant(-100.0), Vec3::Constant(100.0)};
  std::size_t placement_attempts = 10000;
};

class InfeasiblePlacement : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a phase needs besides the configuration.
struct PhaseContext {
  const Model& model;
  const RunConfig& config;
  std::uint64_t step = 0;
};

unsigned worker_count(const RunConfig& config);

/// Stream tags, so every random decision has its own stream.
enum class StreamTag : std::uint64_t {
  Init = 1,
  MoveSample = 2,
  MoveOrder = 3,
  StocOrder = 4,
  Duration = 5,
  Reference = 6,
};

CounterRng stream_for(const RunConfig& config, StreamTag tag, std::uint64_t step,
                      std::uint64_t member = 0);

struct MovePhaseReport {
  std::vector<RedexHandle> handles;
  /// Per handle, one entry per translation sample; nullopt when the sample
  /// left the movement space.
  std::vector<std::vector<std::optional<MoveCandidate>>> samples;
  std::vector<bool> committed;
  /// Original member index -> index of the same (unmoved) member in the
  /// result, or kNoMember when the member moved.
  std::vector<std::size_t> member_map;
};

struct StocPhaseReport {
  std::vector<StochasticCandidate> candidates;
  std::vector<bool> committed;
  std::vector<double> durations;
  std::vector<std::size_t> member_map;
};

/// Parallel movement: every move redex gets its sampled translations; a
/// seeded random order is swept repeatedly, committing each candidate that
/// fits, until a sweep commits nothing.
ExtendedConfiguration parallel_move(const ExtendedConfiguration& f, const PhaseContext& ctx,
                                    MovePhaseReport* report = nullptr);

/// Parallel stochastic reductions, same sweep discipline as parallel_move.
/// Each committed reduct becomes a timed member with a sampled duration.
ExtendedConfiguration parallel_stoc(const ExtendedConfiguration& f, const PhaseContext& ctx,
                                    StocPhaseReport* report = nullptr);

struct TimedAdvance {
  ExtendedConfiguration configuration;
  double advanced = 0.0;
};

/// Advances every timer by the smallest one and releases the expired
/// reducts. nullopt when there is no timed member.
std::optional<TimedAdvance> parallel_timed(const ExtendedConfiguration& f);

struct TauOptions {
  bool counting = false;
  bool fixed = false;
};

/// Duration for a uniform draw u in (0,1): -ln(u)/lambda with lambda = rate
/// (times context_count in counting mode); 1/lambda when fixed.
double tau_from_uniform(double rate, std::size_t context_count, double u, TauOptions options = {});
double tau(double rate, std::size_t context_count, CounterRng& rng, TauOptions options = {});

struct StepOutcome {
  ExtendedConfiguration configuration;
  std::uint64_t moves_applied = 0;
  std::uint64_t reactions_applied = 0;
  double time_advanced = 0.0;
  bool terminated = false;
  /// The time limit cut the timed phase short.
  bool horizon_reached = false;
  std::uint64_t rng_state = 0;
};

/// Intermediate configurations and reports, for audits.
struct StepDetail {
  ExtendedConfiguration after_move;
  ExtendedConfiguration after_stoc;
  MovePhaseReport move;
  StocPhaseReport stoc;
};

/// One parallel step: movement, then stochastic reductions, then time.
/// If the smallest timer would carry the clock past time_limit, the clock
/// stops at time_limit and no reduct is released.
StepOutcome step(const ExtendedConfiguration& f, const PhaseContext& ctx, double clock,
                 double time_limit = std::numeric_limits<double>::infinity(),
                 StepDetail* detail = nullptr);

/// Places the initial population uniformly at random in its regions,
/// rejecting overlapping or escaping samples.
ExtendedConfiguration initial_configuration(const Model& model, const RunConfig& config);

Trace run(const ModelFile& model, const RunConfig& config);
Trace run(const Model& model, const RunConfig& config);

/// Number of rejected candidates whose samples would still fit in the
/// final configuration (should be zero).
std::size_t audit_move_maximality(const ExtendedConfiguration& after,
                                  const MovePhaseReport& report);
/// Number of uncommitted, unconflicted candidates whose reduct would still
/// fit in the final configuration (should be zero).
std::size_t audit_stoc_maximality(const ExtendedConfiguration& before,
                                  const ExtendedConfiguration& after,
                                  const StocPhaseReport& report);

}  // namespace bioscape
