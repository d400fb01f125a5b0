#pragma once

#include <optional>
#include <vector>

#include "bioscape/engine.hpp"

namespace bioscape {

struct PropensityEntry {
  StochasticCandidate candidate;
  double propensity = 0.0;
};

struct PropensityTable {
  std::vector<PropensityEntry> entries;
  double total = 0.0;
};

/// Delay: its rate per handle. Com: the channel rate per sender/receiver
/// pair within the reaction radius.
PropensityTable build_propensities(const ExtendedConfiguration& f, const Model& model);

struct GillespieStep {
  ExtendedConfiguration configuration;
  double dt = 0.0;
  bool moved = false;
  bool reacted = false;
};

/// One sequential iteration: a uniformly chosen move redex is tried first,
/// then dt ~ Exp(total) and one reaction chosen with probability
/// propensity/total. A reaction whose reduct does not fit is dropped and the
/// choice is redrawn among the rest. nullopt when nothing can happen.
std::optional<GillespieStep> gillespie_step(const ExtendedConfiguration& f, const Model& model,
                                            CounterRng& rng);

Trace run_reference(const ModelFile& model, const RunConfig& config);
Trace run_reference(const Model& model, const RunConfig& config);

}  // namespace bioscape
