#include "bioscape/gillespie.hpp"

#include <cmath>

#include "bioscape/spatial_index.hpp"

namespace bioscape {

namespace {

bool fits(const ExtendedConfiguration& f, const SpatialFragment& reduct,
          std::span<const std::size_t> ignore) {
  std::vector<SpaceOccupancy> parts;
  for (const auto& lp : reduct.members) parts.push_back(occupancy(lp));
  for (std::size_t a = 0; a < parts.size(); ++a) {
    for (std::size_t b = a + 1; b < parts.size(); ++b) {
      if (overlap(parts[a], parts[b])) return false;
    }
  }
  for (std::size_t m = 0; m < f.members.size(); ++m) {
    if (std::find(ignore.begin(), ignore.end(), m) != ignore.end()) continue;
    const SpaceOccupancy occ = occupancy(std::get<LocatedProcess>(f.members[m]));
    for (const auto& part : parts) {
      if (overlap(occ, part)) return false;
    }
  }
  return true;
}

ExtendedConfiguration replace_members(const ExtendedConfiguration& f,
                                      const std::vector<std::size_t>& removed,
                                      SpatialFragment reduct, const Model& model) {
  ExtendedConfiguration out;
  out.restrictions = f.restrictions;
  for (std::size_t m = 0; m < f.members.size(); ++m) {
    if (std::find(removed.begin(), removed.end(), m) == removed.end()) out.members.push_back(f.members[m]);
  }
  std::set<Name> used = model.channel_names();
  for (const auto& r : f.restrictions) used.insert(r.name);
  std::map<Name, Name> renaming;
  for (auto& r : reduct.restrictions) {
    if (used.count(r.name)) {
      renaming[r.name] = fresh_name(r.name, used);
      r.name = renaming[r.name];
    }
    used.insert(r.name);
    out.restrictions.push_back(r);
  }
  for (auto& lp : reduct.members) {
    if (!renaming.empty()) lp.process = substitute(lp.process, renaming);
    out.members.emplace_back(std::move(lp));
  }
  drop_unused_restrictions(out);
  return out;
}

}  // namespace

PropensityTable build_propensities(const ExtendedConfiguration& f, const Model& model) {
  PropensityTable table;
  for (const auto& h : enumerate_stoc_redexes(f, model)) {
    StochasticCandidate c = apply_stoc(h, f, model);
    if (!(c.rate > 0.0)) continue;
    table.total += c.rate;
    const double rate = c.rate;
    table.entries.push_back({std::move(c), rate});
  }
  return table;
}

std::optional<GillespieStep> gillespie_step(const ExtendedConfiguration& f, const Model& model,
                                            CounterRng& rng) {
  if (timed_member_count(f) != 0) {
    throw std::invalid_argument("the reference engine does not accept timed members");
  }
  GillespieStep result;
  result.configuration = f;

  const auto moves = enumerate_move_redexes(result.configuration, model);
  if (!moves.empty()) {
    const auto& h = moves[rng.below(moves.size())];
    if (auto candidate = apply_move(h, result.configuration, model, rng)) {
      const std::size_t self[] = {h.first};
      if (fits(result.configuration, candidate->reduct, self)) {
        result.configuration =
            replace_members(result.configuration, {h.first}, std::move(candidate->reduct), model);
        result.moved = true;
      }
    }
  }

  PropensityTable table = build_propensities(result.configuration, model);
  if (table.entries.empty()) {
    if (!result.moved) return std::nullopt;
    return result;
  }
  result.dt = -std::log(rng.uniform_open()) / table.total;

  std::vector<double> weights;
  for (const auto& e : table.entries) weights.push_back(e.propensity);
  double remaining = table.total;
  for (std::size_t tries = 0; tries < table.entries.size(); ++tries) {
    double pick = rng.uniform() * remaining;
    std::size_t k = 0;
    for (; k + 1 < weights.size(); ++k) {
      if (weights[k] > 0.0 && pick < weights[k]) break;
      pick -= weights[k];
    }
    while (weights[k] <= 0.0) --k;  // rounding pushed past the last live entry
    const auto& c = table.entries[k].candidate;
    const auto members = c.handle.members();
    if (fits(result.configuration, c.reduct, members)) {
      result.configuration = replace_members(result.configuration, members, c.reduct, model);
      result.reacted = true;
      return result;
    }
    remaining -= weights[k];
    weights[k] = 0.0;
  }
  return result;
}

Trace run_reference(const ModelFile& model, const RunConfig& config) {
  return run_reference(Model(model), config);
}

Trace run_reference(const Model& model, const RunConfig& config) {
  Trace trace;
  trace.entities = model.entity_names();
  ExtendedConfiguration f = initial_configuration(model, config);
  if (f.members.empty()) return trace;

  auto make_row = [&](std::uint64_t k, double time, bool moved, bool reacted) {
    TraceRow row;
    row.step = k;
    row.time = time;
    for (const auto& e : trace.entities) row.populations[e] = 0;
    for (const auto& [e, count] : populations(f)) row.populations[e] = count;
    row.moves = moved ? 1 : 0;
    row.reactions = reacted ? 1 : 0;
    return row;
  };

  double clock = 0.0;
  trace.rows.push_back(make_row(0, clock, false, false));
  double next_sample = config.sample_interval;
  if (config.sample_interval > 0.0) trace.snapshots.push_back({clock, snapshot_to_json(f, clock)});
  CounterRng rng = stream_for(config, StreamTag::Reference, 0);
  for (std::uint64_t k = 1; k <= config.step_max && clock < config.t_max; ++k) {
    auto next = gillespie_step(f, model, rng);
    if (!next) break;
    if (clock + next->dt > config.t_max) {
      // The next reaction falls past the horizon.
      clock = config.t_max;
      trace.rows.push_back(make_row(k, clock, false, false));
      break;
    }
    f = std::move(next->configuration);
    clock += next->dt;
    trace.rows.push_back(make_row(k, clock, next->moved, next->reacted));
    if (config.sample_interval > 0.0 && clock >= next_sample) {
      trace.snapshots.push_back({clock, snapshot_to_json(f, clock)});
      next_sample = (std::floor(clock / config.sample_interval) + 1.0) * config.sample_interval;
    }
  }
  return trace;
}

}  // namespace bioscape
