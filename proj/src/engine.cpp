#include "bioscape/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include "bioscape/spatial_index.hpp"

namespace bioscape {

namespace {

// Runs fn(i) for i in [0, n), fanned out over contiguous chunks. Results must
// only depend on i, so the worker count never changes them.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  constexpr std::size_t kMinChunk = 256;
  if (workers <= 1 || n < 2 * kMinChunk) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(workers, n / kMinChunk);
  std::vector<std::thread> pool;
  for (std::size_t c = 0; c < chunks; ++c) {
    pool.emplace_back([&, c] {
      const std::size_t lo = n * c / chunks;
      const std::size_t hi = n * (c + 1) / chunks;
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<std::size_t> random_order(std::size_t n, CounterRng rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

double index_cell_size(const ExtendedConfiguration& f, const Model& model) {
  double radius = model.max_shape_radius();
  for_each_located(f, [&](const LocatedProcess& lp) {
    for (const auto& p : lp.shape.parts()) radius = std::max(radius, bounding_radius(p));
  });
  return 2.0 * radius;
}

// Hash grid over every located process of a configuration. Untimed member i
// is owner i; timed bodies and later insertions get ids from f.members.size().
class Occupants {
 public:
  Occupants(const ExtendedConfiguration& f, const Model& model)
      : index_(index_cell_size(f, model)), next_id_(f.members.size()) {
    for (std::size_t i = 0; i < f.members.size(); ++i) {
      if (const auto* lp = std::get_if<LocatedProcess>(&f.members[i])) {
        index_.insert(i, occupancy(*lp));
      } else {
        for (const auto& inner : std::get<TimedConfiguration>(f.members[i]).body) {
          index_.insert(next_id_++, occupancy(inner));
        }
      }
    }
  }

  // True if the fragment is internally disjoint and clear of every occupant
  // except `ignore`.
  bool fits(const std::vector<SpaceOccupancy>& parts, std::span<const std::size_t> ignore) const {
    for (std::size_t a = 0; a < parts.size(); ++a) {
      for (std::size_t b = a + 1; b < parts.size(); ++b) {
        if (overlap(parts[a], parts[b])) return false;
      }
    }
    for (const auto& occ : parts) {
      if (index_.overlaps_any(occ, ignore)) return false;
    }
    return true;
  }

  void replace(std::span<const std::size_t> removed, const std::vector<SpaceOccupancy>& added) {
    for (auto id : removed) index_.remove(id);
    for (const auto& occ : added) index_.insert(next_id_++, occ);
  }

 private:
  SpatialIndex index_;
  std::size_t next_id_;
};

std::vector<SpaceOccupancy> fragment_occupancy(const SpatialFragment& fragment) {
  std::vector<SpaceOccupancy> out;
  out.reserve(fragment.members.size());
  for (const auto& lp : fragment.members) out.push_back(occupancy(lp));
  return out;
}

// Renames the fragment's restrictions away from `used` and records them.
void absorb(SpatialFragment& fragment, std::set<Name>& used,
            std::vector<ChannelDecl>& restrictions) {
  std::map<Name, Name> renaming;
  for (auto& r : fragment.restrictions) {
    if (used.count(r.name)) {
      const Name fresh = fresh_name(r.name, used);
      renaming[r.name] = fresh;
      r.name = fresh;
    }
    used.insert(r.name);
    restrictions.push_back(r);
  }
  if (renaming.empty()) return;
  for (auto& lp : fragment.members) lp.process = substitute(lp.process, renaming);
}

std::set<Name> names_in_use(const ExtendedConfiguration& f, const Model& model) {
  std::set<Name> used = model.channel_names();
  for (const auto& r : f.restrictions) used.insert(r.name);
  return used;
}

Name entity_of(const Member& m) {
  const auto& lp = std::get<LocatedProcess>(m);
  if (const auto* inst = std::get_if<InstanceTerm>(&lp.process.node().value)) return inst->entity;
  return to_string(lp.process);
}

}  // namespace

unsigned worker_count(const RunConfig& config) {
  unsigned cap = config.threads;
  if (cap == 0) {
    if (const char* env = std::getenv("BIOSCAPE_THREADS")) cap = static_cast<unsigned>(std::atoi(env));
  }
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return cap;
}

CounterRng stream_for(const RunConfig& config, StreamTag tag, std::uint64_t step,
                      std::uint64_t member) {
  return CounterRng::keyed(config.seed, {static_cast<std::uint64_t>(tag), step, member});
}

ExtendedConfiguration parallel_move(const ExtendedConfiguration& f, const PhaseContext& ctx,
                                    MovePhaseReport* report) {
  MovePhaseReport local;
  MovePhaseReport& r = report ? *report : local;
  r = {};
  r.handles = enumerate_move_redexes(f, ctx.model);
  const std::size_t n = r.handles.size();
  r.samples.resize(n);
  r.committed.assign(n, false);

  const unsigned retries = std::max(1u, ctx.config.move_retries);
  parallel_for(n, worker_count(ctx.config), [&](std::size_t i) {
    CounterRng rng = stream_for(ctx.config, StreamTag::MoveSample, ctx.step, r.handles[i].first);
    for (unsigned k = 0; k < retries; ++k) {
      r.samples[i].push_back(apply_move(r.handles[i], f, ctx.model, rng));
    }
  });

  std::vector<std::vector<std::vector<SpaceOccupancy>>> shapes(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& s : r.samples[i]) {
      shapes[i].push_back(s ? fragment_occupancy(s->reduct) : std::vector<SpaceOccupancy>{});
    }
  }

  Occupants occupants(f, ctx.model);
  std::vector<std::size_t> chosen(n, 0);
  std::vector<std::size_t> commit_order;
  const auto order = random_order(n, stream_for(ctx.config, StreamTag::MoveOrder, ctx.step));
  for (bool progress = true; progress;) {
    progress = false;
    for (auto i : order) {
      if (r.committed[i]) continue;
      const std::size_t self[] = {r.handles[i].first};
      for (std::size_t k = 0; k < r.samples[i].size(); ++k) {
        if (!r.samples[i][k] || !occupants.fits(shapes[i][k], self)) continue;
        occupants.replace(self, shapes[i][k]);
        r.committed[i] = true;
        chosen[i] = k;
        commit_order.push_back(i);
        progress = true;
        break;
      }
    }
  }

  std::vector<std::optional<std::size_t>> moved_by(f.members.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (r.committed[i]) moved_by[r.handles[i].first] = i;
  }
  ExtendedConfiguration out;
  out.restrictions = f.restrictions;
  std::set<Name> used = names_in_use(f, ctx.model);
  r.member_map.assign(f.members.size(), kNoMember);
  for (std::size_t m = 0; m < f.members.size(); ++m) {
    if (!moved_by[m]) {
      r.member_map[m] = out.members.size();
      out.members.push_back(f.members[m]);
      continue;
    }
    const std::size_t i = *moved_by[m];
    SpatialFragment reduct = r.samples[i][chosen[i]]->reduct;
    absorb(reduct, used, out.restrictions);
    for (auto& lp : reduct.members) out.members.emplace_back(std::move(lp));
  }
  return out;
}

double tau_from_uniform(double rate, std::size_t context_count, double u, TauOptions options) {
  double lambda = rate;
  if (options.counting) lambda *= static_cast<double>(std::max<std::size_t>(1, context_count));
  if (options.fixed) return 1.0 / lambda;
  return -std::log(u) / lambda;
}

double tau(double rate, std::size_t context_count, CounterRng& rng, TauOptions options) {
  if (!(rate > 0.0)) throw std::invalid_argument("tau needs a positive rate");
  return tau_from_uniform(rate, context_count, options.fixed ? 0.5 : rng.uniform_open(), options);
}

ExtendedConfiguration parallel_stoc(const ExtendedConfiguration& f, const PhaseContext& ctx,
                                    StocPhaseReport* report) {
  StocPhaseReport local;
  StocPhaseReport& r = report ? *report : local;
  r = {};
  const auto handles = enumerate_stoc_redexes(f, ctx.model);
  std::vector<StochasticCandidate> all(handles.size());
  parallel_for(handles.size(), worker_count(ctx.config),
               [&](std::size_t i) { all[i] = apply_stoc(handles[i], f, ctx.model); });
  // A zero rate never fires.
  for (auto& c : all) {
    if (c.rate > 0.0) r.candidates.push_back(std::move(c));
  }
  const std::size_t n = r.candidates.size();
  r.committed.assign(n, false);
  r.durations.assign(n, 0.0);

  std::vector<std::vector<SpaceOccupancy>> shapes(n);
  for (std::size_t i = 0; i < n; ++i) shapes[i] = fragment_occupancy(r.candidates[i].reduct);

  Occupants occupants(f, ctx.model);
  std::vector<bool> consumed(f.members.size(), false);
  std::vector<std::size_t> commit_order;
  const auto order = random_order(n, stream_for(ctx.config, StreamTag::StocOrder, ctx.step));
  for (bool progress = true; progress;) {
    progress = false;
    for (auto i : order) {
      if (r.committed[i]) continue;
      const auto members = r.candidates[i].handle.members();
      if (std::any_of(members.begin(), members.end(), [&](std::size_t m) { return consumed[m]; })) {
        continue;
      }
      if (!occupants.fits(shapes[i], members)) continue;
      occupants.replace(members, shapes[i]);
      for (auto m : members) consumed[m] = true;
      r.committed[i] = true;
      commit_order.push_back(i);
      progress = true;
    }
  }

  // Partners in range per (sender, channel), for counting mode.
  std::map<std::pair<std::size_t, Name>, std::set<std::size_t>> partners;
  if (ctx.config.counting_mode) {
    for (const auto& c : r.candidates) {
      if (c.handle.kind == RedexKind::Com) partners[{c.handle.first, c.handle.channel}].insert(c.handle.second);
    }
  }

  ExtendedConfiguration out;
  out.restrictions = f.restrictions;
  r.member_map.assign(f.members.size(), kNoMember);
  for (std::size_t m = 0; m < f.members.size(); ++m) {
    if (consumed[m]) continue;
    r.member_map[m] = out.members.size();
    out.members.push_back(f.members[m]);
  }
  std::set<Name> used = names_in_use(f, ctx.model);
  for (auto i : commit_order) {
    auto& c = r.candidates[i];
    std::size_t count = 1;
    if (c.handle.kind == RedexKind::Com && ctx.config.counting_mode) {
      count = partners[{c.handle.first, c.handle.channel}].size();
    }
    CounterRng rng = stream_for(ctx.config, StreamTag::Duration, ctx.step, c.handle.first);
    r.durations[i] = tau(c.rate, count, rng, {ctx.config.counting_mode, c.fixed});
    SpatialFragment reduct = c.reduct;
    absorb(reduct, used, out.restrictions);
    if (r.durations[i] == 0.0) {
      for (auto& lp : reduct.members) out.members.emplace_back(std::move(lp));
      continue;
    }
    // One timed member per product; the first carries the reactants.
    std::vector<Name> reactants;
    for (auto m : c.handle.members()) reactants.push_back(entity_of(f.members[m]));
    if (reduct.members.empty()) {
      out.members.emplace_back(TimedConfiguration{{}, r.durations[i], std::move(reactants)});
    }
    for (auto& lp : reduct.members) {
      out.members.emplace_back(
          TimedConfiguration{{std::move(lp)}, r.durations[i], std::move(reactants)});
      reactants.clear();
    }
  }
  return out;
}

std::optional<TimedAdvance> parallel_timed(const ExtendedConfiguration& f) {
  double n = std::numeric_limits<double>::infinity();
  for (const auto& m : f.members) {
    if (const auto* t = std::get_if<TimedConfiguration>(&m)) n = std::min(n, t->timer);
  }
  if (!std::isfinite(n)) return std::nullopt;
  TimedAdvance result;
  result.advanced = n;
  result.configuration.restrictions = f.restrictions;
  auto& members = result.configuration.members;
  for (const auto& m : f.members) {
    const auto* t = std::get_if<TimedConfiguration>(&m);
    if (!t) {
      members.push_back(m);
    } else if (t->timer - n <= 0.0) {
      for (const auto& lp : t->body) members.emplace_back(lp);
    } else {
      TimedConfiguration waiting = *t;
      waiting.timer = t->timer - n;
      members.emplace_back(std::move(waiting));
    }
  }
  return result;
}

StepOutcome step(const ExtendedConfiguration& f, const PhaseContext& ctx, double clock,
                 double time_limit, StepDetail* detail) {
  StepDetail local;
  StepDetail& d = detail ? *detail : local;
  StepOutcome out;
  out.rng_state = ctx.step;
  d.after_move = parallel_move(f, ctx, &d.move);
  out.moves_applied = static_cast<std::uint64_t>(
      std::count(d.move.committed.begin(), d.move.committed.end(), true));
  d.after_stoc = parallel_stoc(d.after_move, ctx, &d.stoc);
  out.reactions_applied = static_cast<std::uint64_t>(
      std::count(d.stoc.committed.begin(), d.stoc.committed.end(), true));

  if (timed_member_count(d.after_stoc) == 0) {
    out.configuration = d.after_stoc;
    out.terminated = out.moves_applied == 0 && out.reactions_applied == 0;
  } else {
    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& m : d.after_stoc.members) {
      if (const auto* t = std::get_if<TimedConfiguration>(&m)) smallest = std::min(smallest, t->timer);
    }
    if (clock + smallest > time_limit) {
      const double delta = std::max(0.0, time_limit - clock);
      out.configuration = d.after_stoc;
      for (auto& m : out.configuration.members) {
        if (auto* t = std::get_if<TimedConfiguration>(&m)) t->timer -= delta;
      }
      out.time_advanced = delta;
      out.horizon_reached = true;
    } else {
      auto advanced = parallel_timed(d.after_stoc);
      out.configuration = std::move(advanced->configuration);
      out.time_advanced = advanced->advanced;
    }
  }
  drop_unused_restrictions(out.configuration);
  return out;
}

ExtendedConfiguration initial_configuration(const Model& model, const RunConfig& config) {
  ExtendedConfiguration f;
  CounterRng rng = stream_for(config, StreamTag::Init, 0);
  SpatialIndex index(2.0 * model.max_shape_radius());
  for (const auto& init : model.file().initial) {
    const auto& def = model.entity(init.entity);
    const Region& region = model.region(init.region);
    for (std::int64_t c = 0; c < init.count; ++c) {
      bool placed = false;
      for (std::size_t attempt = 0; attempt < config.placement_attempts && !placed; ++attempt) {
        Placement mu;
        mu.origin = sample_point(region, config.world, rng);
        SpaceOccupancy occ = place(mu, def.shape);
        if (!contains(region, occ) || index.overlaps_any(occ)) continue;
        index.insert(f.members.size(), std::move(occ));
        f.members.emplace_back(
            LocatedProcess{ProcessTerm::instance(init.entity, init.args), def.shape, mu});
        placed = true;
      }
      if (!placed) {
        throw InfeasiblePlacement("could not place instance " + std::to_string(c + 1) + " of " +
                                  init.entity + " in region " + init.region + " after " +
                                  std::to_string(config.placement_attempts) + " attempts");
      }
    }
  }
  return f;
}

Trace run(const ModelFile& model, const RunConfig& config) { return run(Model(model), config); }

Trace run(const Model& model, const RunConfig& config) {
  using Clock = std::chrono::steady_clock;
  Trace trace;
  trace.entities = model.entity_names();
  ExtendedConfiguration f = initial_configuration(model, config);
  if (f.members.empty()) return trace;

  auto make_row = [&](std::uint64_t k, double time, std::uint64_t moves, std::uint64_t reactions,
                      double wall_ms) {
    TraceRow row;
    row.step = k;
    row.time = time;
    for (const auto& e : trace.entities) row.populations[e] = 0;
    for (const auto& [e, count] : populations(f)) row.populations[e] = count;
    row.moves = moves;
    row.reactions = reactions;
    row.wall_ms = config.record_wall_time ? wall_ms : 0.0;
    return row;
  };

  double clock = 0.0;
  trace.rows.push_back(make_row(0, clock, 0, 0, 0.0));
  double next_sample = config.sample_interval;
  if (config.sample_interval > 0.0) trace.snapshots.push_back({clock, snapshot_to_json(f, clock)});

  for (std::uint64_t k = 1; k <= config.step_max && clock < config.t_max; ++k) {
    const auto start = Clock::now();
    StepOutcome outcome = step(f, PhaseContext{model, config, k}, clock, config.t_max);
    if (outcome.terminated) break;
    f = std::move(outcome.configuration);
    clock += outcome.time_advanced;
    if (outcome.horizon_reached) clock = config.t_max;
    const double wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    trace.rows.push_back(
        make_row(k, clock, outcome.moves_applied, outcome.reactions_applied, wall_ms));
    if (config.sample_interval > 0.0 && clock >= next_sample) {
      trace.snapshots.push_back({clock, snapshot_to_json(f, clock)});
      next_sample = (std::floor(clock / config.sample_interval) + 1.0) * config.sample_interval;
    }
  }
  return trace;
}

namespace {

// Fresh index over `after`, owners numbered like Occupants.
SpatialIndex audit_index(const ExtendedConfiguration& after) {
  double radius = 0.0;
  for_each_located(after, [&](const LocatedProcess& lp) {
    radius = std::max(radius, bounding_sphere(occupancy(lp)).radius);
  });
  SpatialIndex index(2.0 * radius);
  std::size_t next = after.members.size();
  for (std::size_t i = 0; i < after.members.size(); ++i) {
    if (const auto* lp = std::get_if<LocatedProcess>(&after.members[i])) {
      index.insert(i, occupancy(*lp));
    } else {
      for (const auto& inner : std::get<TimedConfiguration>(after.members[i]).body) {
        index.insert(next++, occupancy(inner));
      }
    }
  }
  return index;
}

bool fragment_fits(const SpatialIndex& index, const SpatialFragment& fragment,
                   std::span<const std::size_t> ignore) {
  const auto parts = fragment_occupancy(fragment);
  for (std::size_t a = 0; a < parts.size(); ++a) {
    for (std::size_t b = a + 1; b < parts.size(); ++b) {
      if (overlap(parts[a], parts[b])) return false;
    }
    if (index.overlaps_any(parts[a], ignore)) return false;
  }
  return true;
}

}  // namespace

std::size_t audit_move_maximality(const ExtendedConfiguration& after,
                                  const MovePhaseReport& report) {
  const SpatialIndex index = audit_index(after);
  std::size_t violations = 0;
  for (std::size_t i = 0; i < report.handles.size(); ++i) {
    if (report.committed[i]) continue;
    const std::size_t self[] = {report.member_map.at(report.handles[i].first)};
    for (const auto& sample : report.samples[i]) {
      if (sample && fragment_fits(index, sample->reduct, self)) {
        ++violations;
        break;
      }
    }
  }
  return violations;
}

std::size_t audit_stoc_maximality(const ExtendedConfiguration& before,
                                  const ExtendedConfiguration& after,
                                  const StocPhaseReport& report) {
  (void)before;
  const SpatialIndex index = audit_index(after);
  std::size_t violations = 0;
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    if (report.committed[i]) continue;
    std::vector<std::size_t> reactants;
    bool conflicted = false;
    for (auto m : report.candidates[i].handle.members()) {
      if (report.member_map.at(m) == kNoMember) conflicted = true;
      reactants.push_back(report.member_map.at(m));
    }
    if (conflicted) continue;
    if (fragment_fits(index, report.candidates[i].reduct, reactants)) ++violations;
  }
  return violations;
}

}  // namespace bioscape
