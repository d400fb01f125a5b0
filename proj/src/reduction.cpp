#include "bioscape/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <unordered_map>

namespace bioscape {

namespace {

struct Bound {
  const EntityDefinition* def;
  const InstanceTerm* inst;
  const LocatedProcess* located;
};

std::optional<Bound> bind_member(const ExtendedConfiguration& f, const Model& model,
                                 std::size_t i) {
  const auto* lp = std::get_if<LocatedProcess>(&f.members[i]);
  if (!lp) return std::nullopt;
  const auto* inst = std::get_if<InstanceTerm>(&lp->process.node().value);
  if (!inst) return std::nullopt;
  return Bound{&model.entity(inst->entity), inst, lp};
}

// Actual name of a name used in a definition body.
const Name& resolve(const Bound& b, const Name& name) {
  const auto& params = b.def->params;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k] == name) return b.inst->args[k];
  }
  return name;
}

const Bound& member_of(const std::vector<std::optional<Bound>>& bound, std::size_t i) {
  return *bound[i];
}

struct Endpoint {
  std::size_t member;
  std::size_t branch;
};

std::int64_t cell_of(double x, double cell) {
  return static_cast<std::int64_t>(std::floor(x / cell));
}

std::set<Name> reserved_names(const ExtendedConfiguration& f, const Model& model) {
  std::set<Name> used = model.channel_names();
  for (const auto& r : f.restrictions) used.insert(r.name);
  return used;
}

ProcessTerm continuation_with_actuals(const Bound& b, std::size_t branch) {
  return substitute(b.def->body.branches.at(branch).continuation, b.def->params, b.inst->args);
}

}  // namespace

const ChannelDecl* lookup_channel(const ExtendedConfiguration& f, const Model& model,
                                  const Name& name) {
  for (const auto& r : f.restrictions) {
    if (r.name == name) return &r;
  }
  return model.find_channel(name);
}

std::vector<RedexHandle> enumerate_move_redexes(const ExtendedConfiguration& f,
                                                const Model& model) {
  std::vector<RedexHandle> handles;
  for (std::size_t i = 0; i < f.members.size(); ++i) {
    const auto b = bind_member(f, model, i);
    if (!b) continue;
    const auto& branches = b->def->body.branches;
    const bool movable = std::any_of(branches.begin(), branches.end(), [](const Branch& br) {
      return std::holds_alternative<MovePrefix>(br.prefix);
    });
    if (movable) handles.push_back({RedexKind::Move, i, kNoMember, 0, 0, {}});
  }
  return handles;
}

std::vector<RedexHandle> enumerate_stoc_redexes(const ExtendedConfiguration& f,
                                                const Model& model) {
  std::vector<RedexHandle> handles;
  std::vector<std::optional<Bound>> bound(f.members.size());
  std::map<Name, std::vector<Endpoint>> senders;
  std::map<Name, std::vector<Endpoint>> receivers;
  for (std::size_t i = 0; i < f.members.size(); ++i) {
    bound[i] = bind_member(f, model, i);
    if (!bound[i]) continue;
    const auto& branches = bound[i]->def->body.branches;
    for (std::size_t k = 0; k < branches.size(); ++k) {
      const Prefix& pi = branches[k].prefix;
      if (std::holds_alternative<DelayPrefix>(pi)) {
        handles.push_back({RedexKind::Delay, i, kNoMember, k, 0, {}});
      } else if (const auto* out = std::get_if<OutputPrefix>(&pi)) {
        senders[resolve(*bound[i], out->channel)].push_back({i, k});
      } else if (const auto* in = std::get_if<InputPrefix>(&pi)) {
        receivers[resolve(*bound[i], in->channel)].push_back({i, k});
      }
    }
  }
  for (const auto* side : {&senders, &receivers}) {
    for (const auto& [channel, endpoints] : *side) {
      if (!lookup_channel(f, model, channel)) throw UndeclaredChannel(channel);
    }
  }
  for (const auto& [channel, outs] : senders) {
    auto rx = receivers.find(channel);
    if (rx == receivers.end()) continue;
    const double radius = lookup_channel(f, model, channel)->radius;
    const double cell = std::max(radius, 1e-6);
    // Bucket receivers on a grid with cell = radius; partners lie in the 27
    // surrounding cells.
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
    auto key = [](std::int64_t x, std::int64_t y, std::int64_t z) {
      return mix64(static_cast<std::uint64_t>(x) ^ mix64(static_cast<std::uint64_t>(y) ^
                                                        mix64(static_cast<std::uint64_t>(z))));
    };
    const auto& ins = rx->second;
    for (std::size_t r = 0; r < ins.size(); ++r) {
      const Vec3& o = member_of(bound, ins[r].member).located->placement.origin;
      grid[key(cell_of(o.x(), cell), cell_of(o.y(), cell), cell_of(o.z(), cell))].push_back(r);
    }
    for (const auto& s : outs) {
      const Placement& mu = member_of(bound, s.member).located->placement;
      const auto cx = cell_of(mu.origin.x(), cell);
      const auto cy = cell_of(mu.origin.y(), cell);
      const auto cz = cell_of(mu.origin.z(), cell);
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dz = -1; dz <= 1; ++dz) {
            auto it = grid.find(key(cx + dx, cy + dy, cz + dz));
            if (it == grid.end()) continue;
            for (auto r : it->second) {
              const Endpoint& e = ins[r];
              if (e.member == s.member) continue;
              if (distance(mu, member_of(bound, e.member).located->placement) > radius) continue;
              handles.push_back({RedexKind::Com, s.member, e.member, s.branch, e.branch, channel});
            }
          }
        }
      }
    }
  }
  std::sort(handles.begin(), handles.end(), [](const RedexHandle& a, const RedexHandle& b) {
    auto second = [](const RedexHandle& h) { return h.second == kNoMember ? 0 : h.second + 1; };
    return std::make_tuple(a.first, a.branch, second(a), a.partner_branch) <
           std::make_tuple(b.first, b.branch, second(b), b.partner_branch);
  });
  return handles;
}

std::optional<MoveCandidate> apply_move(const RedexHandle& h, const ExtendedConfiguration& f,
                                        const Model& model, CounterRng& rng) {
  const auto b = bind_member(f, model, h.first);
  if (!b) throw std::invalid_argument("move handle does not refer to an untimed instance");
  std::vector<std::size_t> moves;
  const auto& branches = b->def->body.branches;
  for (std::size_t k = 0; k < branches.size(); ++k) {
    if (std::holds_alternative<MovePrefix>(branches[k].prefix)) moves.push_back(k);
  }
  if (moves.empty()) throw std::invalid_argument("member has no mov branch");
  const std::size_t branch = moves.size() == 1 ? moves[0] : moves[rng.below(moves.size())];
  const Placement target = translate(b->def->step, b->located->placement, rng);
  if (!contains(model.region(b->def->space), place(target, b->located->shape))) {
    return std::nullopt;
  }
  MoveCandidate c;
  c.handle = h;
  c.handle.branch = branch;
  c.new_placement = target;
  const ProcessTerm next = continuation_with_actuals(*b, branch);
  std::set<Name> used = reserved_names(f, model);
  c.reduct = split_located({next, model.sha(next), target}, model, used);
  return c;
}

StochasticCandidate apply_stoc(const RedexHandle& h, const ExtendedConfiguration& f,
                               const Model& model) {
  StochasticCandidate c;
  c.handle = h;
  std::set<Name> used = reserved_names(f, model);
  const auto sender = bind_member(f, model, h.first);
  if (!sender) throw std::invalid_argument("stochastic handle does not refer to an untimed instance");
  const Branch& branch = sender->def->body.branches.at(h.branch);

  if (h.kind == RedexKind::Delay) {
    const auto& delay = std::get<DelayPrefix>(branch.prefix);
    c.rate = delay.rate;
    c.fixed = delay.fixed;
    const ProcessTerm next = continuation_with_actuals(*sender, h.branch);
    c.reduct = split_located({next, model.sha(next), sender->located->placement}, model, used);
    return c;
  }
  if (h.kind != RedexKind::Com) throw std::invalid_argument("not a stochastic handle");

  const auto receiver = bind_member(f, model, h.second);
  if (!receiver) throw std::invalid_argument("communication partner is not an untimed instance");
  const ChannelDecl* channel = lookup_channel(f, model, h.channel);
  if (!channel) throw UndeclaredChannel(h.channel);
  c.rate = channel->rate;
  c.fixed = channel->fixed;

  const auto& out = std::get<OutputPrefix>(branch.prefix);
  const Name message = resolve(*sender, out.message);
  const ProcessTerm sender_next = continuation_with_actuals(*sender, h.branch);

  const Branch& in_branch = receiver->def->body.branches.at(h.partner_branch);
  const auto& in = std::get<InputPrefix>(in_branch.prefix);
  // Q[d/y][b/z]; the binder shadows a parameter of the same name.
  std::map<Name, Name> bindings;
  for (std::size_t k = 0; k < receiver->def->params.size(); ++k) {
    bindings[receiver->def->params[k]] = receiver->inst->args[k];
  }
  bindings[in.binder] = message;
  const ProcessTerm receiver_next = substitute(in_branch.continuation, bindings);

  c.reduct = split_located({sender_next, model.sha(sender_next), sender->located->placement},
                           model, used);
  auto rest = split_located(
      {receiver_next, model.sha(receiver_next), receiver->located->placement}, model, used);
  c.reduct.restrictions.insert(c.reduct.restrictions.end(), rest.restrictions.begin(),
                               rest.restrictions.end());
  c.reduct.members.insert(c.reduct.members.end(), rest.members.begin(), rest.members.end());
  return c;
}

}  // namespace bioscape
