#include "bioscape/configuration.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "bioscape/spatial_index.hpp"

namespace bioscape {

namespace {

class Canonicalizer {
 public:
  Canonicalizer(const Model& model, std::set<Name>& used) : model_(model), used_(used) {}

  std::vector<ChannelDecl> restrictions;

  // Appends the instances of lp (after renaming) to out.
  void split(const LocatedProcess& lp, const std::map<Name, Name>& env,
             std::vector<LocatedProcess>& out) {
    std::vector<InstanceTerm> instances;
    collect_instances(lp.process, env, instances);
    if (instances.empty()) return;
    if (instances.size() == 1) {
      out.push_back({ProcessTerm::instance(instances[0].entity, instances[0].args), lp.shape,
                     lp.placement});
      return;
    }
    // Lay out the primitives of all instances exactly as place() would for
    // the composite shape of the whole process.
    struct Part {
      Primitive primitive;
      std::size_t owner;
    };
    std::vector<Part> parts;
    std::vector<Shape> shapes;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      shapes.push_back(model_.entity(instances[i].entity).shape);
      for (const auto& p : shapes.back().parts()) parts.push_back({p, i});
    }
    std::stable_sort(parts.begin(), parts.end(), [](const Part& a, const Part& b) {
      return primitive_less(a.primitive, b.primitive);
    });
    std::vector<Primitive> primitives;
    for (const auto& p : parts) primitives.push_back(p.primitive);
    const auto offsets = layout_offsets(primitives);
    std::vector<Vec3> sum(instances.size(), Vec3::Zero());
    std::vector<std::size_t> count(instances.size(), 0);
    for (std::size_t k = 0; k < parts.size(); ++k) {
      sum[parts[k].owner] += offsets[k];
      ++count[parts[k].owner];
    }
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const Vec3 offset = count[i] ? Vec3(sum[i] / static_cast<double>(count[i])) : Vec3::Zero();
      Placement mu = lp.placement;
      mu.origin = lp.placement.origin + lp.placement.orientation * offset;
      out.push_back({ProcessTerm::instance(instances[i].entity, instances[i].args), shapes[i], mu});
    }
  }

  void walk(const RawConfiguration& f, const std::map<Name, Name>& env,
            std::vector<Member>& out, bool inside_timer) {
    switch (f.kind) {
      case RawConfiguration::Kind::Located: {
        std::vector<LocatedProcess> located;
        split(f.located, env, located);
        for (auto& lp : located) out.emplace_back(std::move(lp));
        break;
      }
      case RawConfiguration::Kind::Parallel:
        for (const auto& child : f.children) walk(child, env, out, inside_timer);
        break;
      case RawConfiguration::Kind::Restrict: {
        std::map<Name, Name> inner = env;
        inner[f.channel.name] = bind(f.channel);
        walk(f.children.at(0), inner, out, inside_timer);
        break;
      }
      case RawConfiguration::Kind::Timed: {
        if (inside_timer) throw std::invalid_argument("timed configurations cannot be nested");
        if (f.timer < 0.0) throw std::invalid_argument("negative timer");
        std::vector<Member> body;
        walk(f.children.at(0), env, body, true);
        if (f.timer == 0.0) {
          for (auto& m : body) out.push_back(std::move(m));
          break;
        }
        // (A | B)^n is kept as A^n | B^n; an empty body still holds the clock.
        if (body.empty()) out.emplace_back(TimedConfiguration{{}, f.timer, {}});
        for (auto& m : body) {
          out.emplace_back(TimedConfiguration{{std::get<LocatedProcess>(std::move(m))}, f.timer, {}});
        }
        break;
      }
    }
  }

 private:
  Name bind(const ChannelDecl& decl) {
    ChannelDecl fresh = decl;
    if (used_.count(fresh.name)) fresh.name = fresh_name(decl.name, used_);
    used_.insert(fresh.name);
    restrictions.push_back(fresh);
    return fresh.name;
  }

  void collect_instances(const ProcessTerm& p, const std::map<Name, Name>& env,
                         std::vector<InstanceTerm>& out) {
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, InstanceTerm>) {
            InstanceTerm inst = n;
            for (auto& a : inst.args) {
              if (auto it = env.find(a); it != env.end()) a = it->second;
            }
            out.push_back(std::move(inst));
          } else if constexpr (std::is_same_v<N, ParTerm>) {
            collect_instances(n.left, env, out);
            collect_instances(n.right, env, out);
          } else if constexpr (std::is_same_v<N, RestrictTerm>) {
            std::map<Name, Name> inner = env;
            inner[n.channel.name] = bind(n.channel);
            collect_instances(n.body, inner, out);
          }
        },
        p.node().value);
  }

  const Model& model_;
  std::set<Name>& used_;
};

void raw_free_names(const RawConfiguration& f, std::set<Name>& out) {
  switch (f.kind) {
    case RawConfiguration::Kind::Located: {
      const auto fv = free_variables(f.located.process);
      out.insert(fv.begin(), fv.end());
      break;
    }
    case RawConfiguration::Kind::Restrict: {
      std::set<Name> inner;
      raw_free_names(f.children.at(0), inner);
      inner.erase(f.channel.name);
      out.insert(inner.begin(), inner.end());
      break;
    }
    default:
      for (const auto& c : f.children) raw_free_names(c, out);
  }
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::string decl_signature(const ChannelDecl& c) {
  return "{" + hex(c.rate) + "," + hex(c.radius) + (c.fixed ? ",f}" : "}");
}

std::string shape_key(const Shape& s) {
  std::string out = "[";
  for (const auto& p : s.parts()) {
    if (const auto* sp = std::get_if<Sphere>(&p)) {
      out += "s" + hex(sp->radius);
    } else {
      const Vec3& h = std::get<Box>(p).half_extents;
      out += "b" + hex(h.x()) + "," + hex(h.y()) + "," + hex(h.z());
    }
    out += ";";
  }
  return out + "]";
}

std::string placement_key(const Placement& mu) {
  return hex(mu.origin.x()) + "," + hex(mu.origin.y()) + "," + hex(mu.origin.z()) + "," +
         hex(mu.orientation.w()) + "," + hex(mu.orientation.x()) + "," + hex(mu.orientation.y()) +
         "," + hex(mu.orientation.z());
}

// Process text with names rewritten by `rename`.
template <typename Rename>
std::string process_key(const ProcessTerm& p, Rename&& rename) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, NilTerm>) {
          return "0";
        } else if constexpr (std::is_same_v<N, InstanceTerm>) {
          std::string out = n.entity + "(";
          for (const auto& a : n.args) out += rename(a) + ",";
          return out + ")";
        } else if constexpr (std::is_same_v<N, ParTerm>) {
          return "(" + process_key(n.left, rename) + "|" + process_key(n.right, rename) + ")";
        } else {
          // Bound inside the process; keep its own name.
          return "(new " + n.channel.name + decl_signature(n.channel) + ")" +
                 process_key(n.body, rename);
        }
      },
      p.node().value);
}

template <typename Rename>
std::string located_key(const LocatedProcess& lp, Rename&& rename) {
  return process_key(lp.process, rename) + shape_key(lp.shape) + "@" + placement_key(lp.placement);
}

template <typename Rename>
std::string member_key(const Member& m, Rename&& rename) {
  if (const auto* lp = std::get_if<LocatedProcess>(&m)) return located_key(*lp, rename);
  const auto& timed = std::get<TimedConfiguration>(m);
  std::vector<std::string> keys;
  for (const auto& lp : timed.body) keys.push_back(located_key(lp, rename));
  std::sort(keys.begin(), keys.end());
  std::string out = "T" + hex(timed.timer) + "<";
  for (const auto& k : keys) out += k + ";";
  return out + ">";
}

void names_in_order(const Member& m, std::vector<Name>& out) {
  auto add = [&](const LocatedProcess& lp) {
    // Deterministic per-process order: argument order of a left-to-right walk.
    std::vector<const ProcessTerm*> stack{&lp.process};
    while (!stack.empty()) {
      const ProcessTerm* p = stack.back();
      stack.pop_back();
      std::visit(
          [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, InstanceTerm>) {
              for (const auto& a : n.args) out.push_back(a);
            } else if constexpr (std::is_same_v<N, ParTerm>) {
              stack.push_back(&n.right);
              stack.push_back(&n.left);
            } else if constexpr (std::is_same_v<N, RestrictTerm>) {
              stack.push_back(&n.body);
            }
          },
          p->node().value);
    }
  };
  if (const auto* lp = std::get_if<LocatedProcess>(&m)) {
    add(*lp);
  } else {
    // Body order is not canonical; visit in name-blind key order.
    const auto& timed = std::get<TimedConfiguration>(m);
    std::vector<const LocatedProcess*> body;
    for (const auto& lp : timed.body) body.push_back(&lp);
    std::stable_sort(body.begin(), body.end(), [](const LocatedProcess* a, const LocatedProcess* b) {
      auto blind = [](const Name&) { return std::string("#"); };
      return located_key(*a, blind) < located_key(*b, blind);
    });
    for (const auto* lp : body) add(*lp);
  }
}

}  // namespace

RawConfiguration RawConfiguration::make_located(ProcessTerm p, Shape shape, Placement mu) {
  RawConfiguration r;
  r.kind = Kind::Located;
  r.located = {std::move(p), std::move(shape), mu};
  return r;
}

RawConfiguration RawConfiguration::make_parallel(std::vector<RawConfiguration> parts) {
  RawConfiguration r;
  r.kind = Kind::Parallel;
  r.children = std::move(parts);
  return r;
}

RawConfiguration RawConfiguration::make_restrict(ChannelDecl channel, RawConfiguration body) {
  RawConfiguration r;
  r.kind = Kind::Restrict;
  r.channel = std::move(channel);
  r.children.push_back(std::move(body));
  return r;
}

RawConfiguration RawConfiguration::make_timed(RawConfiguration body, double timer) {
  RawConfiguration r;
  r.kind = Kind::Timed;
  r.timer = timer;
  r.children.push_back(std::move(body));
  return r;
}

RawConfiguration to_raw(const ExtendedConfiguration& f) {
  std::vector<RawConfiguration> parts;
  for (const auto& m : f.members) {
    if (const auto* lp = std::get_if<LocatedProcess>(&m)) {
      parts.push_back(RawConfiguration::make_located(lp->process, lp->shape, lp->placement));
    } else {
      const auto& timed = std::get<TimedConfiguration>(m);
      std::vector<RawConfiguration> body;
      for (const auto& lp : timed.body) {
        body.push_back(RawConfiguration::make_located(lp.process, lp.shape, lp.placement));
      }
      parts.push_back(
          RawConfiguration::make_timed(RawConfiguration::make_parallel(std::move(body)), timed.timer));
    }
  }
  RawConfiguration raw = RawConfiguration::make_parallel(std::move(parts));
  for (auto it = f.restrictions.rbegin(); it != f.restrictions.rend(); ++it) {
    raw = RawConfiguration::make_restrict(*it, std::move(raw));
  }
  return raw;
}

ExtendedConfiguration canonicalize(const RawConfiguration& f, const Model& model) {
  std::set<Name> used = model.channel_names();
  raw_free_names(f, used);
  Canonicalizer c(model, used);
  ExtendedConfiguration out;
  c.walk(f, {}, out.members, false);
  out.restrictions = std::move(c.restrictions);
  return out;
}

SpatialFragment split_located(const LocatedProcess& lp, const Model& model,
                              std::set<Name>& used) {
  const auto fv = free_variables(lp.process);
  used.insert(fv.begin(), fv.end());
  Canonicalizer c(model, used);
  SpatialFragment fragment;
  c.split(lp, {}, fragment.members);
  fragment.restrictions = std::move(c.restrictions);
  return fragment;
}

void drop_unused_restrictions(ExtendedConfiguration& f) {
  if (f.restrictions.empty()) return;
  std::set<Name> live;
  for_each_located(f, [&](const LocatedProcess& lp) {
    const auto fv = free_variables(lp.process);
    live.insert(fv.begin(), fv.end());
  });
  std::erase_if(f.restrictions, [&](const ChannelDecl& c) { return !live.count(c.name); });
}

SpaceOccupancy occupancy(const LocatedProcess& lp) { return place(lp.placement, lp.shape); }

SpaceOccupancy space_of(const ExtendedConfiguration& f) {
  SpaceOccupancy occ;
  for_each_located(f, [&](const LocatedProcess& lp) { occ.append(occupancy(lp)); });
  return occ;
}

bool is_ok(const ExtendedConfiguration& f) {
  std::vector<SpaceOccupancy> items;
  double max_radius = 0.0;
  for_each_located(f, [&](const LocatedProcess& lp) {
    items.push_back(occupancy(lp));
    max_radius = std::max(max_radius, bounding_sphere(items.back()).radius);
  });
  if (items.size() < 2) return true;
  SpatialIndex index(2.0 * max_radius);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (index.overlaps_any(items[i])) return false;
    index.insert(i, std::move(items[i]));
  }
  return true;
}

const std::vector<ChannelDecl>& restr(const ExtendedConfiguration& f) { return f.restrictions; }

std::set<Name> free_names(const ExtendedConfiguration& f) {
  std::set<Name> out;
  for_each_located(f, [&](const LocatedProcess& lp) {
    const auto fv = free_variables(lp.process);
    out.insert(fv.begin(), fv.end());
  });
  for (const auto& r : f.restrictions) out.erase(r.name);
  return out;
}

std::string normal_form(const ExtendedConfiguration& f) {
  std::map<Name, const ChannelDecl*> restricted;
  for (const auto& r : f.restrictions) restricted[r.name] = &r;

  auto blind = [&](const Name& n) -> std::string {
    auto it = restricted.find(n);
    return it == restricted.end() ? n : "#" + decl_signature(*it->second);
  };
  std::vector<std::string> blind_keys;
  for (const auto& m : f.members) blind_keys.push_back(member_key(m, blind));
  std::vector<std::size_t> order(f.members.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return blind_keys[a] < blind_keys[b]; });

  // Tie groups whose members mention restricted names can be ordered freely.
  std::vector<std::pair<std::size_t, std::size_t>> ties;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && blind_keys[order[j]] == blind_keys[order[i]]) ++j;
    if (j - i > 1 && blind_keys[order[i]].find('#') != std::string::npos) ties.push_back({i, j});
    i = j;
  }
  double permutations = 1.0;
  for (const auto& [lo, hi] : ties) {
    for (std::size_t k = 2; k <= hi - lo; ++k) permutations *= static_cast<double>(k);
  }
  if (permutations > 40320.0) ties.clear();

  auto render = [&](const std::vector<std::size_t>& ord) {
    std::map<Name, std::string> numbering;
    for (auto idx : ord) {
      std::vector<Name> names;
      names_in_order(f.members[idx], names);
      for (const auto& n : names) {
        if (restricted.count(n) && !numbering.count(n)) {
          numbering[n] = "#" + std::to_string(numbering.size()) + decl_signature(*restricted[n]);
        }
      }
    }
    auto rename = [&](const Name& n) -> std::string {
      auto it = numbering.find(n);
      return it == numbering.end() ? n : it->second;
    };
    std::vector<std::string> keys;
    for (auto idx : ord) keys.push_back(member_key(f.members[idx], rename));
    std::sort(keys.begin(), keys.end());
    std::vector<std::string> unused;
    for (const auto& r : f.restrictions) {
      if (!numbering.count(r.name)) unused.push_back(decl_signature(r));
    }
    std::sort(unused.begin(), unused.end());
    std::string out;
    for (const auto& k : keys) out += k + "\n";
    out += "unused:";
    for (const auto& u : unused) out += u;
    return out;
  };

  std::string best = render(order);
  if (ties.empty()) return best;
  // Enumerate orderings within every tie group (odometer over the groups).
  for (auto& [lo, hi] : ties) std::sort(order.begin() + lo, order.begin() + hi);
  while (true) {
    best = std::min(best, render(order));
    std::size_t g = 0;
    for (; g < ties.size(); ++g) {
      auto [lo, hi] = ties[g];
      if (std::next_permutation(order.begin() + lo, order.begin() + hi)) break;
    }
    if (g == ties.size()) break;
  }
  return best;
}

bool equivalent(const ExtendedConfiguration& f, const ExtendedConfiguration& g) {
  return normal_form(f) == normal_form(g);
}

std::map<Name, std::int64_t> populations(const ExtendedConfiguration& f) {
  std::map<Name, std::int64_t> counts;
  auto count_process = [&](const ProcessTerm& p, auto&& self) -> void {
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, InstanceTerm>) {
            ++counts[n.entity];
          } else if constexpr (std::is_same_v<N, ParTerm>) {
            self(n.left, self);
            self(n.right, self);
          } else if constexpr (std::is_same_v<N, RestrictTerm>) {
            self(n.body, self);
          }
        },
        p.node().value);
  };
  for (const auto& m : f.members) {
    if (const auto* lp = std::get_if<LocatedProcess>(&m)) {
      count_process(lp->process, count_process);
    } else {
      for (const auto& r : std::get<TimedConfiguration>(m).reactants) ++counts[r];
    }
  }
  return counts;
}

std::size_t timed_member_count(const ExtendedConfiguration& f) {
  return static_cast<std::size_t>(std::count_if(f.members.begin(), f.members.end(), [](const Member& m) {
    return std::holds_alternative<TimedConfiguration>(m);
  }));
}

std::size_t located_count(const ExtendedConfiguration& f) {
  std::size_t n = 0;
  for_each_located(f, [&](const LocatedProcess&) { ++n; });
  return n;
}

nlohmann::json snapshot_to_json(const ExtendedConfiguration& f, double time) {
  using nlohmann::json;
  json j;
  j["time"] = time;
  j["restrictions"] = json::array();
  for (const auto& r : f.restrictions) {
    j["restrictions"].push_back({{"name", r.name}, {"rate", r.rate}, {"radius", r.radius}, {"fixed", r.fixed}});
  }
  j["members"] = json::array();
  j["pending"] = json::array();
  auto located = [](const LocatedProcess& lp) {
    json m;
    if (const auto* inst = std::get_if<InstanceTerm>(&lp.process.node().value)) {
      m["entity"] = inst->entity;
      m["args"] = inst->args;
    } else {
      m["process"] = to_string(lp.process);
    }
    const auto& o = lp.placement.origin;
    const auto& q = lp.placement.orientation;
    m["position"] = {o.x(), o.y(), o.z()};
    m["orientation"] = {q.w(), q.x(), q.y(), q.z()};
    return m;
  };
  std::size_t group = 0;
  for (const auto& member : f.members) {
    if (const auto* lp = std::get_if<LocatedProcess>(&member)) {
      j["members"].push_back(located(*lp));
      continue;
    }
    const auto& timed = std::get<TimedConfiguration>(member);
    for (const auto& lp : timed.body) {
      json m = located(lp);
      m["timer"] = timed.timer;
      m["group"] = group;
      j["members"].push_back(std::move(m));
    }
    j["pending"].push_back({{"group", group}, {"timer", timed.timer}, {"reactants", timed.reactants}});
    ++group;
  }
  return j;
}

ExtendedConfiguration snapshot_from_json(const nlohmann::json& j, const Model& model,
                                         double* time) {
  ExtendedConfiguration f;
  if (time) *time = j.at("time").get<double>();
  for (const auto& r : j.at("restrictions")) {
    f.restrictions.push_back({r.at("name").get<std::string>(), r.at("rate").get<double>(),
                              r.at("radius").get<double>(), r.value("fixed", false)});
  }
  // Timed groups take the position of their first member.
  std::map<std::size_t, const nlohmann::json*> pending;
  if (j.contains("pending")) {
    for (const auto& p : j.at("pending")) pending[p.at("group").get<std::size_t>()] = &p;
  }
  std::map<std::size_t, std::size_t> group_slot;
  for (const auto& m : j.at("members")) {
    if (!m.contains("entity")) throw std::invalid_argument("snapshot member is not an instance");
    LocatedProcess lp;
    const auto entity = m.at("entity").get<std::string>();
    lp.process = ProcessTerm::instance(entity, m.at("args").get<std::vector<Name>>());
    lp.shape = model.entity(entity).shape;
    const auto& p = m.at("position");
    const auto& q = m.at("orientation");
    lp.placement.origin = Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    lp.placement.orientation =
        Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
    if (m.contains("group")) {
      const auto group = m.at("group").get<std::size_t>();
      auto slot = group_slot.find(group);
      if (slot == group_slot.end()) {
        const auto it = pending.find(group);
        if (it == pending.end()) throw std::invalid_argument("snapshot member has an unknown group");
        TimedConfiguration timed;
        timed.timer = it->second->at("timer").get<double>();
        timed.reactants = it->second->at("reactants").get<std::vector<Name>>();
        slot = group_slot.emplace(group, f.members.size()).first;
        f.members.emplace_back(std::move(timed));
      }
      std::get<TimedConfiguration>(f.members[slot->second]).body.push_back(std::move(lp));
    } else {
      f.members.emplace_back(std::move(lp));
    }
  }
  // Groups whose reduct is empty have no members to anchor them.
  for (const auto& [group, p] : pending) {
    if (group_slot.count(group)) continue;
    TimedConfiguration timed;
    timed.timer = p->at("timer").get<double>();
    timed.reactants = p->at("reactants").get<std::vector<Name>>();
    f.members.emplace_back(std::move(timed));
  }
  return f;
}

}  // namespace bioscape
