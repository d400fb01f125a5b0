#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "bioscape/geometry.hpp"
#include "bioscape/model.hpp"
#include "bioscape/syntax.hpp"

#include <json.hpp>

namespace bioscape {

/// A process with its shape annotation and placement.
struct LocatedProcess {
  ProcessTerm process;
  Shape shape;
  Placement placement;
  friend bool operator==(const LocatedProcess&, const LocatedProcess&) = default;
};

/// A reduct waiting `timer` time units before it becomes available. In
/// canonical form the body holds at most one located process, since
/// (A | B)^n is kept as A^n | B^n. `reactants` names the entities consumed by the reaction that produced it;
/// it only feeds population counts and takes no part in equivalence.
struct TimedConfiguration {
  std::vector<LocatedProcess> body;
  double timer = 0.0;
  std::vector<Name> reactants;
  friend bool operator==(const TimedConfiguration&, const TimedConfiguration&) = default;
};

using Member = std::variant<LocatedProcess, TimedConfiguration>;

/// Canonical form: restrictions floated to the front, followed by a flat
/// multiset of members. In a canonical configuration every located process
/// is a single entity instance and every restricted name is distinct from
/// the global channels and from every other restricted name.
struct ExtendedConfiguration {
  std::vector<ChannelDecl> restrictions;
  std::vector<Member> members;
  friend bool operator==(const ExtendedConfiguration&, const ExtendedConfiguration&) = default;
};

/// Arbitrary configuration tree, the input of canonicalize.
struct RawConfiguration {
  enum class Kind { Located, Parallel, Restrict, Timed };

  Kind kind = Kind::Parallel;
  LocatedProcess located;
  ChannelDecl channel;
  double timer = 0.0;
  std::vector<RawConfiguration> children;

  static RawConfiguration make_located(ProcessTerm p, Shape shape, Placement mu);
  static RawConfiguration make_parallel(std::vector<RawConfiguration> parts);
  static RawConfiguration make_restrict(ChannelDecl channel, RawConfiguration body);
  static RawConfiguration make_timed(RawConfiguration body, double timer);
};

RawConfiguration to_raw(const ExtendedConfiguration& f);

/// Located instances plus the restrictions floated out of them.
struct SpatialFragment {
  std::vector<ChannelDecl> restrictions;
  std::vector<LocatedProcess> members;
};

ExtendedConfiguration canonicalize(const RawConfiguration& f, const Model& model);

/// Splits a located process into located instances. Restricted names are
/// renamed away from `used`, and the names chosen are added to it. When the
/// process has several instances each takes the position its primitive has
/// in the composite layout, so the union of their occupancies equals the
/// occupancy of the original.
SpatialFragment split_located(const LocatedProcess& lp, const Model& model,
                              std::set<Name>& used);

/// Removes restrictions whose channel no longer occurs in any member.
void drop_unused_restrictions(ExtendedConfiguration& f);

SpaceOccupancy occupancy(const LocatedProcess& lp);
SpaceOccupancy space_of(const ExtendedConfiguration& f);

/// Calls fn(const LocatedProcess&) for every located process, timed or not.
template <typename Fn>
void for_each_located(const ExtendedConfiguration& f, Fn&& fn) {
  for (const auto& m : f.members) {
    if (const auto* lp = std::get_if<LocatedProcess>(&m)) {
      fn(*lp);
    } else {
      for (const auto& inner : std::get<TimedConfiguration>(m).body) fn(inner);
    }
  }
}

/// No two located processes overlap. Uses a hash-grid broad phase.
bool is_ok(const ExtendedConfiguration& f);

const std::vector<ChannelDecl>& restr(const ExtendedConfiguration& f);
std::set<Name> free_names(const ExtendedConfiguration& f);

/// Canonical text of f up to member order and alpha-renaming of restricted
/// channels. Restricted names are numbered by first use over the members
/// sorted by a name-blind key; ties are broken by taking the smallest
/// result over their orderings.
std::string normal_form(const ExtendedConfiguration& f);
bool equivalent(const ExtendedConfiguration& f, const ExtendedConfiguration& g);

/// Entity counts. A pending timed reduct counts as the reactants that
/// produced it until its timer expires.
std::map<Name, std::int64_t> populations(const ExtendedConfiguration& f);

std::size_t timed_member_count(const ExtendedConfiguration& f);
std::size_t located_count(const ExtendedConfiguration& f);

/// Snapshot: {time, restrictions, members:[{entity,args,position,orientation,timer?}]}
nlohmann::json snapshot_to_json(const ExtendedConfiguration& f, double time);
/// Inverse of snapshot_to_json; shapes are taken from the model.
ExtendedConfiguration snapshot_from_json(const nlohmann::json& j, const Model& model,
                                         double* time = nullptr);

}  // namespace bioscape
