#include <doctest.h>

#include "bioscape/configuration.hpp"
#include "support.hpp"

using namespace bioscape;
using namespace bioscape::testing;

namespace {

const char* kModel =
    "channel g@1.0,1.0\n"
    "entity Bac() = mov.Bac() + delay@1.0.(Bac() | Bac()) space all step 0.5 shape sphere(1.0)\n"
    "entity X(a, b) = !a(b).0 space all step 0 shape sphere(1.0)\n"
    "entity Q(a) = ?a(z).0 space all step 0 shape sphere(1.0)\n"
    "entity Nil() = delay@1.0.0 space all step 0 shape sphere(0.5)\n";

RawConfiguration raw(const Model& m, ProcessTerm p, Vec3 at = Vec3::Zero()) {
  Placement mu;
  mu.origin = at;
  return RawConfiguration::make_located(p, m.sha(p), mu);
}

ChannelDecl chan(Name n, double rate = 1.0, double radius = 1.0) {
  return ChannelDecl{std::move(n), rate, radius, false};
}

}  // namespace

TEST_CASE("inert located processes vanish") {
  const Model m = model_from(kModel);
  const auto f = canonicalize(raw(m, ProcessTerm::nil()), m);
  CHECK(f.members.empty());
  CHECK(f.restrictions.empty());
}

TEST_CASE("a located parallel composition splits into tangent instances") {
  const Model m = model_from(kModel);
  const auto p = ProcessTerm::par(ProcessTerm::instance("Bac"), ProcessTerm::instance("Bac"));
  const auto f = canonicalize(raw(m, p, Vec3(3, 0, 0)), m);
  REQUIRE(f.members.size() == 2);
  const auto& a = std::get<LocatedProcess>(f.members[0]);
  const auto& b = std::get<LocatedProcess>(f.members[1]);
  CHECK(a.shape == Shape::sphere(1.0));
  CHECK((a.placement.origin - b.placement.origin).norm() == doctest::Approx(2.0));
  CHECK(((a.placement.origin + b.placement.origin) / 2).isApprox(Vec3(3, 0, 0)));
  CHECK(is_ok(f));
}

TEST_CASE("restrictions float out with capture avoidance") {
  const Model m = model_from(kModel);
  // (new a) X(a, a) | Q(a) where the second a is free.
  const auto left = RawConfiguration::make_restrict(
      chan("a"), raw(m, ProcessTerm::instance("X", {"a", "a"}), Vec3(0, 0, 0)));
  const auto right = raw(m, ProcessTerm::instance("Q", {"a"}), Vec3(5, 0, 0));
  const auto f = canonicalize(RawConfiguration::make_parallel({left, right}), m);
  REQUIRE(f.restrictions.size() == 1);
  const Name bound = f.restrictions[0].name;
  CHECK(bound != "a");
  CHECK(free_names(f) == std::set<Name>{"a"});
  const auto& x = std::get<LocatedProcess>(f.members[0]);
  CHECK(x.process == ProcessTerm::instance("X", {bound, bound}));
}

TEST_CASE("restricted names never shadow global channels") {
  const Model m = model_from(kModel);
  const auto f = canonicalize(
      RawConfiguration::make_restrict(chan("g"), raw(m, ProcessTerm::instance("Q", {"g"}))), m);
  REQUIRE(f.restrictions.size() == 1);
  CHECK(f.restrictions[0].name != "g");
}

TEST_CASE("zero timers flatten, positive timers stay") {
  const Model m = model_from(kModel);
  const auto bac = raw(m, ProcessTerm::instance("Bac"));
  const auto flat = canonicalize(RawConfiguration::make_timed(bac, 0.0), m);
  CHECK(flat == canonicalize(bac, m));
  const auto timed = canonicalize(RawConfiguration::make_timed(bac, 5.0), m);
  REQUIRE(timed.members.size() == 1);
  CHECK(std::get<TimedConfiguration>(timed.members[0]).timer == 5.0);
  CHECK(timed_member_count(timed) == 1);
  CHECK(located_count(timed) == 1);
  CHECK(equivalent(flat, canonicalize(RawConfiguration::make_timed(bac, 0.0), m)));
  CHECK_FALSE(equivalent(flat, timed));
  CHECK_THROWS(canonicalize(
      RawConfiguration::make_timed(RawConfiguration::make_timed(bac, 1.0), 2.0), m));
}

TEST_CASE("timers distribute over parallel composition") {
  const Model m = model_from(kModel);
  const auto two = RawConfiguration::make_parallel(
      {raw(m, ProcessTerm::instance("Bac")), raw(m, ProcessTerm::instance("Bac"), Vec3(5, 0, 0))});
  const auto joint = canonicalize(RawConfiguration::make_timed(two, 3.0), m);
  const auto split = canonicalize(
      RawConfiguration::make_parallel(
          {RawConfiguration::make_timed(raw(m, ProcessTerm::instance("Bac")), 3.0),
           RawConfiguration::make_timed(raw(m, ProcessTerm::instance("Bac"), Vec3(5, 0, 0)), 3.0)}),
      m);
  CHECK(timed_member_count(joint) == 2);
  CHECK(equivalent(joint, split));
  // An empty body still counts as a pending member.
  const auto empty = canonicalize(RawConfiguration::make_timed(raw(m, ProcessTerm::nil()), 3.0), m);
  CHECK(timed_member_count(empty) == 1);
  CHECK(located_count(empty) == 0);
}

TEST_CASE("occupancy and OK") {
  const Model m = model_from(kModel);
  CHECK(space_of(ExtendedConfiguration{}).empty());
  const auto one = config_of({located(m, "Bac", Vec3::Zero())});
  CHECK(space_of(one).spheres.size() == 1);
  CHECK(is_ok(one));
  const auto timed = canonicalize(RawConfiguration::make_timed(raw(m, ProcessTerm::instance("Bac")), 5.0), m);
  CHECK(space_of(timed).spheres[0].center == space_of(one).spheres[0].center);
  CHECK(is_ok(config_of({located(m, "Bac", Vec3::Zero()), located(m, "Bac", Vec3(3, 0, 0))})));
  CHECK_FALSE(is_ok(config_of({located(m, "Bac", Vec3::Zero()), located(m, "Bac", Vec3(1, 0, 0))})));
  CHECK(is_ok(config_of({located(m, "Bac", Vec3::Zero()), located(m, "Bac", Vec3(2, 0, 0))})));
}

TEST_CASE("restriction list") {
  const Model m = model_from(kModel);
  CHECK(restr(canonicalize(raw(m, ProcessTerm::instance("Bac")), m)).empty());
  const auto one = canonicalize(
      RawConfiguration::make_restrict(chan("a", 1.0, 2.5), raw(m, ProcessTerm::instance("Q", {"a"}))), m);
  REQUIRE(restr(one).size() == 1);
  CHECK(restr(one)[0].rate == 1.0);
  CHECK(restr(one)[0].radius == 2.5);
  const auto two = canonicalize(
      RawConfiguration::make_restrict(
          chan("a"), RawConfiguration::make_restrict(
                         chan("b", 2.0), raw(m, ProcessTerm::instance("X", {"a", "b"})))),
      m);
  CHECK(restr(two).size() == 2);
}

TEST_CASE("equivalence ignores member order and bound names") {
  const Model m = model_from(kModel);
  const auto a = located(m, "Bac", Vec3(0, 0, 0));
  const auto b = located(m, "Bac", Vec3(5, 0, 0));
  CHECK(equivalent(config_of({a, b}), config_of({b, a})));
  CHECK_FALSE(equivalent(config_of({a, b}), config_of({a, a})));

  auto with = [&](Name n) {
    return canonicalize(RawConfiguration::make_restrict(
                            chan(n), raw(m, ProcessTerm::instance("Q", {n}))),
                        m);
  };
  CHECK(equivalent(with("a"), with("zz")));
  // Different rate on the bound channel is a different configuration.
  CHECK_FALSE(equivalent(
      with("a"), canonicalize(RawConfiguration::make_restrict(
                                  chan("a", 2.0), raw(m, ProcessTerm::instance("Q", {"a"}))),
                              m)));
  // Free names are not renamed.
  CHECK_FALSE(equivalent(canonicalize(raw(m, ProcessTerm::instance("Q", {"a"})), m),
                         canonicalize(raw(m, ProcessTerm::instance("Q", {"b"})), m)));
}

TEST_CASE("populations count pending reactants") {
  const Model m = model_from(kModel);
  ExtendedConfiguration f = config_of({located(m, "Bac", Vec3::Zero())});
  TimedConfiguration t;
  t.body = {located(m, "Bac", Vec3(5, 0, 0)), located(m, "Bac", Vec3(7, 0, 0))};
  t.timer = 2.0;
  t.reactants = {"Bac"};
  f.members.emplace_back(t);
  CHECK(populations(f).at("Bac") == 2);
}

TEST_CASE("snapshots round-trip") {
  const Model m = model_from(kModel);
  auto f = canonicalize(
      RawConfiguration::make_parallel(
          {RawConfiguration::make_restrict(
               chan("a", 1.5, 0.25), raw(m, ProcessTerm::instance("X", {"a", "g"}), Vec3(1, 2, 3))),
           RawConfiguration::make_timed(raw(m, ProcessTerm::instance("Bac"), Vec3(-4, 0.1, 1e-3)),
                                        0.75)}),
      m);
  std::get<TimedConfiguration>(f.members[1]).reactants = {"Nil"};
  f.members.emplace_back(TimedConfiguration{{}, 2.0, {"Nil"}});  // a pending death
  const auto j = snapshot_to_json(f, 12.5);
  double time = 0.0;
  const auto back = snapshot_from_json(nlohmann::json::parse(j.dump()), m, &time);
  CHECK(time == 12.5);
  CHECK(back.restrictions == f.restrictions);
  REQUIRE(back.members.size() == f.members.size());
  for (std::size_t i = 0; i < f.members.size(); ++i) {
    CAPTURE(i);
    CHECK(back.members[i] == f.members[i]);
  }
  CHECK(snapshot_to_json(back, 12.5) == j);
}
