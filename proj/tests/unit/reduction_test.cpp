#include <doctest.h>

#include <algorithm>
#include <tuple>

#include "bioscape/reduction.hpp"
#include "support.hpp"

using namespace bioscape;
using namespace bioscape::testing;

namespace {

const char* kModel =
    "channel a@1.0,2.5\n"
    "region Cage box(-2, -2, -2, 2, 2, 2)\n"
    "region Tight box(-1, -1, -1, 1, 1, 1)\n"
    "entity Bac() = mov.Bac() + delay@1.0.(Bac() | Bac()) space all step 0.5 shape sphere(1.0)\n"
    "entity Pure() = delay@2.0.0 + delay@3.0.Pure() space all step 0 shape sphere(1.0)\n"
    "entity Snd(m) = !a(m).Snd(m) space all step 0 shape sphere(0.5)\n"
    "entity Rcv(k) = ?a(x).Got(x, k) space all step 0 shape sphere(0.5)\n"
    "entity Got(x, k) = delay@1.0.0 space all step 0 shape sphere(0.5)\n"
    "entity Caged() = mov.Caged() space Cage step 0.5 shape sphere(1.0)\n"
    "entity Stuck() = mov.Stuck() space Tight step 0.5 shape sphere(1.0)\n"
    "entity Still() = mov.Still() space Cage step 0 shape sphere(1.0)\n"
    "entity Priv() = delay@1.0.(new p@1.0,1.0) Snd(p) space all step 0 shape sphere(0.5)\n"
    "entity Loose() = !b(b).0 space all step 0 shape sphere(0.5)\n";

Model model() {
  // Loose uses b, which the parser would reject; build it by hand instead.
  ModelFile file = parse_model(std::string(kModel).substr(0, std::string(kModel).find("entity Loose")));
  EntityDefinition loose;
  loose.name = "Loose";
  loose.body.branches.push_back({OutputPrefix{"b", "b"}, ProcessTerm::nil()});
  loose.space = "all";
  loose.shape = Shape::sphere(0.5);
  file.definitions.push_back(loose);
  return Model(file);
}

}  // namespace

TEST_CASE("move redexes") {
  const Model m = model();
  CHECK(enumerate_move_redexes(config_of({located(m, "Bac", Vec3::Zero())}), m).size() == 1);
  CHECK(enumerate_move_redexes(config_of({located(m, "Pure", Vec3::Zero())}), m).empty());
  ExtendedConfiguration timed;
  timed.members.emplace_back(TimedConfiguration{{located(m, "Bac", Vec3::Zero())}, 1.0, {"Bac"}});
  CHECK(enumerate_move_redexes(timed, m).empty());
}

TEST_CASE("stochastic redexes") {
  const Model m = model();
  const auto two = config_of({located(m, "Bac", Vec3::Zero()), located(m, "Bac", Vec3(5, 0, 0))});
  const auto hs = enumerate_stoc_redexes(two, m);
  REQUIRE(hs.size() == 2);
  CHECK(hs[0].kind == RedexKind::Delay);
  CHECK(hs[0].first == 0);
  CHECK(hs[1].first == 1);
  CHECK(enumerate_stoc_redexes(config_of({located(m, "Pure", Vec3::Zero())}), m).size() == 2);

  auto pair_at = [&](double d) {
    return config_of({located(m, "Snd", Vec3::Zero(), {"a"}), located(m, "Rcv", Vec3(d, 0, 0), {"a"})});
  };
  CHECK(enumerate_stoc_redexes(pair_at(5.0), m).empty());
  const auto near = enumerate_stoc_redexes(pair_at(2.0), m);
  REQUIRE(near.size() == 1);
  CHECK(near[0].kind == RedexKind::Com);
  CHECK(near[0].first == 0);
  CHECK(near[0].second == 1);
  CHECK(near[0].channel == "a");
  CHECK(enumerate_stoc_redexes(pair_at(2.5), m).size() == 1);  // radius is inclusive
}

TEST_CASE("communication respects restriction scope") {
  const Model m = model();
  // Rcv's channel is the global a whatever its parameter is called.
  const auto f = config_of(
      {located(m, "Snd", Vec3::Zero(), {"x"}), located(m, "Rcv", Vec3(1, 0, 0), {"x"})});
  CHECK(enumerate_stoc_redexes(f, m).size() == 1);
  ExtendedConfiguration g = f;
  g.restrictions.push_back({"a", 1.0, 0.5, false});
  CHECK(enumerate_stoc_redexes(g, m).empty());  // restricted a has a shorter reach
  CHECK_THROWS_AS(enumerate_stoc_redexes(config_of({located(m, "Loose", Vec3::Zero())}), m),
                  UndeclaredChannel);
}

TEST_CASE("move of a zero-step entity keeps its placement") {
  const Model m = model();
  const auto f = config_of({located(m, "Still", Vec3::Zero())});
  const auto hs = enumerate_move_redexes(f, m);
  REQUIRE(hs.size() == 1);
  CounterRng rng(1, 1);
  const auto c = apply_move(hs[0], f, m, rng);
  REQUIRE(c);
  CHECK(c->new_placement.origin == Vec3::Zero());
  REQUIRE(c->reduct.members.size() == 1);
  CHECK(c->reduct.members[0].process == ProcessTerm::instance("Still"));
}

TEST_CASE("moves that leave the movement space fail") {
  const Model m = model();
  // Footprint equals the space: every direction leaves it.
  const auto stuck = config_of({located(m, "Stuck", Vec3::Zero())});
  CounterRng rng(2, 2);
  for (int i = 0; i < 100; ++i) CHECK_FALSE(apply_move(enumerate_move_redexes(stuck, m)[0], stuck, m, rng));
  // Flush against the +x wall: roughly half the directions point out.
  const auto flush = config_of({located(m, "Caged", Vec3(1, 0, 0))});
  int failed = 0;
  for (int i = 0; i < 400; ++i) {
    const auto c = apply_move(enumerate_move_redexes(flush, m)[0], flush, m, rng);
    if (!c) {
      ++failed;
    } else {
      CHECK(c->new_placement.origin.x() <= 1.0);
    }
  }
  CHECK(failed > 150);
  CHECK(failed < 250);
}

TEST_CASE("delay reducts") {
  const Model m = model();
  const auto f = config_of({located(m, "Bac", Vec3(1, 2, 3))});
  const auto hs = enumerate_stoc_redexes(f, m);
  REQUIRE(hs.size() == 1);
  const auto c = apply_stoc(hs[0], f, m);
  CHECK(c.rate == 1.0);
  CHECK_FALSE(c.fixed);
  REQUIRE(c.reduct.members.size() == 2);
  const Vec3 mid = (c.reduct.members[0].placement.origin + c.reduct.members[1].placement.origin) / 2;
  CHECK(mid.isApprox(Vec3(1, 2, 3)));

  const auto g = config_of({located(m, "Pure", Vec3::Zero())});
  const auto death = apply_stoc(enumerate_stoc_redexes(g, m)[0], g, m);
  CHECK(death.rate == 2.0);
  CHECK(death.reduct.members.empty());
}

TEST_CASE("communication reducts substitute the message") {
  const Model m = model();
  const auto f = config_of(
      {located(m, "Snd", Vec3::Zero(), {"a"}), located(m, "Rcv", Vec3(1, 0, 0), {"a"})});
  const auto c = apply_stoc(enumerate_stoc_redexes(f, m)[0], f, m);
  CHECK(c.rate == 1.0);
  REQUIRE(c.reduct.members.size() == 2);
  CHECK(c.reduct.members[0].process == ProcessTerm::instance("Snd", {"a"}));
  CHECK(c.reduct.members[0].placement.origin == Vec3::Zero());
  CHECK(c.reduct.members[1].process == ProcessTerm::instance("Got", {"a", "a"}));
  CHECK(c.reduct.members[1].placement.origin == Vec3(1, 0, 0));
}

TEST_CASE("restricted channels are looked up before global ones") {
  const Model m = model();
  ExtendedConfiguration f;
  f.restrictions.push_back({"a", 7.0, 10.0, true});
  const auto* c = lookup_channel(f, m, "a");
  REQUIRE(c);
  CHECK(c->rate == 7.0);
  CHECK(lookup_channel(ExtendedConfiguration{}, m, "a")->rate == 1.0);
  CHECK(lookup_channel(ExtendedConfiguration{}, m, "nope") == nullptr);
}

TEST_CASE("fresh restrictions in reducts avoid existing names") {
  const Model m = model();
  ExtendedConfiguration f = config_of({located(m, "Priv", Vec3::Zero())});
  f.restrictions.push_back({"p", 1.0, 1.0, false});
  const auto c = apply_stoc(enumerate_stoc_redexes(f, m)[0], f, m);
  REQUIRE(c.reduct.restrictions.size() == 1);
  CHECK(c.reduct.restrictions[0].name != "p");
  CHECK(c.reduct.restrictions[0].name != "a");
  CHECK(c.reduct.members[0].process == ProcessTerm::instance("Snd", {c.reduct.restrictions[0].name}));
}

namespace {

std::vector<std::tuple<RedexKind, std::size_t, std::size_t, Name>> redex_multiset(
    const ExtendedConfiguration& f, const Model& m) {
  std::vector<std::tuple<RedexKind, std::size_t, std::size_t, Name>> out;
  for (const auto& h : enumerate_stoc_redexes(f, m)) out.emplace_back(h.kind, h.first, h.second, h.channel);
  for (const auto& h : enumerate_move_redexes(f, m)) out.emplace_back(h.kind, h.first, h.second, h.channel);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("branch order does not change the redexes") {
  const std::string tail =
      " space all step 1 shape sphere(0.5)\n"
      "entity R() = ?a(x).R() + ?b(y).0 space all step 0 shape sphere(0.5)\n";
  const Model forward = model_from("channel a@1,3\nchannel b@2,3\n"
                                   "entity S() = !a(a).S() + delay@1.0.0 + mov.S() + !b(b).0" + tail);
  const Model backward = model_from("channel a@1,3\nchannel b@2,3\n"
                                    "entity S() = !b(b).0 + mov.S() + delay@1.0.0 + !a(a).S()" + tail);
  const auto f = config_of({located(forward, "S", Vec3::Zero()), located(forward, "R", Vec3(1, 0, 0)),
                            located(forward, "R", Vec3(0, 2, 0))});
  CHECK(redex_multiset(f, forward) == redex_multiset(f, backward));
  CHECK(redex_multiset(f, forward).size() == 6);
}

TEST_CASE("prefix chains reduce like their hand expansion") {
  const Model sugared = model_from(
      "channel a@1.0,3.0\n"
      "entity P(c) = ?a(x).!x(c).P(c) + delay@1.0.delay@2.0.0 space all step 0 shape sphere(0.5)\n"
      "entity S() = !a(a).S() space all step 0 shape sphere(0.5)\n");
  const Model expanded = model_from(
      "channel a@1.0,3.0\n"
      "entity P(c) = ?a(x).P_1(c, x) + delay@1.0.P_2(c) space all step 0 shape sphere(0.5)\n"
      "entity P_1(c, x) = !x(c).P(c) space all step 0 shape sphere(0.5)\n"
      "entity P_2(c) = delay@2.0.0 space all step 0 shape sphere(0.5)\n"
      "entity S() = !a(a).S() space all step 0 shape sphere(0.5)\n");
  CHECK(sugared.file().definitions.size() == expanded.file().definitions.size());
  const auto f = config_of({located(sugared, "P", Vec3::Zero(), {"a"}), located(sugared, "S", Vec3(1, 0, 0)),
                            located(sugared, "P_1", Vec3(0, 1, 0), {"a", "a"}),
                            located(sugared, "P_2", Vec3(0, -1, 0), {"a"})});
  CHECK(redex_multiset(f, sugared) == redex_multiset(f, expanded));
  for (const auto& h : enumerate_stoc_redexes(f, sugared)) {
    CHECK(apply_stoc(h, f, sugared).reduct.members == apply_stoc(h, f, expanded).reduct.members);
  }
}
