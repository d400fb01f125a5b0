#include <doctest.h>

#include <cmath>

#include "bioscape/gillespie.hpp"
#include "support.hpp"

using namespace bioscape;
using namespace bioscape::testing;

namespace {

const char* kModel =
    "channel a@1.5,2.0\n"
    "entity D() = delay@1.0.0 space all step 0 shape sphere(0.5)\n"
    "entity Snd() = !a(a).0 space all step 0 shape sphere(0.5)\n"
    "entity Rcv() = ?a(x).0 space all step 0 shape sphere(0.5)\n"
    "entity Walk() = mov.Walk() space all step 1 shape sphere(0.5)\n";

}  // namespace

TEST_CASE("propensities") {
  const Model m = model_from(kModel);
  const auto one = build_propensities(config_of({located(m, "D", Vec3::Zero())}), m);
  REQUIRE(one.entries.size() == 1);
  CHECK(one.total == 1.0);

  std::vector<LocatedProcess> many;
  for (int i = 0; i < 7; ++i) many.push_back(located(m, "D", Vec3(3.0 * i, 0, 0)));
  CHECK(build_propensities(config_of(many), m).total == doctest::Approx(7.0));

  const auto com = build_propensities(
      config_of({located(m, "Snd", Vec3::Zero()), located(m, "Rcv", Vec3(1, 0, 0)),
                 located(m, "Rcv", Vec3(-1, 0, 0)), located(m, "Rcv", Vec3(9, 0, 0))}),
      m);
  CHECK(com.entries.size() == 2);
  CHECK(com.total == doctest::Approx(3.0));
}

TEST_CASE("gillespie step timing") {
  const Model m = model_from(kModel);
  CounterRng rng(2, 2);
  CHECK_FALSE(gillespie_step(ExtendedConfiguration{}, m, rng));

  double single = 0.0, pair = 0.0;
  constexpr int n = 40000;
  for (int i = 0; i < n; ++i) {
    auto s = gillespie_step(config_of({located(m, "D", Vec3::Zero())}), m, rng);
    REQUIRE(s);
    CHECK(s->reacted);
    CHECK(s->configuration.members.empty());
    single += s->dt;
    auto p = gillespie_step(config_of({located(m, "D", Vec3::Zero()), located(m, "D", Vec3(5, 0, 0))}), m, rng);
    CHECK(p->configuration.members.size() == 1);
    pair += p->dt;
  }
  CHECK(single / n == doctest::Approx(1.0).epsilon(0.03));
  CHECK(pair / n == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("moves interleave with reactions") {
  const Model m = model_from(kModel);
  CounterRng rng(3, 3);
  auto s = gillespie_step(config_of({located(m, "Walk", Vec3::Zero())}), m, rng);
  REQUIRE(s);
  CHECK(s->moved);
  CHECK_FALSE(s->reacted);
  CHECK(s->dt == 0.0);
  const Vec3 o = std::get<LocatedProcess>(s->configuration.members[0]).placement.origin;
  CHECK(o.norm() == doctest::Approx(1.0));
}

TEST_CASE("timed members are rejected") {
  const Model m = model_from(kModel);
  ExtendedConfiguration f;
  f.members.emplace_back(TimedConfiguration{{located(m, "D", Vec3::Zero())}, 1.0, {"D"}});
  CounterRng rng(1, 1);
  CHECK_THROWS_AS(gillespie_step(f, m, rng), std::invalid_argument);
}

TEST_CASE("reference runs are reproducible") {
  RunConfig config;
  config.seed = 9;
  config.t_max = 1.0;
  const ModelFile file = parse_model(std::string(kModel) + "init 20 D() in all\n");
  const Trace a = run_reference(file, config);
  CHECK(a.rows == run_reference(file, config).rows);
  CHECK(a.rows.front().populations.at("D") == 20);
  CHECK(a.rows.back().time == 1.0);
}
