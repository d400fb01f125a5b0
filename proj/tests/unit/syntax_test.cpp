#include <doctest.h>

#include "bioscape/syntax.hpp"

using namespace bioscape;

namespace {

ProcessTerm inst(Name e, std::vector<Name> args = {}) { return ProcessTerm::instance(e, args); }
ChannelDecl chan(Name n) { return ChannelDecl{n, 1.0, 1.0, false}; }

}  // namespace

TEST_CASE("free variables of processes") {
  CHECK(free_variables(ProcessTerm::nil()).empty());
  CHECK(free_variables(inst("X", {"a", "b"})) == std::set<Name>{"a", "b"});
  CHECK(free_variables(ProcessTerm::restrict(chan("a"), inst("X", {"a", "b"}))) ==
        std::set<Name>{"b"});
  CHECK(free_variables(ProcessTerm::par(ProcessTerm::restrict(chan("a"), inst("X", {"a"})),
                                        ProcessTerm::restrict(chan("a"), inst("Y", {"a"}))))
            .empty());
}

TEST_CASE("free variables of choice bodies") {
  ChoiceBody input;
  input.branches.push_back({InputPrefix{"a", "x"}, inst("X", {"x"})});
  CHECK(free_variables(input) == std::set<Name>{"a"});

  ChoiceBody output;
  output.branches.push_back({OutputPrefix{"a", "b"}, inst("X", {"b", "c"})});
  CHECK(free_variables(output) == std::set<Name>{"a", "b", "c"});
}

TEST_CASE("substitution") {
  CHECK(substitute(inst("X", {"x"}), {{"x", "a"}}) == inst("X", {"a"}));
  CHECK(substitute(ProcessTerm::nil(), {{"x", "a"}}).is_nil());

  // Capture avoidance: the bound a must be renamed.
  const ProcessTerm p = ProcessTerm::restrict(chan("a"), inst("X", {"x", "a"}));
  const ProcessTerm q = substitute(p, {{"x", "a"}});
  const auto& r = std::get<RestrictTerm>(q.node().value);
  CHECK(r.channel.name != "a");
  CHECK(r.body == inst("X", {"a", r.channel.name}));
  CHECK(free_variables(q) == std::set<Name>{"a"});

  // Simultaneous: swapping two names.
  CHECK(substitute(inst("X", {"x", "y"}), {{"x", "y"}, {"y", "x"}}) == inst("X", {"y", "x"}));
  // Bound names are not substituted.
  CHECK(substitute(ProcessTerm::restrict(chan("x"), inst("X", {"x"})), {{"x", "a"}}) ==
        ProcessTerm::restrict(chan("x"), inst("X", {"x"})));
}

TEST_CASE("substitution by parameter lists checks arity") {
  CHECK(substitute(inst("X", {"p", "q"}), {"p", "q"}, {"a", "b"}) == inst("X", {"a", "b"}));
  CHECK_THROWS_AS(substitute(inst("X", {"p"}), {"p"}, {"a", "b"}), std::invalid_argument);
}

TEST_CASE("fresh names avoid the given set") {
  CHECK(fresh_name("a", {}) != "");
  const std::set<Name> avoid{"a", "a_1", "a_2"};
  const Name n = fresh_name("a", avoid);
  CHECK(avoid.count(n) == 0);
  CHECK(is_valid_name(n));
  CHECK(avoid.count(fresh_name("a_1", avoid)) == 0);
}

TEST_CASE("names") {
  CHECK(is_valid_name("Bac"));
  CHECK(is_valid_name("a_1"));
  CHECK_FALSE(is_valid_name(""));
  CHECK_FALSE(is_valid_name("1a"));
  CHECK_FALSE(is_valid_name("a-b"));
}

TEST_CASE("process printing") {
  CHECK(to_string(ProcessTerm::nil()) == "0");
  CHECK(to_string(inst("X", {"a", "b"})) == "X(a, b)");
}
