#include <doctest.h>

#include <fstream>
#include <sstream>

#include "bioscape/syntax.hpp"

using namespace bioscape;

namespace {

std::vector<Diagnostic> diagnostics_of(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ModelError& e) {
    return e.diagnostics();
  }
  return {};
}

bool mentions(const std::vector<Diagnostic>& ds, const std::string& fragment) {
  for (const auto& d : ds) {
    if (d.message.find(fragment) != std::string::npos) return true;
  }
  return false;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("entity definition with movement and mitosis") {
  const ModelFile m = parse_model(
      "region movB box(-5, -5, -5, 5, 5, 5)\n"
      "entity Bac() = mov.Bac() + delay@1.0.(Bac()|Bac()) space movB step 0.5 shape sphere(1.0)\n");
  REQUIRE(m.definitions.size() == 1);
  const auto& d = m.definitions[0];
  CHECK(d.name == "Bac");
  CHECK(d.params.empty());
  REQUIRE(d.body.branches.size() == 2);
  CHECK(std::holds_alternative<MovePrefix>(d.body.branches[0].prefix));
  CHECK(d.body.branches[0].continuation == ProcessTerm::instance("Bac"));
  CHECK(std::get<DelayPrefix>(d.body.branches[1].prefix).rate == 1.0);
  CHECK(d.body.branches[1].continuation ==
        ProcessTerm::par(ProcessTerm::instance("Bac"), ProcessTerm::instance("Bac")));
  CHECK(d.space == "movB");
  CHECK(d.step == 0.5);
  CHECK(d.shape == Shape::sphere(1.0));
}

TEST_CASE("zero rate, nil continuation and integer literals") {
  const ModelFile m = parse_model("entity Z() = delay@0.0.0 space all step 0 shape sphere(0)\n");
  REQUIRE(m.definitions.size() == 1);
  CHECK(m.definitions[0].body.branches[0].continuation.is_nil());
  CHECK(m.definitions[0].shape == Shape::sphere(0.0));
}

TEST_CASE("unbound output message is rejected") {
  const auto ds = diagnostics_of("entity W(x) = !x(y).0 space all step 0 shape sphere(1)\n");
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].line == 1);
  CHECK(ds[0].column == 18);
  CHECK(mentions(ds, "y"));
}

TEST_CASE("declared channels, params and binders are in scope") {
  CHECK_NOTHROW(parse_model(
      "channel a@1.0,2.0\n"
      "entity S(m) = !a(m).0 + !a(a).0 space all step 0 shape sphere(1)\n"
      "entity R() = ?a(x).S(x) space all step 0 shape sphere(1)\n"
      "entity N() = delay@1.0.(new b@1.0,1.0) S(b) space all step 0 shape sphere(1)\n"));
}

TEST_CASE("semantic errors are all reported with positions") {
  const auto ds = diagnostics_of(read_file(std::string(BIOSCAPE_TEST_DATA_DIR) + "/broken.bioscape"));
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].line == 3);
  CHECK(mentions(ds, "Cel"));
  CHECK(ds[1].line == 4);
  CHECK(mentions(ds, "b"));
}

TEST_CASE("syntax and well-formedness errors") {
  CHECK(mentions(diagnostics_of("entity X( = 0"), "expected"));
  CHECK(mentions(diagnostics_of("entity X() = delay@1.0.Y() space all step 0 shape sphere(1)"), "Y"));
  CHECK(mentions(diagnostics_of("entity X(a) = delay@1.0.X() space all step 0 shape sphere(1)"),
                 "argument"));
  CHECK(!diagnostics_of("entity X() = delay@1.0.0 space nowhere step 0 shape sphere(1)").empty());
  CHECK(!diagnostics_of("entity X() = delay@1.0.0 space all step 0 shape sphere(1)\n"
                        "entity X() = delay@1.0.0 space all step 0 shape sphere(1)")
             .empty());
  CHECK(!diagnostics_of("channel a@1,1\nchannel a@2,2").empty());
  CHECK(!diagnostics_of("region R box(1, 0, 0, 0, 1, 1)").empty());
  CHECK(!diagnostics_of("entity X() = delay@1.0.0 space all step 0 shape sphere(1)\ninit 0 X() in all")
             .empty());
  CHECK(!diagnostics_of("entity delay() = delay@1.0.0 space all step 0 shape sphere(1)").empty());
  CHECK(!diagnostics_of("entity X(p, p) = delay@1.0.0 space all step 0 shape sphere(1)").empty());
}

TEST_CASE("errors after a bad statement are still found") {
  const auto ds = diagnostics_of(
      "entity X() = delay@@ space all\n"
      "entity Y() = delay@1.0.Q() space all step 0 shape sphere(1)\n");
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].line == 1);
  CHECK(ds[1].line == 2);
}

TEST_CASE("diagnostics format as file:line:col") {
  const std::vector<Diagnostic> ds{{3, 7, "boom"}};
  CHECK(format_diagnostics(ds, "m.bioscape").find("m.bioscape:3:7: error: boom") != std::string::npos);
}

TEST_CASE("prefix chains become auxiliary entities") {
  const ModelFile m = parse_model(
      "channel a@1.0,1.0\n"
      "entity P(c) = ?a(x).!x(c).P(c) space all step 0 shape sphere(1)\n");
  REQUIRE(m.definitions.size() == 2);
  const auto& p = m.definitions[0];
  const auto& aux = m.definitions[1];
  CHECK(aux.name == "P_1");
  CHECK(aux.params == std::vector<Name>{"c", "x"});
  CHECK(std::get<InputPrefix>(p.body.branches[0].prefix).binder == "x");
  CHECK(p.body.branches[0].continuation == ProcessTerm::instance("P_1", {"c", "x"}));
  REQUIRE(aux.body.branches.size() == 1);
  CHECK(std::get<OutputPrefix>(aux.body.branches[0].prefix).channel == "x");
  CHECK(aux.body.branches[0].continuation == ProcessTerm::instance("P", {"c"}));
  CHECK(aux.shape == p.shape);
}

TEST_CASE("pretty printing round-trips") {
  const char* sources[] = {
      "",
      "region movB box(-5, -5, -5, 5, 5, 5)\n"
      "entity Bac() = mov.Bac() + delay@1.0.(Bac()|Bac()) space movB step 0.5 shape sphere(1.0)\n"
      "init 3 Bac() in movB\n",
      "channel a@1.0,2.5\nchannel f@0.25,1e-3 fixed\n"
      "region A box(0, 0, 0, 1, 1, 1)\nregion B union(A, box(2, 2, 2, 3, 3, 3))\n"
      "entity N(k) = delay@2.0 fixed.(new a@1.0,2.5) (N(a) | M(a, k)) space B step 0.1 shape box(1, 2, 3)\n"
      "entity M(p, q) = !p(q).0 + ?a(z).M(z, z) + !f(a) space all step 0.0 shape sphere(0.125)\n",
  };
  for (const char* src : sources) {
    const ModelFile m = parse_model(src);
    const std::string printed = pretty_print(m);
    CAPTURE(printed);
    CHECK(parse_model(printed) == m);
    CHECK(pretty_print(parse_model(printed)) == printed);
  }
}

TEST_CASE("restriction prints in concrete form") {
  const ModelFile m = parse_model(
      "entity N() = delay@1.0.(new a@1.0,2.5) N() space all step 0 shape sphere(1)\n");
  CHECK(pretty_print(m).find("(new a@1.0,2.5) N()") != std::string::npos);
}

TEST_CASE("bundled models parse") {
  for (const char* name : {"bac", "bench_bac", "cell30", "death", "pair", "signal", "yule"}) {
    CAPTURE(name);
    CHECK_NOTHROW(parse_model(read_file(std::string(BIOSCAPE_MODELS_DIR) + "/" + name + ".bioscape")));
  }
}
