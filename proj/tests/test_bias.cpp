#include <doctest.h>

#include "dtadag/bias.hpp"
#include "dtadag/json_io.hpp"
#include "dtadag/scenario.hpp"

using namespace dta;

namespace {

std::vector<BiasKind> kinds_of(const std::vector<BiasFinding>& findings) {
  std::vector<BiasKind> out;
  for (const auto& f : findings) out.push_back(f.kind);
  return out;
}

const Scenario& builtin(const char* name) { return builtin_scenario(name); }

}  // namespace

TEST_CASE("validate_roles") {
  SUBCASE("canonical confounding design is ok") {
    CHECK(validate_roles(builtin("tb-hiv-confounding").net.dag()).empty());
  }
  SUBCASE("two targets") {
    const Dag dag = parse_dag("dag { A [role=target] B [role=target] T [role=index] }");
    const auto errors = validate_roles(dag);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0] == "multiple target nodes");
  }
  SUBCASE("selection node with no cause") {
    const Dag dag =
        parse_dag("dag { D [role=target] T [role=index] V [role=selection] D -> T }");
    const auto errors = validate_roles(dag);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0] == "selection node 'V' has no cause");
  }
  SUBCASE("missing index test") {
    const auto errors = validate_roles(parse_dag("dag { D [role=target] }"));
    REQUIRE(errors.size() == 1);
    CHECK(errors[0] == "no index test node");
  }
}

TEST_CASE("validate_spec") {
  const Dag dag = parse_dag(
      "dag { D [role=target] T [role=index] R [role=covariate] L [latent] D -> T R -> T }");
  CHECK_NOTHROW(validate_spec(dag, {"T", "D", {}, {}}));
  CHECK_THROWS_AS(validate_spec(dag, {"R", "D", {}, {}}), ValidationError);   // wrong role
  CHECK_THROWS_AS(validate_spec(dag, {"T", "T", {}, {}}), ValidationError);   // proxy == index
  CHECK_THROWS_AS(validate_spec(dag, {"T", "D", {{"L", 1}}, {}}), ValidationError);
  CHECK_THROWS_AS(validate_spec(dag, {"T", "D", {{"R", 2}}, {}}), ValidationError);
  CHECK_THROWS_AS(validate_spec(dag, {"T", "D", {}, {"L"}}), ValidationError);
  CHECK_THROWS_AS(validate_spec(dag, {"T", "D", {}, {"nope"}}), UnknownNodeError);
}

TEST_CASE("detect_biases on the canonical designs") {
  SUBCASE("imperfect reference -> reference-standard-error only") {
    const auto& s = builtin("ptb-imperfect-reference");
    const auto findings = detect_biases(s.net.dag(), s.spec);
    CHECK(kinds_of(findings) == std::vector<BiasKind>{BiasKind::ReferenceStandardError});
    REQUIRE(!findings[0].paths.empty());
    CHECK(findings[0].paths[0].to_string() == "Culture <- PTB -> GeneXpert");
    CHECK(findings[0].severity == "bias");
  }
  SUBCASE("bacterial load adds conditional dependence") {
    const auto& s = builtin("ptb-bacterial-load");
    const auto findings = detect_biases(s.net.dag(), s.spec);
    CHECK(kinds_of(findings) == std::vector<BiasKind>{BiasKind::ReferenceStandardError,
                                                      BiasKind::ConditionalDependence});
    CHECK(findings[1].paths.size() == 1);
    CHECK(findings[1].paths[0].to_string() == "Culture <- BacterialLoad -> GeneXpert");
    CHECK(findings[1].nodes == std::vector<std::string>{"BacterialLoad"});
  }
  SUBCASE("spectrum effect is flagged as heterogeneity") {
    const auto& s = builtin("chlamydia-spectrum");
    const auto findings = detect_biases(s.net.dag(), s.spec);
    CHECK(kinds_of(findings) == std::vector<BiasKind>{BiasKind::SpectrumEffect});
    CHECK(findings[0].severity == "heterogeneity, not a bias");
    CHECK(findings[0].nodes == std::vector<std::string>{"AgeUnder25"});
  }
  SUBCASE("confounding") {
    const auto& s = builtin("tb-hiv-confounding");
    const auto findings = detect_biases(s.net.dag(), s.spec);
    CHECK(kinds_of(findings) == std::vector<BiasKind>{BiasKind::Confounding});
    CHECK(findings[0].paths.size() == 1);
    CHECK(findings[0].paths[0].to_string() == "PTB <- HIV -> TST");
    CHECK(findings[0].severity == "bias");
  }
  SUBCASE("partial verification") {
    const auto& s = builtin("hpv-partial-verification");
    const auto findings = detect_biases(s.net.dag(), s.spec);
    CHECK(kinds_of(findings) == std::vector<BiasKind>{BiasKind::PartialVerification});
    CHECK(findings[0].nodes == std::vector<std::string>{"PCR", "V"});
  }
  SUBCASE("perfect design yields nothing") {
    const Dag dag = parse_dag("dag { D [role=target] T2 [role=index] D -> T2 }");
    CHECK(detect_biases(dag, {"T2", "D", {}, {}}).empty());
  }
}

TEST_CASE("conditional-dependence rule mirrors the d-separation verdict") {
  for (const char* name : {"ptb-imperfect-reference", "ptb-bacterial-load"}) {
    const auto& s = builtin(name);
    const auto findings = detect_biases(s.net.dag(), s.spec);
    const bool has_cd =
        std::any_of(findings.begin(), findings.end(),
                    [](const BiasFinding& f) { return f.kind == BiasKind::ConditionalDependence; });
    std::string target;
    for (const auto& n : s.net.dag().nodes())
      if (n.role == NodeRole::Target) target = n.name;
    CHECK(has_cd ==
          !d_separated(s.net.dag(), {s.spec.truth_proxy}, {s.spec.index}, {target}));
  }
}

TEST_CASE("covariates causally tied to the target are confounding, not spectrum") {
  // Same shape as the spectrum design plus an R -> D edge.
  const Dag dag = parse_dag(
      "dag { R [role=covariate] D [role=target] T [role=index] R -> D R -> T D -> T }");
  const auto findings = detect_biases(dag, {"T", "D", {}, {}});
  CHECK(kinds_of(findings) == std::vector<BiasKind>{BiasKind::Confounding});
}

TEST_CASE("stratifying on an adjustment-set member clears the confounding finding") {
  const auto& s = builtin("tb-hiv-confounding");
  const auto sets = minimal_adjustment_sets(s.net.dag(), "PTB", "TST");
  REQUIRE(sets.feasible);
  REQUIRE(sets.sets == std::vector<std::vector<std::string>>{{"HIV"}});

  AnalysisSpec stratified = s.spec;
  stratified.strata = {"HIV"};
  CHECK(detect_biases(s.net.dag(), stratified).empty());

  // A node outside every adjustment set does not clear it (X also modifies
  // the test while being unrelated to the target, so spectrum fires too).
  const Dag extra = parse_dag(
      "dag { HIV [role=covariate] X [role=covariate] PTB [role=target] TST [role=index] "
      "HIV -> PTB HIV -> TST PTB -> TST X -> TST }");
  AnalysisSpec with_x{"TST", "PTB", {}, {"X"}};
  const auto findings = detect_biases(extra, with_x);
  CHECK(kinds_of(findings) ==
        std::vector<BiasKind>{BiasKind::SpectrumEffect, BiasKind::Confounding});
}

TEST_CASE("latent confounding is reported as unadjustable") {
  const Dag dag = parse_dag(
      "dag { U [role=covariate, latent] D [role=target] T [role=index] U -> D U -> T D -> T }");
  const auto findings = detect_biases(dag, {"T", "D", {}, {}});
  REQUIRE(kinds_of(findings) == std::vector<BiasKind>{BiasKind::Confounding});
  CHECK(findings[0].severity == "bias, unadjustable with observed nodes");
}

TEST_CASE("covariate-driven verification fires without an index edge") {
  // Verification depends on a symptom related to the target condition.
  const Dag dag = parse_dag(
      "dag { D [role=target] T [role=index] S [role=covariate] V [role=selection] "
      "D -> T D -> S S -> V }");
  const auto findings = detect_biases(dag, {"T", "D", {{"V", 1}}, {}});
  REQUIRE(kinds_of(findings) == std::vector<BiasKind>{BiasKind::PartialVerification});
  // The symptom drives verification and the target sits behind it.
  CHECK(findings[0].nodes == std::vector<std::string>{"D", "S", "V"});
}

TEST_CASE("detect_biases rejects invalid roles") {
  const Dag dag = parse_dag("dag { A [role=target] B [role=target] T [role=index] }");
  CHECK_THROWS_WITH_AS(detect_biases(dag, {"T", "A", {}, {}}),
                       doctest::Contains("multiple target nodes"), ValidationError);
}

TEST_CASE("findings are a pure function of their inputs") {
  const auto& s = builtin("ptb-bacterial-load");
  const auto a = canonical_json(to_json(detect_biases(s.net.dag(), s.spec)));
  const auto b = canonical_json(to_json(detect_biases(s.net.dag(), s.spec)));
  CHECK(a == b);
  CHECK(!a.empty());
}

TEST_CASE("finding JSON carries the documented shape") {
  const auto& s = builtin("tb-hiv-confounding");
  const auto j = to_json(detect_biases(s.net.dag(), s.spec));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 1);
  for (const char* key :
       {"kind", "nodes", "paths", "explanation", "etiological_analog", "paper_anchor",
        "severity"})
    CHECK(j[0].contains(key));
  CHECK(j[0]["kind"] == "confounding");
  CHECK(j[0]["etiological_analog"] == "confounding");
  CHECK(j[0]["paths"][0] == "PTB <- HIV -> TST");
}

TEST_CASE("etiological analogs match the catalog") {
  CHECK(etiological_analog(BiasKind::ReferenceStandardError) == "exposure misclassification");
  CHECK(etiological_analog(BiasKind::ConditionalDependence) ==
        "misclassification plus confounding");
  CHECK(etiological_analog(BiasKind::SpectrumEffect) == "effect modification");
  CHECK(etiological_analog(BiasKind::Confounding) == "confounding");
  CHECK(etiological_analog(BiasKind::PartialVerification) == "selection bias");
}
