#include <doctest.h>

#include <cmath>
#include <random>

#include "dtadag/estimators.hpp"
#include "dtadag/scenario.hpp"
#include "oracle.hpp"

using namespace dta;

namespace {

JointTable builtin_joint(const char* name) {
  return exact_joint(builtin_scenario(name).net);
}

// Enumeration oracle values for the imperfect-reference defaults
// (prevalence 0.10, reference 0.80/0.98, index 0.90/0.95).
constexpr double kFig1NaiveSe = 0.7438775510204082;  // 729/980
constexpr double kFig1NaiveSp = 0.9311529933481153;  // 8399/9020
constexpr double kFig2NaiveSe = 0.7948979591836735;  // 779/980

Frame expand_counts(const std::vector<std::string>& vars,
                    const std::vector<std::pair<std::vector<int8_t>, int>>& rows) {
  Frame f;
  f.variables = vars;
  for (const auto& [row, count] : rows)
    for (int i = 0; i < count; ++i) f.rows.push_back(row);
  return f;
}

}  // namespace

TEST_CASE("accuracy_vs") {
  SUBCASE("a deterministic copy of the target is a perfect reference") {
    Dag dag({{"D", NodeRole::Target, true},
             {"T1", NodeRole::ReferenceTest, true},
             {"T2", NodeRole::IndexTest, true}},
            {{"D", "T1"}, {"D", "T2"}});
    const auto joint = exact_joint(BayesNet(dag, {{"D", {}, {0.10}},
                                                  {"T1", {"D"}, {0.0, 1.0}},
                                                  {"T2", {"D"}, {0.05, 0.90}}}));
    const auto vs_proxy = accuracy_vs(joint, "T2", "T1");
    const auto vs_truth = accuracy_vs(joint, "T2", "D", true);
    CHECK(*vs_proxy.se == doctest::Approx(*vs_truth.se).epsilon(1e-12));
    CHECK(*vs_proxy.sp == doctest::Approx(*vs_truth.sp).epsilon(1e-12));
    CHECK(vs_proxy.provenance.to_string() == "naive");
    CHECK(vs_truth.provenance.to_string() == "true");
  }
  SUBCASE("imperfect reference distorts both operating characteristics") {
    const auto joint = builtin_joint("ptb-imperfect-reference");
    const auto naive = accuracy_vs(joint, "GeneXpert", "Culture");
    CHECK(*naive.se == doctest::Approx(kFig1NaiveSe).epsilon(1e-12));
    CHECK(*naive.sp == doctest::Approx(kFig1NaiveSp).epsilon(1e-12));
    CHECK(*naive.prevalence == doctest::Approx(0.098).epsilon(1e-12));
    CHECK(*naive.ppv == doctest::Approx(0.54).epsilon(1e-12));
    const auto truth = accuracy_vs(joint, "GeneXpert", "PTB", true);
    CHECK(*truth.se == doctest::Approx(0.90).epsilon(1e-12));
    CHECK(*truth.sp == doctest::Approx(0.95).epsilon(1e-12));
  }
  SUBCASE("conditional dependence inflates the naive sensitivity") {
    const auto naive =
        accuracy_vs(builtin_joint("ptb-bacterial-load"), "GeneXpert", "Culture");
    CHECK(*naive.se == doctest::Approx(kFig2NaiveSe).epsilon(1e-12));
    CHECK(*naive.se > kFig1NaiveSe);
  }
  SUBCASE("degenerate truth margin") {
    Dag dag({{"D"}, {"T"}}, {});
    const auto joint = exact_joint(BayesNet(dag, {{"D", {}, {1.0}}, {"T", {}, {0.5}}}));
    CHECK_THROWS_AS(accuracy_vs(joint, "T", "D"), NumericError);
  }
}

TEST_CASE("accuracy_from_data") {
  SUBCASE("integer-count expansion matches the exact joint") {
    // 2x2 with counts proportional to a joint: a=9, b=1, c=3, d=7.
    const auto frame = expand_counts({"T", "D"}, {{{1, 1}, 9}, {{1, 0}, 1}, {{0, 1}, 3}, {{0, 0}, 7}});
    const auto est = accuracy_from_data(frame, "T", "D");
    CHECK(*est.se == doctest::Approx(9.0 / 12.0).epsilon(1e-12));
    CHECK(*est.sp == doctest::Approx(7.0 / 8.0).epsilon(1e-12));
    CHECK(*est.prevalence == doctest::Approx(12.0 / 20.0).epsilon(1e-12));
    CHECK(*est.n_effective == 20);
    REQUIRE(est.se_ci);
    CHECK(est.se_ci->lo < *est.se);
    CHECK(est.se_ci->hi > *est.se);
  }
  SUBCASE("all-positive truth leaves specificity undefined") {
    const auto frame = expand_counts({"T", "D"}, {{{1, 1}, 5}, {{0, 1}, 5}});
    const auto est = accuracy_from_data(frame, "T", "D");
    CHECK(est.se);
    CHECK_FALSE(est.sp);
    CHECK_FALSE(est.sp_ci);
  }
  SUBCASE("unverified rows are excluded") {
    const auto frame = expand_counts({"T", "D"}, {{{1, 1}, 4}, {{1, -1}, 6}, {{0, 0}, 5}});
    const auto est = accuracy_from_data(frame, "T", "D");
    CHECK(*est.n_effective == 9);
  }
  SUBCASE("sampled imperfect-reference data approaches the exact naive value") {
    const auto data = sample(builtin_scenario("ptb-imperfect-reference").net, 1000000, 42);
    const auto est = accuracy_from_data(data, "GeneXpert", "Culture");
    CHECK(std::abs(*est.se - kFig1NaiveSe) < 0.01);
  }
}

TEST_CASE("wilson_interval matches a hand-computed case") {
  // 90/100 successes, z = 1.960: center (0.9 + z^2/200) / (1 + z^2/100).
  const auto ci = wilson_interval(90, 100);
  CHECK(ci.lo == doctest::Approx(0.8256326956).epsilon(1e-9));
  CHECK(ci.hi == doctest::Approx(0.9447714584).epsilon(1e-9));
}

TEST_CASE("bias_report") {
  const auto joint = builtin_joint("ptb-imperfect-reference");
  const auto truth = accuracy_vs(joint, "GeneXpert", "PTB", true);
  SUBCASE("identical inputs label none everywhere") {
    const auto r = bias_report(truth, truth);
    CHECK(*r.se.delta == 0.0);
    CHECK(r.se.label == BiasLabel::None);
    CHECK(r.prevalence.label == BiasLabel::None);
  }
  SUBCASE("imperfect reference underestimates sensitivity") {
    const auto naive = accuracy_vs(joint, "GeneXpert", "Culture");
    const auto r = bias_report(truth, naive);
    CHECK(*r.se.delta == doctest::Approx(kFig1NaiveSe - 0.90).epsilon(1e-12));
    CHECK(r.se.label == BiasLabel::Under);
    CHECK(std::abs(*r.se.delta + 0.15612) < 1e-5);
  }
  SUBCASE("conditional dependence pushes the naive estimate up") {
    const auto fig1 = accuracy_vs(joint, "GeneXpert", "Culture");
    const auto fig2 =
        accuracy_vs(builtin_joint("ptb-bacterial-load"), "GeneXpert", "Culture");
    const auto r = bias_report(fig1, fig2);
    CHECK(*r.se.delta == doctest::Approx(kFig2NaiveSe - kFig1NaiveSe).epsilon(1e-12));
    CHECK(std::abs(*r.se.delta - 0.05102) < 1e-5);
    CHECK(r.se.label == BiasLabel::Over);
  }
  SUBCASE("undefined metrics label undefined") {
    AccuracyEstimate no_sp = truth;
    no_sp.sp.reset();
    const auto r = bias_report(truth, no_sp);
    CHECK(r.sp.label == BiasLabel::Undefined);
    CHECK_FALSE(r.sp.delta);
  }
}

TEST_CASE("stratified_accuracy") {
  SUBCASE("a stratum independent of everything reproduces the crude estimate") {
    Dag dag({{"D", NodeRole::Target, true}, {"T", NodeRole::IndexTest, true}, {"S"}},
            {{"D", "T"}});
    const auto joint = exact_joint(
        BayesNet(dag, {{"D", {}, {0.2}}, {"T", {"D"}, {0.1, 0.8}}, {"S", {}, {0.5}}}));
    const auto crude = accuracy_vs(joint, "T", "D");
    const auto strata = stratified_accuracy(joint, "T", "D", "S");
    for (int v : {0, 1}) {
      CHECK(*strata.at(v).se == doctest::Approx(*crude.se).epsilon(1e-12));
      CHECK(*strata.at(v).sp == doctest::Approx(*crude.sp).epsilon(1e-12));
    }
  }
  SUBCASE("spectrum strata return the generating values with the crude between") {
    const auto joint = builtin_joint("chlamydia-spectrum");
    const auto strata = stratified_accuracy(joint, "EIA", "CT", "AgeUnder25");
    CHECK(*strata.at(1).se == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(*strata.at(0).se == doctest::Approx(0.70).epsilon(1e-12));
    const auto crude = accuracy_vs(joint, "EIA", "CT");
    CHECK(*crude.se > 0.70);
    CHECK(*crude.se < 0.85);
    CHECK(strata.at(1).provenance.to_string() == "stratified(AgeUnder25=1)");
  }
  SUBCASE("confounding strata recover the generating CPT entries") {
    const auto joint = builtin_joint("tb-hiv-confounding");
    const auto strata = stratified_accuracy(joint, "TST", "PTB", "HIV");
    CHECK(*strata.at(1).se == doctest::Approx(0.50).epsilon(1e-12));
    CHECK(*strata.at(0).se == doctest::Approx(0.80).epsilon(1e-12));
    // Crude conditional differs from the covariate-standardized value.
    const auto crude = accuracy_vs(joint, "TST", "PTB");
    const auto standardized =
        adjusted_accuracy(joint, "TST", "PTB", {"HIV"}, {ProvenanceKind::True, ""});
    CHECK(*crude.se == doctest::Approx(47.0 / 70.0).epsilon(1e-12));
    CHECK(*standardized.se == doctest::Approx(0.74).epsilon(1e-12));
    CHECK(*crude.se != *standardized.se);
  }
  SUBCASE("empty stratum") {
    Dag dag({{"D"}, {"T"}, {"S"}}, {});
    const auto joint = exact_joint(
        BayesNet(dag, {{"D", {}, {0.2}}, {"T", {}, {0.5}}, {"S", {}, {0.0}}}));
    CHECK_THROWS_AS(stratified_accuracy(joint, "T", "D", "S"), NumericError);
  }
}

TEST_CASE("begg_greenes") {
  SUBCASE("full verification reduces to the plug-in estimate") {
    const auto frame = expand_counts(
        {"T", "D"}, {{{1, 1}, 90}, {{1, 0}, 45}, {{0, 1}, 10}, {{0, 0}, 855}});
    const auto plug_in = accuracy_from_data(frame, "T", "D");
    const auto vd = verification_from_frame(frame, "T", "D");
    CHECK(vd.unverified_pos == 0);
    CHECK(vd.unverified_neg == 0);
    const auto corrected = begg_greenes(vd);
    CHECK(*corrected.se == doctest::Approx(*plug_in.se).epsilon(1e-12));
    CHECK(*corrected.sp == doctest::Approx(*plug_in.sp).epsilon(1e-12));
    CHECK(*corrected.prevalence == doctest::Approx(*plug_in.prevalence).epsilon(1e-12));
  }
  SUBCASE("expected-count verification design") {
    // Cohort of 100000 with prevalence 0.10, index 0.90/0.95; all 13500
    // index-positives verified plus 10% of the 86500 index-negatives.
    VerificationData vd;
    vd.verified = {9000, 4500, 100, 8550};
    vd.unverified_pos = 0;
    vd.unverified_neg = 77850;

    const auto naive = expand_counts(
        {"T", "D"}, {{{1, 1}, 9000}, {{1, 0}, 4500}, {{0, 1}, 100}, {{0, 0}, 8550}});
    const auto verified_only = accuracy_from_data(naive, "T", "D");
    CHECK(*verified_only.se == doctest::Approx(0.989010989010989).epsilon(1e-12));
    CHECK(*verified_only.sp == doctest::Approx(0.6551724137931034).epsilon(1e-12));

    const auto corrected = begg_greenes(vd);
    CHECK(*corrected.se == doctest::Approx(0.90).epsilon(1e-12));
    CHECK(*corrected.sp == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(*corrected.prevalence == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(corrected.provenance.to_string() == "corrected(begg-greenes)");
    CHECK(*corrected.n_effective == 100000);

    // The truth: what full verification of the same cohort would estimate.
    AccuracyEstimate truth;
    truth.se = 0.90;
    truth.sp = 0.95;
    truth.prevalence = 0.10;
    const auto r = bias_report(truth, verified_only);
    CHECK(r.se.label == BiasLabel::Over);
    CHECK(r.sp.label == BiasLabel::Under);
  }
  SUBCASE("no verified index-negatives cannot be rescued") {
    VerificationData vd;
    vd.verified = {90, 45, 0, 0};
    vd.unverified_neg = 865;
    CHECK_THROWS_WITH_AS(begg_greenes(vd), doctest::Contains("index-negative"), NumericError);
  }
}

TEST_CASE("begg_greenes recovers the full-data estimate whenever verification depends only on "
          "the index test") {
  std::mt19937_64 rng(5005);
  for (int i = 0; i < 25; ++i) {
    const double prev = 0.05 + 0.9 * oracle::uniform(rng);
    const double se = 0.55 + 0.4 * oracle::uniform(rng);
    const double sp = 0.55 + 0.4 * oracle::uniform(rng);
    const double v_pos = 0.2 + 0.8 * oracle::uniform(rng);
    const double v_neg = 0.02 + 0.5 * oracle::uniform(rng);
    Dag dag({{"D", NodeRole::Target, true},
             {"T", NodeRole::IndexTest, true},
             {"V", NodeRole::Selection, true}},
            {{"D", "T"}, {"T", "V"}});
    const auto joint = exact_joint(BayesNet(
        dag, {{"D", {}, {prev}}, {"T", {"D"}, {1 - sp, se}}, {"V", {"T"}, {v_neg, v_pos}}}));

    VerificationData vd;
    vd.verified = {joint.prob({{"T", 1}, {"D", 1}, {"V", 1}}),
                   joint.prob({{"T", 1}, {"D", 0}, {"V", 1}}),
                   joint.prob({{"T", 0}, {"D", 1}, {"V", 1}}),
                   joint.prob({{"T", 0}, {"D", 0}, {"V", 1}})};
    vd.unverified_pos = joint.prob({{"T", 1}, {"V", 0}});
    vd.unverified_neg = joint.prob({{"T", 0}, {"V", 0}});

    const auto corrected = begg_greenes(vd);
    const auto full = accuracy_vs(joint, "T", "D", true);
    CHECK(*corrected.se == doctest::Approx(*full.se).epsilon(1e-12));
    CHECK(*corrected.sp == doctest::Approx(*full.sp).epsilon(1e-12));
    CHECK(*corrected.prevalence == doctest::Approx(*full.prevalence).epsilon(1e-12));
  }
}

TEST_CASE("a truth proxy that copies the target leaves no bias") {
  std::mt19937_64 rng(6006);
  for (int i = 0; i < 20; ++i) {
    const double prev = 0.05 + 0.9 * oracle::uniform(rng);
    const double se = 0.5 + 0.5 * oracle::uniform(rng);
    const double fp = 0.5 * oracle::uniform(rng);
    Dag dag({{"D", NodeRole::Target, true},
             {"P", NodeRole::ReferenceTest, true},
             {"T", NodeRole::IndexTest, true}},
            {{"D", "P"}, {"D", "T"}});
    const auto joint = exact_joint(
        BayesNet(dag, {{"D", {}, {prev}}, {"P", {"D"}, {0.0, 1.0}}, {"T", {"D"}, {fp, se}}}));
    const auto naive = accuracy_vs(joint, "T", "P");
    const auto truth = accuracy_vs(joint, "T", "D", true);
    CHECK(*naive.se == doctest::Approx(*truth.se).epsilon(1e-12));
    CHECK(*naive.sp == doctest::Approx(*truth.sp).epsilon(1e-12));
    CHECK(*naive.ppv == doctest::Approx(*truth.ppv).epsilon(1e-12));
    CHECK(*naive.npv == doctest::Approx(*truth.npv).epsilon(1e-12));
    CHECK(*naive.prevalence == doctest::Approx(*truth.prevalence).epsilon(1e-12));
  }
}

TEST_CASE("correct_for_known_reference") {
  const CrossTab2x2 fig1_obs{0.0729, 0.0251, 0.0621, 0.8399};
  SUBCASE("perfect reference returns the naive estimates unchanged") {
    const auto r = correct_for_known_reference(fig1_obs, 1.0, 1.0);
    CHECK(r.prevalence == doctest::Approx(0.098).epsilon(1e-12));
    CHECK(r.se == doctest::Approx(kFig1NaiveSe).epsilon(1e-12));
    CHECK(r.sp == doctest::Approx(kFig1NaiveSp).epsilon(1e-12));
  }
  SUBCASE("true reference characteristics recover the generating model") {
    const auto r = correct_for_known_reference(fig1_obs, 0.80, 0.98);
    CHECK(r.prevalence == doctest::Approx(0.100).epsilon(1e-9));
    CHECK(r.se == doctest::Approx(0.900).epsilon(1e-9));
    CHECK(r.sp == doctest::Approx(0.950).epsilon(1e-9));
  }
  SUBCASE("overstated reference sensitivity keeps se2 but shifts sp2") {
    // With sp1 correct, the linear system recovers se2 exactly regardless of
    // the assumed se1; the distortion lands on sp2 and prevalence.
    const auto r = correct_for_known_reference(fig1_obs, 0.99, 0.98);
    CHECK(r.prevalence == doctest::Approx(0.078 / 0.97).epsilon(1e-9));
    CHECK(r.se == doctest::Approx(0.900).epsilon(1e-9));
    CHECK(r.sp == doctest::Approx(0.9318946188340808).epsilon(1e-9));
  }
  SUBCASE("understated reference sensitivity is inconsistent") {
    // se1 = 0.50 drives the implied false-positive rate negative.
    CHECK_THROWS_WITH_AS(correct_for_known_reference(fig1_obs, 0.50, 0.98),
                         doctest::Contains("inconsistent"), NumericError);
  }
  SUBCASE("reference false-positive rate above the observed margin") {
    // 1 - sp1 = 0.10 > P(ref+) = 0.098 makes the prevalence negative.
    CHECK_THROWS_WITH_AS(correct_for_known_reference(fig1_obs, 0.95, 0.90),
                         doctest::Contains("inconsistent"), NumericError);
  }
  SUBCASE("uninformative reference") {
    CHECK_THROWS_AS(correct_for_known_reference(fig1_obs, 0.5, 0.5), ValidationError);
  }
  SUBCASE("table must sum to one") {
    CHECK_THROWS_AS(correct_for_known_reference({0.5, 0.5, 0.5, 0.5}, 0.9, 0.9),
                    ValidationError);
  }
}

TEST_CASE("known-reference round trip over a parameter grid") {
  int combos = 0;
  for (double p : {0.05, 0.30, 0.60, 0.95})
    for (double se1 : {0.65, 0.80, 0.95})
      for (double sp1 : {0.70, 0.90, 0.99})
        for (double se2 : {0.60, 0.85})
          for (double sp2 : {0.75, 0.97}) {
            if (se1 + sp1 - 1 < 0.1) continue;
            const CrossTab2x2 obs{
                p * se1 * se2 + (1 - p) * (1 - sp1) * (1 - sp2),
                p * se1 * (1 - se2) + (1 - p) * (1 - sp1) * sp2,
                p * (1 - se1) * se2 + (1 - p) * sp1 * (1 - sp2),
                p * (1 - se1) * (1 - se2) + (1 - p) * sp1 * sp2};
            const auto r = correct_for_known_reference(obs, se1, sp1);
            CHECK(r.prevalence == doctest::Approx(p).epsilon(1e-9));
            CHECK(r.se == doctest::Approx(se2).epsilon(1e-9));
            CHECK(r.sp == doctest::Approx(sp2).epsilon(1e-9));
            ++combos;
          }
  CHECK(combos >= 100);
}

TEST_CASE("lca_em") {
  // Three conditionally independent tests; expected counts at scale 1e6
  // generated through the exact joint.
  Dag dag({{"D", NodeRole::Target, false},
           {"T1", NodeRole::Other, true},
           {"T2", NodeRole::Other, true},
           {"T3", NodeRole::Other, true}},
          {{"D", "T1"}, {"D", "T2"}, {"D", "T3"}});
  const BayesNet net(dag, {{"D", {}, {0.30}},
                           {"T1", {"D"}, {0.05, 0.90}},
                           {"T2", {"D"}, {0.10, 0.80}},
                           {"T3", {"D"}, {0.15, 0.70}}});
  const auto joint = exact_joint(net);
  std::map<std::vector<int>, double> counts;
  for (int a : {0, 1})
    for (int b : {0, 1})
      for (int c : {0, 1})
        counts[{a, b, c}] = 1e6 * joint.prob({{"T1", a}, {"T2", b}, {"T3", c}});

  SUBCASE("recovers the generating parameters") {
    const auto fit = lca_em(counts);
    CHECK(fit.converged);
    CHECK(fit.prevalence == doctest::Approx(0.30).epsilon(1e-4));
    CHECK(fit.se[0] == doctest::Approx(0.90).epsilon(1e-4));
    CHECK(fit.se[1] == doctest::Approx(0.80).epsilon(1e-4));
    CHECK(fit.se[2] == doctest::Approx(0.70).epsilon(1e-4));
    CHECK(fit.sp[0] == doctest::Approx(0.95).epsilon(1e-4));
    CHECK(fit.sp[1] == doctest::Approx(0.90).epsilon(1e-4));
    CHECK(fit.sp[2] == doctest::Approx(0.85).epsilon(1e-4));
    CHECK(fit.min_step_delta >= -1e-10);
    CHECK(fit.n_restarts_agreeing >= 15);
  }
  SUBCASE("deterministic for a fixed seed") {
    const auto a = lca_em(counts);
    const auto b = lca_em(counts);
    CHECK(a.prevalence == b.prevalence);
    CHECK(a.se == b.se);
    CHECK(a.sp == b.sp);
    CHECK(a.log_likelihood == b.log_likelihood);
  }
  SUBCASE("self-consistency: refitting model-generated counts returns the fit") {
    const auto fit = lca_em(counts);
    std::map<std::vector<int>, double> regenerated;
    for (int a : {0, 1})
      for (int b : {0, 1})
        for (int c : {0, 1}) {
          const std::vector<int> y{a, b, c};
          double l1 = fit.prevalence, l0 = 1 - fit.prevalence;
          for (int k = 0; k < 3; ++k) {
            l1 *= y[k] ? fit.se[k] : 1 - fit.se[k];
            l0 *= y[k] ? 1 - fit.sp[k] : fit.sp[k];
          }
          regenerated[y] = 1e6 * (l1 + l0);
        }
    const auto refit = lca_em(regenerated);
    CHECK(refit.prevalence == doctest::Approx(fit.prevalence).epsilon(1e-4));
    for (int k = 0; k < 3; ++k) {
      CHECK(refit.se[k] == doctest::Approx(fit.se[k]).epsilon(1e-4));
      CHECK(refit.sp[k] == doctest::Approx(fit.sp[k]).epsilon(1e-4));
    }
  }
  SUBCASE("a constant test lands on the clamped boundary") {
    std::map<std::vector<int>, double> degenerate;
    for (int a : {0, 1})
      for (int b : {0, 1})
        degenerate[{1, a, b}] = counts[{1, a, b}] + counts[{0, a, b}];
    const auto fit = lca_em(degenerate);
    CHECK(fit.converged);
    CHECK(fit.se[0] == doctest::Approx(1.0 - 1e-6).epsilon(1e-9));
    CHECK(fit.sp[0] == doctest::Approx(1e-6).epsilon(1e-3).scale(1e-6));
  }
  SUBCASE("two tests are rejected as unidentified") {
    std::map<std::vector<int>, double> two{{{0, 0}, 10.0}, {{1, 1}, 5.0}};
    CHECK_THROWS_WITH_AS(lca_em(two), doctest::Contains("at least 3 tests"), ValidationError);
  }
  SUBCASE("all-zero counts are rejected") {
    std::map<std::vector<int>, double> zero{{{0, 0, 0}, 0.0}};
    CHECK_THROWS_AS(lca_em(zero), ValidationError);
  }
}

TEST_CASE("conditional_covariance") {
  SUBCASE("conditional independence gives zero covariance in both strata") {
    const auto [c1, c0] =
        conditional_covariance(builtin_joint("ptb-imperfect-reference"), "Culture",
                               "GeneXpert", "PTB");
    CHECK(std::abs(c1) < 1e-12);
    CHECK(std::abs(c0) < 1e-12);
  }
  SUBCASE("bacterial load induces positive covariance among the diseased") {
    const auto [c1, c0] =
        conditional_covariance(builtin_joint("ptb-bacterial-load"), "Culture", "GeneXpert",
                               "PTB");
    CHECK(c1 == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(std::abs(c0) < 1e-12);
  }
  SUBCASE("degenerate stratum") {
    Dag dag({{"D"}, {"A"}, {"B"}}, {});
    const auto joint = exact_joint(
        BayesNet(dag, {{"D", {}, {0.0}}, {"A", {}, {0.5}}, {"B", {}, {0.5}}}));
    CHECK_THROWS_AS(conditional_covariance(joint, "A", "B", "D"), NumericError);
  }
}

TEST_CASE("d-separation of the tests given the target forces zero covariance") {
  std::mt19937_64 rng(777);
  for (int i = 0; i < 20; ++i) {
    const Dag dag = oracle::random_dag(rng, 4, 0.5);
    const auto joint = exact_joint(oracle::random_net(rng, dag));
    const auto& n = dag.nodes();
    const std::string t1 = n[0].name, t2 = n[1].name, d = n[2].name;
    if (!d_separated(dag, {t1}, {t2}, {d})) continue;
    if (joint.prob({{d, 1}}) <= 0 || joint.prob({{d, 0}}) <= 0) continue;
    const auto [c1, c0] = conditional_covariance(joint, t1, t2, d);
    CHECK(std::abs(c1) < 1e-12);
    CHECK(std::abs(c0) < 1e-12);
  }
}
