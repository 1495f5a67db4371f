#include "dtadag/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dtadag/json_io.hpp"

namespace dta {

namespace {

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

Scenario make_imperfect_reference() {
  Dag dag(
      {{"PTB", NodeRole::Target, false},
       {"Culture", NodeRole::ReferenceTest, true},
       {"GeneXpert", NodeRole::IndexTest, true}},
      {{"PTB", "Culture"}, {"PTB", "GeneXpert"}});
  BayesNet net(std::move(dag),
               {{"PTB", {}, {0.10}},
                {"Culture", {"PTB"}, {0.02, 0.80}},
                {"GeneXpert", {"PTB"}, {0.05, 0.90}}});
  Scenario s{
      "ptb-imperfect-reference",
      "GeneXpert evaluated for pulmonary tuberculosis against culture, with culture treated "
      "as if it were a perfect reference although its sensitivity is 0.80 and specificity "
      "0.98 (bias catalog, design 1: imperfect reference standard). All probability values "
      "are package defaults chosen for illustration.",
      std::move(net),
      {"GeneXpert", "Culture", {}, {}},
      {BiasKind::ReferenceStandardError},
      {"known-reference"},
      KnownReference{0.80, 0.98}};
  return s;
}

// Bacterial-load CPTs solved so that each test keeps the design-1 marginal
// accuracy while P(both positive | PTB = 1) carries a +0.05 excess over the
// conditional-independence product:
//   with q = P(Load = 1) = 0.8,
//   Culture:   q * 0.95625 + (1-q) * 0.175 = 0.80,
//   GeneXpert: q * 0.98    + (1-q) * 0.58  = 0.90,
//   joint:     q * 0.95625 * 0.98 + (1-q) * 0.175 * 0.58 = 0.77 = 0.72 + 0.05.
// False-positive rates do not vary with load, so conditional independence
// still holds among the non-diseased.
Scenario make_bacterial_load() {
  Dag dag(
      {{"PTB", NodeRole::Target, false},
       {"BacterialLoad", NodeRole::Covariate, false},
       {"Culture", NodeRole::ReferenceTest, true},
       {"GeneXpert", NodeRole::IndexTest, true}},
      {{"PTB", "Culture"},
       {"PTB", "GeneXpert"},
       {"BacterialLoad", "Culture"},
       {"BacterialLoad", "GeneXpert"}});
  BayesNet net(std::move(dag),
               {{"PTB", {}, {0.10}},
                {"BacterialLoad", {}, {0.80}},
                {"Culture", {"PTB", "BacterialLoad"}, {0.02, 0.02, 0.175, 0.95625}},
                {"GeneXpert", {"PTB", "BacterialLoad"}, {0.05, 0.05, 0.58, 0.98}}});
  Scenario s{
      "ptb-bacterial-load",
      "GeneXpert against culture where both tests depend on the latent bacterial load, so "
      "they stay dependent even within disease status; marginal accuracies match "
      "ptb-imperfect-reference while P(both positive | PTB present) exceeds the "
      "conditional-independence product by 0.05 (bias catalog, design 2: conditional "
      "dependence). All probability values are package defaults chosen for illustration.",
      std::move(net),
      {"GeneXpert", "Culture", {}, {}},
      {BiasKind::ReferenceStandardError, BiasKind::ConditionalDependence},
      {},
      std::nullopt};
  return s;
}

Scenario make_spectrum() {
  Dag dag(
      {{"CT", NodeRole::Target, true},
       {"AgeUnder25", NodeRole::Covariate, true},
       {"EIA", NodeRole::IndexTest, true}},
      {{"CT", "EIA"}, {"AgeUnder25", "EIA"}});
  BayesNet net(std::move(dag),
               {{"CT", {}, {0.08}},
                {"AgeUnder25", {}, {0.50}},
                {"EIA", {"CT", "AgeUnder25"}, {0.05, 0.03, 0.70, 0.85}}});
  Scenario s{
      "chlamydia-spectrum",
      "Enzyme immunoassay for Chlamydia trachomatis whose accuracy genuinely differs by age "
      "group (sensitivity 0.85 and specificity 0.97 for patients aged 24 or under, 0.70 and "
      "0.95 otherwise) while age is unrelated to infection status; heterogeneity, not a bias "
      "(bias catalog, design 3: spectrum effect). A clinic-type variant of the same "
      "structure exists; this package ships the age version. All probability values are "
      "package defaults chosen for illustration.",
      std::move(net),
      {"EIA", "CT", {}, {"AgeUnder25"}},
      {BiasKind::SpectrumEffect},
      {},
      std::nullopt};
  return s;
}

Scenario make_confounding() {
  Dag dag(
      {{"HIV", NodeRole::Covariate, true},
       {"PTB", NodeRole::Target, true},
       {"TST", NodeRole::IndexTest, true}},
      {{"HIV", "PTB"}, {"HIV", "TST"}, {"PTB", "TST"}});
  BayesNet net(std::move(dag),
               {{"HIV", {}, {0.20}},
                {"PTB", {"HIV"}, {0.10, 0.30}},
                {"TST", {"PTB", "HIV"}, {0.15, 0.15, 0.80, 0.50}}});
  Scenario s{
      "tb-hiv-confounding",
      "Tuberculin skin test for tuberculosis infection where HIV both raises the risk of "
      "tuberculosis (0.30 vs 0.10) and lowers the test's sensitivity (0.50 vs 0.80, "
      "specificity 0.85 in both groups); the crude analysis leaves the backdoor path open "
      "(bias catalog, design 4: confounding). All probability values are package defaults "
      "chosen for illustration.",
      std::move(net),
      {"TST", "PTB", {}, {}},
      {BiasKind::Confounding},
      {"stratification"},
      std::nullopt};
  return s;
}

Scenario make_partial_verification() {
  Dag dag(
      {{"HPV", NodeRole::Target, true},
       {"PCR", NodeRole::IndexTest, true},
       {"V", NodeRole::Selection, true}},
      {{"HPV", "PCR"}, {"PCR", "V"}});
  BayesNet net(std::move(dag),
               {{"HPV", {}, {0.10}},
                {"PCR", {"HPV"}, {0.05, 0.90}},
                {"V", {"PCR"}, {0.10, 1.00}}});
  Scenario s{
      "hpv-partial-verification",
      "PCR screening for human papillomavirus where every PCR-positive subject and a 10% "
      "random sample of PCR-negative subjects receive colposcopy, treated as a perfect "
      "reference; the analysis is restricted to verified subjects (bias catalog, design 5: "
      "partial verification). All probability values are package defaults chosen for "
      "illustration.",
      std::move(net),
      {"PCR", "HPV", {{"V", 1}}, {}},
      {BiasKind::PartialVerification},
      {"begg-greenes"},
      std::nullopt};
  return s;
}

}  // namespace

const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> scenarios = [] {
    std::vector<Scenario> out;
    out.push_back(make_imperfect_reference());
    out.push_back(make_bacterial_load());
    out.push_back(make_spectrum());
    out.push_back(make_confounding());
    out.push_back(make_partial_verification());
    return out;
  }();
  return scenarios;
}

const Scenario& builtin_scenario(const std::string& name) {
  for (const auto& s : builtin_scenarios())
    if (s.name == name) return s;
  std::ostringstream os;
  os << "unknown scenario '" << name << "'; valid names:";
  for (const auto& s : builtin_scenarios()) os << " " << s.name;
  throw ValidationError(os.str());
}

Scenario load_scenario(const std::string& json_text, std::vector<std::string>* warnings) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario JSON is malformed: ") + e.what());
  }
  return scenario_from_json(j, warnings);
}

std::string serialize_scenario(const Scenario& scenario) {
  return canonical_json(scenario_to_json(scenario));
}

// ---------------------------------------------------------------------------
// Reports

namespace {

struct ScenarioContext {
  std::string target;
  bool has_rse = false, has_cd = false, has_spectrum = false, has_conf = false, has_pv = false;
  std::vector<std::string> spectrum_witnesses;
  std::vector<std::string> adjust;  // first minimal adjustment set when confounded
  bool adjustable = false;
};

ScenarioContext analyze_structure(const Scenario& s, const std::vector<BiasFinding>& findings) {
  ScenarioContext ctx;
  for (const auto& n : s.net.dag().nodes())
    if (n.role == NodeRole::Target) ctx.target = n.name;
  for (const auto& f : findings) {
    switch (f.kind) {
      case BiasKind::ReferenceStandardError: ctx.has_rse = true; break;
      case BiasKind::ConditionalDependence: ctx.has_cd = true; break;
      case BiasKind::SpectrumEffect:
        ctx.has_spectrum = true;
        ctx.spectrum_witnesses = f.nodes;
        break;
      case BiasKind::Confounding: ctx.has_conf = true; break;
      case BiasKind::PartialVerification: ctx.has_pv = true; break;
    }
  }
  if (ctx.has_conf) {
    auto sets = minimal_adjustment_sets(s.net.dag(), ctx.target, s.spec.index);
    if (sets.feasible && !sets.sets.empty() && !sets.sets.front().empty()) {
      ctx.adjust = sets.sets.front();
      ctx.adjustable = true;
    }
  }
  return ctx;
}

// Strata reported: declared strata, spectrum witnesses, the adjustment set.
std::set<std::string> report_strata(const Scenario& s, const ScenarioContext& ctx) {
  std::set<std::string> strata(s.spec.strata.begin(), s.spec.strata.end());
  strata.insert(ctx.spectrum_witnesses.begin(), ctx.spectrum_witnesses.end());
  strata.insert(ctx.adjust.begin(), ctx.adjust.end());
  return strata;
}

Frame filter_rows(const Frame& f, const std::map<std::string, int>& required) {
  if (required.empty()) return f;
  std::vector<std::pair<int, int>> checks;
  for (const auto& [name, value] : required) checks.emplace_back(f.column(name), value);
  Frame out;
  out.variables = f.variables;
  for (const auto& row : f.rows) {
    bool keep = true;
    for (const auto& [col, value] : checks)
      if (row[col] != value) {
        keep = false;
        break;
      }
    if (keep) out.rows.push_back(row);
  }
  return out;
}

// Covariate-standardized accuracy from counts; weights are the marginal
// stratum frequencies of the full data.
AccuracyEstimate adjusted_from_data(const Frame& frame, const std::string& index,
                                    const std::string& truth,
                                    const std::vector<std::string>& adjust,
                                    Provenance provenance) {
  const int m = static_cast<int>(adjust.size());
  const double n = static_cast<double>(frame.row_count());
  double se = 0.0, sp = 0.0;
  bool se_ok = true, sp_ok = true;
  for (uint32_t cfg = 0; cfg < (1u << m); ++cfg) {
    std::map<std::string, int> req;
    for (int i = 0; i < m; ++i) req[adjust[i]] = (cfg >> (m - 1 - i)) & 1u;
    Frame stratum = filter_rows(frame, req);
    if (stratum.rows.empty()) continue;
    const double w = static_cast<double>(stratum.row_count()) / n;
    auto est = accuracy_from_data(stratum, index, truth);
    if (est.se)
      se += w * *est.se;
    else
      se_ok = false;
    if (est.sp)
      sp += w * *est.sp;
    else
      sp_ok = false;
  }
  AccuracyEstimate est = accuracy_from_data(frame, index, truth);
  AccuracyEstimate out;
  out.prevalence = est.prevalence;
  out.n_effective = est.n_effective;
  if (se_ok) out.se = se;
  if (sp_ok) out.sp = sp;
  if (se_ok && sp_ok && out.prevalence) {
    const double p = *out.prevalence;
    const double pos = p * se + (1.0 - p) * (1.0 - sp);
    if (pos > 0.0) out.ppv = p * se / pos;
    if (pos < 1.0) out.npv = (1.0 - p) * sp / (1.0 - pos);
  }
  out.provenance = std::move(provenance);
  return out;
}

}  // namespace

ScenarioReport run_scenario(const Scenario& s) {
  const Dag& dag = s.net.dag();
  const auto& spec = s.spec;
  ScenarioReport rep;
  rep.scenario = s.name;
  rep.description = s.description;
  rep.findings = detect_biases(dag, spec);
  const ScenarioContext ctx = analyze_structure(s, rep.findings);

  const JointTable joint = exact_joint(s.net);

  AccuracyEstimate true_est =
      ctx.adjustable
          ? adjusted_accuracy(joint, spec.index, ctx.target, ctx.adjust,
                              {ProvenanceKind::True, "standardized over " + join(ctx.adjust)})
          : accuracy_vs(joint, spec.index, ctx.target, true);
  rep.estimates.push_back(true_est);

  std::vector<Assignment> evidence(spec.conditioned.begin(), spec.conditioned.end());
  auto [analysis_joint, p_evidence] = condition(joint, evidence);
  rep.estimates.push_back(accuracy_vs(analysis_joint, spec.index, spec.truth_proxy, false));

  for (const auto& stratum : report_strata(s, ctx))
    for (auto& [value, est] :
         stratified_accuracy(analysis_joint, spec.index, spec.truth_proxy, stratum))
      rep.estimates.push_back(std::move(est));

  for (const auto& correction : s.corrections) {
    if (correction == "begg-greenes" && ctx.has_pv && !spec.conditioned.empty()) {
      std::vector<Assignment> verified(spec.conditioned.begin(), spec.conditioned.end());
      auto cell = [&](int t, int d) {
        std::vector<Assignment> e = verified;
        e.emplace_back(spec.index, t);
        e.emplace_back(spec.truth_proxy, d);
        return joint.prob(e);
      };
      VerificationData vd;
      vd.verified = {cell(1, 1), cell(1, 0), cell(0, 1), cell(0, 0)};
      std::vector<Assignment> vp = verified, vn = verified;
      vp.emplace_back(spec.index, 1);
      vn.emplace_back(spec.index, 0);
      vd.unverified_pos = joint.prob({{spec.index, 1}}) - joint.prob(vp);
      vd.unverified_neg = joint.prob({{spec.index, 0}}) - joint.prob(vn);
      rep.estimates.push_back(begg_greenes(vd));
    } else if (correction == "known-reference" && ctx.has_rse && s.known_reference) {
      CrossTab2x2 obs{
          joint.prob({{spec.truth_proxy, 1}, {spec.index, 1}}),
          joint.prob({{spec.truth_proxy, 1}, {spec.index, 0}}),
          joint.prob({{spec.truth_proxy, 0}, {spec.index, 1}}),
          joint.prob({{spec.truth_proxy, 0}, {spec.index, 0}})};
      rep.estimates.push_back(
          known_reference_accuracy(obs, s.known_reference->se, s.known_reference->sp));
    } else if (correction == "stratification" && ctx.adjustable) {
      rep.estimates.push_back(adjusted_accuracy(joint, spec.index, spec.truth_proxy, ctx.adjust,
                                                {ProvenanceKind::Corrected, "stratification"}));
    }
  }

  for (size_t i = 1; i < rep.estimates.size(); ++i)
    rep.bias_table.push_back(bias_report(true_est, rep.estimates[i]));

  if (!evidence.empty()) rep.diagnostics.emplace_back("verified_fraction", p_evidence);
  if (ctx.has_cd) {
    auto [cov1, cov0] = conditional_covariance(joint, spec.truth_proxy, spec.index, ctx.target);
    rep.diagnostics.emplace_back("cov_tests_given_target_0", cov0);
    rep.diagnostics.emplace_back("cov_tests_given_target_1", cov1);
  }
  if (ctx.has_pv && !evidence.empty()) {
    std::vector<Assignment> verified(evidence);
    auto frac = [&](int t) {
      std::vector<Assignment> e = verified;
      e.emplace_back(spec.index, t);
      return joint.prob(e) / joint.prob({{spec.index, t}});
    };
    rep.diagnostics.emplace_back("verification_fraction_index_negative", frac(0));
    rep.diagnostics.emplace_back("verification_fraction_index_positive", frac(1));
  }
  std::sort(rep.diagnostics.begin(), rep.diagnostics.end());
  return rep;
}

ScenarioReport run_scenario_simulated(const Scenario& s, uint64_t n, uint64_t seed) {
  const Dag& dag = s.net.dag();
  const auto& spec = s.spec;
  ScenarioReport rep;
  rep.scenario = s.name;
  rep.description = s.description;
  rep.simulated = true;
  rep.n = n;
  rep.seed = seed;
  rep.findings = detect_biases(dag, spec);
  const ScenarioContext ctx = analyze_structure(s, rep.findings);

  const Frame frame = to_frame(sample(s.net, n, seed));

  AccuracyEstimate true_est;
  if (ctx.adjustable) {
    true_est = adjusted_from_data(frame, spec.index, ctx.target, ctx.adjust,
                                  {ProvenanceKind::True, "standardized over " + join(ctx.adjust)});
  } else {
    true_est = accuracy_from_data(frame, spec.index, ctx.target);
    true_est.provenance = {ProvenanceKind::True, ""};
  }
  rep.estimates.push_back(true_est);

  const Frame analysis_rows = filter_rows(frame, spec.conditioned);
  rep.estimates.push_back(accuracy_from_data(analysis_rows, spec.index, spec.truth_proxy));

  for (const auto& stratum : report_strata(s, ctx)) {
    for (int value : {0, 1}) {
      auto req = spec.conditioned;
      req[stratum] = value;
      auto est = accuracy_from_data(filter_rows(frame, req), spec.index, spec.truth_proxy);
      est.provenance = {ProvenanceKind::Stratified, stratum + "=" + std::to_string(value)};
      rep.estimates.push_back(std::move(est));
    }
  }

  for (const auto& correction : s.corrections) {
    if (correction == "begg-greenes" && ctx.has_pv && !spec.conditioned.empty()) {
      // Blank unverified references the way the exported dataset would.
      Frame blanked = frame;
      std::vector<std::pair<int, int>> checks;
      for (const auto& [name, value] : spec.conditioned)
        checks.emplace_back(blanked.column(name), value);
      const int proxy_col = blanked.column(spec.truth_proxy);
      for (auto& row : blanked.rows)
        for (const auto& [col, value] : checks)
          if (row[col] != value) {
            row[proxy_col] = -1;
            break;
          }
      rep.estimates.push_back(
          begg_greenes(verification_from_frame(blanked, spec.index, spec.truth_proxy)));
    } else if (correction == "known-reference" && ctx.has_rse && s.known_reference) {
      const int ti = frame.column(spec.index);
      const int pi = frame.column(spec.truth_proxy);
      CrossTab2x2 obs;
      for (const auto& row : frame.rows) {
        if (row[pi] == 1)
          (row[ti] == 1 ? obs.a : obs.b) += 1;
        else
          (row[ti] == 1 ? obs.c : obs.d) += 1;
      }
      const double total = obs.a + obs.b + obs.c + obs.d;
      obs.a /= total;
      obs.b /= total;
      obs.c /= total;
      obs.d /= total;
      auto est = known_reference_accuracy(obs, s.known_reference->se, s.known_reference->sp);
      est.n_effective = static_cast<uint64_t>(total);
      rep.estimates.push_back(std::move(est));
    } else if (correction == "stratification" && ctx.adjustable) {
      rep.estimates.push_back(adjusted_from_data(frame, spec.index, spec.truth_proxy, ctx.adjust,
                                                 {ProvenanceKind::Corrected, "stratification"}));
    }
  }

  // Monte Carlo estimates get a looser label threshold than exact ones.
  for (size_t i = 1; i < rep.estimates.size(); ++i)
    rep.bias_table.push_back(bias_report(true_est, rep.estimates[i], 1e-6));

  if (!spec.conditioned.empty()) {
    rep.diagnostics.emplace_back(
        "verified_fraction",
        static_cast<double>(analysis_rows.row_count()) / static_cast<double>(frame.row_count()));
    if (ctx.has_pv) {
      const int ti = frame.column(spec.index);
      std::vector<std::pair<int, int>> checks;
      for (const auto& [name, value] : spec.conditioned)
        checks.emplace_back(frame.column(name), value);
      double pos = 0, pos_v = 0, neg = 0, neg_v = 0;
      for (const auto& row : frame.rows) {
        bool verified = true;
        for (const auto& [col, value] : checks)
          if (row[col] != value) verified = false;
        if (row[ti] == 1) {
          pos += 1;
          pos_v += verified;
        } else {
          neg += 1;
          neg_v += verified;
        }
      }
      if (neg > 0) rep.diagnostics.emplace_back("verification_fraction_index_negative", neg_v / neg);
      if (pos > 0) rep.diagnostics.emplace_back("verification_fraction_index_positive", pos_v / pos);
    }
  }
  if (ctx.has_cd) {
    const auto joint = empirical_joint([&] {
      Dataset d;
      d.variables = frame.variables;
      for (const auto& row : frame.rows) d.rows.emplace_back(row.begin(), row.end());
      return d;
    }());
    auto [cov1, cov0] = conditional_covariance(joint, spec.truth_proxy, spec.index, ctx.target);
    rep.diagnostics.emplace_back("cov_tests_given_target_0", cov0);
    rep.diagnostics.emplace_back("cov_tests_given_target_1", cov1);
  }
  std::sort(rep.diagnostics.begin(), rep.diagnostics.end());
  return rep;
}

Frame scenario_dataset(const Scenario& s, uint64_t n, uint64_t seed, bool include_latent) {
  Frame frame = to_frame(sample(s.net, n, seed));
  const auto& spec = s.spec;

  if (!spec.conditioned.empty()) {
    std::vector<std::pair<int, int>> checks;
    for (const auto& [name, value] : spec.conditioned)
      checks.emplace_back(frame.column(name), value);
    const int proxy_col = frame.column(spec.truth_proxy);
    for (auto& row : frame.rows)
      for (const auto& [col, value] : checks)
        if (row[col] != value) {
          row[proxy_col] = -1;
          break;
        }
  }

  if (include_latent) return frame;
  std::vector<int> keep;
  for (size_t i = 0; i < frame.variables.size(); ++i)
    if (s.net.dag().node(frame.variables[i]).observed) keep.push_back(static_cast<int>(i));
  Frame out;
  for (int i : keep) out.variables.push_back(frame.variables[i]);
  out.rows.reserve(frame.rows.size());
  for (const auto& row : frame.rows) {
    std::vector<int8_t> r;
    r.reserve(keep.size());
    for (int i : keep) r.push_back(row[i]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace dta
