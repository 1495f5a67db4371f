#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dtadag/bias.hpp"
#include "dtadag/data.hpp"
#include "dtadag/estimators.hpp"
#include "dtadag/prob.hpp"

namespace dta {

struct KnownReference {
  double se = 1.0;
  double sp = 1.0;
};

/// An executable study design: generative model, the naive analysis run on
/// it, the finding set it is expected to trigger, and the corrections that
/// repair it. All conditional probability values are package defaults chosen
/// for illustration.
struct Scenario {
  std::string name;
  std::string description;
  BayesNet net;
  AnalysisSpec spec;
  std::set<BiasKind> expected_findings;
  std::vector<std::string> corrections;
  std::optional<KnownReference> known_reference;
};

/// The five canonical designs from the bias catalog:
///   ptb-imperfect-reference, ptb-bacterial-load, chlamydia-spectrum,
///   tb-hiv-confounding, hpv-partial-verification.
const std::vector<Scenario>& builtin_scenarios();

/// The builtin with the given name; throws ValidationError listing the valid
/// names when it does not exist.
const Scenario& builtin_scenario(const std::string& name);

/// Parses and fully validates a scenario JSON document. A mismatch between
/// the declared expected_findings and the detector's output is reported as a
/// warning, not an error.
Scenario load_scenario(const std::string& json_text, std::vector<std::string>* warnings = nullptr);

std::string serialize_scenario(const Scenario& scenario);

struct ScenarioReport {
  std::string scenario;
  std::string description;
  bool simulated = false;
  uint64_t n = 0;
  uint64_t seed = 0;
  std::vector<BiasFinding> findings;
  /// True estimate first, then naive, stratified, corrected.
  std::vector<AccuracyEstimate> estimates;
  /// One row per non-true estimate, compared against the true estimate.
  std::vector<BiasReport> bias_table;
  /// Sorted diagnostic values (conditional covariances, verification
  /// fractions, evidence probability).
  std::vector<std::pair<std::string, double>> diagnostics;
};

/// End-to-end bias audit of a design: findings, true/naive/stratified
/// estimates, the applicable corrections, the bias table and diagnostics.
/// Exact mode works on the enumerated joint; simulate mode draws a seeded
/// dataset and computes the same report from counts.
ScenarioReport run_scenario(const Scenario& scenario);
ScenarioReport run_scenario_simulated(const Scenario& scenario, uint64_t n, uint64_t seed);

/// The dataset a study following this design would record: latent columns
/// dropped (unless include_latent), and when the design conditions on
/// verification, the truth-proxy column blanked for unverified rows.
Frame scenario_dataset(const Scenario& scenario, uint64_t n, uint64_t seed, bool include_latent);

}  // namespace dta
