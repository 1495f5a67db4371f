#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dtadag/graph.hpp"

namespace dta {

/// How the naive analysis treats the data: which node stands in for the
/// target condition, what the sample is restricted on, what is stratified on.
struct AnalysisSpec {
  std::string index;
  std::string truth_proxy;
  std::map<std::string, int> conditioned;
  std::set<std::string> strata;

  bool operator==(const AnalysisSpec&) const = default;
};

enum class BiasKind {
  ReferenceStandardError,
  ConditionalDependence,
  SpectrumEffect,
  Confounding,
  PartialVerification,
};

/// Kebab-case identifier, e.g. "reference-standard-error".
std::string_view to_string(BiasKind kind);
std::optional<BiasKind> bias_kind_from_string(std::string_view s);

/// The matching distortion in etiological studies, e.g. "exposure misclassification".
std::string_view etiological_analog(BiasKind kind);

struct BiasFinding {
  BiasKind kind;
  /// Implicated node names, sorted.
  std::vector<std::string> nodes;
  /// Offending open paths; nonempty for the path-based kinds.
  std::vector<Path> paths;
  std::string explanation;
  /// Catalog reference printed by reports, e.g. "bias catalog, design 4".
  std::string anchor;
  /// "bias", "heterogeneity, not a bias" (spectrum), or
  /// "bias, unadjustable with observed nodes" (latent confounding).
  std::string severity;
};

/// Checks the role constraints a DTA design must satisfy: exactly one target,
/// exactly one index test, every selection node has at least one parent.
/// Returns all violations; empty means ok.
std::vector<std::string> validate_roles(const Dag& dag);

/// Throws ValidationError / UnknownNodeError when the analysis spec does not fit the dag:
/// names must exist, index must be the index-test node, index != truth_proxy,
/// conditioned and strata nodes must be observed.
void validate_spec(const Dag& dag, const AnalysisSpec& spec);

/// Structural detection of the five canonical bias patterns. Findings come
/// back in fixed rule order, each kind at most once with all witnesses
/// listed. Pure function: identical inputs give identical output.
std::vector<BiasFinding> detect_biases(const Dag& dag, const AnalysisSpec& spec);

}  // namespace dta
