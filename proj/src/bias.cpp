#include "dtadag/bias.hpp"

#include <algorithm>
#include <sstream>

namespace dta {

std::string_view to_string(BiasKind kind) {
  switch (kind) {
    case BiasKind::ReferenceStandardError: return "reference-standard-error";
    case BiasKind::ConditionalDependence: return "conditional-dependence";
    case BiasKind::SpectrumEffect: return "spectrum-effect";
    case BiasKind::Confounding: return "confounding";
    case BiasKind::PartialVerification: return "partial-verification";
  }
  return "";
}

std::optional<BiasKind> bias_kind_from_string(std::string_view s) {
  if (s == "reference-standard-error") return BiasKind::ReferenceStandardError;
  if (s == "conditional-dependence") return BiasKind::ConditionalDependence;
  if (s == "spectrum-effect") return BiasKind::SpectrumEffect;
  if (s == "confounding") return BiasKind::Confounding;
  if (s == "partial-verification") return BiasKind::PartialVerification;
  return std::nullopt;
}

std::string_view etiological_analog(BiasKind kind) {
  switch (kind) {
    case BiasKind::ReferenceStandardError: return "exposure misclassification";
    case BiasKind::ConditionalDependence: return "misclassification plus confounding";
    case BiasKind::SpectrumEffect: return "effect modification";
    case BiasKind::Confounding: return "confounding";
    case BiasKind::PartialVerification: return "selection bias";
  }
  return "";
}

namespace {

std::string_view catalog_anchor(BiasKind kind) {
  switch (kind) {
    case BiasKind::ReferenceStandardError: return "bias catalog, design 1: imperfect reference standard";
    case BiasKind::ConditionalDependence: return "bias catalog, design 2: conditional dependence";
    case BiasKind::SpectrumEffect: return "bias catalog, design 3: spectrum effect";
    case BiasKind::Confounding: return "bias catalog, design 4: confounding";
    case BiasKind::PartialVerification: return "bias catalog, design 5: partial verification";
  }
  return "";
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Directed x -> ... -> y routes, for explaining verification mechanisms.
std::vector<Path> directed_paths(const Dag& dag, const std::string& x, const std::string& y) {
  std::vector<Path> out;
  for (auto& p : all_paths(dag, x, y))
    if (std::all_of(p.forward.begin(), p.forward.end(), [](bool f) { return f; }))
      out.push_back(std::move(p));
  return out;
}

}  // namespace

std::vector<std::string> validate_roles(const Dag& dag) {
  std::vector<std::string> errors;
  int targets = 0, index_tests = 0;
  for (const auto& n : dag.nodes()) {
    if (n.role == NodeRole::Target) ++targets;
    if (n.role == NodeRole::IndexTest) ++index_tests;
    if (n.role == NodeRole::Selection && dag.parents(n.name).empty())
      errors.push_back("selection node '" + n.name + "' has no cause");
  }
  if (targets == 0) errors.insert(errors.begin(), "no target node");
  if (targets > 1) errors.insert(errors.begin(), "multiple target nodes");
  if (index_tests == 0) errors.push_back("no index test node");
  if (index_tests > 1) errors.push_back("multiple index test nodes");
  return errors;
}

void validate_spec(const Dag& dag, const AnalysisSpec& spec) {
  const Node& index = dag.node(spec.index);
  dag.index_of(spec.truth_proxy);
  if (index.role != NodeRole::IndexTest)
    throw ValidationError("index node '" + spec.index + "' does not have role index");
  if (spec.index == spec.truth_proxy)
    throw ValidationError("index and truth proxy must differ");
  for (const auto& [name, value] : spec.conditioned) {
    const Node& n = dag.node(name);
    if (!n.observed)
      throw ValidationError("conditioned node '" + name + "' is latent");
    if (value != 0 && value != 1)
      throw ValidationError("conditioned value for '" + name + "' must be 0 or 1");
  }
  for (const auto& name : spec.strata)
    if (!dag.node(name).observed)
      throw ValidationError("stratum node '" + name + "' is latent");
}

std::vector<BiasFinding> detect_biases(const Dag& dag, const AnalysisSpec& spec) {
  if (auto errors = validate_roles(dag); !errors.empty()) {
    std::ostringstream os;
    os << "invalid roles:";
    for (const auto& e : errors) os << " " << e << ";";
    throw ValidationError(os.str());
  }
  validate_spec(dag, spec);

  std::string target;
  for (const auto& n : dag.nodes())
    if (n.role == NodeRole::Target) target = n.name;

  const std::string& index = spec.index;
  const std::string& proxy = spec.truth_proxy;
  const bool proxy_is_target = proxy == target;
  std::vector<BiasFinding> findings;

  // (1) Imperfect reference treated as truth: latent target with the proxy
  //     downstream of it. The open route proxy <- ... target ... -> index is
  //     the biased channel.
  if (!dag.node(target).observed && !proxy_is_target &&
      dag.descendants(target).count(proxy)) {
    BiasFinding f;
    f.kind = BiasKind::ReferenceStandardError;
    f.nodes = sorted_unique({target, proxy});
    for (auto& p : backdoor_paths(dag, proxy, index, {}))
      if (std::find(p.nodes.begin(), p.nodes.end(), target) != p.nodes.end())
        f.paths.push_back(std::move(p));
    f.explanation = "the analysis treats '" + proxy + "' as if it were the target condition '" +
                    target + "', but '" + proxy +
                    "' is an imperfect measurement of it; the association flows through the "
                    "latent target, the same structure as exposure misclassification";
    f.anchor = catalog_anchor(f.kind);
    f.severity = "bias";
    findings.push_back(std::move(f));
  }

  // (2) The conditional-independence assumption between proxy and index given
  //     the target fails structurally.
  if (!proxy_is_target && !d_separated(dag, {proxy}, {index}, {target})) {
    BiasFinding f;
    f.kind = BiasKind::ConditionalDependence;
    f.paths = open_paths(dag, proxy, index, {target});
    std::vector<std::string> interior;
    for (const auto& p : f.paths)
      for (size_t i = 1; i + 1 < p.nodes.size(); ++i) interior.push_back(p.nodes[i]);
    f.nodes = sorted_unique(std::move(interior));
    f.explanation = "'" + proxy + "' and '" + index + "' stay dependent after conditioning on '" +
                    target +
                    "', so analyses that assume conditional independence are biased; the open "
                    "channel acts like misclassification plus confounding";
    f.anchor = catalog_anchor(f.kind);
    f.severity = "bias";
    findings.push_back(std::move(f));
  }

  // (3) Spectrum effect: an observed characteristic feeds the index test but
  //     is marginally unrelated to the target condition.
  {
    std::vector<std::string> witnesses;
    std::vector<Path> edges;
    for (const auto& n : dag.nodes()) {
      if (!n.observed || n.name == target || n.name == proxy || n.name == index) continue;
      if (!dag.has_edge(n.name, index)) continue;
      if (!d_separated(dag, {n.name}, {target}, {})) continue;
      witnesses.push_back(n.name);
      Path p;
      p.nodes = {n.name, index};
      p.forward = {true};
      classify_path(dag, p, {});
      edges.push_back(std::move(p));
    }
    if (!witnesses.empty()) {
      BiasFinding f;
      f.kind = BiasKind::SpectrumEffect;
      f.nodes = sorted_unique(witnesses);
      f.paths = std::move(edges);
      f.explanation = "test performance genuinely varies across levels of " +
                      [&] {
                        std::string s;
                        for (const auto& w : f.nodes) s += (s.empty() ? "'" : ", '") + w + "'";
                        return s;
                      }() +
                      "; this is heterogeneity (the analog of effect modification), not a bias, "
                      "and calls for subgroup reporting";
      f.anchor = catalog_anchor(f.kind);
      f.severity = "heterogeneity, not a bias";
      findings.push_back(std::move(f));
    }
  }

  // (4) Confounding: open backdoor between target and index after the
  //     declared stratification.
  {
    auto bd = backdoor_paths(dag, target, index, spec.strata);
    if (!bd.empty()) {
      BiasFinding f;
      f.kind = BiasKind::Confounding;
      std::vector<std::string> interior;
      for (const auto& p : bd)
        for (size_t i = 1; i + 1 < p.nodes.size(); ++i) interior.push_back(p.nodes[i]);
      f.nodes = sorted_unique(std::move(interior));
      f.paths = std::move(bd);
      const auto adjust = minimal_adjustment_sets(dag, target, index);
      f.explanation = "a shared cause opens a backdoor path between '" + target + "' and '" +
                      index +
                      "', creating a spurious association exactly as confounding does; block it "
                      "by stratification or covariate adjustment";
      f.anchor = catalog_anchor(f.kind);
      f.severity = adjust.feasible ? "bias" : "bias, unadjustable with observed nodes";
      findings.push_back(std::move(f));
    }
  }

  // (5) Partial verification: the sample is restricted on a node that is
  //     downstream of the index test or tied to the target condition.
  {
    std::vector<std::string> implicated;
    std::vector<Path> routes;
    bool fired = false;
    for (const auto& [v, value] : spec.conditioned) {
      const auto anc = dag.ancestors(v);
      std::vector<std::string> triggers;
      if (anc.count(index)) triggers.push_back(index);
      for (const auto& a : anc) {
        if (a == index) continue;
        // A covariate drives verification only along routes that bypass the
        // index test; dependence through the test is already clause one.
        const auto t2_free = [&] {
          for (const auto& p : directed_paths(dag, a, v))
            if (std::find(p.nodes.begin(), p.nodes.end(), index) == p.nodes.end()) return true;
          return false;
        }();
        if (!t2_free) continue;
        if (a == target || !d_separated(dag, {a}, {target}, {})) triggers.push_back(a);
      }
      if (triggers.empty()) continue;
      fired = true;
      implicated.push_back(v);
      for (const auto& t : triggers) {
        implicated.push_back(t);
        for (auto& p : directed_paths(dag, t, v)) {
          if (t != index &&
              std::find(p.nodes.begin(), p.nodes.end(), index) != p.nodes.end())
            continue;
          routes.push_back(std::move(p));
        }
      }
    }
    if (fired) {
      BiasFinding f;
      f.kind = BiasKind::PartialVerification;
      f.nodes = sorted_unique(std::move(implicated));
      f.paths = std::move(routes);
      f.explanation = "verification is restricted to a subset selected by the index test result "
                      "or by a factor related to the target condition, so the verified sample "
                      "misrepresents the population: the analog of selection bias";
      f.anchor = catalog_anchor(f.kind);
      f.severity = "bias";
      findings.push_back(std::move(f));
    }
  }

  return findings;
}

}  // namespace dta
