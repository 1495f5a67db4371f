#include "dtadag/json_io.hpp"

#include <algorithm>

namespace dta {

using nlohmann::json;

std::string canonical_json(const json& j) { return j.dump(2) + "\n"; }

namespace {

json opt_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

std::string_view reason_string(BlockReason reason) {
  switch (reason) {
    case BlockReason::NonColliderInZ: return "non-collider in conditioning set";
    case BlockReason::ColliderNotInZ: return "collider with no descendant in conditioning set";
  }
  return "";
}

}  // namespace

json to_json(const Path& path) {
  json blockers = json::array();
  for (const auto& b : path.blockers)
    blockers.push_back({{"node", b.node}, {"reason", reason_string(b.reason)}});
  return json{{"path", path.to_string()},
              {"open", path.open},
              {"backdoor", path.backdoor()},
              {"blockers", std::move(blockers)}};
}

json to_json(const BiasFinding& finding) {
  json paths = json::array();
  for (const auto& p : finding.paths) paths.push_back(p.to_string());
  return json{{"kind", to_string(finding.kind)},
              {"nodes", finding.nodes},
              {"paths", std::move(paths)},
              {"explanation", finding.explanation},
              {"etiological_analog", etiological_analog(finding.kind)},
              {"paper_anchor", finding.anchor},
              {"severity", finding.severity}};
}

json to_json(const std::vector<BiasFinding>& findings) {
  json out = json::array();
  for (const auto& f : findings) out.push_back(to_json(f));
  return out;
}

json to_json(const AccuracyEstimate& estimate) {
  json ci = nullptr;
  if (estimate.se_ci || estimate.sp_ci) {
    ci = json::object();
    if (estimate.se_ci) ci["se"] = {estimate.se_ci->lo, estimate.se_ci->hi};
    if (estimate.sp_ci) ci["sp"] = {estimate.sp_ci->lo, estimate.sp_ci->hi};
  }
  json n_effective;
  if (estimate.n_effective)
    n_effective = *estimate.n_effective;
  else
    n_effective = "exact";
  return json{{"se", opt_number(estimate.se)},
              {"sp", opt_number(estimate.sp)},
              {"ppv", opt_number(estimate.ppv)},
              {"npv", opt_number(estimate.npv)},
              {"prevalence", opt_number(estimate.prevalence)},
              {"provenance", estimate.provenance.to_string()},
              {"n_effective", std::move(n_effective)},
              {"ci", std::move(ci)}};
}

namespace {

json to_json(const MetricBias& mb) {
  return json{{"delta", opt_number(mb.delta)}, {"label", to_string(mb.label)}};
}

}  // namespace

json to_json(const BiasReport& report) {
  return json{{"versus", report.versus},
              {"se", to_json(report.se)},
              {"sp", to_json(report.sp)},
              {"ppv", to_json(report.ppv)},
              {"npv", to_json(report.npv)},
              {"prevalence", to_json(report.prevalence)}};
}

json to_json(const LcaResult& result) {
  return json{{"prevalence", result.prevalence},
              {"se", result.se},
              {"sp", result.sp},
              {"log_likelihood", result.log_likelihood},
              {"iterations", result.iterations},
              {"converged", result.converged},
              {"n_restarts_agreeing", result.n_restarts_agreeing},
              {"min_step_delta", result.min_step_delta}};
}

json to_json(const ScenarioReport& report) {
  json estimates = json::array();
  for (const auto& e : report.estimates) estimates.push_back(to_json(e));
  json bias_table = json::array();
  for (const auto& b : report.bias_table) bias_table.push_back(to_json(b));
  json diagnostics = json::object();
  for (const auto& [key, value] : report.diagnostics) diagnostics[key] = value;
  json out{{"scenario", report.scenario},
           {"description", report.description},
           {"mode", report.simulated ? "simulate" : "exact"},
           {"findings", to_json(report.findings)},
           {"estimates", std::move(estimates)},
           {"bias_table", std::move(bias_table)},
           {"diagnostics", std::move(diagnostics)}};
  if (report.simulated) {
    out["n"] = report.n;
    out["seed"] = report.seed;
  }
  return out;
}

json scenario_to_json(const Scenario& scenario) {
  const auto& net = scenario.net;
  json cpts = json::object();
  for (const auto& cpt : net.cpts())
    cpts[cpt.node] = json{{"parents", cpt.parents}, {"p1", cpt.p1}};

  json conditioned = json::object();
  for (const auto& [name, value] : scenario.spec.conditioned) conditioned[name] = value;

  std::vector<std::string> expected;
  for (const auto kind : scenario.expected_findings) expected.emplace_back(to_string(kind));
  std::sort(expected.begin(), expected.end());

  json known_reference = nullptr;
  if (scenario.known_reference)
    known_reference = json{{"se", scenario.known_reference->se},
                           {"sp", scenario.known_reference->sp}};

  return json{{"name", scenario.name},
              {"description", scenario.description},
              {"dag", net.dag().serialize()},
              {"cpts", std::move(cpts)},
              {"spec",
               json{{"index", scenario.spec.index},
                    {"truth_proxy", scenario.spec.truth_proxy},
                    {"conditioned", std::move(conditioned)},
                    {"strata", std::vector<std::string>(scenario.spec.strata.begin(),
                                                        scenario.spec.strata.end())}}},
              {"expected_findings", std::move(expected)},
              {"corrections", scenario.corrections},
              {"known_reference", std::move(known_reference)}};
}

namespace {

const json& require(const json& j, const char* key, const char* context) {
  auto it = j.find(key);
  if (it == j.end())
    throw ValidationError(std::string(context) + " is missing required field '" + key + "'");
  return *it;
}

std::string require_string(const json& j, const char* key, const char* context) {
  const json& v = require(j, key, context);
  if (!v.is_string())
    throw ValidationError(std::string(context) + " field '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

Scenario scenario_from_json(const json& j, std::vector<std::string>* warnings) {
  if (!j.is_object()) throw ValidationError("scenario document must be a JSON object");
  const std::string name = require_string(j, "name", "scenario");
  std::string description;
  if (j.contains("description")) {
    if (!j["description"].is_string())
      throw ValidationError("scenario field 'description' must be a string");
    description = j["description"].get<std::string>();
  }

  Dag dag = parse_dag(require_string(j, "dag", "scenario"));

  const json& cpts_json = require(j, "cpts", "scenario");
  if (!cpts_json.is_object()) throw ValidationError("scenario field 'cpts' must be an object");
  std::vector<Cpt> cpts;
  for (auto it = cpts_json.begin(); it != cpts_json.end(); ++it) {
    const json& c = it.value();
    if (!c.is_object() || !c.contains("parents") || !c.contains("p1"))
      throw ValidationError("CPT for node '" + it.key() +
                            "' must be an object with 'parents' and 'p1'");
    Cpt cpt;
    cpt.node = it.key();
    if (!c["parents"].is_array())
      throw ValidationError("CPT 'parents' for node '" + it.key() + "' must be an array");
    for (const auto& p : c["parents"]) {
      if (!p.is_string())
        throw ValidationError("CPT parent names for node '" + it.key() + "' must be strings");
      cpt.parents.push_back(p.get<std::string>());
    }
    if (!c["p1"].is_array())
      throw ValidationError("CPT 'p1' for node '" + it.key() + "' must be an array");
    for (const auto& p : c["p1"]) {
      if (!p.is_number())
        throw ValidationError("CPT 'p1' entries for node '" + it.key() + "' must be numbers");
      cpt.p1.push_back(p.get<double>());
    }
    cpts.push_back(std::move(cpt));
  }
  BayesNet net(std::move(dag), std::move(cpts));

  if (auto errors = validate_roles(net.dag()); !errors.empty()) {
    std::string msg = "scenario dag violates role constraints:";
    for (const auto& e : errors) msg += " " + e + ";";
    throw ValidationError(msg);
  }

  const json& spec_json = require(j, "spec", "scenario");
  if (!spec_json.is_object()) throw ValidationError("scenario field 'spec' must be an object");
  AnalysisSpec spec;
  spec.index = require_string(spec_json, "index", "scenario spec");
  spec.truth_proxy = require_string(spec_json, "truth_proxy", "scenario spec");
  if (spec_json.contains("conditioned")) {
    const json& c = spec_json["conditioned"];
    if (!c.is_object())
      throw ValidationError("scenario spec field 'conditioned' must be an object");
    for (auto it = c.begin(); it != c.end(); ++it) {
      if (!it.value().is_number_integer())
        throw ValidationError("conditioned value for '" + it.key() + "' must be 0 or 1");
      spec.conditioned[it.key()] = it.value().get<int>();
    }
  }
  if (spec_json.contains("strata")) {
    const json& s = spec_json["strata"];
    if (!s.is_array()) throw ValidationError("scenario spec field 'strata' must be an array");
    for (const auto& v : s) {
      if (!v.is_string()) throw ValidationError("strata entries must be strings");
      spec.strata.insert(v.get<std::string>());
    }
  }
  validate_spec(net.dag(), spec);

  std::set<BiasKind> expected;
  if (j.contains("expected_findings")) {
    const json& e = j["expected_findings"];
    if (!e.is_array())
      throw ValidationError("scenario field 'expected_findings' must be an array");
    for (const auto& v : e) {
      if (!v.is_string())
        throw ValidationError("expected_findings entries must be strings");
      auto kind = bias_kind_from_string(v.get<std::string>());
      if (!kind)
        throw ValidationError("unknown bias kind '" + v.get<std::string>() + "'");
      expected.insert(*kind);
    }
  }

  std::vector<std::string> corrections;
  if (j.contains("corrections")) {
    const json& c = j["corrections"];
    if (!c.is_array()) throw ValidationError("scenario field 'corrections' must be an array");
    for (const auto& v : c) {
      if (!v.is_string()) throw ValidationError("corrections entries must be strings");
      corrections.push_back(v.get<std::string>());
    }
  }

  std::optional<KnownReference> known_reference;
  if (j.contains("known_reference") && !j["known_reference"].is_null()) {
    const json& k = j["known_reference"];
    if (!k.is_object() || !k.contains("se") || !k.contains("sp") || !k["se"].is_number() ||
        !k["sp"].is_number())
      throw ValidationError("scenario field 'known_reference' must be {se, sp} or null");
    known_reference = KnownReference{k["se"].get<double>(), k["sp"].get<double>()};
    if (known_reference->se < 0 || known_reference->se > 1 || known_reference->sp < 0 ||
        known_reference->sp > 1)
      throw ValidationError("known_reference se/sp must lie in [0,1]");
  }

  Scenario scenario{name,        description, std::move(net),  spec,
                    expected,    corrections, known_reference};

  if (warnings) {
    auto detected = detect_biases(scenario.net.dag(), scenario.spec);
    std::set<BiasKind> found;
    for (const auto& f : detected) found.insert(f.kind);
    if (found != expected && j.contains("expected_findings")) {
      auto render = [](const std::set<BiasKind>& kinds) {
        std::string out = "[";
        for (auto k : kinds) out += (out.size() > 1 ? ", " : "") + std::string(to_string(k));
        return out + "]";
      };
      warnings->push_back("expected findings " + render(expected) +
                          " do not match detected findings " + render(found));
    }
  }
  return scenario;
}

}  // namespace dta
