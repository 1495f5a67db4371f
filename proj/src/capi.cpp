#include "dtadag.h"

#include <cstring>
#include <new>
#include <string>

#include "dtadag/analyze.hpp"
#include "dtadag/json_io.hpp"

using nlohmann::json;

struct dtadag_dag {
  dta::Dag value;
};

struct dtadag_scenario {
  dta::Scenario value;
};

namespace {

thread_local std::string g_last_error;

dtadag_status fail(dtadag_status status, const char* what) {
  g_last_error = what;
  return status;
}

// Runs the body and maps exceptions onto status codes.
template <typename Fn>
dtadag_status guarded(Fn&& fn) {
  try {
    fn();
    return DTADAG_OK;
  } catch (const dta::ParseError& e) {
    return fail(DTADAG_PARSE_ERROR, e.what());
  } catch (const dta::UnknownNodeError& e) {
    return fail(DTADAG_UNKNOWN_NODE, e.what());
  } catch (const dta::NumericError& e) {
    return fail(DTADAG_NUMERIC_ERROR, e.what());
  } catch (const dta::LimitError& e) {
    return fail(DTADAG_LIMIT_EXCEEDED, e.what());
  } catch (const dta::ValidationError& e) {
    return fail(DTADAG_VALIDATION_ERROR, e.what());
  } catch (const dta::Error& e) {
    return fail(DTADAG_INTERNAL_ERROR, e.what());
  } catch (const json::exception& e) {
    return fail(DTADAG_PARSE_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DTADAG_NO_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return fail(DTADAG_INTERNAL_ERROR, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

dtadag_status require_arg(bool ok, const char* what) {
  return ok ? DTADAG_OK : fail(DTADAG_VALIDATION_ERROR, what);
}

std::set<std::string> name_set(const char* json_text, const char* what) {
  if (json_text == nullptr || *json_text == '\0') return {};
  const json j = json::parse(json_text);
  if (!j.is_array()) throw dta::ValidationError(std::string(what) + " must be a JSON array");
  std::set<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string())
      throw dta::ValidationError(std::string(what) + " entries must be strings");
    out.insert(v.get<std::string>());
  }
  return out;
}

dta::AnalysisSpec spec_from_json_text(const char* spec_json) {
  const json j = json::parse(spec_json);
  if (!j.is_object()) throw dta::ValidationError("analysis spec must be a JSON object");
  dta::AnalysisSpec spec;
  if (!j.contains("index") || !j["index"].is_string())
    throw dta::ValidationError("analysis spec needs a string field 'index'");
  if (!j.contains("truth_proxy") || !j["truth_proxy"].is_string())
    throw dta::ValidationError("analysis spec needs a string field 'truth_proxy'");
  spec.index = j["index"].get<std::string>();
  spec.truth_proxy = j["truth_proxy"].get<std::string>();
  if (j.contains("conditioned")) {
    if (!j["conditioned"].is_object())
      throw dta::ValidationError("analysis spec field 'conditioned' must be an object");
    for (auto it = j["conditioned"].begin(); it != j["conditioned"].end(); ++it) {
      if (!it.value().is_number_integer())
        throw dta::ValidationError("conditioned value for '" + it.key() + "' must be 0 or 1");
      spec.conditioned[it.key()] = it.value().get<int>();
    }
  }
  if (j.contains("strata")) {
    if (!j["strata"].is_array())
      throw dta::ValidationError("analysis spec field 'strata' must be an array");
    for (const auto& v : j["strata"]) {
      if (!v.is_string()) throw dta::ValidationError("strata entries must be strings");
      spec.strata.insert(v.get<std::string>());
    }
  }
  return spec;
}

}  // namespace

extern "C" {

const char* dtadag_version(void) { return "0.1.0"; }

const char* dtadag_last_error(void) { return g_last_error.c_str(); }

void dtadag_string_free(char* s) { delete[] s; }

dtadag_status dtadag_dag_parse(const char* text, dtadag_dag** out) {
  if (auto s = require_arg(text && out, "dtadag_dag_parse: null argument")) return s;
  return guarded([&] { *out = new dtadag_dag{dta::parse_dag(text)}; });
}

void dtadag_dag_free(dtadag_dag* dag) { delete dag; }

dtadag_status dtadag_dag_serialize(const dtadag_dag* dag, char** out_text) {
  if (auto s = require_arg(dag && out_text, "dtadag_dag_serialize: null argument")) return s;
  return guarded([&] { *out_text = copy_string(dag->value.serialize()); });
}

dtadag_status dtadag_dag_nodes(const dtadag_dag* dag, char** out_json) {
  if (auto s = require_arg(dag && out_json, "dtadag_dag_nodes: null argument")) return s;
  return guarded([&] {
    json nodes = json::array();
    for (const auto& n : dag->value.nodes())
      nodes.push_back({{"name", n.name},
                       {"role", dta::to_string(n.role)},
                       {"observed", n.observed}});
    *out_json = copy_string(dta::canonical_json(nodes));
  });
}

dtadag_status dtadag_dag_validate_roles(const dtadag_dag* dag, char** out_json) {
  if (auto s = require_arg(dag && out_json, "dtadag_dag_validate_roles: null argument")) return s;
  return guarded([&] {
    const auto errors = dta::validate_roles(dag->value);
    const json j{{"ok", errors.empty()}, {"errors", errors}};
    *out_json = copy_string(dta::canonical_json(j));
  });
}

dtadag_status dtadag_dag_d_separated(const dtadag_dag* dag, const char* x_json,
                                     const char* y_json, const char* z_json, int* out) {
  if (auto s = require_arg(dag && x_json && y_json && out,
                           "dtadag_dag_d_separated: null argument"))
    return s;
  return guarded([&] {
    *out = dta::d_separated(dag->value, name_set(x_json, "x"), name_set(y_json, "y"),
                            name_set(z_json, "z"))
               ? 1
               : 0;
  });
}

dtadag_status dtadag_dag_paths(const dtadag_dag* dag, const char* from, const char* to,
                               const char* given_json, char** out_json) {
  if (auto s = require_arg(dag && from && to && out_json, "dtadag_dag_paths: null argument"))
    return s;
  return guarded([&] {
    const auto given = name_set(given_json, "given");
    auto paths = dta::all_paths(dag->value, from, to);
    json rendered = json::array();
    for (auto& p : paths) {
      dta::classify_path(dag->value, p, given);
      rendered.push_back(dta::to_json(p));
    }
    const bool separated =
        dta::d_separated(dag->value, {std::string(from)}, {std::string(to)}, given);
    const json j{{"paths", std::move(rendered)}, {"d_separated", separated}};
    *out_json = copy_string(dta::canonical_json(j));
  });
}

dtadag_status dtadag_dag_adjustment_sets(const dtadag_dag* dag, const char* x, const char* y,
                                         char** out_json) {
  if (auto s = require_arg(dag && x && y && out_json,
                           "dtadag_dag_adjustment_sets: null argument"))
    return s;
  return guarded([&] {
    const auto result = dta::minimal_adjustment_sets(dag->value, x, y);
    const json j{{"feasible", result.feasible}, {"sets", result.sets}};
    *out_json = copy_string(dta::canonical_json(j));
  });
}

dtadag_status dtadag_detect_biases(const dtadag_dag* dag, const char* spec_json,
                                   char** out_json) {
  if (auto s = require_arg(dag && spec_json && out_json,
                           "dtadag_detect_biases: null argument"))
    return s;
  return guarded([&] {
    const auto spec = spec_from_json_text(spec_json);
    const auto findings = dta::detect_biases(dag->value, spec);
    *out_json = copy_string(dta::canonical_json(dta::to_json(findings)));
  });
}

dtadag_status dtadag_scenario_names(char** out_json) {
  if (auto s = require_arg(out_json != nullptr, "dtadag_scenario_names: null argument"))
    return s;
  return guarded([&] {
    json names = json::array();
    for (const auto& s : dta::builtin_scenarios()) names.push_back(s.name);
    *out_json = copy_string(dta::canonical_json(names));
  });
}

dtadag_status dtadag_scenario_builtin(const char* name, dtadag_scenario** out) {
  if (auto s = require_arg(name && out, "dtadag_scenario_builtin: null argument")) return s;
  return guarded([&] { *out = new dtadag_scenario{dta::builtin_scenario(name)}; });
}

dtadag_status dtadag_scenario_load(const char* json_text, dtadag_scenario** out,
                                   char** out_warnings_json) {
  if (auto s = require_arg(json_text && out, "dtadag_scenario_load: null argument")) return s;
  return guarded([&] {
    std::vector<std::string> warnings;
    auto scenario = dta::load_scenario(json_text, &warnings);
    *out = new dtadag_scenario{std::move(scenario)};
    if (out_warnings_json)
      *out_warnings_json = copy_string(dta::canonical_json(json(warnings)));
  });
}

void dtadag_scenario_free(dtadag_scenario* scenario) { delete scenario; }

dtadag_status dtadag_scenario_serialize(const dtadag_scenario* scenario, char** out_json) {
  if (auto s = require_arg(scenario && out_json, "dtadag_scenario_serialize: null argument"))
    return s;
  return guarded([&] { *out_json = copy_string(dta::serialize_scenario(scenario->value)); });
}

dtadag_status dtadag_scenario_report(const dtadag_scenario* scenario, int simulate, uint64_t n,
                                     uint64_t seed, char** out_json) {
  if (auto s = require_arg(scenario && out_json, "dtadag_scenario_report: null argument"))
    return s;
  return guarded([&] {
    const auto report = simulate ? dta::run_scenario_simulated(scenario->value, n, seed)
                                 : dta::run_scenario(scenario->value);
    *out_json = copy_string(dta::canonical_json(dta::to_json(report)));
  });
}

dtadag_status dtadag_scenario_dataset_csv(const dtadag_scenario* scenario, uint64_t n,
                                          uint64_t seed, int include_latent, char** out_csv) {
  if (auto s = require_arg(scenario && out_csv, "dtadag_scenario_dataset_csv: null argument"))
    return s;
  return guarded([&] {
    const auto frame = dta::scenario_dataset(scenario->value, n, seed, include_latent != 0);
    *out_csv = copy_string(dta::write_csv(frame));
  });
}

dtadag_status dtadag_analyze_csv(const char* csv_text, const char* options_json,
                                 char** out_json) {
  if (auto s = require_arg(csv_text && options_json && out_json,
                           "dtadag_analyze_csv: null argument"))
    return s;
  return guarded([&] {
    const json opts = json::parse(options_json);
    if (!opts.is_object()) throw dta::ValidationError("analyze options must be a JSON object");
    dta::AnalyzeOptions options;
    if (opts.contains("index")) options.index = opts["index"].get<std::string>();
    if (opts.contains("reference")) options.reference = opts["reference"].get<std::string>();
    if (opts.contains("correction")) options.correction = opts["correction"].get<std::string>();
    if (opts.contains("ref_se")) options.ref_se = opts["ref_se"].get<double>();
    if (opts.contains("ref_sp")) options.ref_sp = opts["ref_sp"].get<double>();
    if (opts.contains("tests"))
      for (const auto& t : opts["tests"]) options.tests.push_back(t.get<std::string>());
    if (opts.contains("lca")) {
      const json& l = opts["lca"];
      if (l.contains("max_iter")) options.lca.max_iter = l["max_iter"].get<int>();
      if (l.contains("tol")) options.lca.tol = l["tol"].get<double>();
      if (l.contains("restarts")) options.lca.restarts = l["restarts"].get<int>();
      if (l.contains("seed")) options.lca.seed = l["seed"].get<uint64_t>();
    }
    const auto result = dta::analyze_csv(csv_text, options);
    json estimates = json::array();
    for (const auto& e : result.estimates) estimates.push_back(dta::to_json(e));
    json j{{"estimates", std::move(estimates)}};
    if (result.lca) j["lca"] = dta::to_json(*result.lca);
    *out_json = copy_string(dta::canonical_json(j));
  });
}

}  // extern "C"
