// dtadag command line front end. Talks to the shared library exclusively
// through the C interface in dtadag.h; table and CSV renderings are produced
// from the library's canonical JSON.

#include <clocale>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dtadag.h"

using nlohmann::json;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitFindings = 1;
constexpr int kExitError = 2;

struct FatalError {
  std::string message;
};

[[noreturn]] void die(const std::string& message) { throw FatalError{message}; }

[[noreturn]] void die_api(dtadag_status status) {
  (void)status;
  die(dtadag_last_error());
}

// RAII for strings returned by the C interface.
struct ApiString {
  char* ptr = nullptr;
  ~ApiString() { dtadag_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

struct DagHandle {
  dtadag_dag* ptr = nullptr;
  ~DagHandle() { dtadag_dag_free(ptr); }
};

struct ScenarioHandle {
  dtadag_scenario* ptr = nullptr;
  ~ScenarioHandle() { dtadag_scenario_free(ptr); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) die("cannot write '" + out_path + "'");
  out << text;
  if (!out) die("failed writing '" + out_path + "'");
}

std::string fmt5(double v) {
  if (v > -5e-6 && v < 0.0) v = 0.0;  // avoid "-0.00000"
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5f", v);
  return buf;
}

std::string num_cell(const json& v) { return v.is_null() ? "-" : fmt5(v.get<double>()); }

std::string ci_cell(const json& estimate, const char* metric) {
  const json& ci = estimate["ci"];
  if (ci.is_null() || !ci.contains(metric)) return "-";
  return "[" + fmt5(ci[metric][0].get<double>()) + ", " + fmt5(ci[metric][1].get<double>()) + "]";
}

std::string n_cell(const json& estimate) {
  const json& n = estimate["n_effective"];
  return n.is_string() ? n.get<std::string>() : std::to_string(n.get<uint64_t>());
}

// Renders rows as aligned columns, two spaces between them.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream os;
  for (const auto& row : rows) {
    std::string line;
    for (size_t i = 0; i < row.size(); ++i) {
      line += row[i];
      if (i + 1 < row.size()) line += std::string(width[i] - row[i].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << "\n";
  }
  return os.str();
}

std::string join_strings(const json& array, const std::string& sep) {
  std::string out;
  for (const auto& v : array) out += (out.empty() ? "" : sep) + v.get<std::string>();
  return out;
}

std::string findings_text(const json& findings) {
  std::ostringstream os;
  if (findings.empty()) {
    os << "no structural bias detected\n";
    return os.str();
  }
  os << "findings: " << findings.size() << "\n";
  int i = 0;
  for (const auto& f : findings) {
    os << "[" << ++i << "] " << f["kind"].get<std::string>() << " ("
       << f["severity"].get<std::string>() << ")\n";
    os << "    nodes: " << join_strings(f["nodes"], ", ") << "\n";
    for (const auto& p : f["paths"]) os << "    path: " << p.get<std::string>() << "\n";
    os << "    etiological analog: " << f["etiological_analog"].get<std::string>() << "\n";
    os << "    anchor: " << f["paper_anchor"].get<std::string>() << "\n";
    os << "    explanation: " << f["explanation"].get<std::string>() << "\n";
    if (f.contains("adjustment_sets") && !f["adjustment_sets"].is_null()) {
      const json& adj = f["adjustment_sets"];
      if (!adj["feasible"].get<bool>()) {
        os << "    minimal adjustment sets: none; no observed set suffices\n";
      } else {
        std::string sets;
        for (const auto& s : adj["sets"])
          sets += (sets.empty() ? "" : ", ") + ("{" + join_strings(s, ", ") + "}");
        os << "    minimal adjustment sets: " << sets << "\n";
      }
    }
  }
  return os.str();
}

std::string findings_csv(const json& findings) {
  std::ostringstream os;
  os << "kind,severity,nodes,paths,etiological_analog\n";
  for (const auto& f : findings)
    os << f["kind"].get<std::string>() << "," << "\"" << f["severity"].get<std::string>() << "\","
       << "\"" << join_strings(f["nodes"], " ") << "\"," << "\""
       << join_strings(f["paths"], "; ") << "\"," << "\""
       << f["etiological_analog"].get<std::string>() << "\"\n";
  return os.str();
}

std::vector<std::vector<std::string>> estimate_rows(const json& estimates, bool with_ci) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"provenance", "se", "sp", "ppv", "npv", "prevalence", "n"};
  if (with_ci) {
    header.push_back("se 95% ci");
    header.push_back("sp 95% ci");
  }
  rows.push_back(header);
  for (const auto& e : estimates) {
    std::vector<std::string> row{e["provenance"].get<std::string>(), num_cell(e["se"]),
                                 num_cell(e["sp"]),                  num_cell(e["ppv"]),
                                 num_cell(e["npv"]),                 num_cell(e["prevalence"]),
                                 n_cell(e)};
    if (with_ci) {
      row.push_back(ci_cell(e, "se"));
      row.push_back(ci_cell(e, "sp"));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

bool estimates_have_ci(const json& estimates) {
  for (const auto& e : estimates)
    if (!e["ci"].is_null()) return true;
  return false;
}

std::string estimates_csv(const json& estimates, const std::string& scenario = "") {
  std::ostringstream os;
  if (!scenario.empty()) os << "scenario,";
  os << "provenance,se,sp,ppv,npv,prevalence,n_effective,se_lo,se_hi,sp_lo,sp_hi\n";
  auto cell = [](const json& v) { return v.is_null() ? std::string() : fmt5(v.get<double>()); };
  for (const auto& e : estimates) {
    if (!scenario.empty()) os << scenario << ",";
    os << e["provenance"].get<std::string>() << "," << cell(e["se"]) << "," << cell(e["sp"])
       << "," << cell(e["ppv"]) << "," << cell(e["npv"]) << "," << cell(e["prevalence"]) << ","
       << n_cell(e);
    const json& ci = e["ci"];
    for (const char* metric : {"se", "sp"}) {
      if (!ci.is_null() && ci.contains(metric))
        os << "," << fmt5(ci[metric][0].get<double>()) << ","
           << fmt5(ci[metric][1].get<double>());
      else
        os << ",,";
    }
    os << "\n";
  }
  return os.str();
}

std::string bias_table_text(const json& bias_table) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"versus", "d(se)", "d(sp)", "d(ppv)", "d(npv)", "d(prevalence)"});
  auto cell = [](const json& mb) {
    if (mb["delta"].is_null()) return std::string("-");
    return fmt5(mb["delta"].get<double>()) + " " + mb["label"].get<std::string>();
  };
  for (const auto& b : bias_table)
    rows.push_back({b["versus"].get<std::string>(), cell(b["se"]), cell(b["sp"]),
                    cell(b["ppv"]), cell(b["npv"]), cell(b["prevalence"])});
  return render_table(rows);
}

std::string report_text(const json& report) {
  std::ostringstream os;
  os << "=== " << report["scenario"].get<std::string>() << " ===\n";
  os << report["description"].get<std::string>() << "\n";
  os << "mode: " << report["mode"].get<std::string>();
  if (report.contains("n"))
    os << " (n=" << report["n"].get<uint64_t>() << ", seed=" << report["seed"].get<uint64_t>()
       << ")";
  os << "\n\n";
  os << findings_text(report["findings"]);
  std::vector<std::string> anchors;
  for (const auto& f : report["findings"]) {
    const auto a = f["paper_anchor"].get<std::string>();
    if (std::find(anchors.begin(), anchors.end(), a) == anchors.end()) anchors.push_back(a);
  }
  for (const auto& a : anchors) os << "source: " << a << "\n";
  os << "\nestimates:\n"
     << render_table(estimate_rows(report["estimates"], estimates_have_ci(report["estimates"])));
  if (!report["bias_table"].empty()) os << "\nbias vs true:\n" << bias_table_text(report["bias_table"]);
  if (!report["diagnostics"].empty()) {
    os << "\ndiagnostics:\n";
    for (const auto& [key, value] : report["diagnostics"].items())
      os << "  " << key << ": " << fmt5(value.get<double>()) << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

struct GlobalOptions {
  std::string format = "table";
  std::string out;
  uint64_t seed = 1;
};

ScenarioHandle resolve_scenario(const std::string& name_or_path) {
  ScenarioHandle scenario;
  if (std::filesystem::exists(name_or_path)) {
    const std::string text = slurp(name_or_path);
    ApiString warnings;
    if (auto s = dtadag_scenario_load(text.c_str(), &scenario.ptr, &warnings.ptr)) die_api(s);
    for (const auto& w : json::parse(warnings.str()))
      std::cerr << "warning: " << w.get<std::string>() << "\n";
    return scenario;
  }
  if (auto s = dtadag_scenario_builtin(name_or_path.c_str(), &scenario.ptr)) die_api(s);
  return scenario;
}

int cmd_check(const std::string& dag_path, std::string index, std::string truth_proxy,
              const std::vector<std::string>& conditions, const std::vector<std::string>& strata,
              const GlobalOptions& global) {
  const std::string text = slurp(dag_path);
  DagHandle dag;
  if (auto s = dtadag_dag_parse(text.c_str(), &dag.ptr)) die_api(s);

  ApiString roles_json;
  if (auto s = dtadag_dag_validate_roles(dag.ptr, &roles_json.ptr)) die_api(s);
  const json roles = json::parse(roles_json.str());
  if (!roles["ok"].get<bool>()) {
    std::string msg = "role constraints violated:";
    for (const auto& e : roles["errors"]) msg += " " + e.get<std::string>() + ";";
    die(msg);
  }

  ApiString nodes_json;
  if (auto s = dtadag_dag_nodes(dag.ptr, &nodes_json.ptr)) die_api(s);
  const json nodes = json::parse(nodes_json.str());
  std::string target, reference;
  bool target_observed = false;
  for (const auto& n : nodes) {
    const auto role = n["role"].get<std::string>();
    if (role == "target") {
      target = n["name"].get<std::string>();
      target_observed = n["observed"].get<bool>();
    }
    if (role == "index" && index.empty()) index = n["name"].get<std::string>();
    if (role == "reference") reference = reference.empty() ? n["name"].get<std::string>() : reference;
  }
  if (index.empty()) die("cannot infer --index: the graph has no index-role node");
  if (truth_proxy.empty()) {
    if (!reference.empty())
      truth_proxy = reference;
    else if (target_observed)
      truth_proxy = target;
    else
      die("cannot infer --truth-proxy: no reference test and the target is latent");
  }

  json conditioned = json::object();
  for (const auto& c : conditions) {
    const auto eq = c.find('=');
    if (eq == std::string::npos || (c.substr(eq + 1) != "0" && c.substr(eq + 1) != "1"))
      die("--condition expects NODE=0 or NODE=1, got '" + c + "'");
    conditioned[c.substr(0, eq)] = c.substr(eq + 1) == "1" ? 1 : 0;
  }
  const json spec{{"index", index},
                  {"truth_proxy", truth_proxy},
                  {"conditioned", conditioned},
                  {"strata", strata}};

  ApiString findings_json;
  if (auto s = dtadag_detect_biases(dag.ptr, spec.dump().c_str(), &findings_json.ptr))
    die_api(s);
  json findings = json::parse(findings_json.str());

  // Attach adjustment sets to any confounding finding.
  for (auto& f : findings) {
    if (f["kind"].get<std::string>() != "confounding") continue;
    ApiString adj;
    if (auto s = dtadag_dag_adjustment_sets(dag.ptr, target.c_str(), index.c_str(), &adj.ptr))
      die_api(s);
    f["adjustment_sets"] = json::parse(adj.str());
  }

  std::string rendered;
  if (global.format == "json") {
    json out{{"roles", roles}, {"spec", spec}, {"findings", findings}};
    rendered = out.dump(2) + "\n";
  } else if (global.format == "csv") {
    rendered = findings_csv(findings);
  } else {
    rendered = "roles: ok\n" + findings_text(findings);
  }
  emit(rendered, global.out);
  return findings.empty() ? kExitClean : kExitFindings;
}

int cmd_paths(const std::string& dag_path, const std::string& from, const std::string& to,
              const std::vector<std::string>& given, const GlobalOptions& global) {
  const std::string text = slurp(dag_path);
  DagHandle dag;
  if (auto s = dtadag_dag_parse(text.c_str(), &dag.ptr)) die_api(s);
  const json given_json = given;
  ApiString out_json;
  if (auto s = dtadag_dag_paths(dag.ptr, from.c_str(), to.c_str(), given_json.dump().c_str(),
                                &out_json.ptr))
    die_api(s);
  const json result = json::parse(out_json.str());

  std::string rendered;
  if (global.format == "json") {
    rendered = out_json.str();
  } else if (global.format == "csv") {
    std::ostringstream os;
    os << "path,open,backdoor,blockers\n";
    for (const auto& p : result["paths"]) {
      std::string blockers;
      for (const auto& b : p["blockers"])
        blockers += (blockers.empty() ? "" : "; ") + b["node"].get<std::string>() + ": " +
                    b["reason"].get<std::string>();
      os << "\"" << p["path"].get<std::string>() << "\"," << (p["open"].get<bool>() ? 1 : 0)
         << "," << (p["backdoor"].get<bool>() ? 1 : 0) << ",\"" << blockers << "\"\n";
    }
    rendered = os.str();
  } else {
    std::ostringstream os;
    os << "paths between " << from << " and " << to << " given {" << join_strings(given_json, ", ")
       << "}:\n";
    if (result["paths"].empty()) os << "  no paths\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : result["paths"]) {
      std::string status = p["open"].get<bool>() ? "open" : "blocked";
      if (p["backdoor"].get<bool>()) status += " (backdoor)";
      std::string blockers;
      for (const auto& b : p["blockers"])
        blockers += (blockers.empty() ? "" : "; ") + b["node"].get<std::string>() + ": " +
                    b["reason"].get<std::string>();
      if (!blockers.empty()) blockers = "[" + blockers + "]";
      rows.push_back({"  " + p["path"].get<std::string>(), status, blockers});
    }
    os << render_table(rows);
    os << "d-separated: " << (result["d_separated"].get<bool>() ? "yes" : "no") << "\n";
    rendered = os.str();
  }
  emit(rendered, global.out);
  return kExitClean;
}

int cmd_simulate(const std::string& scenario_arg, uint64_t n, bool include_latent,
                 const GlobalOptions& global) {
  if (n < 1) die("--n must be at least 1");
  ScenarioHandle scenario = resolve_scenario(scenario_arg);
  ApiString csv;
  if (auto s = dtadag_scenario_dataset_csv(scenario.ptr, n, global.seed, include_latent ? 1 : 0,
                                           &csv.ptr))
    die_api(s);
  emit(csv.str(), global.out);
  return kExitClean;
}

int cmd_analyze(const std::string& data_path, const std::string& index,
                const std::string& reference, const std::string& correction, double ref_se,
                double ref_sp, bool have_ref_se, bool have_ref_sp,
                const std::vector<std::string>& tests, int lca_restarts, int lca_max_iter,
                double lca_tol, const GlobalOptions& global) {
  const std::string csv = slurp(data_path);
  json options{{"index", index}, {"correction", correction}};
  if (!reference.empty()) options["reference"] = reference;
  if (have_ref_se) options["ref_se"] = ref_se;
  if (have_ref_sp) options["ref_sp"] = ref_sp;
  if (!tests.empty()) options["tests"] = tests;
  options["lca"] = json{{"restarts", lca_restarts},
                        {"max_iter", lca_max_iter},
                        {"tol", lca_tol},
                        {"seed", global.seed}};

  ApiString out_json;
  if (auto s = dtadag_analyze_csv(csv.c_str(), options.dump().c_str(), &out_json.ptr))
    die_api(s);
  const json result = json::parse(out_json.str());

  std::string rendered;
  if (global.format == "json") {
    rendered = out_json.str();
  } else if (global.format == "csv") {
    std::ostringstream os;
    os << estimates_csv(result["estimates"]);
    if (result.contains("lca")) {
      const json& l = result["lca"];
      for (size_t i = 0; i < l["se"].size(); ++i) {
        const std::string name =
            tests.size() == l["se"].size() ? tests[i] : "t" + std::to_string(i + 1);
        os << "corrected(lca):" << name << "," << fmt5(l["se"][i].get<double>()) << ","
           << fmt5(l["sp"][i].get<double>()) << ",,," << fmt5(l["prevalence"].get<double>())
           << ",,,,,\n";
      }
    }
    rendered = os.str();
  } else {
    std::ostringstream os;
    if (!result["estimates"].empty())
      os << render_table(
          estimate_rows(result["estimates"], estimates_have_ci(result["estimates"])));
    if (result.contains("lca")) {
      const json& l = result["lca"];
      os << "\nlatent class fit (" << l["se"].size() << " tests):\n";
      std::vector<std::vector<std::string>> rows;
      rows.push_back({"test", "se", "sp"});
      for (size_t i = 0; i < l["se"].size(); ++i)
        rows.push_back({tests.size() == l["se"].size() ? tests[i] : "t" + std::to_string(i + 1),
                        fmt5(l["se"][i].get<double>()), fmt5(l["sp"][i].get<double>())});
      os << render_table(rows);
      os << "prevalence: " << fmt5(l["prevalence"].get<double>()) << "\n";
      os << "log-likelihood: " << l["log_likelihood"].get<double>() << " after "
         << l["iterations"].get<int>() << " iterations, converged: "
         << (l["converged"].get<bool>() ? "yes" : "no") << ", agreeing restarts: "
         << l["n_restarts_agreeing"].get<int>() << "\n";
    }
    rendered = os.str();
  }
  emit(rendered, global.out);
  return kExitClean;
}

int cmd_demo(const std::string& scenario_name, bool all, const GlobalOptions& global) {
  if (scenario_name.empty() && !all) die("demo needs --scenario NAME or --all");
  std::vector<std::string> names;
  if (all) {
    ApiString names_json;
    if (auto s = dtadag_scenario_names(&names_json.ptr)) die_api(s);
    for (const auto& n : json::parse(names_json.str())) names.push_back(n.get<std::string>());
  } else {
    names.push_back(scenario_name);
  }

  json reports = json::array();
  for (const auto& name : names) {
    ScenarioHandle scenario = resolve_scenario(name);
    ApiString report_json;
    if (auto s = dtadag_scenario_report(scenario.ptr, 0, 0, 0, &report_json.ptr)) die_api(s);
    reports.push_back(json::parse(report_json.str()));
  }

  std::string rendered;
  if (global.format == "json") {
    rendered = (all ? json(reports) : reports[0]).dump(2) + "\n";
  } else if (global.format == "csv") {
    std::ostringstream os;
    bool first = true;
    for (const auto& r : reports) {
      std::string block = estimates_csv(r["estimates"], r["scenario"].get<std::string>());
      if (!first) block = block.substr(block.find('\n') + 1);
      os << block;
      first = false;
    }
    rendered = os.str();
  } else {
    std::ostringstream os;
    for (const auto& r : reports) os << report_text(r) << "\n";
    rendered = os.str();
  }
  emit(rendered, global.out);
  return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{
      "dtadag - structural bias analysis for diagnostic test accuracy study designs.\n"
      "Represents designs as role-labeled causal DAGs, detects the five canonical bias\n"
      "patterns, and quantifies them exactly or by seeded simulation."};
  app.require_subcommand(1);
  app.footer(
      "INPUT FORMATS\n"
      "  DAG file        dag { D [role=target, latent] T2 [role=index] D -> T2 }\n"
      "                  Roles: target, reference, index, covariate, selection, other.\n"
      "                  Attributes: latent / observed (default). '#' starts a comment.\n"
      "  Scenario JSON   {name, description, dag, cpts, spec, expected_findings,\n"
      "                  corrections, known_reference}; see the builtin scenarios\n"
      "                  (demo --all --format json) and the README for the schema.\n"
      "  Dataset CSV     Header row of column names, cells 0/1, an empty field for an\n"
      "                  unverified (missing) reference result, LF line endings.\n"
      "  Pattern counts  For analyze --correction lca: K test columns of 0/1 plus a\n"
      "                  'count' column of nonnegative counts.\n"
      "\n"
      "BUILTIN SCENARIOS\n"
      "  ptb-imperfect-reference   imperfect reference treated as truth\n"
      "  ptb-bacterial-load        conditional dependence through a latent common cause\n"
      "  chlamydia-spectrum        accuracy genuinely varies across an age spectrum\n"
      "  tb-hiv-confounding        shared cause of disease and test result\n"
      "  hpv-partial-verification  verification driven by the index test result\n"
      "\n"
      "EXIT CODES\n"
      "  0  success (check: no structural findings)\n"
      "  1  check: findings present (spectrum-only output also counts)\n"
      "  2  input or validation error; nothing is written to the output stream");

  GlobalOptions global;
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"table", "json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", global.out, "Write output to a file instead of stdout");
  app.add_option("--seed", global.seed, "Random seed for simulation and EM restarts")
      ->capture_default_str();

  auto* check = app.add_subcommand("check", "Audit a DAG file for structural bias");
  check->fallthrough();
  std::string check_dag, check_index, check_truth;
  std::vector<std::string> check_conditions, check_strata;
  check->add_option("dagfile", check_dag, "DAG text file")->required();
  check->add_option("--index", check_index, "Index test node (default: the role=index node)");
  check->add_option("--truth-proxy", check_truth,
                    "Node the naive analysis treats as truth (default: the reference node, "
                    "else an observed target)");
  check->add_option("--condition", check_conditions,
                    "NODE=0|1 the analysis conditions on (repeatable)");
  check->add_option("--stratify", check_strata, "Node the analysis stratifies on (repeatable)");

  auto* paths = app.add_subcommand("paths", "List paths between two nodes with blocking status");
  paths->fallthrough();
  std::string paths_dag, paths_from, paths_to;
  std::vector<std::string> paths_given;
  paths->add_option("dagfile", paths_dag, "DAG text file")->required();
  paths->add_option("--from", paths_from, "Start node")->required();
  paths->add_option("--to", paths_to, "End node")->required();
  paths->add_option("--given", paths_given, "Conditioning node (repeatable)");

  auto* simulate = app.add_subcommand("simulate", "Draw a seeded dataset from a scenario");
  simulate->fallthrough();
  std::string sim_scenario;
  uint64_t sim_n = 0;
  bool sim_latent = false;
  simulate->add_option("scenario", sim_scenario, "Builtin scenario name or scenario JSON file")
      ->required();
  simulate->add_option("--n", sim_n, "Number of rows")->required();
  simulate->add_flag("--include-latent", sim_latent, "Keep latent columns in the output");

  auto* analyze = app.add_subcommand("analyze", "Estimate accuracy from a CSV dataset");
  analyze->fallthrough();
  std::string an_data, an_index, an_reference, an_correction = "none";
  double an_ref_se = 0, an_ref_sp = 0;
  std::vector<std::string> an_tests;
  int an_lca_restarts = 20, an_lca_max_iter = 500;
  double an_lca_tol = 1e-8;
  analyze->add_option("--data", an_data, "CSV dataset (header row, 0/1 cells, blank = "
                                         "unverified reference)")
      ->required();
  analyze->add_option("--index", an_index, "Index test column");
  analyze->add_option("--reference", an_reference, "Reference column");
  analyze->add_option("--correction", an_correction, "none|begg-greenes|known-reference|lca")
      ->check(CLI::IsMember({"none", "begg-greenes", "known-reference", "lca"}))
      ->capture_default_str();
  auto* opt_ref_se =
      analyze->add_option("--ref-se", an_ref_se, "Known reference sensitivity");
  auto* opt_ref_sp =
      analyze->add_option("--ref-sp", an_ref_sp, "Known reference specificity");
  analyze->add_option("--tests", an_tests,
                      "Test columns for the lca correction (comma separated or repeated)")
      ->delimiter(',');
  analyze->add_option("--lca-restarts", an_lca_restarts, "EM restarts")->capture_default_str();
  analyze->add_option("--lca-max-iter", an_lca_max_iter, "EM iteration cap")
      ->capture_default_str();
  analyze->add_option("--lca-tol", an_lca_tol, "EM convergence tolerance")
      ->capture_default_str();

  auto* demo = app.add_subcommand("demo", "Run the builtin bias demonstrations (exact mode)");
  demo->fallthrough();
  std::string demo_scenario;
  bool demo_all = false;
  demo->add_option("--scenario", demo_scenario, "Builtin scenario name or scenario JSON file");
  demo->add_flag("--all", demo_all, "Run all five builtin scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (app.got_subcommand(check))
      return cmd_check(check_dag, check_index, check_truth, check_conditions, check_strata,
                       global);
    if (app.got_subcommand(paths))
      return cmd_paths(paths_dag, paths_from, paths_to, paths_given, global);
    if (app.got_subcommand(simulate))
      return cmd_simulate(sim_scenario, sim_n, sim_latent, global);
    if (app.got_subcommand(analyze))
      return cmd_analyze(an_data, an_index, an_reference, an_correction, an_ref_se, an_ref_sp,
                         opt_ref_se->count() > 0, opt_ref_sp->count() > 0, an_tests,
                         an_lca_restarts, an_lca_max_iter, an_lca_tol, global);
    if (app.got_subcommand(demo)) return cmd_demo(demo_scenario, demo_all, global);
  } catch (const FatalError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
