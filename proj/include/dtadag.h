/* dtadag - structural bias analysis for diagnostic test accuracy studies.
 *
 * C interface of the shared library. All structured results are returned as
 * canonical JSON (sorted keys, two-space indent, UTF-8, LF) in strings the
 * caller releases with dtadag_string_free(). Handles are opaque and freed
 * with their dedicated *_free function. Every function returns a status
 * code; on any status other than DTADAG_OK the thread-local message from
 * dtadag_last_error() describes the failure and output parameters are left
 * untouched.
 *
 * Node sets are passed as JSON arrays of node names, e.g. "[\"R\",\"S\"]".
 */

#ifndef DTADAG_H
#define DTADAG_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dtadag_status {
  DTADAG_OK = 0,
  DTADAG_PARSE_ERROR = 1,      /* malformed DAG text or JSON */
  DTADAG_VALIDATION_ERROR = 2, /* structural or argument validation failure */
  DTADAG_UNKNOWN_NODE = 3,
  DTADAG_NUMERIC_ERROR = 4, /* degenerate margins, inconsistent model */
  DTADAG_LIMIT_EXCEEDED = 5, /* documented size caps */
  DTADAG_NO_MEMORY = 6,
  DTADAG_INTERNAL_ERROR = 7
} dtadag_status;

typedef struct dtadag_dag dtadag_dag;
typedef struct dtadag_scenario dtadag_scenario;

/* Library version string, e.g. "0.1.0". Static storage; do not free. */
const char* dtadag_version(void);

/* Message for the most recent failure on this thread. Static storage
 * overwritten by the next failing call; do not free. */
const char* dtadag_last_error(void);

/* Releases a string returned through a char** output parameter. */
void dtadag_string_free(char* s);

/* ---- causal graphs -------------------------------------------------- */

/* Parses DAG text syntax:
 *   dag { D [role=target, latent] T2 [role=index] D -> T2 }
 * Roles: target, reference, index, covariate, selection, other.
 * Attributes: latent / observed (default observed). '#' comments. */
dtadag_status dtadag_dag_parse(const char* text, dtadag_dag** out);
void dtadag_dag_free(dtadag_dag* dag);

/* Canonical DAG-syntax rendering; parsing it reproduces the value. */
dtadag_status dtadag_dag_serialize(const dtadag_dag* dag, char** out_text);

/* JSON array [{"name", "role", "observed"}] in declaration order. */
dtadag_status dtadag_dag_nodes(const dtadag_dag* dag, char** out_json);

/* {"ok": bool, "errors": [string]} for the DTA role constraints. */
dtadag_status dtadag_dag_validate_roles(const dtadag_dag* dag, char** out_json);

/* 1 when every path between the node sets is blocked given z, else 0. */
dtadag_status dtadag_dag_d_separated(const dtadag_dag* dag, const char* x_json,
                                     const char* y_json, const char* z_json, int* out);

/* {"paths": [{path, open, backdoor, blockers}], "d_separated": bool}
 * for every simple path between two nodes given a conditioning set. */
dtadag_status dtadag_dag_paths(const dtadag_dag* dag, const char* from, const char* to,
                               const char* given_json, char** out_json);

/* {"feasible": bool, "sets": [[node]]}: inclusion-minimal backdoor
 * adjustment sets over observed non-descendants of x. */
dtadag_status dtadag_dag_adjustment_sets(const dtadag_dag* dag, const char* x, const char* y,
                                         char** out_json);

/* Structural bias findings for a naive analysis described as
 *   {"index": ..., "truth_proxy": ..., "conditioned": {node: 0|1},
 *    "strata": [node]}.
 * Returns a JSON array of findings: {kind, nodes, paths, explanation,
 * etiological_analog, paper_anchor, severity}. */
dtadag_status dtadag_detect_biases(const dtadag_dag* dag, const char* spec_json,
                                   char** out_json);

/* ---- scenarios ------------------------------------------------------ */

/* JSON array of the builtin scenario names. */
dtadag_status dtadag_scenario_names(char** out_json);

dtadag_status dtadag_scenario_builtin(const char* name, dtadag_scenario** out);

/* Loads a scenario JSON document. out_warnings_json (optional) receives a
 * JSON array of warning strings, e.g. an expected-findings mismatch. */
dtadag_status dtadag_scenario_load(const char* json_text, dtadag_scenario** out,
                                   char** out_warnings_json);
void dtadag_scenario_free(dtadag_scenario* scenario);

dtadag_status dtadag_scenario_serialize(const dtadag_scenario* scenario, char** out_json);

/* Full bias audit. simulate = 0 runs on the exact joint (n, seed ignored);
 * simulate = 1 draws n rows with the given seed and reports from counts. */
dtadag_status dtadag_scenario_report(const dtadag_scenario* scenario, int simulate, uint64_t n,
                                     uint64_t seed, char** out_json);

/* CSV dataset the design would record: header row, 0/1 cells, blank =
 * unverified reference, LF endings. Latent columns only with
 * include_latent = 1. Byte-identical for identical (scenario, n, seed). */
dtadag_status dtadag_scenario_dataset_csv(const dtadag_scenario* scenario, uint64_t n,
                                          uint64_t seed, int include_latent, char** out_csv);

/* ---- dataset analysis ----------------------------------------------- */

/* Estimates accuracy from a CSV dataset (header row, 0/1 cells, blank =
 * unverified reference). options_json:
 *   {"index": ..., "reference": ...,
 *    "correction": "none"|"begg-greenes"|"known-reference"|"lca",
 *    "ref_se": num, "ref_sp": num,        (known-reference)
 *    "tests": [column, ...],              (lca, at least 3)
 *    "lca": {"max_iter", "tol", "restarts", "seed"}}  (optional)
 * Returns {"estimates": [...], "lca": {...}?}. */
dtadag_status dtadag_analyze_csv(const char* csv_text, const char* options_json,
                                 char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* DTADAG_H */
