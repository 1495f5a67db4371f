#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dtadag/data.hpp"
#include "dtadag/estimators.hpp"

namespace dta {

/// What the analyze driver should compute from a dataset.
struct AnalyzeOptions {
  std::string index;
  std::string reference;
  /// "none", "begg-greenes", "known-reference" or "lca".
  std::string correction = "none";
  std::optional<double> ref_se, ref_sp;  // known-reference
  std::vector<std::string> tests;        // lca pattern columns
  LcaOptions lca;
};

struct AnalyzeResult {
  /// Naive estimate first, the corrected one after it when requested.
  std::vector<AccuracyEstimate> estimates;
  std::optional<LcaResult> lca;
};

/// Estimates accuracy from recorded data. A blank reference cell marks an
/// unverified subject and is accepted only under the begg-greenes
/// correction; every other mode requires complete columns.
AnalyzeResult analyze_frame(const Frame& data, const AnalyzeOptions& options);

/// CSV entry point. Accepts either a per-subject dataset (header row, 0/1
/// cells, blank = unverified reference) or, for the lca correction, an
/// aggregated pattern-count table: K test columns of 0/1 plus a `count`
/// column. When options.tests is empty the pattern columns default to every
/// column except `count`.
AnalyzeResult analyze_csv(const std::string& csv_text, const AnalyzeOptions& options);

}  // namespace dta
