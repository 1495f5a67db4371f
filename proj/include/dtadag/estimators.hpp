#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dtadag/data.hpp"
#include "dtadag/prob.hpp"

namespace dta {

enum class ProvenanceKind { True, Naive, Stratified, Corrected };

struct Provenance {
  ProvenanceKind kind = ProvenanceKind::Naive;
  /// Stratum ("HIV=1") or correction method ("begg-greenes").
  std::string detail;

  /// "true", "naive", "stratified(HIV=1)", "corrected(begg-greenes)".
  std::string to_string() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(double successes, double n, double z = 1.960);

/// Diagnostic accuracy summary. A metric left unset is undefined (zero
/// denominator on sampled data), never a placeholder number. n_effective
/// unset means the estimate came from an exact joint.
struct AccuracyEstimate {
  std::optional<double> se, sp, ppv, npv, prevalence;
  Provenance provenance;
  std::optional<uint64_t> n_effective;
  std::optional<Interval> se_ci, sp_ci;
};

/// 2x2 cross-classification, counts or probabilities:
///   a = (first+, second+), b = (first+, second-),
///   c = (first-, second+), d = (first-, second-).
struct CrossTab2x2 {
  double a = 0, b = 0, c = 0, d = 0;
};

/// Partially verified design: the verified subjects cross-classified as
/// index test vs reference, plus the unverified counts by index result.
struct VerificationData {
  CrossTab2x2 verified;  // a=(T+,D+), b=(T+,D-), c=(T-,D+), d=(T-,D-)
  double unverified_pos = 0;
  double unverified_neg = 0;
};

/// Se/Sp/PPV/NPV/prevalence of `index` against `truth` read off an exact
/// joint. Throws NumericError when the truth margin is degenerate.
AccuracyEstimate accuracy_vs(const JointTable& joint, const std::string& index,
                             const std::string& truth, bool truth_is_target = false);

/// Plug-in frequencies with Wilson intervals on se/sp. Rows with a missing
/// index or truth cell are excluded (a missing truth cell is an unverified
/// subject). Zero-denominator metrics come back undefined.
AccuracyEstimate accuracy_from_data(const Frame& data, const std::string& index,
                                    const std::string& truth);
AccuracyEstimate accuracy_from_data(const Dataset& data, const std::string& index,
                                    const std::string& truth);

enum class BiasLabel { Over, Under, None, Undefined };

std::string_view to_string(BiasLabel label);

struct MetricBias {
  std::optional<double> delta;
  BiasLabel label = BiasLabel::Undefined;
};

struct BiasReport {
  std::string versus;  // provenance of the compared estimate
  MetricBias se, sp, ppv, npv, prevalence;
};

/// Signed differences other - truth per metric, labeled over/under/none
/// with the given threshold.
BiasReport bias_report(const AccuracyEstimate& truth, const AccuracyEstimate& other,
                       double threshold = 1e-9);

/// accuracy_vs applied within each stratum value (keys 0 and 1).
/// Throws NumericError on an empty stratum or degenerate within-stratum
/// truth margin.
std::map<int, AccuracyEstimate> stratified_accuracy(const JointTable& joint,
                                                    const std::string& index,
                                                    const std::string& truth,
                                                    const std::string& stratum,
                                                    bool truth_is_target = false);

/// Covariate-standardized accuracy: Se and Sp averaged over the adjustment
/// set's marginal distribution, the operating characteristics implied by the
/// generating model once the backdoor paths are blocked. PPV/NPV are derived
/// from the standardized Se/Sp and the crude prevalence.
AccuracyEstimate adjusted_accuracy(const JointTable& joint, const std::string& index,
                                   const std::string& truth,
                                   const std::vector<std::string>& adjust,
                                   Provenance provenance);

/// Begg-Greenes inverse-probability correction for verification that depends
/// only on the index test result: P(D|T) from the verified subjects,
/// P(T) from the full cohort. Throws NumericError when there are no
/// verified index-negative subjects (the design cannot be corrected without
/// further assumptions) or a cohort margin is zero.
AccuracyEstimate begg_greenes(const VerificationData& vd);

struct KnownReferenceResult {
  double prevalence = 0;
  double se = 0;
  double sp = 0;
};

/// Undoes reference-standard error under conditional independence when the
/// reference's operating characteristics are known. obs is the joint
/// distribution of (reference, index): a = P(ref+, idx+), b = P(ref+, idx-),
/// c = P(ref-, idx+), d = P(ref-, idx-). Throws NumericError with an
/// inconsistency message when the recovered parameters fall outside [0, 1].
KnownReferenceResult correct_for_known_reference(const CrossTab2x2& obs, double se1, double sp1);

/// correct_for_known_reference packaged as an AccuracyEstimate with PPV/NPV
/// derived from the recovered parameters.
AccuracyEstimate known_reference_accuracy(const CrossTab2x2& obs, double se1, double sp1);

struct LcaOptions {
  int max_iter = 500;
  double tol = 1e-8;
  int restarts = 20;
  uint64_t seed = 20250801;
};

struct LcaResult {
  double prevalence = 0;
  std::vector<double> se, sp;
  double log_likelihood = 0;
  int iterations = 0;
  bool converged = false;
  /// Restarts whose fitted parameters all lie within 1e-4 of the winner.
  int n_restarts_agreeing = 0;
  /// Smallest per-iteration log-likelihood change seen over every restart;
  /// EM guarantees this stays above a tiny negative rounding allowance.
  double min_step_delta = 0;
};

/// Maximum-likelihood conditional-independence latent class model
/// (prevalence, per-test se/sp) fit by EM on a 2^K pattern-count table,
/// K >= 3. Counts may be fractional (expected counts work). Best of
/// `restarts` seeded random initializations; class labels are flipped when
/// the mean Youden index is negative. Deterministic for fixed options.
LcaResult lca_em(const std::map<std::vector<int>, double>& pattern_counts,
                 const LcaOptions& options = {});

/// (cov(T1,T2 | D=1), cov(T1,T2 | D=0)) from the exact joint.
std::pair<double, double> conditional_covariance(const JointTable& joint, const std::string& t1,
                                                 const std::string& t2, const std::string& d);

/// Verified/unverified split of a dataset: a missing reference cell marks an
/// unverified subject. Throws when the index column has missing values.
VerificationData verification_from_frame(const Frame& data, const std::string& index,
                                         const std::string& reference);

}  // namespace dta
