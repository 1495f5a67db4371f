#include "dtadag/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dta {

std::string Provenance::to_string() const {
  switch (kind) {
    case ProvenanceKind::True: return detail.empty() ? "true" : "true(" + detail + ")";
    case ProvenanceKind::Naive: return detail.empty() ? "naive" : "naive(" + detail + ")";
    case ProvenanceKind::Stratified: return "stratified(" + detail + ")";
    case ProvenanceKind::Corrected: return "corrected(" + detail + ")";
  }
  return "";
}

Interval wilson_interval(double successes, double n, double z) {
  const double phat = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::string_view to_string(BiasLabel label) {
  switch (label) {
    case BiasLabel::Over: return "over";
    case BiasLabel::Under: return "under";
    case BiasLabel::None: return "none";
    case BiasLabel::Undefined: return "undefined";
  }
  return "";
}

AccuracyEstimate accuracy_vs(const JointTable& joint, const std::string& index,
                             const std::string& truth, bool truth_is_target) {
  const double pd1 = joint.prob({{truth, 1}});
  const double pd0 = joint.prob({{truth, 0}});
  if (pd1 <= 0.0 || pd0 <= 0.0)
    throw NumericError("degenerate truth margin for '" + truth + "'");

  AccuracyEstimate est;
  est.se = joint.prob({{index, 1}, {truth, 1}}) / pd1;
  est.sp = joint.prob({{index, 0}, {truth, 0}}) / pd0;
  est.prevalence = pd1;
  const double pt1 = joint.prob({{index, 1}});
  const double pt0 = 1.0 - pt1;
  if (pt1 > 0.0) est.ppv = joint.prob({{index, 1}, {truth, 1}}) / pt1;
  if (pt0 > 0.0) est.npv = joint.prob({{index, 0}, {truth, 0}}) / pt0;
  est.provenance = {truth_is_target ? ProvenanceKind::True : ProvenanceKind::Naive, ""};
  return est;
}

AccuracyEstimate accuracy_from_data(const Frame& data, const std::string& index,
                                    const std::string& truth) {
  const int ti = data.column(index);
  const int di = data.column(truth);
  double a = 0, b = 0, c = 0, d = 0;
  for (const auto& row : data.rows) {
    if (row[ti] < 0 || row[di] < 0) continue;
    if (row[ti] == 1)
      (row[di] == 1 ? a : b) += 1;
    else
      (row[di] == 1 ? c : d) += 1;
  }
  const double n = a + b + c + d;

  AccuracyEstimate est;
  est.provenance = {ProvenanceKind::Naive, ""};
  est.n_effective = static_cast<uint64_t>(n);
  if (n == 0) return est;
  est.prevalence = (a + c) / n;
  if (a + c > 0) {
    est.se = a / (a + c);
    est.se_ci = wilson_interval(a, a + c);
  }
  if (b + d > 0) {
    est.sp = d / (b + d);
    est.sp_ci = wilson_interval(d, b + d);
  }
  if (a + b > 0) est.ppv = a / (a + b);
  if (c + d > 0) est.npv = d / (c + d);
  return est;
}

AccuracyEstimate accuracy_from_data(const Dataset& data, const std::string& index,
                                    const std::string& truth) {
  return accuracy_from_data(to_frame(data), index, truth);
}

namespace {

MetricBias metric_bias(const std::optional<double>& truth, const std::optional<double>& other,
                       double threshold) {
  if (!truth || !other) return {std::nullopt, BiasLabel::Undefined};
  const double delta = *other - *truth;
  BiasLabel label = BiasLabel::None;
  if (delta > threshold) label = BiasLabel::Over;
  if (delta < -threshold) label = BiasLabel::Under;
  return {delta, label};
}

}  // namespace

BiasReport bias_report(const AccuracyEstimate& truth, const AccuracyEstimate& other,
                       double threshold) {
  BiasReport r;
  r.versus = other.provenance.to_string();
  r.se = metric_bias(truth.se, other.se, threshold);
  r.sp = metric_bias(truth.sp, other.sp, threshold);
  r.ppv = metric_bias(truth.ppv, other.ppv, threshold);
  r.npv = metric_bias(truth.npv, other.npv, threshold);
  r.prevalence = metric_bias(truth.prevalence, other.prevalence, threshold);
  return r;
}

std::map<int, AccuracyEstimate> stratified_accuracy(const JointTable& joint,
                                                    const std::string& index,
                                                    const std::string& truth,
                                                    const std::string& stratum,
                                                    bool truth_is_target) {
  std::map<int, AccuracyEstimate> out;
  for (int value : {0, 1}) {
    const double mass = joint.prob({{stratum, value}});
    if (mass <= 0.0)
      throw NumericError("empty stratum " + stratum + "=" + std::to_string(value));
    auto [conditioned, p] = condition(joint, {{stratum, value}});
    auto est = accuracy_vs(conditioned, index, truth, truth_is_target);
    est.provenance = {ProvenanceKind::Stratified, stratum + "=" + std::to_string(value)};
    out[value] = std::move(est);
  }
  return out;
}

AccuracyEstimate adjusted_accuracy(const JointTable& joint, const std::string& index,
                                   const std::string& truth,
                                   const std::vector<std::string>& adjust,
                                   Provenance provenance) {
  if (adjust.empty()) {
    auto est = accuracy_vs(joint, index, truth, provenance.kind == ProvenanceKind::True);
    est.provenance = provenance;
    return est;
  }
  const int m = static_cast<int>(adjust.size());
  double se = 0.0, sp = 0.0;
  for (uint32_t cfg = 0; cfg < (1u << m); ++cfg) {
    std::vector<Assignment> z;
    for (int i = 0; i < m; ++i) z.emplace_back(adjust[i], (cfg >> (m - 1 - i)) & 1u);
    const double w = joint.prob(z);
    if (w <= 0.0) continue;
    std::vector<Assignment> z1 = z, z0 = z;
    z1.emplace_back(truth, 1);
    z0.emplace_back(truth, 0);
    const double pd1 = joint.prob(z1);
    const double pd0 = joint.prob(z0);
    if (pd1 <= 0.0 || pd0 <= 0.0)
      throw NumericError("degenerate truth margin within an adjustment stratum");
    std::vector<Assignment> e1 = z1, e0 = z0;
    e1.emplace_back(index, 1);
    e0.emplace_back(index, 0);
    se += w * joint.prob(e1) / pd1;
    sp += w * joint.prob(e0) / pd0;
  }
  AccuracyEstimate est;
  est.se = se;
  est.sp = sp;
  est.prevalence = joint.prob({{truth, 1}});
  const double p = *est.prevalence;
  const double pos = p * se + (1.0 - p) * (1.0 - sp);
  const double neg = 1.0 - pos;
  if (pos > 0.0) est.ppv = p * se / pos;
  if (neg > 0.0) est.npv = (1.0 - p) * sp / neg;
  est.provenance = std::move(provenance);
  return est;
}

AccuracyEstimate begg_greenes(const VerificationData& vd) {
  const auto& v = vd.verified;
  const double verified_pos = v.a + v.b;
  const double verified_neg = v.c + v.d;
  if (verified_neg <= 0.0)
    throw NumericError(
        "no verified index-negative subjects: verification bias cannot be corrected without "
        "further assumptions");
  if (verified_pos <= 0.0)
    throw NumericError("no verified index-positive subjects");
  const double total = verified_pos + verified_neg + vd.unverified_pos + vd.unverified_neg;
  const double pt1 = (verified_pos + vd.unverified_pos) / total;
  const double pt0 = 1.0 - pt1;
  if (pt1 <= 0.0 || pt0 <= 0.0) throw NumericError("degenerate index test margin");

  const double pd_given_pos = v.a / verified_pos;
  const double pd_given_neg = v.c / verified_neg;
  const double prevalence = pt1 * pd_given_pos + pt0 * pd_given_neg;

  AccuracyEstimate est;
  est.provenance = {ProvenanceKind::Corrected, "begg-greenes"};
  est.prevalence = prevalence;
  if (prevalence > 0.0) est.se = pt1 * pd_given_pos / prevalence;
  if (prevalence < 1.0) est.sp = pt0 * (1.0 - pd_given_neg) / (1.0 - prevalence);
  est.ppv = pd_given_pos;
  est.npv = 1.0 - pd_given_neg;
  // Probability-mode inputs (cells summing to 1) describe an exact design.
  if (std::abs(total - 1.0) > 1e-9)
    est.n_effective = static_cast<uint64_t>(std::llround(total));
  return est;
}

KnownReferenceResult correct_for_known_reference(const CrossTab2x2& obs, double se1, double sp1) {
  const double sum = obs.a + obs.b + obs.c + obs.d;
  if (obs.a < 0 || obs.b < 0 || obs.c < 0 || obs.d < 0 || std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("observed table must be probabilities summing to 1");
  if (!(se1 >= 0 && se1 <= 1 && sp1 >= 0 && sp1 <= 1))
    throw ValidationError("reference se/sp must lie in [0,1]");
  const double youden = se1 + sp1 - 1.0;
  if (youden <= 1e-9)
    throw ValidationError("reference must be informative (se1 + sp1 - 1 > 0)");

  const auto inconsistent = [] {
    return NumericError(
        "model inconsistent with inputs (conditional independence violated or wrong se1/sp1)");
  };

  const double pt1 = obs.a + obs.b;  // P(reference positive)
  const double p = (pt1 - (1.0 - sp1)) / youden;
  if (!(p > 0.0 && p < 1.0)) throw inconsistent();

  // P(ref+, idx+) = p se1 se2 + (1-p)(1-sp1) f,  f = 1 - sp2
  // P(ref-, idx+) = p (1-se1) se2 + (1-p) sp1 f
  const double det = p * (1.0 - p) * youden;
  double se2 = ((1.0 - p) * sp1 * obs.a - (1.0 - p) * (1.0 - sp1) * obs.c) / det;
  double f = (p * se1 * obs.c - p * (1.0 - se1) * obs.a) / det;

  constexpr double kSlack = 1e-12;
  if (se2 < -kSlack || se2 > 1.0 + kSlack || f < -kSlack || f > 1.0 + kSlack)
    throw inconsistent();
  se2 = std::clamp(se2, 0.0, 1.0);
  f = std::clamp(f, 0.0, 1.0);
  return {p, se2, 1.0 - f};
}

AccuracyEstimate known_reference_accuracy(const CrossTab2x2& obs, double se1, double sp1) {
  const auto fixed = correct_for_known_reference(obs, se1, sp1);
  AccuracyEstimate est;
  est.se = fixed.se;
  est.sp = fixed.sp;
  est.prevalence = fixed.prevalence;
  const double pos = fixed.prevalence * fixed.se + (1.0 - fixed.prevalence) * (1.0 - fixed.sp);
  if (pos > 0.0) est.ppv = fixed.prevalence * fixed.se / pos;
  if (pos < 1.0) est.npv = (1.0 - fixed.prevalence) * fixed.sp / (1.0 - pos);
  est.provenance = {ProvenanceKind::Corrected, "known-reference"};
  return est;
}

// ---------------------------------------------------------------------------
// Latent class EM

namespace {

constexpr double kProbFloor = 1e-6;

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

struct LcaFit {
  double prevalence;
  std::vector<double> se, sp;
  double log_likelihood;
  int iterations;
  bool converged;
  double min_step_delta;
};

double pattern_loglik(const std::vector<std::vector<int>>& patterns,
                      const std::vector<double>& counts, const LcaFit& fit,
                      std::vector<double>* posteriors) {
  const int k = static_cast<int>(fit.se.size());
  double ll = 0.0;
  for (size_t i = 0; i < patterns.size(); ++i) {
    double l1 = fit.prevalence, l0 = 1.0 - fit.prevalence;
    for (int j = 0; j < k; ++j) {
      if (patterns[i][j] == 1) {
        l1 *= fit.se[j];
        l0 *= 1.0 - fit.sp[j];
      } else {
        l1 *= 1.0 - fit.se[j];
        l0 *= fit.sp[j];
      }
    }
    const double m = l1 + l0;
    ll += counts[i] * std::log(m);
    if (posteriors) (*posteriors)[i] = l1 / m;
  }
  return ll;
}

LcaFit run_restart(const std::vector<std::vector<int>>& patterns,
                   const std::vector<double>& counts, double total, int k,
                   const LcaOptions& options, uint64_t restart_seed) {
  Xoshiro256pp rng(restart_seed);
  LcaFit fit;
  fit.prevalence = 0.1 + 0.8 * rng.uniform();
  fit.se.resize(k);
  fit.sp.resize(k);
  for (int j = 0; j < k; ++j) fit.se[j] = 0.55 + 0.40 * rng.uniform();
  for (int j = 0; j < k; ++j) fit.sp[j] = 0.55 + 0.40 * rng.uniform();
  fit.iterations = 0;
  fit.converged = false;
  fit.min_step_delta = 0.0;

  std::vector<double> posterior(patterns.size());
  double prev_ll = pattern_loglik(patterns, counts, fit, &posterior);
  bool first = true;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    // M-step from the posteriors of the current parameters.
    double s1 = 0.0;
    std::vector<double> se_num(k, 0.0), sp_num(k, 0.0);
    for (size_t i = 0; i < patterns.size(); ++i) {
      const double w = counts[i] * posterior[i];
      const double u = counts[i] - w;
      s1 += w;
      for (int j = 0; j < k; ++j) {
        if (patterns[i][j] == 1)
          se_num[j] += w;
        else
          sp_num[j] += u;
      }
    }
    const double s0 = total - s1;
    fit.prevalence = clamp_prob(s1 / total);
    for (int j = 0; j < k; ++j) {
      fit.se[j] = clamp_prob(s1 > 0 ? se_num[j] / s1 : 0.5);
      fit.sp[j] = clamp_prob(s0 > 0 ? sp_num[j] / s0 : 0.5);
    }
    ++fit.iterations;

    const double ll = pattern_loglik(patterns, counts, fit, &posterior);
    const double delta = ll - prev_ll;
    if (first) {
      fit.min_step_delta = delta;
      first = false;
    } else {
      fit.min_step_delta = std::min(fit.min_step_delta, delta);
    }
    prev_ll = ll;
    if (std::abs(delta) < options.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.log_likelihood = prev_ll;

  // Resolve label switching: the disease class is the one whose tests beat
  // chance on average.
  double mean_youden = 0.0;
  for (int j = 0; j < k; ++j) mean_youden += fit.se[j] + fit.sp[j] - 1.0;
  mean_youden /= k;
  if (mean_youden < 0.0) {
    fit.prevalence = 1.0 - fit.prevalence;
    for (int j = 0; j < k; ++j) {
      const double se = fit.se[j];
      fit.se[j] = 1.0 - fit.sp[j];
      fit.sp[j] = 1.0 - se;
    }
  }
  return fit;
}

}  // namespace

LcaResult lca_em(const std::map<std::vector<int>, double>& pattern_counts,
                 const LcaOptions& options) {
  if (pattern_counts.empty()) throw ValidationError("no pattern counts");
  const int k = static_cast<int>(pattern_counts.begin()->first.size());
  if (k < 3)
    throw ValidationError(
        "latent class model needs at least 3 tests: with 2 tests the conditional-independence "
        "model has 5 parameters but the table only 3 degrees of freedom; for a reference with "
        "known operating characteristics use correct_for_known_reference instead");

  std::vector<std::vector<int>> patterns;
  std::vector<double> counts;
  double total = 0.0;
  for (const auto& [pattern, count] : pattern_counts) {
    if (static_cast<int>(pattern.size()) != k)
      throw ValidationError("pattern length mismatch");
    for (int v : pattern)
      if (v != 0 && v != 1) throw ValidationError("pattern values must be 0 or 1");
    if (count < 0) throw ValidationError("negative pattern count");
    if (count == 0) continue;
    patterns.push_back(pattern);
    counts.push_back(count);
    total += count;
  }
  if (total <= 0.0) throw ValidationError("all pattern counts are zero");
  if (options.restarts < 1 || options.max_iter < 1)
    throw ValidationError("restarts and max_iter must be at least 1");

  std::vector<LcaFit> fits;
  fits.reserve(options.restarts);
  for (int r = 0; r < options.restarts; ++r)
    fits.push_back(run_restart(patterns, counts, total, k, options,
                               substream_seed(options.seed, static_cast<uint64_t>(r))));

  int best = 0;
  for (int r = 1; r < options.restarts; ++r)
    if (fits[r].log_likelihood > fits[best].log_likelihood + 1e-9) best = r;

  const auto& winner = fits[best];
  LcaResult result;
  result.prevalence = winner.prevalence;
  result.se = winner.se;
  result.sp = winner.sp;
  result.log_likelihood = winner.log_likelihood;
  result.iterations = winner.iterations;
  result.converged = winner.converged;
  result.min_step_delta = winner.min_step_delta;
  for (const auto& fit : fits) {
    result.min_step_delta = std::min(result.min_step_delta, fit.min_step_delta);
    double gap = std::abs(fit.prevalence - winner.prevalence);
    for (int j = 0; j < k; ++j) {
      gap = std::max(gap, std::abs(fit.se[j] - winner.se[j]));
      gap = std::max(gap, std::abs(fit.sp[j] - winner.sp[j]));
    }
    if (gap <= 1e-4) ++result.n_restarts_agreeing;
  }
  return result;
}

std::pair<double, double> conditional_covariance(const JointTable& joint, const std::string& t1,
                                                 const std::string& t2, const std::string& d) {
  double cov[2];
  for (int v : {1, 0}) {
    const double pd = joint.prob({{d, v}});
    if (pd <= 0.0) throw NumericError("degenerate stratum " + d + "=" + std::to_string(v));
    const double p11 = joint.prob({{t1, 1}, {t2, 1}, {d, v}}) / pd;
    const double p1 = joint.prob({{t1, 1}, {d, v}}) / pd;
    const double p2 = joint.prob({{t2, 1}, {d, v}}) / pd;
    cov[v] = p11 - p1 * p2;
  }
  return {cov[1], cov[0]};
}

VerificationData verification_from_frame(const Frame& data, const std::string& index,
                                         const std::string& reference) {
  const int ti = data.column(index);
  const int ri = data.column(reference);
  VerificationData vd;
  for (size_t r = 0; r < data.rows.size(); ++r) {
    const auto& row = data.rows[r];
    if (row[ti] < 0)
      throw ValidationError("index test column has a missing value at data row " +
                            std::to_string(r + 1));
    if (row[ri] < 0) {
      (row[ti] == 1 ? vd.unverified_pos : vd.unverified_neg) += 1;
    } else if (row[ti] == 1) {
      (row[ri] == 1 ? vd.verified.a : vd.verified.b) += 1;
    } else {
      (row[ri] == 1 ? vd.verified.c : vd.verified.d) += 1;
    }
  }
  return vd;
}

}  // namespace dta
