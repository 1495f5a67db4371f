#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dtadag/graph.hpp"

namespace dta {

/// One binary value assignment, e.g. {"T1", 1}.
using Assignment = std::pair<std::string, int>;

/// Conditional probability table of a binary node: p1[c] is P(node = 1)
/// for parent configuration c, where c reads the parent values as a binary
/// number with the first-listed parent as the most significant bit.
struct Cpt {
  std::string node;
  std::vector<std::string> parents;
  std::vector<double> p1;

  bool operator==(const Cpt&) const = default;
};

/// A Dag plus one Cpt per node: the generative model for a design.
class BayesNet {
 public:
  /// Validates coverage (one Cpt per node, none extra), parent-set agreement
  /// with the Dag, table sizes and probability ranges.
  BayesNet(Dag dag, std::vector<Cpt> cpts);

  const Dag& dag() const { return dag_; }
  const Cpt& cpt(std::string_view node) const;
  const std::vector<Cpt>& cpts() const { return cpts_; }

 private:
  Dag dag_;
  std::vector<Cpt> cpts_;  // aligned with dag_.nodes()
};

/// Exact probability mass over all 2^n configurations of a variable list.
/// Configuration index reads variable values as a binary number, first
/// variable = most significant bit.
class JointTable {
 public:
  JointTable(std::vector<std::string> variables, std::vector<double> mass);

  const std::vector<std::string>& variables() const { return vars_; }
  const std::vector<double>& mass() const { return mass_; }
  int variable_count() const { return static_cast<int>(vars_.size()); }
  /// Throws UnknownNodeError.
  int position_of(std::string_view name) const;
  bool has_variable(std::string_view name) const;

  /// P(all assignments hold), summing over unmentioned variables.
  double prob(const std::vector<Assignment>& event) const;

 private:
  std::vector<std::string> vars_;
  std::vector<double> mass_;
};

/// Rows of sampled binary values, one column per variable.
struct Dataset {
  std::vector<std::string> variables;
  std::vector<std::vector<uint8_t>> rows;
  uint64_t seed = 0;
};

/// Full-enumeration joint of the net, variables in topological order of
/// declaration. Capped at 20 nodes.
JointTable exact_joint(const BayesNet& net);

/// Sums mass over the eliminated variables; kept variables stay in the
/// joint's order.
JointTable marginal(const JointTable& joint, const std::vector<std::string>& keep);

/// Renormalized mass over the non-evidence variables plus P(evidence).
/// Throws NumericError on zero-probability evidence.
std::pair<JointTable, double> condition(const JointTable& joint,
                                        const std::vector<Assignment>& evidence);

/// P(event | given). Throws NumericError on zero-probability conditioning.
double query_prob(const JointTable& joint, const std::vector<Assignment>& event,
                  const std::vector<Assignment>& given);

/// Ancestral sampling with one deterministic substream per node, so output
/// is byte-identical for identical (net, n, seed) on every platform.
Dataset sample(const BayesNet& net, uint64_t n, uint64_t seed);

/// Relative frequencies of the dataset as a JointTable.
JointTable empirical_joint(const Dataset& data);

// ---------------------------------------------------------------------------
// Deterministic RNG (fixed algorithms, never silently changed):
// substreams are xoshiro256++ generators seeded by splitmix64 from
// mix(seed, stream) = seed XOR 0x9E3779B97F4A7C15 * (stream + 1).

struct SplitMix64 {
  uint64_t state;
  uint64_t next();
};

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(uint64_t seed);
  uint64_t next();
  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t s_[4];
};

/// The per-stream seeding rule used by sample() and the EM restarts.
uint64_t substream_seed(uint64_t seed, uint64_t stream);

}  // namespace dta
