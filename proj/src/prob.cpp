#include "dtadag/prob.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace dta {

namespace {

constexpr int kJointNodeCap = 20;

}  // namespace

BayesNet::BayesNet(Dag dag, std::vector<Cpt> cpts) : dag_(std::move(dag)) {
  const int n = dag_.node_count();
  std::unordered_map<std::string, Cpt> by_node;
  for (auto& c : cpts) {
    if (!dag_.has_node(c.node))
      throw ValidationError("CPT for unknown node '" + c.node + "'");
    if (!by_node.emplace(c.node, std::move(c)).second)
      throw ValidationError("duplicate CPT for node '" + c.node + "'");
  }
  cpts_.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto& name = dag_.node_at(i).name;
    auto it = by_node.find(name);
    if (it == by_node.end()) throw ValidationError("missing CPT for node '" + name + "'");
    Cpt cpt = std::move(it->second);

    auto declared = cpt.parents;
    std::sort(declared.begin(), declared.end());
    auto actual = dag_.parents(name);
    if (declared != actual) {
      std::string want;
      for (const auto& p : actual) want += (want.empty() ? "" : ", ") + p;
      throw ValidationError("CPT parents for '" + name + "' do not match the graph (expected {" +
                            want + "})");
    }
    const size_t expect = size_t{1} << cpt.parents.size();
    if (cpt.p1.size() != expect)
      throw ValidationError("CPT for '" + name + "' needs " + std::to_string(expect) +
                            " entries, got " + std::to_string(cpt.p1.size()));
    for (double p : cpt.p1)
      if (!(p >= 0.0 && p <= 1.0))
        throw ValidationError("CPT entry out of [0,1] for node '" + name + "'");
    cpts_.push_back(std::move(cpt));
  }
}

const Cpt& BayesNet::cpt(std::string_view node) const {
  return cpts_[dag_.index_of(node)];
}

JointTable::JointTable(std::vector<std::string> variables, std::vector<double> mass)
    : vars_(std::move(variables)), mass_(std::move(mass)) {
  if (mass_.size() != (size_t{1} << vars_.size()))
    throw ValidationError("joint table size does not match variable count");
}

int JointTable::position_of(std::string_view name) const {
  for (int i = 0; i < variable_count(); ++i)
    if (vars_[i] == name) return i;
  throw UnknownNodeError("unknown variable '" + std::string(name) + "'");
}

bool JointTable::has_variable(std::string_view name) const {
  return std::any_of(vars_.begin(), vars_.end(), [&](const auto& v) { return v == name; });
}

double JointTable::prob(const std::vector<Assignment>& event) const {
  const int n = variable_count();
  uint32_t mask = 0, want = 0;
  for (const auto& [name, value] : event) {
    if (value != 0 && value != 1)
      throw ValidationError("assignment value must be 0 or 1 for '" + name + "'");
    const int pos = position_of(name);
    const uint32_t bit = 1u << (n - 1 - pos);
    if (mask & bit) throw ValidationError("variable '" + name + "' assigned twice");
    mask |= bit;
    if (value) want |= bit;
  }
  double total = 0.0;
  for (size_t cfg = 0; cfg < mass_.size(); ++cfg)
    if ((cfg & mask) == want) total += mass_[cfg];
  return total;
}

JointTable exact_joint(const BayesNet& net) {
  const Dag& dag = net.dag();
  const int n = dag.node_count();
  if (n > kJointNodeCap)
    throw LimitError("exact joint limited to networks with at most 20 nodes");

  const auto& order = dag.topo_indices();
  std::vector<std::string> vars;
  vars.reserve(n);
  for (int i : order) vars.push_back(dag.node_at(i).name);

  // position of each node in the output variable order
  std::vector<int> pos(n);
  for (int k = 0; k < n; ++k) pos[order[k]] = k;

  // per node: output positions of its CPT parents, in CPT order
  std::vector<std::vector<int>> parent_pos(n);
  for (int i = 0; i < n; ++i) {
    const Cpt& cpt = net.cpts()[i];
    for (const auto& p : cpt.parents) parent_pos[i].push_back(pos[dag.index_of(p)]);
  }

  std::vector<double> mass(size_t{1} << n);
  for (size_t cfg = 0; cfg < mass.size(); ++cfg) {
    double p = 1.0;
    for (int i = 0; i < n && p > 0.0; ++i) {
      const Cpt& cpt = net.cpts()[i];
      size_t pcfg = 0;
      for (int pp : parent_pos[i]) pcfg = (pcfg << 1) | ((cfg >> (n - 1 - pp)) & 1u);
      const double p1 = cpt.p1[pcfg];
      const int value = (cfg >> (n - 1 - pos[i])) & 1u;
      p *= value ? p1 : 1.0 - p1;
    }
    mass[cfg] = p;
  }
  return JointTable(std::move(vars), std::move(mass));
}

JointTable marginal(const JointTable& joint, const std::vector<std::string>& keep) {
  if (keep.empty()) throw ValidationError("marginal requires at least one variable");
  std::vector<char> keep_flag(joint.variable_count(), 0);
  for (const auto& name : keep) keep_flag[joint.position_of(name)] = 1;

  const int n = joint.variable_count();
  std::vector<std::string> vars;
  std::vector<int> kept_pos;
  for (int i = 0; i < n; ++i)
    if (keep_flag[i]) {
      vars.push_back(joint.variables()[i]);
      kept_pos.push_back(i);
    }
  const int m = static_cast<int>(vars.size());
  std::vector<double> mass(size_t{1} << m, 0.0);
  for (size_t cfg = 0; cfg < joint.mass().size(); ++cfg) {
    size_t out = 0;
    for (int k = 0; k < m; ++k) out = (out << 1) | ((cfg >> (n - 1 - kept_pos[k])) & 1u);
    mass[out] += joint.mass()[cfg];
  }
  return JointTable(std::move(vars), std::move(mass));
}

std::pair<JointTable, double> condition(const JointTable& joint,
                                        const std::vector<Assignment>& evidence) {
  if (evidence.empty()) return {joint, 1.0};
  const int n = joint.variable_count();
  uint32_t mask = 0, want = 0;
  for (const auto& [name, value] : evidence) {
    const int pos = joint.position_of(name);
    const uint32_t bit = 1u << (n - 1 - pos);
    if (mask & bit) throw ValidationError("variable '" + name + "' assigned twice");
    mask |= bit;
    if (value) want |= bit;
  }
  const double p_evidence = joint.prob(evidence);
  if (p_evidence <= 0.0) throw NumericError("conditioning on zero-probability evidence");

  std::vector<std::string> vars;
  std::vector<int> kept_pos;
  for (int i = 0; i < n; ++i)
    if (!(mask & (1u << (n - 1 - i)))) {
      vars.push_back(joint.variables()[i]);
      kept_pos.push_back(i);
    }
  const int m = static_cast<int>(vars.size());
  std::vector<double> mass(size_t{1} << m, 0.0);
  for (size_t cfg = 0; cfg < joint.mass().size(); ++cfg) {
    if ((cfg & mask) != want) continue;
    size_t out = 0;
    for (int k = 0; k < m; ++k) out = (out << 1) | ((cfg >> (n - 1 - kept_pos[k])) & 1u);
    mass[out] += joint.mass()[cfg] / p_evidence;
  }
  return {JointTable(std::move(vars), std::move(mass)), p_evidence};
}

double query_prob(const JointTable& joint, const std::vector<Assignment>& event,
                  const std::vector<Assignment>& given) {
  for (const auto& [name, _] : event)
    for (const auto& [gname, g_] : given)
      if (name == gname) throw ValidationError("event and given overlap on '" + name + "'");
  const double pg = given.empty() ? 1.0 : joint.prob(given);
  if (pg <= 0.0) throw NumericError("conditioning on zero-probability evidence");
  std::vector<Assignment> both = event;
  both.insert(both.end(), given.begin(), given.end());
  return joint.prob(both) / pg;
}

// ---------------------------------------------------------------------------
// RNG

uint64_t SplitMix64::next() {
  state += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Xoshiro256pp::Xoshiro256pp(uint64_t seed) {
  SplitMix64 sm{seed};
  for (auto& s : s_) s = sm.next();
}

namespace {
inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

uint64_t Xoshiro256pp::next() {
  const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

uint64_t substream_seed(uint64_t seed, uint64_t stream) {
  return seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
}

Dataset sample(const BayesNet& net, uint64_t n, uint64_t seed) {
  if (n < 1) throw ValidationError("sample size must be at least 1");
  const Dag& dag = net.dag();
  const int nn = dag.node_count();
  const auto& order = dag.topo_indices();

  std::vector<std::string> vars;
  vars.reserve(nn);
  for (int i : order) vars.push_back(dag.node_at(i).name);
  std::vector<int> pos(nn);
  for (int k = 0; k < nn; ++k) pos[order[k]] = k;

  std::vector<std::vector<int>> parent_pos(nn);
  for (int i = 0; i < nn; ++i)
    for (const auto& p : net.cpts()[i].parents)
      parent_pos[i].push_back(pos[dag.index_of(p)]);

  // One substream per node keyed by declaration index, so the draw sequence
  // does not depend on evaluation order.
  std::vector<Xoshiro256pp> rng;
  rng.reserve(nn);
  for (int i = 0; i < nn; ++i) rng.emplace_back(substream_seed(seed, static_cast<uint64_t>(i)));

  Dataset data;
  data.variables = vars;
  data.seed = seed;
  data.rows.reserve(n);
  std::vector<uint8_t> row(nn);
  for (uint64_t r = 0; r < n; ++r) {
    for (int k = 0; k < nn; ++k) {
      const int i = order[k];
      const Cpt& cpt = net.cpts()[i];
      size_t pcfg = 0;
      for (int pp : parent_pos[i]) pcfg = (pcfg << 1) | row[pp];
      row[k] = rng[i].uniform() < cpt.p1[pcfg] ? 1 : 0;
    }
    data.rows.push_back(row);
  }
  return data;
}

JointTable empirical_joint(const Dataset& data) {
  if (data.rows.empty()) throw ValidationError("empirical joint of an empty dataset");
  const int n = static_cast<int>(data.variables.size());
  if (n > kJointNodeCap)
    throw LimitError("exact joint limited to networks with at most 20 nodes");
  std::vector<double> mass(size_t{1} << n, 0.0);
  const double w = 1.0 / static_cast<double>(data.rows.size());
  for (const auto& row : data.rows) {
    size_t cfg = 0;
    for (int i = 0; i < n; ++i) cfg = (cfg << 1) | (row[i] & 1u);
    mass[cfg] += w;
  }
  return JointTable(data.variables, std::move(mass));
}

}  // namespace dta
