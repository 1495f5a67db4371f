// Test-only oracles, kept independent of the implementation paths they
// check: path enumeration and the blocking rule are re-implemented here from
// scratch, conditional mutual information comes straight from the joint, and
// input generators use std::mt19937_64 rather than the library RNG.
#pragma once

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dtadag/graph.hpp"
#include "dtadag/prob.hpp"

namespace oracle {

// Uniform in [0,1) from raw mt19937_64 output, platform-independent.
inline double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// Brute-force d-separation: enumerate every simple undirected path and apply
// the blocking rule directly.

struct BruteGraph {
  std::vector<std::string> names;
  std::map<std::string, int> index;
  std::vector<std::vector<int>> parents, children;

  explicit BruteGraph(const dta::Dag& dag) {
    for (const auto& n : dag.nodes()) {
      index[n.name] = static_cast<int>(names.size());
      names.push_back(n.name);
    }
    parents.resize(names.size());
    children.resize(names.size());
    for (const auto& [p, c] : dag.edges()) {
      parents[index.at(c)].push_back(index.at(p));
      children[index.at(p)].push_back(index.at(c));
    }
  }

  std::set<int> descendants(int v) const {
    std::set<int> out;
    std::vector<int> stack{v};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int c : children[u])
        if (out.insert(c).second) stack.push_back(c);
    }
    return out;
  }

  bool edge(int a, int b) const {
    for (int c : children[a])
      if (c == b) return true;
    return false;
  }
};

inline void enumerate_paths(const BruteGraph& g, int current, int goal, std::vector<int>& trail,
                            std::vector<char>& used, std::vector<std::vector<int>>& out) {
  if (current == goal) {
    out.push_back(trail);
    return;
  }
  std::vector<int> nbrs = g.parents[current];
  nbrs.insert(nbrs.end(), g.children[current].begin(), g.children[current].end());
  for (int w : nbrs) {
    if (used[w]) continue;
    used[w] = 1;
    trail.push_back(w);
    enumerate_paths(g, w, goal, trail, used, out);
    trail.pop_back();
    used[w] = 0;
  }
}

inline bool path_blocked(const BruteGraph& g, const std::vector<int>& path,
                         const std::set<int>& z) {
  for (size_t i = 1; i + 1 < path.size(); ++i) {
    const bool into_left = g.edge(path[i - 1], path[i]);
    const bool into_right = g.edge(path[i + 1], path[i]);
    const bool collider = into_left && into_right;
    if (!collider) {
      if (z.count(path[i])) return true;
    } else {
      bool activated = z.count(path[i]) > 0;
      if (!activated)
        for (int d : g.descendants(path[i]))
          if (z.count(d)) {
            activated = true;
            break;
          }
      if (!activated) return true;
    }
  }
  return false;
}

inline bool d_separated_bruteforce(const dta::Dag& dag, const std::set<std::string>& x,
                                   const std::set<std::string>& y,
                                   const std::set<std::string>& z) {
  BruteGraph g(dag);
  std::set<int> zi;
  for (const auto& name : z) zi.insert(g.index.at(name));
  for (const auto& xn : x)
    for (const auto& yn : y) {
      std::vector<std::vector<int>> paths;
      std::vector<int> trail{g.index.at(xn)};
      std::vector<char> used(g.names.size(), 0);
      used[trail[0]] = 1;
      enumerate_paths(g, trail[0], g.index.at(yn), trail, used, paths);
      for (const auto& p : paths)
        if (!path_blocked(g, p, zi)) return false;
    }
  return true;
}

// ---------------------------------------------------------------------------
// Conditional mutual information I(X;Y|Z) from an exact joint, in nats.

inline void assignments(const std::vector<std::string>& vars, uint32_t cfg,
                        std::vector<dta::Assignment>& out) {
  for (size_t i = 0; i < vars.size(); ++i)
    out.emplace_back(vars[i], (cfg >> (vars.size() - 1 - i)) & 1u);
}

inline double cmi(const dta::JointTable& joint, const std::vector<std::string>& x,
                  const std::vector<std::string>& y, const std::vector<std::string>& z) {
  double total = 0.0;
  const uint32_t nx = 1u << x.size(), ny = 1u << y.size(), nz = 1u << z.size();
  for (uint32_t zc = 0; zc < nz; ++zc) {
    std::vector<dta::Assignment> za;
    assignments(z, zc, za);
    const double pz = z.empty() ? 1.0 : joint.prob(za);
    if (pz <= 0.0) continue;
    for (uint32_t xc = 0; xc < nx; ++xc)
      for (uint32_t yc = 0; yc < ny; ++yc) {
        std::vector<dta::Assignment> all = za, xa = za, ya = za;
        assignments(x, xc, all);
        assignments(y, yc, all);
        assignments(x, xc, xa);
        assignments(y, yc, ya);
        const double pxyz = joint.prob(all);
        if (pxyz <= 0.0) continue;
        total += pxyz * std::log(pxyz * pz / (joint.prob(xa) * joint.prob(ya)));
      }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Seeded input generators.

inline dta::Dag random_dag(std::mt19937_64& rng, int n_nodes, double edge_prob) {
  std::vector<dta::Node> nodes;
  for (int i = 0; i < n_nodes; ++i)
    nodes.push_back({"V" + std::to_string(i), dta::NodeRole::Other, true});
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < n_nodes; ++i)
    for (int j = i + 1; j < n_nodes; ++j)
      if (uniform(rng) < edge_prob) edges.emplace_back(nodes[i].name, nodes[j].name);
  return dta::Dag(std::move(nodes), std::move(edges));
}

inline dta::BayesNet random_net(std::mt19937_64& rng, const dta::Dag& dag) {
  std::vector<dta::Cpt> cpts;
  for (const auto& node : dag.nodes()) {
    dta::Cpt cpt;
    cpt.node = node.name;
    cpt.parents = dag.parents(node.name);
    cpt.p1.resize(size_t{1} << cpt.parents.size());
    for (auto& p : cpt.p1) p = 0.05 + 0.90 * uniform(rng);
    cpts.push_back(std::move(cpt));
  }
  return dta::BayesNet(dag, std::move(cpts));
}

// All subsets of the nodes other than a and b, as name sets.
inline std::vector<std::set<std::string>> conditioning_sets(const dta::Dag& dag,
                                                            const std::string& a,
                                                            const std::string& b) {
  std::vector<std::string> rest;
  for (const auto& n : dag.nodes())
    if (n.name != a && n.name != b) rest.push_back(n.name);
  std::vector<std::set<std::string>> out;
  for (uint32_t mask = 0; mask < (1u << rest.size()); ++mask) {
    std::set<std::string> z;
    for (size_t i = 0; i < rest.size(); ++i)
      if (mask & (1u << i)) z.insert(rest[i]);
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace oracle
