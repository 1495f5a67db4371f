#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dtadag/errors.hpp"

namespace dta {

// Role a variable plays in a diagnostic accuracy design.
enum class NodeRole { Target, ReferenceTest, IndexTest, Covariate, Selection, Other };

std::string_view to_string(NodeRole role);
std::optional<NodeRole> role_from_string(std::string_view s);

struct Node {
  std::string name;
  NodeRole role = NodeRole::Other;
  bool observed = true;

  bool operator==(const Node&) const = default;
};

/// Validated directed acyclic graph over named variables.
/// Immutable after construction; every query is a pure const function,
/// safe for concurrent use.
class Dag {
 public:
  /// Validates names, endpoints, duplicate edges, self-loops and acyclicity.
  /// Node order is preserved as given (declaration order).
  Dag(std::vector<Node> nodes, std::vector<std::pair<std::string, std::string>> edges);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::pair<std::string, std::string>>& edges() const { return edges_; }

  bool has_node(std::string_view name) const;
  /// Throws UnknownNodeError.
  int index_of(std::string_view name) const;
  const Node& node(std::string_view name) const { return nodes_[index_of(name)]; }
  const Node& node_at(int i) const { return nodes_[i]; }

  bool has_edge(std::string_view parent, std::string_view child) const;

  /// Parents/children sorted by name.
  std::vector<std::string> parents(std::string_view name) const;
  std::vector<std::string> children(std::string_view name) const;
  const std::vector<int>& parent_indices(int i) const { return parents_[i]; }
  const std::vector<int>& child_indices(int i) const { return children_[i]; }

  /// Strict ancestors (excludes the node itself).
  std::set<std::string> ancestors(std::string_view name) const;
  /// Strict descendants (excludes the node itself).
  std::set<std::string> descendants(std::string_view name) const;

  /// Topological order, ties broken by declaration order.
  std::vector<std::string> topo_order() const;
  const std::vector<int>& topo_indices() const { return topo_; }

  /// Canonical DAG-syntax text; parse_dag(serialize()) reproduces the value.
  std::string serialize() const;

  bool operator==(const Dag& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, std::string>> edges_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::vector<int> topo_;
};

/// Parses the DAG text syntax:
///
///   file      := "dag" "{" item* "}"
///   item      := node-decl | edge-decl
///   node-decl := IDENT [ "[" attr ("," attr)* "]" ]
///   attr      := "role" "=" ("target"|"reference"|"index"|"covariate"|"selection"|"other")
///              | "latent" | "observed"
///   edge-decl := IDENT "->" IDENT
///
/// "#" starts a comment running to end of line. Defaults: role=other, observed.
/// Edge endpoints may be declared anywhere in the file.
Dag parse_dag(const std::string& text);

enum class BlockReason { NonColliderInZ, ColliderNotInZ };

struct Blocker {
  std::string node;
  BlockReason reason;

  bool operator==(const Blocker&) const = default;
};

/// A simple path between two nodes, ignoring edge direction, together with
/// its open/blocked status relative to the conditioning set it was
/// classified against.
struct Path {
  std::vector<std::string> nodes;
  /// forward[i] is true when the edge runs nodes[i] -> nodes[i+1].
  std::vector<bool> forward;
  bool open = false;
  std::vector<Blocker> blockers;

  /// True when the first step enters the origin node (x <- ...).
  bool backdoor() const { return !forward.empty() && !forward.front(); }
  /// Arrow rendering, e.g. "T1 <- D -> T2".
  std::string to_string() const;
};

/// Every simple path between x and y ignoring direction, in lexicographic
/// order of the node-name sequence, classified against an empty
/// conditioning set. Throws LimitError on graphs with more than 16 nodes.
std::vector<Path> all_paths(const Dag& dag, std::string_view x, std::string_view y);

/// Re-evaluates open/blockers for an existing path against Z.
void classify_path(const Dag& dag, Path& path, const std::set<std::string>& given);

/// True iff every path between X and Y is blocked by Z: a path is blocked
/// iff it contains a non-collider in Z, or a collider such that neither it
/// nor any of its descendants is in Z. Computed by reachability on the
/// moralized ancestral graph. X, Y, Z must be pairwise disjoint; X and Y
/// nonempty.
bool d_separated(const Dag& dag, const std::set<std::string>& x, const std::set<std::string>& y,
                 const std::set<std::string>& given);

/// The subset of all_paths(x, y) that is open given Z; empty iff d-separated.
std::vector<Path> open_paths(const Dag& dag, std::string_view x, std::string_view y,
                             const std::set<std::string>& given);

/// Open paths whose first step leaves x against the arrow.
std::vector<Path> backdoor_paths(const Dag& dag, std::string_view x, std::string_view y,
                                 const std::set<std::string>& given);

struct AdjustmentSets {
  /// False when no subset of observed candidates blocks every backdoor path.
  bool feasible = true;
  /// Inclusion-minimal blocking sets, each sorted, ordered by size then
  /// lexicographically. Contains a single empty set when nothing needs blocking.
  std::vector<std::vector<std::string>> sets;
};

/// Minimal backdoor adjustment sets for (x, y) over observed non-descendants
/// of x. Candidates exclude x, y and descendants of x.
AdjustmentSets minimal_adjustment_sets(const Dag& dag, std::string_view x, std::string_view y);

}  // namespace dta
