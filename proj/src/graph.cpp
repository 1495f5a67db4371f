#include "dtadag/graph.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace dta {

std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::Target: return "target";
    case NodeRole::ReferenceTest: return "reference";
    case NodeRole::IndexTest: return "index";
    case NodeRole::Covariate: return "covariate";
    case NodeRole::Selection: return "selection";
    case NodeRole::Other: return "other";
  }
  return "other";
}

std::optional<NodeRole> role_from_string(std::string_view s) {
  if (s == "target") return NodeRole::Target;
  if (s == "reference") return NodeRole::ReferenceTest;
  if (s == "index") return NodeRole::IndexTest;
  if (s == "covariate") return NodeRole::Covariate;
  if (s == "selection") return NodeRole::Selection;
  if (s == "other") return NodeRole::Other;
  return std::nullopt;
}

namespace {

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

// Walks a directed cycle for the error message once acyclicity fails.
std::string find_cycle(const std::vector<std::vector<int>>& children,
                       const std::vector<std::string>& names) {
  const int n = static_cast<int>(names.size());
  std::vector<int> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
  std::vector<int> stack;
  std::string out;

  auto dfs = [&](auto&& self, int v) -> bool {
    state[v] = 1;
    stack.push_back(v);
    for (int c : children[v]) {
      if (state[c] == 1) {
        auto it = std::find(stack.begin(), stack.end(), c);
        std::ostringstream os;
        for (auto jt = it; jt != stack.end(); ++jt) os << names[*jt] << " -> ";
        os << names[c];
        out = os.str();
        return true;
      }
      if (state[c] == 0 && self(self, c)) return true;
    }
    stack.pop_back();
    state[v] = 2;
    return false;
  };

  for (int v = 0; v < n; ++v)
    if (state[v] == 0 && dfs(dfs, v)) return out;
  return "";
}

}  // namespace

Dag::Dag(std::vector<Node> nodes, std::vector<std::pair<std::string, std::string>> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  const int n = node_count();
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < n; ++i) {
    const auto& name = nodes_[i].name;
    if (!valid_identifier(name))
      throw ValidationError("invalid node name '" + name + "'");
    if (!index.emplace(name, i).second)
      throw ValidationError("duplicate node '" + name + "'");
  }

  parents_.assign(n, {});
  children_.assign(n, {});
  std::set<std::pair<int, int>> seen;
  for (const auto& [p, c] : edges_) {
    auto pi = index.find(p);
    auto ci = index.find(c);
    if (pi == index.end()) throw ValidationError("unknown endpoint '" + p + "'");
    if (ci == index.end()) throw ValidationError("unknown endpoint '" + c + "'");
    if (pi->second == ci->second) throw ValidationError("self-loop on '" + p + "'");
    if (!seen.emplace(pi->second, ci->second).second)
      throw ValidationError("duplicate edge " + p + " -> " + c);
    children_[pi->second].push_back(ci->second);
    parents_[ci->second].push_back(pi->second);
  }

  // Stable topological order: smallest declaration index among ready nodes.
  std::vector<int> remaining(n);
  for (int i = 0; i < n; ++i) remaining[i] = static_cast<int>(parents_[i].size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < n; ++i)
    if (remaining[i] == 0) ready.push(i);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    topo_.push_back(v);
    for (int c : children_[v])
      if (--remaining[c] == 0) ready.push(c);
  }
  if (static_cast<int>(topo_.size()) != n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (const auto& nd : nodes_) names.push_back(nd.name);
    throw ValidationError("cycle detected: " + find_cycle(children_, names));
  }
}

bool Dag::has_node(std::string_view name) const {
  return std::any_of(nodes_.begin(), nodes_.end(),
                     [&](const Node& n) { return n.name == name; });
}

int Dag::index_of(std::string_view name) const {
  for (int i = 0; i < node_count(); ++i)
    if (nodes_[i].name == name) return i;
  throw UnknownNodeError("unknown node '" + std::string(name) + "'");
}

bool Dag::has_edge(std::string_view parent, std::string_view child) const {
  return std::any_of(edges_.begin(), edges_.end(), [&](const auto& e) {
    return e.first == parent && e.second == child;
  });
}

std::vector<std::string> Dag::parents(std::string_view name) const {
  std::vector<std::string> out;
  for (int p : parents_[index_of(name)]) out.push_back(nodes_[p].name);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Dag::children(std::string_view name) const {
  std::vector<std::string> out;
  for (int c : children_[index_of(name)]) out.push_back(nodes_[c].name);
  std::sort(out.begin(), out.end());
  return out;
}

std::set<std::string> Dag::ancestors(std::string_view name) const {
  std::set<std::string> out;
  std::vector<int> stack{index_of(name)};
  std::vector<char> seen(node_count(), 0);
  seen[stack[0]] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int p : parents_[v])
      if (!seen[p]) {
        seen[p] = 1;
        out.insert(nodes_[p].name);
        stack.push_back(p);
      }
  }
  return out;
}

std::set<std::string> Dag::descendants(std::string_view name) const {
  std::set<std::string> out;
  std::vector<int> stack{index_of(name)};
  std::vector<char> seen(node_count(), 0);
  seen[stack[0]] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int c : children_[v])
      if (!seen[c]) {
        seen[c] = 1;
        out.insert(nodes_[c].name);
        stack.push_back(c);
      }
  }
  return out;
}

std::vector<std::string> Dag::topo_order() const {
  std::vector<std::string> out;
  out.reserve(topo_.size());
  for (int i : topo_) out.push_back(nodes_[i].name);
  return out;
}

std::string Dag::serialize() const {
  std::ostringstream os;
  os << "dag {\n";
  for (const auto& n : nodes_) {
    os << "  " << n.name;
    std::vector<std::string> attrs;
    if (n.role != NodeRole::Other)
      attrs.push_back("role=" + std::string(to_string(n.role)));
    if (!n.observed) attrs.push_back("latent");
    if (!attrs.empty()) {
      os << " [";
      for (size_t i = 0; i < attrs.size(); ++i) os << (i ? ", " : "") << attrs[i];
      os << "]";
    }
    os << "\n";
  }
  for (const auto& [p, c] : edges_) os << "  " << p << " -> " << c << "\n";
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class TokKind { Ident, LBrace, RBrace, LBracket, RBracket, Comma, Equals, Arrow, End };

struct Token {
  TokKind kind;
  std::string text;
  int line;
  int col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_ws();
    int line = line_, col = col_;
    if (pos_ >= text_.size()) return {TokKind::End, "", line, col};
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        advance();
      return {TokKind::Ident, text_.substr(start, pos_ - start), line, col};
    }
    switch (c) {
      case '{': advance(); return {TokKind::LBrace, "{", line, col};
      case '}': advance(); return {TokKind::RBrace, "}", line, col};
      case '[': advance(); return {TokKind::LBracket, "[", line, col};
      case ']': advance(); return {TokKind::RBracket, "]", line, col};
      case ',': advance(); return {TokKind::Comma, ",", line, col};
      case '=': advance(); return {TokKind::Equals, "=", line, col};
      case '-':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
          advance();
          advance();
          return {TokKind::Arrow, "->", line, col};
        }
        break;
      default: break;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", line, col);
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lexer_(text) { cur_ = lexer_.next(); }

  Dag parse() {
    expect_ident("dag");
    expect(TokKind::LBrace, "'{'");
    while (cur_.kind != TokKind::RBrace) {
      if (cur_.kind == TokKind::End)
        throw ParseError("unexpected end of input, expected '}'", cur_.line, cur_.col);
      item();
    }
    consume();  // '}'
    if (cur_.kind != TokKind::End)
      throw ParseError("trailing input after '}'", cur_.line, cur_.col);
    for (size_t i = 0; i < edges_.size(); ++i)
      for (const auto& end : {edges_[i].first, edges_[i].second})
        if (!declared_.count(end))
          throw ParseError("unknown endpoint '" + end + "'", edge_pos_[i].first,
                           edge_pos_[i].second);
    return Dag(std::move(nodes_), std::move(edges_));
  }

 private:
  void item() {
    Token name = expect(TokKind::Ident, "node name");
    if (cur_.kind == TokKind::Arrow) {
      consume();
      Token target = expect(TokKind::Ident, "edge target");
      declare_edge(name, target);
      return;
    }
    Node node{name.text, NodeRole::Other, true};
    if (cur_.kind == TokKind::LBracket) {
      consume();
      attribute(node);
      while (cur_.kind == TokKind::Comma) {
        consume();
        attribute(node);
      }
      expect(TokKind::RBracket, "']'");
    }
    declare_node(node, name);
  }

  void attribute(Node& node) {
    Token attr = expect(TokKind::Ident, "attribute");
    if (attr.text == "role") {
      expect(TokKind::Equals, "'='");
      Token value = expect(TokKind::Ident, "role value");
      auto role = role_from_string(value.text);
      if (!role) throw ParseError("unknown role '" + value.text + "'", value.line, value.col);
      node.role = *role;
    } else if (attr.text == "latent") {
      node.observed = false;
    } else if (attr.text == "observed") {
      node.observed = true;
    } else {
      throw ParseError("unknown attribute '" + attr.text + "'", attr.line, attr.col);
    }
  }

  void declare_node(const Node& node, const Token& tok) {
    if (declared_.count(node.name))
      throw ParseError("duplicate node '" + node.name + "'", tok.line, tok.col);
    declared_.insert(node.name);
    nodes_.push_back(node);
  }

  void declare_edge(const Token& from, const Token& to) {
    if (from.text == to.text)
      throw ParseError("self-loop on '" + from.text + "'", from.line, from.col);
    for (const auto& e : edges_)
      if (e.first == from.text && e.second == to.text)
        throw ParseError("duplicate edge " + from.text + " -> " + to.text, from.line, from.col);
    edges_.emplace_back(from.text, to.text);
    edge_pos_.push_back({from.line, from.col});
  }

  Token expect(TokKind kind, const std::string& what) {
    if (cur_.kind != kind)
      throw ParseError("expected " + what + ", got '" + (cur_.kind == TokKind::End ? "end of input" : cur_.text) + "'",
                       cur_.line, cur_.col);
    return consume();
  }

  void expect_ident(const std::string& word) {
    if (cur_.kind != TokKind::Ident || cur_.text != word)
      throw ParseError("expected '" + word + "'", cur_.line, cur_.col);
    consume();
  }

  Token consume() {
    Token t = cur_;
    cur_ = lexer_.next();
    return t;
  }

  Lexer lexer_;
  Token cur_;
  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, std::string>> edges_;
  std::vector<std::pair<int, int>> edge_pos_;
  std::set<std::string> declared_;
};

}  // namespace

Dag parse_dag(const std::string& text) {
  Parser parser(text);
  return parser.parse();
}

// ---------------------------------------------------------------------------
// Path machinery

std::string Path::to_string() const {
  std::ostringstream os;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (i) os << (forward[i - 1] ? " -> " : " <- ");
    os << nodes[i];
  }
  return os.str();
}

void classify_path(const Dag& dag, Path& path, const std::set<std::string>& given) {
  path.blockers.clear();
  for (size_t i = 1; i + 1 < path.nodes.size(); ++i) {
    const std::string& v = path.nodes[i];
    const bool collider = path.forward[i - 1] && !path.forward[i];
    if (!collider) {
      if (given.count(v)) path.blockers.push_back({v, BlockReason::NonColliderInZ});
    } else {
      bool activated = given.count(v) > 0;
      if (!activated)
        for (const auto& d : dag.descendants(v))
          if (given.count(d)) {
            activated = true;
            break;
          }
      if (!activated) path.blockers.push_back({v, BlockReason::ColliderNotInZ});
    }
  }
  path.open = path.blockers.empty();
}

namespace {

constexpr int kPathEnumerationNodeCap = 16;

void check_path_cap(const Dag& dag) {
  if (dag.node_count() > kPathEnumerationNodeCap)
    throw LimitError("path enumeration limited to graphs with at most 16 nodes");
}

void require_distinct(std::string_view x, std::string_view y) {
  if (x == y)
    throw ValidationError("path endpoints must differ, got '" + std::string(x) + "' twice");
}

}  // namespace

std::vector<Path> all_paths(const Dag& dag, std::string_view x, std::string_view y) {
  check_path_cap(dag);
  require_distinct(x, y);
  const int xi = dag.index_of(x);
  const int yi = dag.index_of(y);
  const int n = dag.node_count();

  // Undirected adjacency with neighbors sorted by name so the DFS emits
  // paths in lexicographic order of the node-name sequence.
  std::vector<std::vector<int>> nbrs(n);
  for (int v = 0; v < n; ++v) {
    std::vector<int> all;
    all.insert(all.end(), dag.parent_indices(v).begin(), dag.parent_indices(v).end());
    all.insert(all.end(), dag.child_indices(v).begin(), dag.child_indices(v).end());
    std::sort(all.begin(), all.end(),
              [&](int a, int b) { return dag.node_at(a).name < dag.node_at(b).name; });
    nbrs[v] = std::move(all);
  }

  std::vector<Path> out;
  std::vector<int> trail{xi};
  std::vector<char> used(n, 0);
  used[xi] = 1;

  auto dfs = [&](auto&& self, int v) -> void {
    if (v == yi) {
      Path p;
      for (int u : trail) p.nodes.push_back(dag.node_at(u).name);
      for (size_t i = 0; i + 1 < trail.size(); ++i)
        p.forward.push_back(dag.has_edge(dag.node_at(trail[i]).name, dag.node_at(trail[i + 1]).name));
      classify_path(dag, p, {});
      out.push_back(std::move(p));
      return;
    }
    for (int w : nbrs[v]) {
      if (used[w]) continue;
      used[w] = 1;
      trail.push_back(w);
      self(self, w);
      trail.pop_back();
      used[w] = 0;
    }
  };
  dfs(dfs, xi);
  return out;
}

namespace {

void validate_dsep_args(const Dag& dag, const std::set<std::string>& x,
                        const std::set<std::string>& y, const std::set<std::string>& z) {
  if (x.empty() || y.empty()) throw ValidationError("d-separation requires nonempty X and Y");
  for (const auto* s : {&x, &y, &z})
    for (const auto& name : *s) dag.index_of(name);
  for (const auto& name : x) {
    if (y.count(name)) throw ValidationError("sets overlap on '" + name + "'");
    if (z.count(name)) throw ValidationError("sets overlap on '" + name + "'");
  }
  for (const auto& name : y)
    if (z.count(name)) throw ValidationError("sets overlap on '" + name + "'");
}

}  // namespace

bool d_separated(const Dag& dag, const std::set<std::string>& x, const std::set<std::string>& y,
                 const std::set<std::string>& given) {
  validate_dsep_args(dag, x, y, given);
  const int n = dag.node_count();

  // Ancestral closure of X ∪ Y ∪ Z.
  std::vector<char> anc(n, 0);
  std::vector<int> stack;
  auto push_set = [&](const std::set<std::string>& s) {
    for (const auto& name : s) {
      int i = dag.index_of(name);
      if (!anc[i]) {
        anc[i] = 1;
        stack.push_back(i);
      }
    }
  };
  push_set(x);
  push_set(y);
  push_set(given);
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int p : dag.parent_indices(v))
      if (!anc[p]) {
        anc[p] = 1;
        stack.push_back(p);
      }
  }

  // Moralize: undirect all edges within the closure and marry co-parents.
  std::vector<std::set<int>> adj(n);
  auto connect = [&](int a, int b) {
    adj[a].insert(b);
    adj[b].insert(a);
  };
  for (int v = 0; v < n; ++v) {
    if (!anc[v]) continue;
    const auto& ps = dag.parent_indices(v);
    for (int p : ps) connect(p, v);
    for (size_t i = 0; i < ps.size(); ++i)
      for (size_t j = i + 1; j < ps.size(); ++j) connect(ps[i], ps[j]);
  }

  // Reachability from X to Y avoiding Z.
  std::vector<char> blocked(n, 0);
  for (const auto& name : given) blocked[dag.index_of(name)] = 1;
  std::vector<char> seen(n, 0);
  for (const auto& name : x) {
    int i = dag.index_of(name);
    seen[i] = 1;
    stack.push_back(i);
  }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (seen[w] || blocked[w]) continue;
      seen[w] = 1;
      stack.push_back(w);
    }
  }
  for (const auto& name : y)
    if (seen[dag.index_of(name)]) return false;
  return true;
}

std::vector<Path> open_paths(const Dag& dag, std::string_view x, std::string_view y,
                             const std::set<std::string>& given) {
  validate_dsep_args(dag, {std::string(x)}, {std::string(y)}, given);
  std::vector<Path> out;
  for (auto& p : all_paths(dag, x, y)) {
    classify_path(dag, p, given);
    if (p.open) out.push_back(std::move(p));
  }
  return out;
}

std::vector<Path> backdoor_paths(const Dag& dag, std::string_view x, std::string_view y,
                                 const std::set<std::string>& given) {
  std::vector<Path> out;
  for (auto& p : open_paths(dag, x, y, given))
    if (p.backdoor()) out.push_back(std::move(p));
  return out;
}

AdjustmentSets minimal_adjustment_sets(const Dag& dag, std::string_view x, std::string_view y) {
  check_path_cap(dag);
  require_distinct(x, y);
  dag.index_of(x);
  dag.index_of(y);

  const auto below_x = dag.descendants(x);
  std::vector<std::string> candidates;
  for (const auto& node : dag.nodes()) {
    if (!node.observed || node.name == x || node.name == y) continue;
    if (below_x.count(node.name)) continue;
    candidates.push_back(node.name);
  }
  std::sort(candidates.begin(), candidates.end());

  auto blocks = [&](const std::set<std::string>& s) {
    return backdoor_paths(dag, x, y, s).empty();
  };

  if (blocks({})) return {true, {{}}};

  const int m = static_cast<int>(candidates.size());
  std::vector<uint32_t> qualifying;
  for (uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::set<std::string> s;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) s.insert(candidates[i]);
    if (blocks(s)) qualifying.push_back(mask);
  }
  if (qualifying.empty()) return {false, {}};

  AdjustmentSets result;
  std::vector<std::vector<std::string>> minimal;
  for (uint32_t mask : qualifying) {
    bool is_minimal = true;
    for (uint32_t other : qualifying)
      if (other != mask && (other & mask) == other) {
        is_minimal = false;
        break;
      }
    if (!is_minimal) continue;
    std::vector<std::string> s;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) s.push_back(candidates[i]);
    minimal.push_back(std::move(s));
  }
  std::sort(minimal.begin(), minimal.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  result.sets = std::move(minimal);
  return result;
}

}  // namespace dta
