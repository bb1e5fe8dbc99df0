#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gcm/errors.hpp"
#include "gcm/rng.hpp"

namespace gcm {

// Sorted, duplicate-free list of vertex indices. All subset/clique machinery
// in this library works on these.
using VertexSet = std::vector<int>;

inline bool is_subset(const VertexSet& a, const VertexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline VertexSet set_union(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline VertexSet set_intersection(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline VertexSet set_difference(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline std::string format_vertex_set(const VertexSet& s, int index_base = 1) {
  std::string out = "{";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ";";
    out += std::to_string(s[i] + index_base);
  }
  out += "}";
  return out;
}

// Undirected simple graph on vertices 0..p-1. Self-loops are rejected.
class Graph {
 public:
  using Edge = std::pair<int, int>;  // stored with first < second

  explicit Graph(int p = 1) : p_(p), adj_(p, std::vector<char>(p, 0)) {
    if (p < 1) throw InvalidSpec("graph needs at least one vertex");
  }

  int num_vertices() const { return p_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  void add_edge(int s, int t) {
    check_vertex(s);
    check_vertex(t);
    if (s == t) throw InvalidSpec("self-loops are not allowed");
    if (s > t) std::swap(s, t);
    if (adj_[s][t]) return;
    adj_[s][t] = adj_[t][s] = 1;
    edges_.emplace_back(s, t);
  }

  bool has_edge(int s, int t) const {
    check_vertex(s);
    check_vertex(t);
    return s != t && adj_[s][t] != 0;
  }

  // Edges sorted lexicographically; useful for deterministic output and
  // edge-set comparisons.
  std::vector<Edge> sorted_edges() const {
    std::vector<Edge> out = edges_;
    std::sort(out.begin(), out.end());
    return out;
  }

  VertexSet neighbors(int s) const {
    check_vertex(s);
    VertexSet out;
    for (int t = 0; t < p_; ++t)
      if (adj_[s][t]) out.push_back(t);
    return out;
  }

  int degree(int s) const { return static_cast<int>(neighbors(s).size()); }

  bool operator==(const Graph& other) const {
    return p_ == other.p_ && sorted_edges() == other.sorted_edges();
  }

 private:
  void check_vertex(int v) const {
    if (v < 0 || v >= p_) throw InvalidSpec("vertex index out of range");
  }

  int p_;
  std::vector<Edge> edges_;
  std::vector<std::vector<char>> adj_;
};

// ---------------------------------------------------------------------------
// Chordality and triangulation
// ---------------------------------------------------------------------------

// A perfect elimination ordering lists the vertices so that the later
// neighbors of each vertex form a clique. A graph admits one iff it is
// chordal.
inline bool is_perfect_elimination_ordering(const Graph& g, const std::vector<int>& order) {
  const int p = g.num_vertices();
  std::vector<int> pos(p);
  for (int i = 0; i < p; ++i) pos[order[i]] = i;
  for (int i = 0; i < p; ++i) {
    const int v = order[i];
    VertexSet later;
    for (int t : g.neighbors(v))
      if (pos[t] > i) later.push_back(t);
    for (size_t a = 0; a < later.size(); ++a)
      for (size_t b = a + 1; b < later.size(); ++b)
        if (!g.has_edge(later[a], later[b])) return false;
  }
  return true;
}

// Maximum cardinality search. The reverse visit order is a perfect
// elimination ordering iff the graph is chordal.
inline std::vector<int> maximum_cardinality_search(const Graph& g) {
  const int p = g.num_vertices();
  std::vector<int> weight(p, 0), visit_order;
  std::vector<char> visited(p, 0);
  for (int step = 0; step < p; ++step) {
    int best = -1;
    for (int v = 0; v < p; ++v)
      if (!visited[v] && (best == -1 || weight[v] > weight[best])) best = v;
    visited[best] = 1;
    visit_order.push_back(best);
    for (int t : g.neighbors(best))
      if (!visited[t]) ++weight[t];
  }
  std::reverse(visit_order.begin(), visit_order.end());
  return visit_order;  // candidate PEO
}

inline bool is_chordal(const Graph& g) {
  return is_perfect_elimination_ordering(g, maximum_cardinality_search(g));
}

struct TriangulationResult {
  Graph chordal;                          // input plus fill edges
  std::vector<Graph::Edge> fill_edges;    // edges added, lexicographic
  std::vector<int> elimination_order;     // a PEO of the chordal output
};

// Greedy minimum-fill triangulation. At each step eliminate the vertex whose
// neighborhood needs the fewest fill edges, breaking ties by lowest index.
inline TriangulationResult triangulate(const Graph& g) {
  const int p = g.num_vertices();
  std::vector<std::set<int>> adj(p);
  for (auto [s, t] : g.sorted_edges()) {
    adj[s].insert(t);
    adj[t].insert(s);
  }
  std::vector<char> removed(p, 0);
  TriangulationResult result{g, {}, {}};

  auto fill_count = [&](int v) {
    int cnt = 0;
    std::vector<int> nb(adj[v].begin(), adj[v].end());
    for (size_t a = 0; a < nb.size(); ++a)
      for (size_t b = a + 1; b < nb.size(); ++b)
        if (!adj[nb[a]].count(nb[b])) ++cnt;
    return cnt;
  };

  for (int step = 0; step < p; ++step) {
    int best = -1, best_fill = -1;
    for (int v = 0; v < p; ++v) {
      if (removed[v]) continue;
      int f = fill_count(v);
      if (best == -1 || f < best_fill) {
        best = v;
        best_fill = f;
      }
    }
    result.elimination_order.push_back(best);
    std::vector<int> nb(adj[best].begin(), adj[best].end());
    for (size_t a = 0; a < nb.size(); ++a)
      for (size_t b = a + 1; b < nb.size(); ++b)
        if (!adj[nb[a]].count(nb[b])) {
          adj[nb[a]].insert(nb[b]);
          adj[nb[b]].insert(nb[a]);
          result.fill_edges.emplace_back(std::min(nb[a], nb[b]), std::max(nb[a], nb[b]));
          result.chordal.add_edge(nb[a], nb[b]);
        }
    for (int t : nb) adj[t].erase(best);
    adj[best].clear();
    removed[best] = 1;
  }
  std::sort(result.fill_edges.begin(), result.fill_edges.end());
  return result;
}

// All maximal cliques of a chordal graph, via a perfect elimination ordering.
// Throws NotChordal if the graph fails the PEO check.
inline std::vector<VertexSet> maximal_cliques_chordal(const Graph& g) {
  std::vector<int> order = maximum_cardinality_search(g);
  if (!is_perfect_elimination_ordering(g, order))
    throw NotChordal("graph is not chordal");
  const int p = g.num_vertices();
  std::vector<int> pos(p);
  for (int i = 0; i < p; ++i) pos[order[i]] = i;
  std::vector<VertexSet> candidates;
  for (int i = 0; i < p; ++i) {
    const int v = order[i];
    VertexSet clique{v};
    for (int t : g.neighbors(v))
      if (pos[t] > i) clique.push_back(t);
    std::sort(clique.begin(), clique.end());
    candidates.push_back(std::move(clique));
  }
  std::vector<VertexSet> maximal;
  for (size_t i = 0; i < candidates.size(); ++i) {
    bool contained = false;
    for (size_t j = 0; j < candidates.size() && !contained; ++j)
      if (i != j && candidates[i].size() <= candidates[j].size() &&
          is_subset(candidates[i], candidates[j]) && candidates[i] != candidates[j])
        contained = true;
    // Equal cliques can appear twice; keep the first occurrence only.
    for (size_t j = 0; j < i && !contained; ++j)
      if (candidates[i] == candidates[j]) contained = true;
    if (!contained) maximal.push_back(candidates[i]);
  }
  std::sort(maximal.begin(), maximal.end());
  return maximal;
}

// Every clique (nonempty complete subset), maximal or not, of a chordal
// graph: unions of subsets of the maximal cliques, deduplicated. Sorted in
// graded lexicographic order (by size, then lexicographically).
inline std::vector<VertexSet> all_cliques_chordal(const Graph& g) {
  std::set<VertexSet> seen;
  for (const VertexSet& c : maximal_cliques_chordal(g)) {
    const size_t k = c.size();
    for (uint64_t mask = 1; mask < (uint64_t(1) << k); ++mask) {
      VertexSet sub;
      for (size_t i = 0; i < k; ++i)
        if (mask & (uint64_t(1) << i)) sub.push_back(c[i]);
      seen.insert(sub);
    }
  }
  std::vector<VertexSet> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end(), [](const VertexSet& a, const VertexSet& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Graph families
// ---------------------------------------------------------------------------

enum class GraphFamily { kChain, kCycle, kGrid2d, kErdosRenyi, kStar, kDino, kCustom };

struct GraphFamilySpec {
  GraphFamily family = GraphFamily::kChain;
  int p = 4;
  double edge_prob = -1.0;  // Erdos-Renyi; defaults to 3/p when negative
  uint64_t seed = 0;        // random families only
  Graph custom{1};          // used when family == kCustom
};

// The 13-vertex, 15-edge "dino" test graph: three triangles chained at cut
// vertices with six pendant edges. Chordal, and every junction-tree
// separator is a single vertex.
inline Graph dino_graph() {
  Graph g(13);
  const int edges[15][2] = {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {2, 4},  {3, 4},
                            {4, 5}, {4, 6}, {5, 6}, {0, 7}, {1, 8},  {3, 9},
                            {5, 10}, {6, 11}, {11, 12}};
  for (auto& e : edges) g.add_edge(e[0], e[1]);
  return g;
}

inline Graph generate_graph(const GraphFamilySpec& spec, Rng& rng) {
  const int p = spec.p;
  switch (spec.family) {
    case GraphFamily::kChain: {
      Graph g(p);
      for (int i = 0; i + 1 < p; ++i) g.add_edge(i, i + 1);
      return g;
    }
    case GraphFamily::kCycle: {
      if (p < 3) throw InvalidSpec("cycle needs p >= 3");
      Graph g(p);
      for (int i = 0; i + 1 < p; ++i) g.add_edge(i, i + 1);
      g.add_edge(p - 1, 0);
      return g;
    }
    case GraphFamily::kGrid2d: {
      const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p))));
      if (k * k != p) throw InvalidSpec("grid2d needs a perfect-square p");
      Graph g(p);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) {
          if (c + 1 < k) g.add_edge(r * k + c, r * k + c + 1);
          if (r + 1 < k) g.add_edge(r * k + c, (r + 1) * k + c);
        }
      return g;
    }
    case GraphFamily::kErdosRenyi: {
      const double q = spec.edge_prob < 0 ? 3.0 / p : spec.edge_prob;
      Graph g(p);
      for (int s = 0; s < p; ++s)
        for (int t = s + 1; t < p; ++t)
          if (rng.bernoulli(q)) g.add_edge(s, t);
      return g;
    }
    case GraphFamily::kStar: {
      // Hub 0 with degree floor(log p); leftover vertices hang off the last
      // leaf as a pendant path so the graph stays connected.
      if (p < 2) throw InvalidSpec("star needs p >= 2");
      const int hub_degree =
          std::max(1, static_cast<int>(std::floor(std::log(static_cast<double>(p)))));
      Graph g(p);
      const int leaves = std::min(hub_degree, p - 1);
      for (int i = 1; i <= leaves; ++i) g.add_edge(0, i);
      for (int i = leaves + 1; i < p; ++i) g.add_edge(i - 1, i);
      return g;
    }
    case GraphFamily::kDino: {
      if (p != 13) throw InvalidSpec("dino graph has exactly 13 vertices");
      return dino_graph();
    }
    case GraphFamily::kCustom:
      return spec.custom;
  }
  throw InvalidSpec("unknown graph family");
}

inline GraphFamily parse_graph_family(const std::string& name) {
  if (name == "chain") return GraphFamily::kChain;
  if (name == "cycle") return GraphFamily::kCycle;
  if (name == "grid2d" || name == "grid") return GraphFamily::kGrid2d;
  if (name == "erdos_renyi" || name == "er") return GraphFamily::kErdosRenyi;
  if (name == "star") return GraphFamily::kStar;
  if (name == "dino") return GraphFamily::kDino;
  throw InvalidSpec("unknown graph family: " + name);
}

inline std::string graph_family_name(GraphFamily f) {
  switch (f) {
    case GraphFamily::kChain: return "chain";
    case GraphFamily::kCycle: return "cycle";
    case GraphFamily::kGrid2d: return "grid2d";
    case GraphFamily::kErdosRenyi: return "erdos_renyi";
    case GraphFamily::kStar: return "star";
    case GraphFamily::kDino: return "dino";
    case GraphFamily::kCustom: return "custom";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Text format: first line "p <count>", then one "s t" pair per line,
// 0-indexed. Rejects self-loops and out-of-range vertices.
// ---------------------------------------------------------------------------

inline void write_graph(std::ostream& os, const Graph& g) {
  os << "p " << g.num_vertices() << "\n";
  for (auto [s, t] : g.sorted_edges()) os << s << " " << t << "\n";
}

inline Graph read_graph(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty graph file");
  std::istringstream header(line);
  std::string tag;
  int p = 0;
  if (!(header >> tag >> p) || tag != "p" || p < 1)
    throw IoError("graph file must start with 'p <count>'");
  Graph g(p);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    int s, t;
    if (!(row >> s >> t)) throw IoError("bad edge line: " + line);
    if (s < 0 || t < 0 || s >= p || t >= p) throw IoError("vertex out of range: " + line);
    if (s == t) throw IoError("self-loop rejected: " + line);
    g.add_edge(s, t);
  }
  return g;
}

}  // namespace gcm
