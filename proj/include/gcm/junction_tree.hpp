#pragma once

#include <algorithm>
#include <numeric>
#include <tuple>
#include <vector>

#include "gcm/errors.hpp"
#include "gcm/graph.hpp"

namespace gcm {

// Junction tree of a chordal graph: maximal cliques as nodes, a spanning
// tree over them, one separator (the intersection of the endpoint cliques)
// per tree edge. Satisfies the running intersection property: for any two
// cliques, their intersection is contained in every separator on the tree
// path between them.
struct JunctionTree {
  std::vector<VertexSet> cliques;
  std::vector<std::pair<int, int>> tree_edges;  // indices into cliques
  std::vector<VertexSet> separators;            // parallel to tree_edges

  bool has_singleton_separators() const {
    for (const VertexSet& s : separators)
      if (s.size() > 1) return false;
    return true;
  }
};

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace detail

inline bool verify_running_intersection(const JunctionTree& jt) {
  const int k = static_cast<int>(jt.cliques.size());
  if (static_cast<int>(jt.tree_edges.size()) != k - 1) return false;
  // adjacency over the clique tree
  std::vector<std::vector<std::pair<int, int>>> adj(k);  // (neighbor, edge idx)
  for (int e = 0; e < k - 1; ++e) {
    auto [a, b] = jt.tree_edges[e];
    adj[a].push_back({b, e});
    adj[b].push_back({a, e});
    if (jt.separators[e] != set_intersection(jt.cliques[a], jt.cliques[b])) return false;
  }
  // For each pair (i, j): walk the unique path, check containment of the
  // intersection in every separator on it.
  for (int i = 0; i < k; ++i) {
    // BFS from i recording the edge used to reach each node.
    std::vector<int> parent_edge(k, -1), parent_node(k, -1);
    std::vector<char> seen(k, 0);
    std::vector<int> queue{i};
    seen[i] = 1;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      int u = queue[qi];
      for (auto [v, e] : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          parent_edge[v] = e;
          parent_node[v] = u;
          queue.push_back(v);
        }
    }
    if (queue.size() != static_cast<size_t>(k)) return false;  // not connected
    for (int j = i + 1; j < k; ++j) {
      VertexSet inter = set_intersection(jt.cliques[i], jt.cliques[j]);
      if (inter.empty()) continue;
      for (int v = j; v != i; v = parent_node[v])
        if (!is_subset(inter, jt.separators[parent_edge[v]])) return false;
    }
  }
  return true;
}

// Builds a junction tree from a chordal graph: maximal cliques from a
// perfect elimination ordering, then a maximum-weight spanning tree on the
// clique graph with weights |C_i ∩ C_j|. Disconnected clique components are
// joined by empty separators so the result is always a single tree.
// Throws NotChordal on non-chordal input.
inline JunctionTree build_junction_tree(const Graph& chordal) {
  JunctionTree jt;
  jt.cliques = maximal_cliques_chordal(chordal);  // throws NotChordal
  const int k = static_cast<int>(jt.cliques.size());
  if (k == 1) return jt;

  // Candidate edges sorted by descending weight; ties by (i, j) for
  // determinism. Zero-weight pairs stay eligible so disconnected graphs
  // still produce a spanning tree.
  std::vector<std::tuple<int, int, int>> cand;  // (-weight, i, j)
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      int w = static_cast<int>(set_intersection(jt.cliques[i], jt.cliques[j]).size());
      cand.emplace_back(-w, i, j);
    }
  std::sort(cand.begin(), cand.end());

  detail::UnionFind uf(k);
  for (auto [neg_w, i, j] : cand) {
    (void)neg_w;
    if (uf.unite(i, j)) {
      jt.tree_edges.emplace_back(i, j);
      jt.separators.push_back(set_intersection(jt.cliques[i], jt.cliques[j]));
      if (static_cast<int>(jt.tree_edges.size()) == k - 1) break;
    }
  }
  if (!verify_running_intersection(jt))
    throw NotChordal("running intersection property failed; input not chordal?");
  return jt;
}

}  // namespace gcm
