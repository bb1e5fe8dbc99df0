#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcm/errors.hpp"
#include "gcm/graph.hpp"
#include "gcm/rng.hpp"

namespace gcm {

// Assignment of all p variables; entries in 0..m-1.
using Configuration = std::vector<int>;

namespace detail {

inline int64_t checked_pow(int64_t base, int exp) {
  int64_t v = 1;
  for (int i = 0; i < exp; ++i) {
    if (v > std::numeric_limits<int64_t>::max() / base)
      throw TooLargeToEnumerate("state space exceeds 2^63");
    v *= base;
  }
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// StatisticBasis: an ordered collection of indicator sufficient statistics.
//
// Each clique C contributes one coordinate per configuration J of its
// variables with all entries nonzero; there are (m-1)^{|C|} of them, laid
// out contiguously. J is encoded big-endian over the sorted vertices of C
// with digits 1..m-1:  index(J) = sum_i (j_i - 1) * (m-1)^(|C|-1-i).
// ---------------------------------------------------------------------------
class StatisticBasis {
 public:
  StatisticBasis(int p, int m, std::vector<VertexSet> cliques)
      : p_(p), m_(m), cliques_(std::move(cliques)) {
    if (m < 2) throw InvalidSpec("alphabet size m must be >= 2");
    offsets_.reserve(cliques_.size() + 1);
    offsets_.push_back(0);
    for (size_t b = 0; b < cliques_.size(); ++b) {
      const VertexSet& c = cliques_[b];
      if (c.empty()) throw InvalidSpec("basis cliques must be nonempty");
      for (size_t i = 0; i < c.size(); ++i) {
        if (c[i] < 0 || c[i] >= p) throw InvalidSpec("basis clique vertex out of range");
        if (i > 0 && c[i] <= c[i - 1]) throw InvalidSpec("basis cliques must be sorted sets");
      }
      if (block_of_.count(c)) throw InvalidSpec("duplicate clique in basis");
      block_of_[c] = static_cast<int>(b);
      offsets_.push_back(offsets_.back() +
                         static_cast<int>(detail::checked_pow(m - 1, static_cast<int>(c.size()))));
    }
  }

  int p() const { return p_; }
  int m() const { return m_; }
  int dimension() const { return offsets_.back(); }
  int num_blocks() const { return static_cast<int>(cliques_.size()); }
  const std::vector<VertexSet>& cliques() const { return cliques_; }
  const VertexSet& clique(int b) const { return cliques_[b]; }

  int block_offset(int b) const { return offsets_[b]; }
  int block_dim(int b) const { return offsets_[b + 1] - offsets_[b]; }

  // Block index of subset A, or -1 when A is not in the basis.
  int find_block(const VertexSet& a) const {
    auto it = block_of_.find(a);
    return it == block_of_.end() ? -1 : it->second;
  }

  // Coordinate of (clique b, configuration digits over sorted vertices),
  // digits in 1..m-1.
  int coord(int b, const std::vector<int>& digits) const {
    int idx = 0;
    for (int d : digits) idx = idx * (m_ - 1) + (d - 1);
    return offsets_[b] + idx;
  }

  // Human-readable label for a coordinate, e.g. "{1;3}:1,1" (1-indexed
  // vertices).
  std::string coord_label(int coordinate) const {
    int b = 0;
    while (offsets_[b + 1] <= coordinate) ++b;
    int local = coordinate - offsets_[b];
    const int k = static_cast<int>(cliques_[b].size());
    std::vector<int> digits(k);
    for (int i = k - 1; i >= 0; --i) {
      digits[i] = local % (m_ - 1) + 1;
      local /= (m_ - 1);
    }
    std::string out = format_vertex_set(cliques_[b]) + ":";
    for (int i = 0; i < k; ++i) {
      if (i) out += ",";
      out += std::to_string(digits[i]);
    }
    return out;
  }

 private:
  int p_, m_;
  std::vector<VertexSet> cliques_;
  std::vector<int> offsets_;
  std::map<VertexSet, int> block_of_;
};

// Basis over singleton vertices only (order 0..p-1).
inline StatisticBasis basis_vertices(int p, int m) {
  std::vector<VertexSet> cliques;
  for (int v = 0; v < p; ++v) cliques.push_back({v});
  return StatisticBasis(p, m, std::move(cliques));
}

// Sorts subsets in graded lexicographic order (size, then lex) and drops
// duplicates. This is the block layout used by every derived basis.
inline std::vector<VertexSet> graded_lex_sorted(std::vector<VertexSet> sets) {
  std::sort(sets.begin(), sets.end(), [](const VertexSet& a, const VertexSet& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  return sets;
}

// All nonempty subsets of A.
inline std::vector<VertexSet> power_set(const VertexSet& a) {
  std::vector<VertexSet> out;
  const size_t k = a.size();
  for (uint64_t mask = 1; mask < (uint64_t(1) << k); ++mask) {
    VertexSet sub;
    for (size_t i = 0; i < k; ++i)
      if (mask & (uint64_t(1) << i)) sub.push_back(a[i]);
    out.push_back(std::move(sub));
  }
  return out;
}

// Basis over V together with pow(S) for each extra set S, in graded lex
// order. Passing no extras gives the plain vertex basis.
inline StatisticBasis basis_vertices_plus_pow(int p, int m,
                                              const std::vector<VertexSet>& extras) {
  std::vector<VertexSet> cliques;
  for (int v = 0; v < p; ++v) cliques.push_back({v});
  for (const VertexSet& s : extras)
    for (VertexSet& sub : power_set(s)) cliques.push_back(std::move(sub));
  return StatisticBasis(p, m, graded_lex_sorted(std::move(cliques)));
}

// Basis of all cliques (maximal and nonmaximal) of a chordal graph.
inline StatisticBasis basis_all_cliques(const Graph& chordal, int m) {
  return StatisticBasis(chordal.num_vertices(), m, all_cliques_chordal(chordal));
}

// ---------------------------------------------------------------------------
// DiscreteMRF: clique-indexed natural parameters over m-ary variables.
// Potential tables use the same configuration encoding as StatisticBasis.
// ---------------------------------------------------------------------------
class DiscreteMRF {
 public:
  DiscreteMRF(int p, int m) : p_(p), m_(m) {
    if (p < 1) throw InvalidSpec("p must be >= 1");
    if (m < 2) throw InvalidSpec("m must be >= 2");
  }

  int p() const { return p_; }
  int m() const { return m_; }

  void set_potential(const VertexSet& clique, std::vector<double> table) {
    if (clique.empty()) throw InvalidSpec("potential cliques must be nonempty");
    for (size_t i = 0; i < clique.size(); ++i) {
      if (clique[i] < 0 || clique[i] >= p_) throw InvalidSpec("potential vertex out of range");
      if (i > 0 && clique[i] <= clique[i - 1]) throw InvalidSpec("potential cliques must be sorted");
    }
    const size_t want =
        static_cast<size_t>(detail::checked_pow(m_ - 1, static_cast<int>(clique.size())));
    if (table.size() != want)
      throw DimensionMismatch("potential table needs (m-1)^|C| entries");
    potentials_[clique] = std::move(table);
  }

  // Scalar shorthand for m = 2, where each clique has a single weight.
  void set_potential(const VertexSet& clique, double weight) {
    set_potential(clique, std::vector<double>{weight});
  }

  const std::map<VertexSet, std::vector<double>>& potentials() const { return potentials_; }

  // Cliques carrying potentials, in graded lex order.
  std::vector<VertexSet> support_cliques() const {
    std::vector<VertexSet> out;
    for (const auto& [c, t] : potentials_) out.push_back(c);
    return graded_lex_sorted(std::move(out));
  }

  // <theta, I(x)>: total natural-parameter weight of configuration x.
  double log_weight(const Configuration& x) const {
    double total = 0.0;
    for (const auto& [clique, table] : potentials_) {
      int idx = 0;
      bool active = true;
      for (int v : clique) {
        if (x[v] == 0) {
          active = false;
          break;
        }
        idx = idx * (m_ - 1) + (x[v] - 1);
      }
      if (active) total += table[idx];
    }
    return total;
  }

 private:
  int p_, m_;
  std::map<VertexSet, std::vector<double>> potentials_;
};

// ---------------------------------------------------------------------------
// Indicator map I(.): X^p -> {0,1}^D for a basis.
// ---------------------------------------------------------------------------
inline Eigen::VectorXd indicator_vector(const StatisticBasis& basis, const Configuration& x) {
  if (static_cast<int>(x.size()) != basis.p())
    throw DimensionMismatch("configuration length != p");
  for (int v : x)
    if (v < 0 || v >= basis.m()) throw DimensionMismatch("configuration entry out of range");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.dimension());
  for (int b = 0; b < basis.num_blocks(); ++b) {
    int idx = 0;
    bool active = true;
    for (int v : basis.clique(b)) {
      if (x[v] == 0) {
        active = false;
        break;
      }
      idx = idx * (basis.m() - 1) + (x[v] - 1);
    }
    if (active) out[basis.block_offset(b) + idx] = 1.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact distribution by full enumeration.
//
// Configurations are indexed with vertex 0 as the least significant digit:
// state = sum_v x_v * m^v. The same convention applies to marginal tables
// over a sorted subset U: index = sum_i x_{U[i]} * m^i.
// ---------------------------------------------------------------------------
struct ExactDistribution {
  int p = 0;
  int m = 2;
  std::vector<double> probs;  // size m^p, strictly positive, sums to 1
  double log_partition = 0.0;

  Configuration config_of(int64_t state) const {
    Configuration x(p);
    for (int v = 0; v < p; ++v) {
      x[v] = static_cast<int>(state % m);
      state /= m;
    }
    return x;
  }

  int64_t state_of(const Configuration& x) const {
    int64_t s = 0;
    for (int v = p - 1; v >= 0; --v) s = s * m + x[v];
    return s;
  }

  // Marginal probability table over sorted subset U.
  std::vector<double> marginal(const VertexSet& u) const {
    std::vector<int64_t> stride(u.size());
    int64_t w = 1;
    for (size_t i = 0; i < u.size(); ++i) {
      stride[i] = w;
      w *= m;
    }
    std::vector<double> out(static_cast<size_t>(w), 0.0);
    Configuration x(p, 0);
    for (int64_t s = 0; s < static_cast<int64_t>(probs.size()); ++s) {
      int64_t idx = 0;
      for (size_t i = 0; i < u.size(); ++i) idx += x[u[i]] * stride[i];
      out[idx] += probs[s];
      // odometer increment
      for (int v = 0; v < p; ++v) {
        if (++x[v] < m) break;
        x[v] = 0;
      }
    }
    return out;
  }

  double entropy() const {
    double h = 0.0;
    for (double q : probs)
      if (q > 0) h -= q * std::log(q);
    return h;
  }
};

inline double entropy_of_table(const std::vector<double>& probs) {
  double h = 0.0;
  for (double q : probs)
    if (q > 0) h -= q * std::log(q);
  return h;
}

constexpr int64_t kDefaultEnumerationCap = int64_t(1) << 20;

namespace detail {

// Incremental enumeration of <theta, I(x)> over all configurations in state
// order. Calls visit(state, log_weight). Amortized O(1) clique updates per
// state via odometer digit tracking.
template <typename Visitor>
void enumerate_log_weights(const DiscreteMRF& model, Visitor&& visit) {
  const int p = model.p(), m = model.m();
  const int64_t n_states = checked_pow(m, p);

  struct CliqueState {
    std::vector<int> vertices;
    std::vector<int> weight;  // positional weight of each vertex digit
    const double* table;
    int zero_count;
    int idx;
    double contribution;
  };
  std::vector<CliqueState> cliques;
  std::vector<std::vector<int>> by_vertex(p);  // vertex -> clique ids
  for (const auto& [cl, table] : model.potentials()) {
    CliqueState cs;
    cs.vertices = cl;
    cs.table = table.data();
    const int k = static_cast<int>(cl.size());
    cs.weight.resize(k);
    int w = 1;
    for (int i = k - 1; i >= 0; --i) {
      cs.weight[i] = w;
      w *= (m - 1);
    }
    cs.zero_count = k;  // x = 0 everywhere at start
    cs.idx = 0;
    cs.contribution = 0.0;
    for (int i = 0; i < k; ++i) by_vertex[cl[i]].push_back(static_cast<int>(cliques.size()));
    cliques.push_back(std::move(cs));
  }

  Configuration x(p, 0);
  double log_w = 0.0;

  auto apply_digit_change = [&](int v, int old_val, int new_val) {
    for (int ci : by_vertex[v]) {
      CliqueState& cs = cliques[ci];
      log_w -= cs.contribution;
      int pos = static_cast<int>(std::lower_bound(cs.vertices.begin(), cs.vertices.end(), v) -
                                 cs.vertices.begin());
      if (old_val == 0) --cs.zero_count;
      if (new_val == 0) ++cs.zero_count;
      const int old_digit = old_val == 0 ? 0 : old_val - 1;
      const int new_digit = new_val == 0 ? 0 : new_val - 1;
      cs.idx += (new_digit - old_digit) * cs.weight[pos];
      cs.contribution = cs.zero_count == 0 ? cs.table[cs.idx] : 0.0;
      log_w += cs.contribution;
    }
  };

  for (int64_t s = 0;; ++s) {
    visit(s, log_w);
    if (s + 1 == n_states) break;
    for (int v = 0; v < p; ++v) {
      const int old_val = x[v];
      if (old_val + 1 < m) {
        x[v] = old_val + 1;
        apply_digit_change(v, old_val, old_val + 1);
        break;
      }
      x[v] = 0;
      apply_digit_change(v, old_val, 0);
    }
  }
}

}  // namespace detail

// Computes the full probability table and the log normalization constant
// Phi(theta) = log sum_x exp<theta, I(x)>, with max-subtraction for
// stability. Throws TooLargeToEnumerate past the state cap.
inline ExactDistribution exact_distribution(const DiscreteMRF& model,
                                            int64_t max_states = kDefaultEnumerationCap) {
  const int64_t n_states = detail::checked_pow(model.m(), model.p());
  if (n_states > max_states)
    throw TooLargeToEnumerate("m^p = " + std::to_string(n_states) + " exceeds cap " +
                              std::to_string(max_states));
  ExactDistribution dist;
  dist.p = model.p();
  dist.m = model.m();
  dist.probs.resize(static_cast<size_t>(n_states));

  double max_lw = -std::numeric_limits<double>::infinity();
  detail::enumerate_log_weights(model, [&](int64_t s, double lw) {
    dist.probs[static_cast<size_t>(s)] = lw;
    if (lw > max_lw) max_lw = lw;
  });
  double total = 0.0;
  for (double& v : dist.probs) {
    v = std::exp(v - max_lw);
    total += v;
  }
  for (double& v : dist.probs) v /= total;
  dist.log_partition = max_lw + std::log(total);
  return dist;
}

// ---------------------------------------------------------------------------
// Random models
// ---------------------------------------------------------------------------

struct WeightDist {
  enum class Kind { kConstant, kUniform } kind = Kind::kConstant;
  double a = 0.0, b = 0.0;  // constant value, or uniform range [a, b)

  static WeightDist constant(double v) { return {Kind::kConstant, v, v}; }
  static WeightDist uniform(double lo, double hi) { return {Kind::kUniform, lo, hi}; }

  double draw(Rng& rng) const {
    return kind == Kind::kConstant ? a : rng.uniform(a, b);
  }
};

struct WeightSpec {
  WeightDist node = WeightDist::constant(0.1);
  WeightDist edge = WeightDist::constant(0.3);
  // When set, cliques of size 3..max_clique_size also get potentials.
  std::optional<WeightDist> higher;
  int max_clique_size = 2;
};

namespace detail {

// All cliques of an arbitrary graph up to the given size, graded lex order.
// Intended for small graphs.
inline std::vector<VertexSet> cliques_up_to(const Graph& g, int max_size) {
  std::vector<VertexSet> frontier, out;
  for (int v = 0; v < g.num_vertices(); ++v) frontier.push_back({v});
  for (int size = 1; size <= max_size && !frontier.empty(); ++size) {
    for (const VertexSet& c : frontier) out.push_back(c);
    std::vector<VertexSet> next;
    for (const VertexSet& c : frontier)
      for (int v = c.back() + 1; v < g.num_vertices(); ++v) {
        bool ok = true;
        for (int u : c)
          if (!g.has_edge(u, v)) {
            ok = false;
            break;
          }
        if (ok) {
          VertexSet ext = c;
          ext.push_back(v);
          next.push_back(std::move(ext));
        }
      }
    frontier = std::move(next);
  }
  return out;
}

}  // namespace detail

// Model with potentials on the cliques of `graph`: every vertex, every edge,
// and (when spec.higher is set) every clique of size <= spec.max_clique_size.
// Draw order is deterministic: vertices ascending, then edges sorted, then
// higher cliques in graded lex order; within a clique, table entries in
// configuration order.
inline DiscreteMRF random_model(const Graph& graph, int m, const WeightSpec& spec, Rng& rng) {
  DiscreteMRF model(graph.num_vertices(), m);
  auto fill = [&](const VertexSet& c, const WeightDist& dist) {
    const size_t n = static_cast<size_t>(
        detail::checked_pow(m - 1, static_cast<int>(c.size())));
    std::vector<double> table(n);
    for (double& v : table) v = dist.draw(rng);
    model.set_potential(c, std::move(table));
  };
  for (int v = 0; v < graph.num_vertices(); ++v) fill({v}, spec.node);
  for (auto [s, t] : graph.sorted_edges()) fill({s, t}, spec.edge);
  if (spec.higher && spec.max_clique_size >= 3) {
    if (spec.max_clique_size > 5)
      throw InvalidSpec("higher-order potentials supported up to cliques of size 5");
    for (const VertexSet& c : detail::cliques_up_to(graph, spec.max_clique_size))
      if (c.size() >= 3) fill(c, *spec.higher);
  }
  return model;
}

// Ising-style convenience: constant node/edge weights on a graph, m = 2.
inline DiscreteMRF ising_model(const Graph& graph, double theta_node, double theta_edge) {
  Rng rng(0);
  WeightSpec spec;
  spec.node = WeightDist::constant(theta_node);
  spec.edge = WeightDist::constant(theta_edge);
  return random_model(graph, 2, spec, rng);
}

// ---------------------------------------------------------------------------
// Model text format: header "p m", then lines "C:J:value" with C a
// comma-separated vertex list (0-indexed) and J a comma-separated
// configuration. Values are printed with max_digits10 so write/read
// round-trips bit-exactly.
// ---------------------------------------------------------------------------

inline void write_model(std::ostream& os, const DiscreteMRF& model) {
  os << model.p() << " " << model.m() << "\n";
  char buf[64];
  for (const auto& [clique, table] : model.potentials()) {
    const int k = static_cast<int>(clique.size());
    for (size_t idx = 0; idx < table.size(); ++idx) {
      std::vector<int> digits(k);
      size_t rem = idx;
      for (int i = k - 1; i >= 0; --i) {
        digits[i] = static_cast<int>(rem % (model.m() - 1)) + 1;
        rem /= (model.m() - 1);
      }
      for (int i = 0; i < k; ++i) os << (i ? "," : "") << clique[i];
      os << ":";
      for (int i = 0; i < k; ++i) os << (i ? "," : "") << digits[i];
      std::snprintf(buf, sizeof(buf), "%.17g", table[idx]);
      os << ":" << buf << "\n";
    }
  }
}

inline DiscreteMRF read_model(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty model file");
  std::istringstream header(line);
  int p = 0, m = 0;
  if (!(header >> p >> m) || p < 1 || m < 2) throw IoError("model header must be 'p m'");
  DiscreteMRF model(p, m);
  std::map<VertexSet, std::vector<double>> tables;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const size_t c1 = line.find(':'), c2 = line.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw IoError("bad model line: " + line);
    auto parse_ints = [&](const std::string& s) {
      std::vector<int> out;
      std::istringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
      return out;
    };
    VertexSet clique = parse_ints(line.substr(0, c1));
    std::vector<int> digits = parse_ints(line.substr(c1 + 1, c2 - c1 - 1));
    const double value = std::strtod(line.c_str() + c2 + 1, nullptr);
    if (digits.size() != clique.size()) throw IoError("bad model line: " + line);
    auto& table = tables[clique];
    if (table.empty())
      table.resize(static_cast<size_t>(
          detail::checked_pow(m - 1, static_cast<int>(clique.size()))));
    int idx = 0;
    for (int d : digits) {
      if (d < 1 || d >= m) throw IoError("configuration digit out of range: " + line);
      idx = idx * (m - 1) + (d - 1);
    }
    table[idx] = value;
  }
  for (auto& [clique, table] : tables) model.set_potential(clique, std::move(table));
  return model;
}

}  // namespace gcm
