#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcm/errors.hpp"
#include "gcm/graph.hpp"
#include "gcm/junction_tree.hpp"
#include "gcm/mrf.hpp"

namespace gcm {

// Exact covariance of the indicator vector I(X) over a statistic basis,
// with the mean mu = E[I(X)].
struct GeneralizedCovariance {
  StatisticBasis basis;
  Eigen::MatrixXd matrix;  // D x D, symmetric positive definite
  Eigen::VectorXd mean;    // coordinates are marginal probabilities
};

// matrix = E[I I^T] - mu mu^T by exact enumeration. Exploits the fact that
// I(x) has at most one nonzero per clique block, so each configuration
// touches only O(#cliques^2) cells. Throws TooLargeToEnumerate /
// NotPositiveDefinite.
inline GeneralizedCovariance generalized_covariance(
    const DiscreteMRF& model, const StatisticBasis& basis,
    int64_t max_states = kDefaultEnumerationCap) {
  if (basis.p() != model.p() || basis.m() != model.m())
    throw DimensionMismatch("basis shape differs from model shape");
  ExactDistribution dist = exact_distribution(model, max_states);

  const int p = model.p(), m = model.m();
  const int nb = basis.num_blocks();
  const int D = basis.dimension();

  // Per-block incremental tracking of the active coordinate.
  std::vector<int> zero_count(nb), local_idx(nb, 0);
  std::vector<std::vector<std::pair<int, int>>> by_vertex(p);  // (block, digit weight)
  for (int b = 0; b < nb; ++b) {
    const VertexSet& c = basis.clique(b);
    zero_count[b] = static_cast<int>(c.size());
    int w = 1;
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) {
      by_vertex[c[i]].push_back({b, w});
      w *= (m - 1);
    }
  }

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(D);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(D, D);
  Configuration x(p, 0);
  std::vector<int> active;
  active.reserve(nb);

  for (int64_t s = 0;; ++s) {
    const double prob = dist.probs[static_cast<size_t>(s)];
    active.clear();
    for (int b = 0; b < nb; ++b)
      if (zero_count[b] == 0) active.push_back(basis.block_offset(b) + local_idx[b]);
    for (size_t i = 0; i < active.size(); ++i) {
      mu[active[i]] += prob;
      double* row = second.data() + static_cast<ptrdiff_t>(active[i]) * D;
      for (size_t j = i; j < active.size(); ++j) row[active[j]] += prob;
    }
    if (s + 1 == static_cast<int64_t>(dist.probs.size())) break;
    for (int v = 0; v < p; ++v) {
      const int old_val = x[v];
      const int new_val = old_val + 1 < m ? old_val + 1 : 0;
      x[v] = new_val;
      for (auto [b, w] : by_vertex[v]) {
        if (old_val == 0) --zero_count[b];
        if (new_val == 0) ++zero_count[b];
        local_idx[b] += ((new_val == 0 ? 0 : new_val - 1) - (old_val == 0 ? 0 : old_val - 1)) * w;
      }
      if (new_val != 0) break;
    }
  }

  // second moment was accumulated in row-major upper form; symmetrize.
  Eigen::MatrixXd cov(D, D);
  for (int i = 0; i < D; ++i)
    for (int j = i; j < D; ++j) {
      // data() is column-major; we wrote second(j, i) above for j >= i.
      double v = second(j, i) - mu[i] * mu[j];
      cov(i, j) = v;
      cov(j, i) = v;
    }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(cov, Eigen::EigenvaluesOnly);
  if (eigs.eigenvalues().minCoeff() <= 0)
    throw NotPositiveDefinite("generalized covariance is not positive definite; "
                              "degenerate or duplicated basis?");
  return GeneralizedCovariance{basis, std::move(cov), std::move(mu)};
}

// Inverse of a generalized covariance with block lookup by vertex subset.
struct GammaBlocks {
  StatisticBasis basis;
  Eigen::MatrixXd gamma;
  double condition_number = 0.0;

  // Sub-block indexed by the statistics of subsets a and b.
  Eigen::MatrixXd block(const VertexSet& a, const VertexSet& b) const {
    const int ba = basis.find_block(a), bb = basis.find_block(b);
    if (ba < 0 || bb < 0) throw DimensionMismatch("subset not present in basis");
    return gamma.block(basis.block_offset(ba), basis.block_offset(bb),
                       basis.block_dim(ba), basis.block_dim(bb));
  }

  double entry(const VertexSet& a, const VertexSet& b) const {
    Eigen::MatrixXd blk = block(a, b);
    if (blk.size() != 1) throw DimensionMismatch("entry() needs 1x1 block (m = 2)");
    return blk(0, 0);
  }
};

// Gamma = cov^{-1} via LDLT with one Newton refinement pass, which drives
// the residual of exact structural zeros down to roundoff.
inline GammaBlocks inverse_and_blocks(const GeneralizedCovariance& cov) {
  const int D = static_cast<int>(cov.matrix.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(cov.matrix, Eigen::EigenvaluesOnly);
  const double lmin = eigs.eigenvalues().minCoeff();
  const double lmax = eigs.eigenvalues().maxCoeff();
  if (lmin <= 0) throw SingularMatrix("covariance not invertible");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov.matrix);
  Eigen::MatrixXd gamma = ldlt.solve(Eigen::MatrixXd::Identity(D, D));
  for (int pass = 0; pass < 2; ++pass)
    gamma = gamma * (2.0 * Eigen::MatrixXd::Identity(D, D) - cov.matrix * gamma);
  gamma = 0.5 * (gamma + gamma.transpose()).eval();
  return GammaBlocks{cov.basis, std::move(gamma), lmax / lmin};
}

// ---------------------------------------------------------------------------
// Block-structure verification
// ---------------------------------------------------------------------------

struct BlockPairReport {
  VertexSet a, b;
  bool forbidden = false;  // must vanish by theory
  double max_abs = 0.0;    // largest |entry| of the block
  double min_abs = 0.0;    // smallest |entry| of the block
  bool pass = true;
};

struct StructureReport {
  std::vector<BlockPairReport> pairs;
  double scale = 0.0;          // max |Gamma| entry, used to scale the tolerance
  double tol = 0.0;            // relative tolerance on forbidden blocks
  double max_forbidden = 0.0;  // max over forbidden blocks of max_abs / scale
  double min_allowed = std::numeric_limits<double>::infinity();  // min entry over allowed blocks
  bool pass = true;

  void finalize() {
    max_forbidden = 0.0;
    min_allowed = std::numeric_limits<double>::infinity();
    pass = true;
    for (auto& pr : pairs) {
      if (pr.forbidden) {
        pr.pass = pr.max_abs <= tol * scale;
        max_forbidden = std::max(max_forbidden, scale > 0 ? pr.max_abs / scale : pr.max_abs);
        pass = pass && pr.pass;
      } else {
        min_allowed = std::min(min_allowed, pr.min_abs);
      }
    }
  }
};

namespace detail {

inline void block_stats(const GammaBlocks& gb, const VertexSet& a, const VertexSet& b,
                        BlockPairReport& out) {
  Eigen::MatrixXd blk = gb.block(a, b);
  out.max_abs = blk.cwiseAbs().maxCoeff();
  out.min_abs = blk.cwiseAbs().minCoeff();
}

inline bool within_common_maximal_clique(const std::vector<VertexSet>& maximal,
                                         const VertexSet& a, const VertexSet& b) {
  VertexSet u = set_union(a, b);
  for (const VertexSet& c : maximal)
    if (is_subset(u, c)) return true;
  return false;
}

}  // namespace detail

// Block graph-structure of the inverse over all cliques of a triangulation:
// blocks Gamma(A, B) must vanish exactly when A and B are not subsets of a
// common maximal clique. Pairs with A = B count as allowed.
inline StructureReport verify_theorem1(const DiscreteMRF& model, const JunctionTree& jt,
                                       double tol = 1e-8,
                                       int64_t max_states = kDefaultEnumerationCap) {
  std::vector<VertexSet> cliques;
  for (const VertexSet& c : jt.cliques)
    for (VertexSet& sub : power_set(c)) cliques.push_back(std::move(sub));
  StatisticBasis basis(model.p(), model.m(), graded_lex_sorted(std::move(cliques)));
  GammaBlocks gb = inverse_and_blocks(generalized_covariance(model, basis, max_states));

  StructureReport report;
  report.tol = tol;
  report.scale = gb.gamma.cwiseAbs().maxCoeff();
  const int nb = basis.num_blocks();
  for (int i = 0; i < nb; ++i)
    for (int j = i; j < nb; ++j) {
      BlockPairReport pr;
      pr.a = basis.clique(i);
      pr.b = basis.clique(j);
      pr.forbidden = !detail::within_common_maximal_clique(jt.cliques, pr.a, pr.b);
      detail::block_stats(gb, pr.a, pr.b, pr);
      report.pairs.push_back(std::move(pr));
    }
  report.finalize();
  return report;
}

// Separator-set corollary: with basis V plus pow(separators), the singleton
// blocks Gamma({s},{t}) vanish for every pair (s,t) outside the triangulated
// edge set. Only singleton-singleton pairs are classified.
inline StructureReport verify_separator_corollary(const DiscreteMRF& model,
                                                  const JunctionTree& jt, double tol = 1e-8,
                                                  int64_t max_states = kDefaultEnumerationCap) {
  StatisticBasis basis = basis_vertices_plus_pow(model.p(), model.m(), jt.separators);
  GammaBlocks gb = inverse_and_blocks(generalized_covariance(model, basis, max_states));

  StructureReport report;
  report.tol = tol;
  report.scale = gb.gamma.cwiseAbs().maxCoeff();
  for (int s = 0; s < model.p(); ++s)
    for (int t = s + 1; t < model.p(); ++t) {
      BlockPairReport pr;
      pr.a = {s};
      pr.b = {t};
      pr.forbidden = !detail::within_common_maximal_clique(jt.cliques, pr.a, pr.b);
      detail::block_stats(gb, pr.a, pr.b, pr);
      report.pairs.push_back(std::move(pr));
    }
  report.finalize();
  return report;
}

// Neighborhood corollary for a vertex s with deg(s) <= d: over the basis
// {s} plus all subsets of V\{s} of size <= d, the blocks Gamma({s}, B)
// vanish for every B not contained in N(s).
inline StructureReport verify_neighborhood_corollary(const DiscreteMRF& model, const Graph& graph,
                                                     int s, int d, double tol = 1e-8,
                                                     int64_t max_states = kDefaultEnumerationCap) {
  if (graph.degree(s) > d) throw InvalidSpec("degree bound d below deg(s)");
  std::vector<VertexSet> cliques{{s}};
  VertexSet others;
  for (int v = 0; v < graph.num_vertices(); ++v)
    if (v != s) others.push_back(v);
  // all subsets of V\{s} of size 1..d
  std::vector<VertexSet> frontier;
  for (int v : others) frontier.push_back({v});
  for (int size = 1; size <= d && !frontier.empty(); ++size) {
    for (const VertexSet& c : frontier) cliques.push_back(c);
    std::vector<VertexSet> next;
    for (const VertexSet& c : frontier)
      for (int v : others)
        if (v > c.back()) {
          VertexSet ext = c;
          ext.push_back(v);
          next.push_back(std::move(ext));
        }
    frontier = std::move(next);
  }
  StatisticBasis basis(model.p(), model.m(), graded_lex_sorted(std::move(cliques)));
  GammaBlocks gb = inverse_and_blocks(generalized_covariance(model, basis, max_states));

  const VertexSet nbrs = graph.neighbors(s);
  StructureReport report;
  report.tol = tol;
  report.scale = gb.gamma.cwiseAbs().maxCoeff();
  const VertexSet self{s};
  for (int b = 0; b < basis.num_blocks(); ++b) {
    const VertexSet& other = basis.clique(b);
    if (other == self) continue;
    BlockPairReport pr;
    pr.a = self;
    pr.b = other;
    pr.forbidden = !is_subset(other, nbrs);
    detail::block_stats(gb, pr.a, pr.b, pr);
    report.pairs.push_back(std::move(pr));
  }
  report.finalize();
  return report;
}

// CSV: A,B,forbidden,max_abs,pass. Subsets are rendered 1-indexed with ';'
// separators so the file stays comma-clean.
inline void write_structure_report(std::ostream& os, const StructureReport& report) {
  os << "A,B,forbidden,max_abs,pass\n";
  for (const auto& pr : report.pairs)
    os << format_vertex_set(pr.a) << "," << format_vertex_set(pr.b) << ","
       << (pr.forbidden ? 1 : 0) << "," << pr.max_abs << "," << (pr.pass ? 1 : 0) << "\n";
}

// ---------------------------------------------------------------------------
// Entropy decomposition over a junction tree
// ---------------------------------------------------------------------------

struct EntropyReport {
  double joint_entropy = 0.0;
  double decomposed = 0.0;  // sum of clique entropies minus separator entropies
  double gap = 0.0;
  double max_factorization_error = 0.0;  // reconstructing q from marginals
};

// Checks H(q) = sum_C H_C - sum_S H_S and the clique/separator marginal
// factorization of q itself. The model must be Markov with respect to the
// chordal graph underlying jt.
inline EntropyReport entropy_decomposition_check(const DiscreteMRF& model,
                                                 const JunctionTree& jt,
                                                 int64_t max_states = kDefaultEnumerationCap) {
  ExactDistribution dist = exact_distribution(model, max_states);
  EntropyReport report;
  report.joint_entropy = dist.entropy();

  std::vector<std::vector<double>> clique_marginals, sep_marginals;
  for (const VertexSet& c : jt.cliques) {
    clique_marginals.push_back(dist.marginal(c));
    report.decomposed += entropy_of_table(clique_marginals.back());
  }
  for (const VertexSet& s : jt.separators) {
    sep_marginals.push_back(dist.marginal(s));
    report.decomposed -= entropy_of_table(sep_marginals.back());
  }
  report.gap = std::abs(report.joint_entropy - report.decomposed);

  // q(x) must equal prod_C q_C(x_C) / prod_S q_S(x_S).
  const int p = dist.p, m = dist.m;
  for (int64_t s = 0; s < static_cast<int64_t>(dist.probs.size()); ++s) {
    Configuration x = dist.config_of(s);
    auto table_index = [&](const VertexSet& u) {
      int64_t idx = 0, w = 1;
      for (int v : u) {
        idx += x[v] * w;
        w *= m;
      }
      return idx;
    };
    double value = 1.0;
    for (size_t i = 0; i < jt.cliques.size(); ++i)
      value *= clique_marginals[i][table_index(jt.cliques[i])];
    for (size_t i = 0; i < jt.separators.size(); ++i)
      value /= sep_marginals[i][table_index(jt.separators[i])];
    report.max_factorization_error =
        std::max(report.max_factorization_error, std::abs(value - dist.probs[s]));
  }
  (void)p;
  return report;
}

// ---------------------------------------------------------------------------
// Mutual incoherence of a covariance matrix
// ---------------------------------------------------------------------------

// alpha = 1 - max_{e in S^c} ||G_{eS} (G_SS)^{-1}||_1 with G = Sigma (x) Sigma,
// indexed by ordered vertex pairs. S must contain all diagonal pairs plus the
// support pairs (both orientations). Entries of G are formed directly as
// G[(s,t),(u,v)] = Sigma(s,u) * Sigma(t,v); no p^2 x p^2 matrix is built.
inline double incoherence_alpha(const Eigen::MatrixXd& sigma,
                                const std::vector<std::pair<int, int>>& support) {
  const int p = static_cast<int>(sigma.rows());
  std::vector<char> in_support(static_cast<size_t>(p) * p, 0);
  for (auto [s, t] : support) {
    in_support[static_cast<size_t>(s) * p + t] = 1;
    in_support[static_cast<size_t>(t) * p + s] = 1;
  }
  for (int s = 0; s < p; ++s) in_support[static_cast<size_t>(s) * p + s] = 1;

  std::vector<std::pair<int, int>> s_pairs, c_pairs;
  for (int s = 0; s < p; ++s)
    for (int t = 0; t < p; ++t)
      (in_support[static_cast<size_t>(s) * p + t] ? s_pairs : c_pairs).emplace_back(s, t);
  if (c_pairs.empty()) return 1.0;

  const int ns = static_cast<int>(s_pairs.size());
  Eigen::MatrixXd gss(ns, ns);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j)
      gss(i, j) = sigma(s_pairs[i].first, s_pairs[j].first) *
                  sigma(s_pairs[i].second, s_pairs[j].second);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gss);
  if (!lu.isInvertible()) throw SingularMatrix("incoherence: singular S-submatrix");

  double worst = 0.0;
  Eigen::VectorXd row(ns);
  for (auto [s, t] : c_pairs) {
    for (int j = 0; j < ns; ++j)
      row[j] = sigma(s, s_pairs[j].first) * sigma(t, s_pairs[j].second);
    // G symmetric on S, so solving against gss directly gives the row action.
    worst = std::max(worst, lu.solve(row).cwiseAbs().sum());
  }
  return 1.0 - worst;
}

}  // namespace gcm
