#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcm/errors.hpp"
#include "gcm/graph.hpp"
#include "gcm/population.hpp"
#include "gcm/sampling.hpp"

namespace gcm {

// ---------------------------------------------------------------------------
// Covariance estimators
// ---------------------------------------------------------------------------

struct CovarianceEstimate {
  Eigen::MatrixXd matrix;  // symmetric; may be indefinite after correction
  double rho = 0.0;
  bool corrected = false;
  int n_used = 0;
  bool degenerate = false;  // n < 2: rank <= 1 before correction
};

// Bias-corrected covariance for zero-filled missing data:
//   Sigma_hat = (n^-1 sum z z^T) ./ M  -  (1-rho)^-2 zbar zbar^T
// where M has diagonal (1-rho) and off-diagonal (1-rho)^2. With rho = 0 the
// divisions are by 1.0, so the result is bit-identical to the standard
// sample covariance.
inline CovarianceEstimate corrected_covariance_missing(const Dataset& z, double rho) {
  if (rho < 0.0 || rho >= 1.0) throw InvalidRho("rho must lie in [0, 1)");
  if (z.n < 1) throw InvalidSpec("need at least one observation");
  const Eigen::MatrixXd values = z.values.cast<double>();
  const double inv_n = 1.0 / z.n;
  Eigen::MatrixXd second = (values.transpose() * values) * inv_n;
  Eigen::VectorXd mean = values.colwise().sum() * inv_n;

  const double keep = 1.0 - rho;
  const double keep2 = keep * keep;
  CovarianceEstimate est;
  est.rho = rho;
  est.corrected = rho > 0.0;
  est.n_used = z.n;
  est.degenerate = z.n < 2;
  est.matrix.resize(z.p, z.p);
  for (int s = 0; s < z.p; ++s)
    for (int t = 0; t < z.p; ++t)
      est.matrix(s, t) = second(s, t) / (s == t ? keep : keep2) -
                         (mean(s) / keep) * (mean(t) / keep);
  est.matrix = 0.5 * (est.matrix + est.matrix.transpose()).eval();
  return est;
}

// ---------------------------------------------------------------------------
// Product features and nodewise regression pairs
// ---------------------------------------------------------------------------

// Predictor covariance and predictor-target cross covariance for a nodewise
// regression, with column labels identifying the product statistic behind
// each coordinate.
struct RegressionPair {
  Eigen::MatrixXd gamma;            // k x k, possibly indefinite when corrected
  Eigen::VectorXd cross;            // k
  std::vector<VertexSet> labels;    // product subset per column
  std::vector<int> constant_columns;  // predictors with (near) zero variance
};

// All singletons of V \ {s}.
inline std::vector<VertexSet> feature_singletons(int p, int s) {
  std::vector<VertexSet> out;
  for (int v = 0; v < p; ++v)
    if (v != s) out.push_back({v});
  return out;
}

// All subsets of `ground` of size 1..d, in graded lexicographic order.
inline std::vector<VertexSet> feature_subsets(const VertexSet& ground, int d) {
  std::vector<VertexSet> out, frontier;
  for (int v : ground) frontier.push_back({v});
  for (int size = 1; size <= d && !frontier.empty(); ++size) {
    for (const VertexSet& c : frontier) out.push_back(c);
    std::vector<VertexSet> next;
    for (const VertexSet& c : frontier)
      for (int v : ground)
        if (v > c.back()) {
          VertexSet ext = c;
          ext.push_back(v);
          next.push_back(std::move(ext));
        }
    frontier = std::move(next);
  }
  return out;
}

// Recentered (and, for corrupted data, bias-corrected) estimators
// (Gamma_hat, gamma_hat) for regressing column s on the given product
// features. Requires binary data for product features of size > 1.
//
// Correction algebra for zero-filled erasures at rate rho: every product of
// binary columns over subset U satisfies E[prod_U z] = (1-rho)^|U| E[prod_U x],
// and since z^2 = z entrywise, cross moments divide by (1-rho)^|U ∪ W|.
inline RegressionPair nodewise_pair(const Dataset& data, int s,
                                    const std::vector<VertexSet>& features) {
  const int k = static_cast<int>(features.size());
  const double rho = data.corrupted ? data.rho : 0.0;
  for (const VertexSet& u : features) {
    if (data.m != 2 && u.size() > 1)
      throw InvalidSpec("product features need binary data");
    for (int v : u)
      if (v == s) throw DimensionMismatch("target column among predictors");
  }
  if (data.n < 1) throw InvalidSpec("need at least one observation");

  Eigen::MatrixXd F(data.n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < data.n; ++i) {
      int prod = 1;
      for (int v : features[j]) prod *= data.values(i, v);
      F(i, j) = static_cast<double>(prod);
    }
  Eigen::VectorXd y = data.values.col(s).cast<double>();

  const double inv_n = 1.0 / data.n;
  Eigen::MatrixXd raw = (F.transpose() * F) * inv_n;
  Eigen::VectorXd raw_cross = (F.transpose() * y) * inv_n;
  Eigen::VectorXd fmean = F.colwise().sum() * inv_n;
  const double ymean = y.sum() * inv_n;

  const double keep = 1.0 - rho;
  auto union_size = [&](int a, int b) {
    return static_cast<int>(set_union(features[a], features[b]).size());
  };

  RegressionPair pair;
  pair.labels = features;
  pair.gamma.resize(k, k);
  pair.cross.resize(k);
  std::vector<double> mean_corr(k);
  for (int j = 0; j < k; ++j)
    mean_corr[j] = fmean(j) / std::pow(keep, static_cast<double>(features[j].size()));
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) {
      const double v = raw(a, b) / std::pow(keep, static_cast<double>(union_size(a, b))) -
                       mean_corr[a] * mean_corr[b];
      pair.gamma(a, b) = v;
      pair.gamma(b, a) = v;
    }
  const double ymean_corr = ymean / keep;
  for (int j = 0; j < k; ++j)
    pair.cross(j) =
        raw_cross(j) / std::pow(keep, static_cast<double>(features[j].size() + 1)) -
        mean_corr[j] * ymean_corr;

  for (int j = 0; j < k; ++j)
    if (pair.gamma(j, j) < 1e-12) pair.constant_columns.push_back(j);
  return pair;
}

// Population analog: slices the exact generalized covariance into the
// (predictors, predictors) and (predictors, target) parts. Requires every
// block to be one-dimensional (m = 2).
inline RegressionPair population_pair(const GeneralizedCovariance& cov,
                                      const VertexSet& target) {
  const StatisticBasis& basis = cov.basis;
  if (basis.m() != 2) throw InvalidSpec("population_pair expects m = 2");
  const int tb = basis.find_block(target);
  if (tb < 0) throw DimensionMismatch("target not present in basis");

  RegressionPair pair;
  std::vector<int> cols;
  for (int b = 0; b < basis.num_blocks(); ++b)
    if (b != tb) {
      pair.labels.push_back(basis.clique(b));
      cols.push_back(basis.block_offset(b));
    }
  const int k = static_cast<int>(cols.size());
  pair.gamma.resize(k, k);
  pair.cross.resize(k);
  for (int a = 0; a < k; ++a) {
    pair.cross(a) = cov.matrix(cols[a], basis.block_offset(tb));
    for (int b = 0; b < k; ++b) pair.gamma(a, b) = cov.matrix(cols[a], cols[b]);
  }
  return pair;
}

// ---------------------------------------------------------------------------
// Pairwise correlation statistic r_C
// ---------------------------------------------------------------------------

// r_C(s,t) = sum over all m^2 value pairs of |P(X_s=a, X_t=b) - P(a)P(b)|,
// with empirical probabilities. Lies in [0, 2].
inline double empirical_correlation(const Dataset& data, int s, int t) {
  const int m = data.m;
  std::vector<double> joint(static_cast<size_t>(m) * m, 0.0), ps(m, 0.0), pt(m, 0.0);
  const double inv_n = 1.0 / std::max(1, data.n);
  for (int i = 0; i < data.n; ++i) {
    joint[static_cast<size_t>(data.values(i, s)) * m + data.values(i, t)] += inv_n;
    ps[data.values(i, s)] += inv_n;
    pt[data.values(i, t)] += inv_n;
  }
  double r = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) r += std::abs(joint[static_cast<size_t>(a) * m + b] - ps[a] * pt[b]);
  return r;
}

// Population version from an exact distribution.
inline double population_correlation(const ExactDistribution& dist, int s, int t) {
  if (s == t) throw DimensionMismatch("correlation needs distinct columns");
  const std::vector<double> joint = dist.marginal({std::min(s, t), std::max(s, t)});
  const std::vector<double> ps = dist.marginal({s}), pt = dist.marginal({t});
  const int m = dist.m;
  double r = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      // marginal over {min,max} is indexed with the smaller vertex fastest
      const int idx = s < t ? a + m * b : b + m * a;
      r += std::abs(joint[idx] - ps[a] * pt[b]);
    }
  return r;
}

struct CorrelationDecayParams {
  double kappa = 0.0;  // correlation floor on edges
  double zeta = 0.0;   // exponential decay rate in graph distance
  int degree_bound = 2;
};

// ---------------------------------------------------------------------------
// l1-ball projection (exact, sort-based)
// ---------------------------------------------------------------------------

inline Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
  if (radius < 0) throw InvalidSpec("l1 radius must be nonnegative");
  if (radius == 0) return Eigen::VectorXd::Zero(v.size());
  if (v.cwiseAbs().sum() <= radius) return v;
  const int k = static_cast<int>(v.size());
  std::vector<double> mag(k);
  for (int i = 0; i < k; ++i) mag[i] = std::abs(v[i]);
  std::sort(mag.begin(), mag.end(), std::greater<double>());
  double cumulative = 0.0, threshold = 0.0;
  for (int i = 0; i < k; ++i) {
    cumulative += mag[i];
    const double candidate = (cumulative - radius) / (i + 1);
    if (candidate < mag[i]) threshold = candidate;
  }
  Eigen::VectorXd out(k);
  for (int i = 0; i < k; ++i) {
    const double shrunk = std::abs(v[i]) - threshold;
    out[i] = shrunk > 0 ? (v[i] > 0 ? shrunk : -shrunk) : 0.0;
  }
  return out;
}

inline Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < v.size(); ++i) {
    const double shrunk = std::abs(v[i]) - t;
    out[i] = shrunk > 0 ? (v[i] > 0 ? shrunk : -shrunk) : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graphical Lasso:  min_{Theta > 0} tr(Sigma Theta) - log det Theta
//                                    + lambda * sum_{s != t} |Theta_st|
//
// Solved by ADMM with an eigendecomposition proximal step for the log-det
// term, which stays well defined for indefinite Sigma. If the objective
// dives below the configured floor (unbounded indefinite case), the input is
// shifted by (|lambda_min| + 1e-4) I and the solve restarts; the shift is
// reported in the result.
// ---------------------------------------------------------------------------

struct GlassoOptions {
  int max_iters = 20000;
  double tol = 1e-10;       // max-norm primal/dual residual target
  double admm_rho = 1.0;
  bool adaptive_rho = true;
  bool auto_shift = true;   // false: throw UnboundedObjective instead
  double objective_floor = -1e12;
  bool capture_trace = false;
  std::optional<Eigen::MatrixXd> init;  // initial Z (defaults to identity)
};

struct GlassoResult {
  Eigen::MatrixXd theta;   // positive definite
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  double objective = 0.0;
  double shift = 0.0;      // diagonal shift applied to sigma, if any
  std::vector<double> trace;  // objective per iteration when captured
};

namespace detail {

inline double glasso_objective(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& theta,
                               double log_det, double lambda) {
  double l1 = 0.0;
  const int p = static_cast<int>(theta.rows());
  for (int s = 0; s < p; ++s)
    for (int t = 0; t < p; ++t)
      if (s != t) l1 += std::abs(theta(s, t));
  return (sigma.array() * theta.array()).sum() - log_det + lambda * l1;
}

}  // namespace detail

inline GlassoResult graphical_lasso_solve(const Eigen::MatrixXd& sigma_in, double lambda,
                                          const GlassoOptions& options = {}) {
  if (lambda < 0) throw InvalidSpec("lambda must be nonnegative");
  const int p = static_cast<int>(sigma_in.rows());
  Eigen::MatrixXd sigma = 0.5 * (sigma_in + sigma_in.transpose());
  GlassoResult result;

  if (lambda == 0.0) {
    // unregularized solution is the plain inverse; only defined for PD sigma
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    if (eig.eigenvalues().minCoeff() <= 0) {
      if (!options.auto_shift)
        throw UnboundedObjective("graphical lasso objective unbounded for indefinite input");
      result.shift = std::abs(eig.eigenvalues().minCoeff()) + 1e-4;
      sigma += result.shift * Eigen::MatrixXd::Identity(p, p);
      eig.compute(sigma);
    }
    result.theta = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                   eig.eigenvectors().transpose();
    result.iterations = 1;
    result.converged = true;
    result.objective = static_cast<double>(p) + eig.eigenvalues().array().log().sum();
    Eigen::MatrixXd reconstructed = eig.eigenvectors() * eig.eigenvalues().asDiagonal() *
                                    eig.eigenvectors().transpose();
    result.kkt_residual = (sigma - reconstructed).cwiseAbs().maxCoeff();
    return result;
  }

  for (int attempt = 0;; ++attempt) {
    double rho = options.admm_rho;
    Eigen::MatrixXd Z = options.init ? *options.init : Eigen::MatrixXd::Identity(p, p);
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd theta = Z;
    Eigen::VectorXd theta_eigs = Eigen::VectorXd::Ones(p);
    Eigen::MatrixXd theta_vecs = Eigen::MatrixXd::Identity(p, p);
    bool diverged = false;
    result.trace.clear();

    int it = 0;
    for (; it < options.max_iters; ++it) {
      // Theta-step: prox of tr(S.) - logdet at rho(Z - U) - S
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho * (Z - U) - sigma);
      Eigen::VectorXd d = eig.eigenvalues();
      for (int i = 0; i < p; ++i)
        theta_eigs[i] = (d[i] + std::sqrt(d[i] * d[i] + 4.0 * rho)) / (2.0 * rho);
      theta_vecs = eig.eigenvectors();
      theta = theta_vecs * theta_eigs.asDiagonal() * theta_vecs.transpose();

      // Z-step: soft threshold off-diagonal entries
      Eigen::MatrixXd Z_old = Z;
      Z = theta + U;
      const double cut = lambda / rho;
      for (int s = 0; s < p; ++s)
        for (int t = 0; t < p; ++t)
          if (s != t) {
            const double shrunk = std::abs(Z(s, t)) - cut;
            Z(s, t) = shrunk > 0 ? (Z(s, t) > 0 ? shrunk : -shrunk) : 0.0;
          }
      U += theta - Z;

      const double obj = detail::glasso_objective(sigma, theta,
                                                  theta_eigs.array().log().sum(), lambda);
      if (options.capture_trace) result.trace.push_back(obj);
      if (obj < options.objective_floor || !std::isfinite(obj)) {
        diverged = true;
        break;
      }

      const double scale = std::max(1.0, Z.cwiseAbs().maxCoeff());
      const double primal = (theta - Z).cwiseAbs().maxCoeff();
      const double dual = rho * (Z - Z_old).cwiseAbs().maxCoeff();
      if (primal < options.tol * scale && dual < options.tol * scale) {
        result.converged = true;
        break;
      }
      if (options.adaptive_rho && (it + 1) % 50 == 0) {
        if (primal > 10 * dual && rho < 1e6) {
          rho *= 2;
          U *= 0.5;
        } else if (dual > 10 * primal && rho > 1e-4) {
          rho *= 0.5;
          U *= 2.0;
        }
      }
    }

    if (diverged) {
      if (!options.auto_shift || attempt >= 2)
        throw UnboundedObjective("graphical lasso objective unbounded for indefinite input");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
      const double bump = std::abs(eig.eigenvalues().minCoeff()) + 1e-4;
      sigma += bump * Eigen::MatrixXd::Identity(p, p);
      result.shift += bump;
      continue;
    }

    result.theta = theta;
    result.iterations = it + 1;
    result.objective = detail::glasso_objective(sigma, theta,
                                                theta_eigs.array().log().sum(), lambda);

    // KKT residual against the original (possibly shifted) sigma:
    //   diagonal:        sigma_ss - W_ss = 0
    //   active offdiag:  sigma_st - W_st + lambda sign(theta_st) = 0
    //   inactive:        |sigma_st - W_st| <= lambda
    Eigen::MatrixXd W =
        theta_vecs * theta_eigs.cwiseInverse().asDiagonal() * theta_vecs.transpose();
    double kkt = 0.0;
    for (int s = 0; s < p; ++s)
      for (int t = 0; t < p; ++t) {
        const double grad = sigma(s, t) - W(s, t);
        if (s == t)
          kkt = std::max(kkt, std::abs(grad));
        else if (std::abs(Z(s, t)) > 0)
          kkt = std::max(kkt, std::abs(grad + lambda * (Z(s, t) > 0 ? 1.0 : -1.0)));
        else
          kkt = std::max(kkt, std::max(0.0, std::abs(grad) - lambda));
      }
    result.kkt_residual = kkt;
    if (!result.converged)
      throw NotConverged("graphical lasso hit max_iters = " +
                         std::to_string(options.max_iters));
    return result;
  }
}

// ---------------------------------------------------------------------------
// Modified Lasso:  min_{||beta||_1 <= R} 0.5 b' Gamma b - gamma' b
//                                         + lambda ||beta||_1
//
// Composite gradient descent with monotone acceleration; Gamma may be
// indefinite. Each step soft thresholds and projects, which is the exact
// prox of the penalty plus ball constraint with step 1/L, L >= lambda_max.
// Every iteration also evaluates the plain (unaccelerated) step and keeps
// whichever is better, so the objective never increases; momentum restarts
// whenever the extrapolated step overshoots.
// ---------------------------------------------------------------------------

struct ModifiedLassoOptions {
  int max_iters = 100000;
  double rel_tol = 1e-9;          // relative objective change
  double stationarity_tol = 1e-7;  // gradient-mapping max-norm; 0 disables
  bool capture_trace = false;
};

struct LassoResult {
  Eigen::VectorXd beta;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double stationarity = 0.0;  // composite gradient-mapping max-norm
  std::vector<double> trace;
};

inline LassoResult modified_lasso_solve(const Eigen::MatrixXd& gamma,
                                        const Eigen::VectorXd& cross, double lambda,
                                        double radius,
                                        const ModifiedLassoOptions& options = {}) {
  if (lambda < 0 || radius <= 0) throw InvalidSpec("need lambda >= 0 and R > 0");
  if (gamma.rows() != cross.size()) throw DimensionMismatch("gamma/cross shapes differ");
  const int k = static_cast<int>(cross.size());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gamma, Eigen::EigenvaluesOnly);
  const double L = std::max(eig.eigenvalues().maxCoeff(), 1e-8);

  auto objective = [&](const Eigen::VectorXd& b) {
    return 0.5 * b.dot(gamma * b) - cross.dot(b) + lambda * b.cwiseAbs().sum();
  };
  auto prox_step = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd v = b - (gamma * b - cross) / L;
    return project_l1_ball(soft_threshold(v, lambda / L), radius);
  };

  LassoResult result;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(k), y = x;
  double momentum = 1.0;
  double obj = objective(x);
  int it = 0;
  for (; it < options.max_iters; ++it) {
    Eigen::VectorXd accelerated = prox_step(y);
    const double f_acc = objective(accelerated);
    Eigen::VectorXd plain = prox_step(x);
    const double f_plain = objective(plain);
    const double gradient_map = L * (x - plain).cwiseAbs().maxCoeff();

    Eigen::VectorXd x_next = f_acc <= f_plain ? accelerated : plain;
    double obj_next = std::min(f_acc, f_plain);
    if (obj_next > obj) {
      x_next = x;
      obj_next = obj;
    }
    if (options.capture_trace) result.trace.push_back(obj_next);

    if (f_acc > obj) {
      y = x_next;  // overshoot: restart momentum
      momentum = 1.0;
    } else {
      const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      y = x_next + (momentum / momentum_next) * (accelerated - x_next) +
          ((momentum - 1.0) / momentum_next) * (x_next - x);
      momentum = momentum_next;
    }

    const double change = obj - obj_next;
    x = std::move(x_next);
    obj = obj_next;
    if (change <= options.rel_tol * std::max(1.0, std::abs(obj)) &&
        (options.stationarity_tol <= 0 || gradient_map <= options.stationarity_tol)) {
      result.converged = true;
      ++it;
      break;
    }
  }
  result.beta = x;
  result.iterations = it;
  result.objective = obj;
  result.stationarity = (L * (x - prox_step(x))).cwiseAbs().maxCoeff();
  if (!result.converged)
    throw NotConverged("modified lasso hit max_iters = " + std::to_string(options.max_iters));
  return result;
}

// Plug-in l1-ball radius R = b0 sqrt(k): b0 is twice the l1 norm of a
// lightly ridged least-squares fit, k the degree bound.
inline double modified_lasso_radius(const RegressionPair& pair, int degree_bound) {
  const int k = static_cast<int>(pair.cross.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pair.gamma, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double mean_diag = pair.gamma.diagonal().cwiseAbs().mean();
  const double ridge = std::max(1e-3 * std::max(mean_diag, 1e-8),
                                lmin < 0 ? -lmin + 1e-6 : 0.0);
  Eigen::VectorXd ls =
      (pair.gamma + ridge * Eigen::MatrixXd::Identity(k, k)).ldlt().solve(pair.cross);
  const double b0 = 2.0 * ls.cwiseAbs().sum();
  return std::max(b0, 1e-6) * std::sqrt(static_cast<double>(std::max(1, degree_bound)));
}

// ---------------------------------------------------------------------------
// Penalty scaling
// ---------------------------------------------------------------------------

struct PenaltyParams {
  double lambda = 0.0;
  double tau = 0.0;
  double radius = std::numeric_limits<double>::infinity();

  // lambda = c_lambda sqrt(log(p_features) / n), tau = c_tau * lambda.
  static PenaltyParams scaled(int feature_count, int n, double c_lambda = 0.5,
                              double c_tau = 2.0) {
    PenaltyParams out;
    out.lambda = c_lambda * std::sqrt(std::log(static_cast<double>(std::max(feature_count, 2))) /
                                      std::max(1, n));
    out.tau = c_tau * out.lambda;
    return out;
  }
};

// ---------------------------------------------------------------------------
// Graph selection (Algorithms 1-4)
// ---------------------------------------------------------------------------

struct EdgeEstimate {
  int p = 0;
  std::vector<Graph::Edge> edges;        // sorted pairs (s < t)
  Eigen::MatrixXd statistic;             // per-pair magnitude behind the call
  std::vector<VertexSet> neighborhoods;  // populated by nodewise drivers
};

// Graphical Lasso selection: solve at lambda, keep |theta_st| > tau.
inline EdgeEstimate select_glasso(const Eigen::MatrixXd& sigma_hat, double lambda, double tau,
                                  const GlassoOptions& options = {}) {
  GlassoResult sol = graphical_lasso_solve(sigma_hat, lambda, options);
  EdgeEstimate est;
  est.p = static_cast<int>(sigma_hat.rows());
  est.statistic = sol.theta.cwiseAbs();
  for (int s = 0; s < est.p; ++s)
    for (int t = s + 1; t < est.p; ++t)
      if (est.statistic(s, t) > tau) est.edges.emplace_back(s, t);
  return est;
}

inline VertexSet support_vertices(const Eigen::VectorXd& beta,
                                  const std::vector<VertexSet>& labels, double tau) {
  VertexSet out;
  for (int j = 0; j < beta.size(); ++j)
    if (std::abs(beta[j]) > tau)
      for (int v : labels[j]) out.push_back(v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Nodewise method for trees: regress X_s on the remaining columns with the
// modified Lasso, then threshold.
inline VertexSet select_nodewise_tree(const Dataset& data, int s, const PenaltyParams& penalty,
                                      const ModifiedLassoOptions& options = {}) {
  if (data.m != 2) throw InvalidSpec("nodewise selection expects binary data");
  RegressionPair pair = nodewise_pair(data, s, feature_singletons(data.p, s));
  const double radius = std::isfinite(penalty.radius)
                            ? penalty.radius
                            : modified_lasso_radius(pair, 2);
  LassoResult sol = modified_lasso_solve(pair.gamma, pair.cross, penalty.lambda, radius, options);
  return support_vertices(sol.beta, pair.labels, penalty.tau);
}

// Nodewise method for general graphs with degree bound d: regress X_s on all
// products of subsets of the other variables of size at most d.
inline VertexSet select_nodewise_general(const Dataset& data, int s, int d,
                                         const PenaltyParams& penalty,
                                         int max_features = 20000,
                                         const ModifiedLassoOptions& options = {}) {
  if (data.m != 2) throw InvalidSpec("nodewise selection expects binary data");
  VertexSet others;
  for (int v = 0; v < data.p; ++v)
    if (v != s) others.push_back(v);
  std::vector<VertexSet> labels = feature_subsets(others, d);
  if (static_cast<int>(labels.size()) > max_features)
    throw FeatureExplosion("nodewise feature count " + std::to_string(labels.size()) +
                           " exceeds cap " + std::to_string(max_features));
  RegressionPair pair = nodewise_pair(data, s, labels);
  const double radius = std::isfinite(penalty.radius)
                            ? penalty.radius
                            : modified_lasso_radius(pair, d);
  LassoResult sol = modified_lasso_solve(pair.gamma, pair.cross, penalty.lambda, radius, options);
  return support_vertices(sol.beta, pair.labels, penalty.tau);
}

struct CorrDecayResult {
  VertexSet neighborhood;
  VertexSet candidates;
  std::vector<double> correlations;  // r_hat(s, t) for every t
  double candidate_bound = 0.0;      // d^(log(4/kappa)/zeta) when zeta > 0
  bool empty_candidates = false;
  int feature_count = 0;
};

// Nodewise method with correlation prescreening. Candidates are either the
// nodes with empirical correlation above kappa/2 (the thresholded rule) or,
// when top_k > 0, the top_k most correlated nodes. Features are all
// singletons plus products over candidate subsets of size 2..d.
inline CorrDecayResult select_corr_decay(const Dataset& data, int s,
                                         const CorrelationDecayParams& params,
                                         const PenaltyParams& penalty, int top_k = 0,
                                         int max_features = 20000,
                                         const ModifiedLassoOptions& options = {}) {
  if (data.m != 2) throw InvalidSpec("nodewise selection expects binary data");
  CorrDecayResult result;
  result.correlations.assign(data.p, 0.0);
  std::vector<std::pair<double, int>> ranked;
  for (int t = 0; t < data.p; ++t) {
    if (t == s) continue;
    result.correlations[t] = empirical_correlation(data, s, t);
    ranked.push_back({-result.correlations[t], t});
  }
  if (top_k > 0) {
    std::sort(ranked.begin(), ranked.end());
    for (int i = 0; i < std::min<int>(top_k, ranked.size()); ++i)
      result.candidates.push_back(ranked[i].second);
    std::sort(result.candidates.begin(), result.candidates.end());
  } else {
    for (auto [neg_r, t] : ranked)
      if (-neg_r > params.kappa / 2) result.candidates.push_back(t);
    std::sort(result.candidates.begin(), result.candidates.end());
  }
  if (params.zeta > 0 && params.kappa > 0)
    result.candidate_bound = std::pow(static_cast<double>(params.degree_bound),
                                      std::log(4.0 / params.kappa) / params.zeta);
  if (result.candidates.empty()) {
    result.empty_candidates = true;
    return result;
  }

  std::vector<VertexSet> labels = feature_singletons(data.p, s);
  for (VertexSet& u : feature_subsets(result.candidates, params.degree_bound))
    if (u.size() >= 2) labels.push_back(std::move(u));
  if (static_cast<int>(labels.size()) > max_features)
    throw FeatureExplosion("corr-decay feature count exceeds cap");
  result.feature_count = static_cast<int>(labels.size());

  RegressionPair pair = nodewise_pair(data, s, labels);
  const double radius = std::isfinite(penalty.radius)
                            ? penalty.radius
                            : modified_lasso_radius(pair, params.degree_bound);
  LassoResult sol = modified_lasso_solve(pair.gamma, pair.cross, penalty.lambda, radius, options);
  result.neighborhood = support_vertices(sol.beta, pair.labels, penalty.tau);
  return result;
}

enum class CombineMode { kAnd, kOr };

// AND: edge iff both endpoints name each other; OR: either one suffices.
inline EdgeEstimate combine_neighborhoods(const std::vector<VertexSet>& neighborhoods,
                                          CombineMode mode) {
  const int p = static_cast<int>(neighborhoods.size());
  EdgeEstimate est;
  est.p = p;
  est.neighborhoods = neighborhoods;
  est.statistic = Eigen::MatrixXd::Zero(p, p);
  for (int s = 0; s < p; ++s)
    for (int t = s + 1; t < p; ++t) {
      const bool st = std::binary_search(neighborhoods[s].begin(), neighborhoods[s].end(), t);
      const bool ts = std::binary_search(neighborhoods[t].begin(), neighborhoods[t].end(), s);
      const bool keep = mode == CombineMode::kAnd ? (st && ts) : (st || ts);
      if (keep) {
        est.edges.emplace_back(s, t);
        est.statistic(s, t) = est.statistic(t, s) = 1.0;
      }
    }
  return est;
}

// Diagnostics CSV: iteration,objective.
inline void write_solver_trace_csv(std::ostream& os, const std::vector<double>& trace) {
  os << "iteration,objective\n";
  char buf[64];
  for (size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", trace[i]);
    os << i << "," << buf << "\n";
  }
}

}  // namespace gcm
