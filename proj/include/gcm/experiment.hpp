#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gcm/errors.hpp"
#include "gcm/estimation.hpp"
#include "gcm/graph.hpp"
#include "gcm/mrf.hpp"
#include "gcm/parallel.hpp"
#include "gcm/rng.hpp"
#include "gcm/sampling.hpp"

namespace gcm {

enum class RecoveryMethod { kGlasso, kNodewiseTree, kNodewiseGeneral, kCorrDecay };

inline RecoveryMethod parse_method(const std::string& name) {
  if (name == "glasso") return RecoveryMethod::kGlasso;
  if (name == "nodewise_tree") return RecoveryMethod::kNodewiseTree;
  if (name == "nodewise_general") return RecoveryMethod::kNodewiseGeneral;
  if (name == "corr_decay") return RecoveryMethod::kCorrDecay;
  throw InvalidSpec("unknown method: " + name);
}

inline std::string method_name(RecoveryMethod m) {
  switch (m) {
    case RecoveryMethod::kGlasso: return "glasso";
    case RecoveryMethod::kNodewiseTree: return "nodewise_tree";
    case RecoveryMethod::kNodewiseGeneral: return "nodewise_general";
    case RecoveryMethod::kCorrDecay: return "corr_decay";
  }
  return "?";
}

// Full sweep description: graph family and model weights, method and its
// tuning constants, and the (p, n, rho) grid.
struct ExperimentConfig {
  GraphFamily family = GraphFamily::kChain;
  std::vector<int> p_values{16};
  double edge_prob = -1.0;  // Erdos-Renyi; negative means 3/p
  int m = 2;
  double theta_node = 0.1;
  double theta_edge = 0.3;
  bool star_hub_edge_rule = false;  // theta_edge = 1.2 / floor(log p)

  RecoveryMethod method = RecoveryMethod::kNodewiseTree;
  CombineMode combine = CombineMode::kOr;
  double lambda_c = 0.5;  // lambda = lambda_c sqrt(log p_features / n)
  double tau_c = 2.0;     // tau = tau_c * lambda
  int degree_bound = 2;
  double kappa = 0.5;
  int prescreen_topk = 0;  // > 0 switches the candidate rule to top-k
  int max_features = 20000;

  std::vector<int> n_values;         // explicit n grid, or
  std::vector<double> n_over_logp;   // rescaled grid n = round(x log p)
  std::vector<double> rho_values{0.0};
  int trials = 100;
  uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency

  int64_t max_states = kDefaultEnumerationCap;  // exact sampling cap
  int gibbs_burn_in = 1000;
  int gibbs_thinning = 10;
};

struct PhaseRow {
  std::string family;
  int p = 0;
  int n = 0;
  double n_over_logp = 0.0;
  double rho = 0.0;
  std::string method;
  int success_count = 0;
  int trials = 0;
  double success_rate = 0.0;
  double mean_runtime_ms = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double lambda_c = 0.0;
  int solver_failures = 0;
};

struct PhaseCurve {
  std::vector<PhaseRow> rows;
};

// ---------------------------------------------------------------------------
// Config file: flat "key = value" lines, '#' comments, optional [section]
// headers (ignored). Lists are comma separated.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

template <typename T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    if constexpr (std::is_same_v<T, int>)
      out.push_back(std::stoi(tok));
    else
      out.push_back(std::stod(tok));
  }
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(std::istream& is) {
  ExperimentConfig cfg;
  cfg.rho_values.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty() || line.front() == '[') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidSpec("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));

    if (key == "family") cfg.family = parse_graph_family(value);
    else if (key == "p") cfg.p_values = detail::parse_list<int>(value);
    else if (key == "edge_prob") cfg.edge_prob = std::stod(value);
    else if (key == "m") cfg.m = std::stoi(value);
    else if (key == "theta_node") cfg.theta_node = std::stod(value);
    else if (key == "theta_edge") cfg.theta_edge = std::stod(value);
    else if (key == "edge_weight_rule") cfg.star_hub_edge_rule = (value == "star_hub");
    else if (key == "method") cfg.method = parse_method(value);
    else if (key == "combine") {
      if (value == "and") cfg.combine = CombineMode::kAnd;
      else if (value == "or") cfg.combine = CombineMode::kOr;
      else throw InvalidSpec("combine must be 'and' or 'or'");
    } else if (key == "lambda_c") cfg.lambda_c = std::stod(value);
    else if (key == "tau_c") cfg.tau_c = std::stod(value);
    else if (key == "d") cfg.degree_bound = std::stoi(value);
    else if (key == "kappa") cfg.kappa = std::stod(value);
    else if (key == "prescreen") cfg.prescreen_topk = std::stoi(value);
    else if (key == "max_features") cfg.max_features = std::stoi(value);
    else if (key == "n") cfg.n_values = detail::parse_list<int>(value);
    else if (key == "n_over_logp") cfg.n_over_logp = detail::parse_list<double>(value);
    else if (key == "rho") cfg.rho_values = detail::parse_list<double>(value);
    else if (key == "trials") cfg.trials = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "threads") cfg.threads = std::stoi(value);
    else if (key == "max_states") cfg.max_states = std::stoll(value);
    else if (key == "gibbs_burn_in") cfg.gibbs_burn_in = std::stoi(value);
    else if (key == "gibbs_thinning") cfg.gibbs_thinning = std::stoi(value);
    else throw InvalidSpec("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (cfg.rho_values.empty()) cfg.rho_values.push_back(0.0);
  if (cfg.trials < 1) throw InvalidSpec("trials must be >= 1");
  if (cfg.n_values.empty() && cfg.n_over_logp.empty())
    throw InvalidSpec("config needs an 'n' or 'n_over_logp' grid");
  return cfg;
}

// ---------------------------------------------------------------------------
// Sweep driver
// ---------------------------------------------------------------------------

namespace detail {

struct TrialOutcome {
  bool success = false;
  bool solver_failure = false;
  double precision = 0.0;
  double recall = 0.0;
  double runtime_ms = 0.0;
};

inline void edge_metrics(const std::vector<Graph::Edge>& estimated,
                         const std::vector<Graph::Edge>& truth, TrialOutcome& out) {
  out.success = estimated == truth;
  int hit = 0;
  for (const auto& e : estimated)
    if (std::binary_search(truth.begin(), truth.end(), e)) ++hit;
  out.precision = estimated.empty() ? (truth.empty() ? 1.0 : 0.0)
                                    : static_cast<double>(hit) / estimated.size();
  out.recall = truth.empty() ? 1.0 : static_cast<double>(hit) / truth.size();
}

}  // namespace detail

// Runs every (p, n, rho) cell of the grid, `trials` Monte-Carlo repetitions
// each, and reports one row per cell. Success means exact edge-set recovery.
// Per-trial randomness comes from substreams keyed by the cell's (p, n, rho)
// values and the trial index, so extending the grid never perturbs existing
// cells. Individual solver failures count as recovery failures; they never
// abort the sweep. row_sink (if given) sees rows as cells complete, in grid
// order.
inline PhaseCurve run_phase_transition(
    const ExperimentConfig& cfg,
    const std::function<void(const PhaseRow&)>& row_sink = nullptr,
    std::ostream* log = nullptr) {
  PhaseCurve curve;
  const Rng master(cfg.seed);

  for (int p : cfg.p_values) {
    GraphFamilySpec gspec;
    gspec.family = cfg.family;
    gspec.p = p;
    gspec.edge_prob = cfg.edge_prob;
    Rng graph_rng = master.substream(0x67726170).substream(static_cast<uint64_t>(p));
    const Graph graph = generate_graph(gspec, graph_rng);
    const std::vector<Graph::Edge> truth = graph.sorted_edges();

    double theta_edge = cfg.theta_edge;
    if (cfg.star_hub_edge_rule) {
      const int hub = std::max(1, static_cast<int>(std::floor(std::log(double(p)))));
      theta_edge = 1.2 / hub;
    }
    WeightSpec wspec;
    wspec.node = WeightDist::constant(cfg.theta_node);
    wspec.edge = WeightDist::constant(theta_edge);
    Rng model_rng = master.substream(0x6d6f64).substream(static_cast<uint64_t>(p));
    const DiscreteMRF model = random_model(graph, cfg.m, wspec, model_rng);

    // Exact sampling when the state space fits under the cap, else Gibbs.
    const bool exact_ok =
        static_cast<double>(p) * std::log(double(cfg.m)) <=
        std::log(static_cast<double>(cfg.max_states)) + 1e-9;
    std::optional<ExactDistribution> dist;
    if (exact_ok) dist = exact_distribution(model, cfg.max_states);

    std::vector<int> n_grid = cfg.n_values;
    if (n_grid.empty())
      for (double x : cfg.n_over_logp)
        n_grid.push_back(std::max(2, static_cast<int>(std::llround(x * std::log(double(p))))));

    for (int n : n_grid) {
      for (double rho : cfg.rho_values) {
        Rng cell_rng = master.substream(static_cast<uint64_t>(p))
                           .substream(static_cast<uint64_t>(n))
                           .substream(static_cast<uint64_t>(std::llround(rho * 1e9)));
        std::vector<detail::TrialOutcome> outcomes(cfg.trials);

        parallel_for(cfg.trials, cfg.threads, [&](int trial) {
          const auto t0 = std::chrono::steady_clock::now();
          detail::TrialOutcome& out = outcomes[trial];
          Rng rng = cell_rng.substream(static_cast<uint64_t>(trial));
          try {
            Dataset data;
            if (dist) {
              data = sample_from(*dist, n, rng);
            } else {
              SamplerConfig sc;
              sc.mode = SamplerConfig::Mode::kGibbs;
              sc.burn_in = cfg.gibbs_burn_in;
              sc.thinning = cfg.gibbs_thinning;
              data = gibbs_sample(model, n, sc, rng);
            }
            if (rho > 0) data = corrupt_missing(data, rho, rng);

            EdgeEstimate est;
            switch (cfg.method) {
              case RecoveryMethod::kGlasso: {
                CovarianceEstimate cov = corrected_covariance_missing(data, rho);
                PenaltyParams pen = PenaltyParams::scaled(p, n, cfg.lambda_c, cfg.tau_c);
                est = select_glasso(cov.matrix, pen.lambda, pen.tau);
                break;
              }
              case RecoveryMethod::kNodewiseTree: {
                std::vector<VertexSet> nbhd(p);
                PenaltyParams pen =
                    PenaltyParams::scaled(p - 1, n, cfg.lambda_c, cfg.tau_c);
                for (int s = 0; s < p; ++s) nbhd[s] = select_nodewise_tree(data, s, pen);
                est = combine_neighborhoods(nbhd, cfg.combine);
                break;
              }
              case RecoveryMethod::kNodewiseGeneral: {
                std::vector<VertexSet> nbhd(p);
                int features = 0;  // sum_{k<=d} C(p-1, k)
                double binom = 1.0;
                for (int k = 1; k <= cfg.degree_bound; ++k) {
                  binom = binom * (p - k) / k;
                  features += static_cast<int>(std::llround(binom));
                }
                PenaltyParams pen =
                    PenaltyParams::scaled(features, n, cfg.lambda_c, cfg.tau_c);
                for (int s = 0; s < p; ++s)
                  nbhd[s] = select_nodewise_general(data, s, cfg.degree_bound, pen,
                                                    cfg.max_features);
                est = combine_neighborhoods(nbhd, cfg.combine);
                break;
              }
              case RecoveryMethod::kCorrDecay: {
                std::vector<VertexSet> nbhd(p);
                CorrelationDecayParams cd;
                cd.kappa = cfg.kappa;
                cd.degree_bound = cfg.degree_bound;
                for (int s = 0; s < p; ++s) {
                  // Penalty uses the node's realized feature count |C_d|.
                  CorrDecayResult probe = select_corr_decay(
                      data, s, cd,
                      PenaltyParams::scaled(std::max(2, p - 1), n, cfg.lambda_c, cfg.tau_c),
                      cfg.prescreen_topk, cfg.max_features);
                  if (!probe.empty_candidates && probe.feature_count > 0) {
                    PenaltyParams pen = PenaltyParams::scaled(probe.feature_count, n,
                                                              cfg.lambda_c, cfg.tau_c);
                    probe = select_corr_decay(data, s, cd, pen, cfg.prescreen_topk,
                                              cfg.max_features);
                  }
                  nbhd[s] = probe.neighborhood;
                }
                est = combine_neighborhoods(nbhd, cfg.combine);
                break;
              }
            }
            detail::edge_metrics(est.edges, truth, out);
          } catch (const std::exception&) {
            out.solver_failure = true;
            out.success = false;
          }
          out.runtime_ms =
              std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                  .count();
        });

        PhaseRow row;
        row.family = graph_family_name(cfg.family);
        row.method = method_name(cfg.method);
        row.p = p;
        row.n = n;
        row.n_over_logp = n / std::log(double(p));
        row.rho = rho;
        row.trials = cfg.trials;
        row.lambda_c = cfg.lambda_c;
        for (const auto& out : outcomes) {
          row.success_count += out.success ? 1 : 0;
          row.solver_failures += out.solver_failure ? 1 : 0;
          row.mean_runtime_ms += out.runtime_ms;
          row.mean_precision += out.precision;
          row.mean_recall += out.recall;
        }
        row.success_rate = static_cast<double>(row.success_count) / cfg.trials;
        row.mean_runtime_ms /= cfg.trials;
        row.mean_precision /= cfg.trials;
        row.mean_recall /= cfg.trials;
        if (log)
          (*log) << "cell p=" << p << " n=" << n << " rho=" << rho
                 << " success=" << row.success_rate << " precision=" << row.mean_precision
                 << " recall=" << row.mean_recall << " solver_failures=" << row.solver_failures
                 << "\n";
        if (row_sink) row_sink(row);
        curve.rows.push_back(std::move(row));
      }
    }
  }
  return curve;
}

// ---------------------------------------------------------------------------
// CSV emission. The contract columns come first; lambda_c is recorded last
// so every row carries the penalty constant it was produced with.
// ---------------------------------------------------------------------------

inline const char* kPhaseCsvHeader =
    "family,p,n,n_over_logp,rho,method,success_rate,trials,mean_runtime_ms,lambda_c";

inline void write_phase_row(std::ostream& os, const PhaseRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.6g,%.6g,%s,%.6g,%d,%.3f,%.6g",
                row.family.c_str(), row.p, row.n, row.n_over_logp, row.rho,
                row.method.c_str(), row.success_rate, row.trials, row.mean_runtime_ms,
                row.lambda_c);
  os << buf << "\n";
}

inline void emit_results(std::ostream& os, const PhaseCurve& curve) {
  os << kPhaseCsvHeader << "\n";
  for (const PhaseRow& row : curve.rows) write_phase_row(os, row);
}

inline PhaseCurve read_phase_curve(std::istream& is) {
  PhaseCurve curve;
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty phase CSV");
  if (detail::trim(line) != kPhaseCsvHeader) throw IoError("unexpected phase CSV header");
  while (std::getline(is, line)) {
    if (detail::trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.size() != 10) throw IoError("bad phase CSV row: " + line);
    PhaseRow row;
    row.family = cols[0];
    row.p = std::stoi(cols[1]);
    row.n = std::stoi(cols[2]);
    row.n_over_logp = std::stod(cols[3]);
    row.rho = std::stod(cols[4]);
    row.method = cols[5];
    row.success_rate = std::stod(cols[6]);
    row.trials = std::stoi(cols[7]);
    row.mean_runtime_ms = std::stod(cols[8]);
    row.lambda_c = std::stod(cols[9]);
    row.success_count = static_cast<int>(std::llround(row.success_rate * row.trials));
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

}  // namespace gcm
