// Command-line front end: population verification runs, Monte-Carlo
// phase-transition sweeps, graph/model generation, sampling, and estimation.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid input.
//
// Vertex labels on this surface (basis specs, printed blocks) are 1-indexed
// to match the usual presentation; graph and dataset FILES are 0-indexed.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcm/gcm.hpp"

namespace {

using namespace gcm;

// "chain4", "cycle4", "grid9", "star8", "dino", "er64", or "file:PATH".
Graph parse_graph_token(const std::string& token, uint64_t seed, double edge_prob) {
  if (token.rfind("file:", 0) == 0) {
    std::ifstream in(token.substr(5));
    if (!in) throw IoError("cannot open graph file " + token.substr(5));
    return read_graph(in);
  }
  size_t digits = token.size();
  while (digits > 0 && std::isdigit(static_cast<unsigned char>(token[digits - 1]))) --digits;
  const std::string name = token.substr(0, digits);
  GraphFamilySpec spec;
  spec.family = parse_graph_family(name);
  spec.p = digits < token.size() ? std::stoi(token.substr(digits))
                                 : (spec.family == GraphFamily::kDino ? 13 : 0);
  if (spec.p <= 0) throw InvalidSpec("graph token needs a size, e.g. chain4");
  spec.edge_prob = edge_prob;
  spec.seed = seed;
  Rng rng(seed);
  return generate_graph(spec, rng);
}

DiscreteMRF model_from_weights(const Graph& graph, int m, const std::string& weights) {
  std::istringstream ss(weights);
  std::string tok;
  std::vector<double> w;
  while (std::getline(ss, tok, ',')) w.push_back(std::stod(tok));
  if (w.size() != 2) throw InvalidSpec("--weights expects 'node,edge'");
  WeightSpec spec;
  spec.node = WeightDist::constant(w[0]);
  spec.edge = WeightDist::constant(w[1]);
  Rng rng(0);
  return random_model(graph, m, spec, rng);
}

void print_labeled_matrix(const std::string& title, const Eigen::MatrixXd& mat,
                          const StatisticBasis& basis) {
  std::printf("%s\n", title.c_str());
  std::printf("%14s", "");
  for (int j = 0; j < mat.cols(); ++j)
    std::printf(" %13s", basis.coord_label(j).c_str());
  std::printf("\n");
  for (int i = 0; i < mat.rows(); ++i) {
    std::printf("%14s", basis.coord_label(i).c_str());
    for (int j = 0; j < mat.cols(); ++j) std::printf(" %13.2f", mat(i, j));
    std::printf("\n");
  }
}

// Parses "vertices", "all-cliques", or "vertices+sep:1,3[;2,4]" (1-indexed).
struct BasisSpec {
  enum class Kind { kVertices, kVerticesPlusSeps, kAllCliques } kind = Kind::kVertices;
  std::vector<VertexSet> separators;  // 0-indexed after parsing
};

BasisSpec parse_basis_spec(const std::string& text, int p) {
  BasisSpec spec;
  if (text == "vertices") return spec;
  if (text == "all-cliques") {
    spec.kind = BasisSpec::Kind::kAllCliques;
    return spec;
  }
  const std::string prefix = "vertices+sep:";
  if (text.rfind(prefix, 0) != 0)
    throw InvalidSpec("basis must be 'vertices', 'all-cliques', or 'vertices+sep:...'");
  spec.kind = BasisSpec::Kind::kVerticesPlusSeps;
  std::istringstream groups(text.substr(prefix.size()));
  std::string group;
  while (std::getline(groups, group, ';')) {
    VertexSet sep;
    std::istringstream ss(group);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const int v = std::stoi(tok) - 1;  // 1-indexed on the CLI
      if (v < 0 || v >= p) throw InvalidSpec("separator vertex out of range: " + tok);
      sep.push_back(v);
    }
    std::sort(sep.begin(), sep.end());
    sep.erase(std::unique(sep.begin(), sep.end()), sep.end());
    if (!sep.empty()) spec.separators.push_back(std::move(sep));
  }
  return spec;
}

int run_population_check(const std::string& graph_token, const std::string& weights, int m,
                         const std::string& basis_text, double tol, int64_t max_states,
                         uint64_t seed, const std::string& report_path) {
  const Graph graph = parse_graph_token(graph_token, seed, -1.0);
  const DiscreteMRF model = model_from_weights(graph, m, weights);
  const BasisSpec bspec = parse_basis_spec(basis_text, graph.num_vertices());

  StructureReport report;
  std::unique_ptr<StatisticBasis> basis;
  if (bspec.kind == BasisSpec::Kind::kAllCliques) {
    TriangulationResult tri = triangulate(graph);
    JunctionTree jt = build_junction_tree(tri.chordal);
    report = verify_theorem1(model, jt, tol, max_states);
    basis = std::make_unique<StatisticBasis>(
        StatisticBasis(model.p(), model.m(), all_cliques_chordal(tri.chordal)));
  } else {
    basis = std::make_unique<StatisticBasis>(
        basis_vertices_plus_pow(model.p(), model.m(), bspec.separators));
  }

  GeneralizedCovariance cov = generalized_covariance(model, *basis, max_states);
  GammaBlocks gb = inverse_and_blocks(cov);

  std::printf("graph: %s  p=%d  m=%d  basis dimension D=%d\n", graph_token.c_str(),
              graph.num_vertices(), m, basis->dimension());
  std::printf("\nmu (marginal probabilities of each statistic):\n");
  for (int i = 0; i < cov.mean.size(); ++i)
    std::printf("  %-13s %10.6f\n", basis->coord_label(i).c_str(), cov.mean[i]);
  print_labeled_matrix("\nSigma = cov(Psi(X)):", cov.matrix, *basis);
  print_labeled_matrix("\nGamma = Sigma^{-1}:", gb.gamma, *basis);
  if (gb.condition_number > 1e10)
    std::printf("warning: covariance condition number %.3e\n", gb.condition_number);

  if (bspec.kind != BasisSpec::Kind::kAllCliques) {
    // Singleton blocks must vanish outside the augmented edge set: graph
    // edges plus pairs inside a declared separator.
    report.tol = tol;
    report.scale = gb.gamma.cwiseAbs().maxCoeff();
    for (int s = 0; s < graph.num_vertices(); ++s)
      for (int t = s + 1; t < graph.num_vertices(); ++t) {
        BlockPairReport pr;
        pr.a = {s};
        pr.b = {t};
        bool allowed = graph.has_edge(s, t);
        for (const VertexSet& sep : bspec.separators)
          if (!allowed && is_subset({s, t}, sep)) allowed = true;
        pr.forbidden = !allowed;
        Eigen::MatrixXd blk = gb.block(pr.a, pr.b);
        pr.max_abs = blk.cwiseAbs().maxCoeff();
        pr.min_abs = blk.cwiseAbs().minCoeff();
        report.pairs.push_back(std::move(pr));
      }
    report.finalize();
  }

  std::printf("\nstructure check: %zu block pairs, scale=%.4g, tolerance=%.1e (scaled)\n",
              report.pairs.size(), report.scale, report.tol);
  int violations = 0;
  for (const auto& pr : report.pairs)
    if (pr.forbidden && !pr.pass) {
      ++violations;
      std::printf("  violation: Gamma(%s,%s) max |entry| = %.4g\n",
                  format_vertex_set(pr.a).c_str(), format_vertex_set(pr.b).c_str(), pr.max_abs);
    }
  std::printf("forbidden blocks: max scaled magnitude %.3e -> %s\n", report.max_forbidden,
              report.pass ? "PASS" : "FAIL");

  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw IoError("cannot write " + report_path);
    write_structure_report(out, report);
  }
  return report.pass ? 0 : 1;
}

int run_phase_transition_cmd(const std::string& config_path, const std::string& out_path,
                             std::optional<uint64_t> seed, std::optional<int> trials,
                             std::optional<int> threads) {
  std::ifstream cfg_in(config_path);
  if (!cfg_in) throw IoError("cannot open config " + config_path);
  ExperimentConfig cfg = parse_experiment_config(cfg_in);
  if (seed) cfg.seed = *seed;
  if (trials) cfg.trials = *trials;
  if (threads) cfg.threads = *threads;

  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file_out.open(out_path);
    if (!file_out) throw IoError("cannot write " + out_path);
    out = &file_out;
  }
  (*out) << kPhaseCsvHeader << "\n";
  out->flush();
  run_phase_transition(
      cfg,
      [&](const PhaseRow& row) {
        write_phase_row(*out, row);
        out->flush();
      },
      &std::cerr);
  return 0;
}

int run_graph_gen(const std::string& family, int p, uint64_t seed, double edge_prob,
                  const std::string& out_path) {
  GraphFamilySpec spec;
  spec.family = parse_graph_family(family);
  spec.p = spec.family == GraphFamily::kDino && p == 0 ? 13 : p;
  spec.edge_prob = edge_prob;
  spec.seed = seed;
  Rng rng(seed);
  const Graph g = generate_graph(spec, rng);
  if (out_path.empty()) {
    write_graph(std::cout, g);
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    write_graph(out, g);
  }
  return 0;
}

int run_sample(const std::string& model_path, const std::string& graph_token,
               const std::string& weights, int m, int n, uint64_t seed, double rho,
               bool gibbs, int burn_in, int thin, int64_t max_states,
               const std::string& out_path, const std::string& mask_path) {
  std::optional<DiscreteMRF> model;
  if (!model_path.empty()) {
    std::ifstream in(model_path);
    if (!in) throw IoError("cannot open model " + model_path);
    model = read_model(in);
  } else if (!graph_token.empty()) {
    model = model_from_weights(parse_graph_token(graph_token, seed, -1.0), m, weights);
  } else {
    throw InvalidSpec("sample needs --model or --graph");
  }

  Rng rng = Rng(seed).substream(0x73616d70);
  Dataset data;
  if (gibbs) {
    SamplerConfig sc;
    sc.mode = SamplerConfig::Mode::kGibbs;
    sc.burn_in = burn_in;
    sc.thinning = thin;
    data = gibbs_sample(*model, n, sc, rng);
  } else {
    data = exact_sample(*model, n, rng, max_states);
  }
  if (rho > 0) {
    Rng corrupt_rng = rng.substream(0x6d697373);
    data = corrupt_missing(data, rho, corrupt_rng);
  }

  if (out_path.empty()) {
    write_dataset_csv(std::cout, data);
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    write_dataset_csv(out, data);
  }
  if (!mask_path.empty()) {
    if (!data.corrupted) throw InvalidSpec("--mask-out needs --rho > 0");
    std::ofstream out(mask_path);
    if (!out) throw IoError("cannot write " + mask_path);
    write_mask_csv(out, data);
  }
  return 0;
}

int run_estimate(const std::string& data_path, int m, double rho, const std::string& method_name_,
                 double lambda, double lambda_c, double tau, double tau_c, int d, double kappa,
                 int prescreen, const std::string& combine, const std::string& out_path) {
  std::ifstream in(data_path);
  if (!in) throw IoError("cannot open data " + data_path);
  Dataset data = read_dataset_csv(in, m);
  if (rho > 0) {
    data.corrupted = true;
    data.rho = rho;
  }
  const int p = data.p;
  const RecoveryMethod method = parse_method(method_name_);
  const CombineMode mode = combine == "and" ? CombineMode::kAnd : CombineMode::kOr;

  auto penalty_for = [&](int features) {
    PenaltyParams pen = PenaltyParams::scaled(features, data.n, lambda_c, tau_c);
    if (lambda >= 0) pen.lambda = lambda;
    if (tau >= 0) pen.tau = tau;
    return pen;
  };

  EdgeEstimate est;
  switch (method) {
    case RecoveryMethod::kGlasso: {
      CovarianceEstimate cov = corrected_covariance_missing(data, data.corrupted ? data.rho : 0);
      PenaltyParams pen = penalty_for(p);
      est = select_glasso(cov.matrix, pen.lambda, pen.tau);
      break;
    }
    case RecoveryMethod::kNodewiseTree: {
      std::vector<VertexSet> nbhd(p);
      PenaltyParams pen = penalty_for(p - 1);
      for (int s = 0; s < p; ++s) nbhd[s] = select_nodewise_tree(data, s, pen);
      est = combine_neighborhoods(nbhd, mode);
      break;
    }
    case RecoveryMethod::kNodewiseGeneral: {
      std::vector<VertexSet> nbhd(p);
      VertexSet ground;
      for (int v = 1; v < p; ++v) ground.push_back(v);
      PenaltyParams pen =
          penalty_for(static_cast<int>(feature_subsets(ground, d).size()));
      for (int s = 0; s < p; ++s) nbhd[s] = select_nodewise_general(data, s, d, pen);
      est = combine_neighborhoods(nbhd, mode);
      break;
    }
    case RecoveryMethod::kCorrDecay: {
      std::vector<VertexSet> nbhd(p);
      CorrelationDecayParams cd;
      cd.kappa = kappa;
      cd.degree_bound = d;
      for (int s = 0; s < p; ++s) {
        CorrDecayResult res =
            select_corr_decay(data, s, cd, penalty_for(std::max(2, p - 1)), prescreen);
        if (!res.empty_candidates && res.feature_count > 0)
          res = select_corr_decay(data, s, cd, penalty_for(res.feature_count), prescreen);
        if (res.empty_candidates)
          std::fprintf(stderr, "warning: empty candidate set at node %d\n", s + 1);
        nbhd[s] = res.neighborhood;
      }
      est = combine_neighborhoods(nbhd, mode);
      break;
    }
  }

  Graph out_graph(p);
  for (auto [s, t] : est.edges) out_graph.add_edge(s, t);
  if (out_path.empty()) {
    write_graph(std::cout, out_graph);
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    write_graph(out, out_graph);
  }
  std::fprintf(stderr, "estimated %d edges over p=%d (n=%d, method=%s)\n",
               out_graph.num_edges(), p, data.n, method_name_.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure estimation for discrete graphical models via generalized "
               "covariance matrices"};
  app.require_subcommand(1);

  // population-check
  std::string pc_graph = "chain4", pc_weights = "0.1,2.0", pc_basis = "vertices";
  std::string pc_report;
  int pc_m = 2;
  double pc_tol = 1e-8;
  int64_t pc_max_states = gcm::kDefaultEnumerationCap;
  uint64_t pc_seed = 0;
  auto* pc = app.add_subcommand("population-check",
                                "Exact-enumeration check of inverse-covariance structure");
  pc->add_option("--graph", pc_graph, "chain4|cycle4|grid9|star8|dino|er16|file:PATH");
  pc->add_option("--weights", pc_weights, "node,edge potentials");
  pc->add_option("--m", pc_m, "alphabet size");
  pc->add_option("--basis", pc_basis, "vertices | all-cliques | vertices+sep:1,3[;...]");
  pc->add_option("--tol", pc_tol, "scaled zero tolerance");
  pc->add_option("--max-states", pc_max_states, "enumeration cap");
  pc->add_option("--seed", pc_seed, "seed for random graph families");
  pc->add_option("--report", pc_report, "write block report CSV here");

  // phase-transition
  std::string pt_config, pt_out;
  std::optional<uint64_t> pt_seed;
  std::optional<int> pt_trials, pt_threads;
  auto* pt = app.add_subcommand("phase-transition", "Monte-Carlo recovery sweep to CSV");
  pt->add_option("--config", pt_config, "experiment config file")->required();
  pt->add_option("--out", pt_out, "output CSV (default stdout)");
  pt->add_option("--seed", pt_seed, "override master seed");
  pt->add_option("--trials", pt_trials, "override trials per cell");
  pt->add_option("--threads", pt_threads, "worker threads (0 = hardware)");

  // graph gen
  auto* graph_cmd = app.add_subcommand("graph", "Graph utilities");
  graph_cmd->require_subcommand(1);
  std::string gg_family = "chain", gg_out;
  int gg_p = 0;
  uint64_t gg_seed = 0;
  double gg_edge_prob = -1.0;
  auto* gg = graph_cmd->add_subcommand("gen", "Generate a family graph");
  gg->add_option("--family", gg_family, "chain|cycle|grid2d|erdos_renyi|star|dino");
  gg->add_option("--p", gg_p, "vertex count");
  gg->add_option("--seed", gg_seed, "seed (random families)");
  gg->add_option("--edge-prob", gg_edge_prob, "Erdos-Renyi edge probability (default 3/p)");
  gg->add_option("--out", gg_out, "output path (default stdout)");

  // sample
  std::string sm_model, sm_graph, sm_weights = "0.1,0.3", sm_out, sm_mask;
  int sm_m = 2, sm_n = 100, sm_burn = 1000, sm_thin = 10;
  uint64_t sm_seed = 0;
  double sm_rho = 0.0;
  bool sm_gibbs = false;
  int64_t sm_max_states = gcm::kDefaultEnumerationCap;
  auto* sm = app.add_subcommand("sample", "Draw i.i.d. samples from a model");
  sm->add_option("--model", sm_model, "model file (text format)");
  sm->add_option("--graph", sm_graph, "graph token (with --weights)");
  sm->add_option("--weights", sm_weights, "node,edge potentials");
  sm->add_option("--m", sm_m, "alphabet size");
  sm->add_option("--n", sm_n, "number of samples")->required();
  sm->add_option("--seed", sm_seed, "seed");
  sm->add_option("--rho", sm_rho, "missing-data probability (zero-filled)");
  sm->add_flag("--gibbs", sm_gibbs, "force the Gibbs sampler");
  sm->add_option("--burn-in", sm_burn, "Gibbs burn-in sweeps");
  sm->add_option("--thin", sm_thin, "Gibbs thinning");
  sm->add_option("--max-states", sm_max_states, "exact-sampler cap");
  sm->add_option("--out", sm_out, "dataset CSV (default stdout)");
  sm->add_option("--mask-out", sm_mask, "write the corruption mask CSV here");

  // estimate
  std::string es_data, es_method = "nodewise_tree", es_combine = "or", es_out;
  int es_m = 2, es_d = 2, es_prescreen = 0;
  double es_rho = 0.0, es_lambda = -1.0, es_lambda_c = 0.5, es_tau = -1.0, es_tau_c = 2.0;
  double es_kappa = 0.5;
  auto* es = app.add_subcommand("estimate", "Estimate edges from a dataset CSV");
  es->add_option("--data", es_data, "dataset CSV")->required();
  es->add_option("--m", es_m, "alphabet size");
  es->add_option("--rho", es_rho, "known missing-data rate of the (zero-filled) input");
  es->add_option("--method", es_method, "glasso|nodewise_tree|nodewise_general|corr_decay");
  es->add_option("--lambda", es_lambda, "penalty (overrides --lambda-c scaling)");
  es->add_option("--lambda-c", es_lambda_c, "lambda = c sqrt(log p~ / n)");
  es->add_option("--tau", es_tau, "threshold (overrides --tau-c scaling)");
  es->add_option("--tau-c", es_tau_c, "tau = c * lambda");
  es->add_option("--d", es_d, "degree bound (nodewise_general / corr_decay)");
  es->add_option("--kappa", es_kappa, "correlation floor (corr_decay)");
  es->add_option("--prescreen", es_prescreen, "top-k candidate prescreen (corr_decay)");
  es->add_option("--combine", es_combine, "and|or neighborhood combination");
  es->add_option("--out", es_out, "edge list output (graph text format)");

  try {
    app.parse(argc, argv);
    if (pc->parsed())
      return run_population_check(pc_graph, pc_weights, pc_m, pc_basis, pc_tol, pc_max_states,
                                  pc_seed, pc_report);
    if (pt->parsed())
      return run_phase_transition_cmd(pt_config, pt_out, pt_seed, pt_trials, pt_threads);
    if (graph_cmd->parsed() && gg->parsed())
      return run_graph_gen(gg_family, gg_p, gg_seed, gg_edge_prob, gg_out);
    if (sm->parsed())
      return run_sample(sm_model, sm_graph, sm_weights, sm_m, sm_n, sm_seed, sm_rho, sm_gibbs,
                        sm_burn, sm_thin, sm_max_states, sm_out, sm_mask);
    if (es->parsed())
      return run_estimate(es_data, es_m, es_rho, es_method, es_lambda, es_lambda_c, es_tau,
                          es_tau_c, es_d, es_kappa, es_prescreen, es_combine, es_out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const gcm::InvalidSpec& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const gcm::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
