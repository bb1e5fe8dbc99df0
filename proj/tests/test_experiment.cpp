#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "gcm/experiment.hpp"

using namespace gcm;

namespace {

// drops the mean_runtime_ms column (index 8) from every CSV line
std::string strip_runtime(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string tok;
    int col = 0;
    while (std::getline(row, tok, ',')) {
      if (col != 8) out += tok + "|";
      ++col;
    }
    out += "\n";
  }
  return out;
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.family = GraphFamily::kChain;
  cfg.p_values = {6};
  cfg.theta_node = -0.6;
  cfg.theta_edge = 1.2;
  cfg.method = RecoveryMethod::kNodewiseTree;
  cfg.n_values = {200, 800};
  cfg.trials = 5;
  cfg.seed = 42;
  cfg.lambda_c = 0.25;
  cfg.tau_c = 4.0;
  cfg.threads = 2;
  return cfg;
}

}  // namespace

TEST_CASE("config file parsing") {
  std::stringstream cfg(
      "# comment\n"
      "[experiment]\n"
      "family = chain\n"
      "p = 8,16\n"
      "method = glasso\n"
      "combine = and\n"
      "n_over_logp = 10, 20, 30\n"
      "rho = 0,0.1\n"
      "trials = 7\n"
      "seed = 99\n"
      "lambda_c = 0.3   # trailing comment\n"
      "tau_c = 1.5\n"
      "theta_node = 0.1\n"
      "theta_edge = 0.3\n");
  ExperimentConfig parsed = parse_experiment_config(cfg);
  CHECK(parsed.family == GraphFamily::kChain);
  CHECK(parsed.p_values == std::vector<int>{8, 16});
  CHECK(parsed.method == RecoveryMethod::kGlasso);
  CHECK(parsed.combine == CombineMode::kAnd);
  CHECK(parsed.n_over_logp == std::vector<double>{10, 20, 30});
  CHECK(parsed.rho_values == std::vector<double>{0, 0.1});
  CHECK(parsed.trials == 7);
  CHECK(parsed.seed == 99);
  CHECK(parsed.lambda_c == 0.3);
}

TEST_CASE("config validation") {
  std::stringstream unknown("frobnicate = 7\nn = 100\n");
  CHECK_THROWS_AS(parse_experiment_config(unknown), InvalidSpec);
  std::stringstream no_grid("family = chain\n");
  CHECK_THROWS_AS(parse_experiment_config(no_grid), InvalidSpec);
  std::stringstream bad_line("family chain\n");
  CHECK_THROWS_AS(parse_experiment_config(bad_line), InvalidSpec);
}

TEST_CASE("single-cell run produces one row") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_values = {300};
  cfg.trials = 1;
  PhaseCurve curve = run_phase_transition(cfg);
  REQUIRE(curve.rows.size() == 1);
  const PhaseRow& row = curve.rows.front();
  CHECK(row.p == 6);
  CHECK(row.n == 300);
  CHECK(row.trials == 1);
  CHECK((row.success_rate == 0.0 || row.success_rate == 1.0));

  std::stringstream out;
  emit_results(out, curve);
  int lines = 0;
  std::string line;
  while (std::getline(out, line)) ++lines;
  CHECK(lines == 2);
}

TEST_CASE("empty curve emits only the header") {
  std::stringstream out;
  emit_results(out, PhaseCurve{});
  CHECK(out.str() == std::string(kPhaseCsvHeader) + "\n");
  std::stringstream in(out.str());
  CHECK(read_phase_curve(in).rows.empty());
}

TEST_CASE("curves round-trip through the CSV reader") {
  PhaseCurve curve;
  for (int i = 0; i < 3; ++i) {
    PhaseRow row;
    row.family = "chain";
    row.method = "glasso";
    row.p = 8 << i;
    row.n = 100 * (i + 1);
    row.n_over_logp = row.n / std::log(double(row.p));
    row.rho = 0.1 * i;
    row.trials = 50;
    row.success_count = 10 * i;
    row.success_rate = row.success_count / 50.0;
    row.mean_runtime_ms = 1.25;
    row.lambda_c = 0.5;
    curve.rows.push_back(row);
  }
  std::stringstream out;
  emit_results(out, curve);
  PhaseCurve reread = read_phase_curve(out);
  REQUIRE(reread.rows.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(reread.rows[i].p == curve.rows[i].p);
    CHECK(reread.rows[i].n == curve.rows[i].n);
    CHECK(reread.rows[i].success_rate == curve.rows[i].success_rate);
    CHECK(reread.rows[i].success_count == curve.rows[i].success_count);
    CHECK(reread.rows[i].lambda_c == curve.rows[i].lambda_c);
  }
}

TEST_CASE("a large synthetic sweep round-trips") {
  PhaseCurve curve;
  for (int i = 0; i < 10000; ++i) {
    PhaseRow row;
    row.family = "erdos_renyi";
    row.method = "corr_decay";
    row.p = 16 + (i % 5);
    row.n = i + 1;
    row.n_over_logp = row.n / std::log(double(row.p));
    row.rho = 0.05 * (i % 3);
    row.trials = 100;
    row.success_count = i % 101;
    row.success_rate = row.success_count / 100.0;
    row.lambda_c = 0.4;
    curve.rows.push_back(row);
  }
  std::stringstream out;
  emit_results(out, curve);
  PhaseCurve reread = read_phase_curve(out);
  CHECK(reread.rows.size() == 10000);
}

TEST_CASE("runs are byte-identical modulo the runtime column") {
  ExperimentConfig cfg = tiny_config();
  std::stringstream a, b;
  emit_results(a, run_phase_transition(cfg));
  emit_results(b, run_phase_transition(cfg));
  CHECK(strip_runtime(a.str()) == strip_runtime(b.str()));
}

TEST_CASE("adding grid cells never perturbs existing cells") {
  ExperimentConfig narrow = tiny_config();
  ExperimentConfig wide = tiny_config();
  wide.n_values = {200, 400, 800};
  PhaseCurve curve_narrow = run_phase_transition(narrow);
  PhaseCurve curve_wide = run_phase_transition(wide);
  REQUIRE(curve_narrow.rows.size() == 2);
  REQUIRE(curve_wide.rows.size() == 3);
  CHECK(curve_narrow.rows[0].success_count == curve_wide.rows[0].success_count);
  CHECK(curve_narrow.rows[1].success_count == curve_wide.rows[2].success_count);
}

TEST_CASE("success rate rises with sample size on an easy chain") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_values = {30, 2000};
  cfg.trials = 10;
  PhaseCurve curve = run_phase_transition(cfg);
  REQUIRE(curve.rows.size() == 2);
  CHECK(curve.rows[1].success_rate >= curve.rows[0].success_rate);
  CHECK(curve.rows[1].success_rate >= 0.9);
}

TEST_CASE("glasso sweep with missing data runs end to end") {
  ExperimentConfig cfg;
  cfg.family = GraphFamily::kChain;
  cfg.p_values = {5};
  cfg.theta_node = -0.6;
  cfg.theta_edge = 1.2;
  cfg.method = RecoveryMethod::kGlasso;
  cfg.n_values = {400};
  cfg.rho_values = {0.0, 0.2};
  cfg.trials = 4;
  cfg.seed = 3;
  cfg.lambda_c = 0.4;
  cfg.tau_c = 2.0;
  PhaseCurve curve = run_phase_transition(cfg);
  REQUIRE(curve.rows.size() == 2);
  for (const PhaseRow& row : curve.rows) {
    CHECK(row.trials == 4);
    CHECK(row.rho <= 0.2);
    CHECK(row.mean_precision >= 0.0);
    CHECK(row.mean_recall >= 0.0);
  }
}

TEST_CASE("gibbs path engages beyond the enumeration cap") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_values = {150};
  cfg.trials = 2;
  cfg.max_states = 8;  // force the Gibbs sampler even for p = 6
  cfg.gibbs_burn_in = 200;
  cfg.gibbs_thinning = 2;
  PhaseCurve curve = run_phase_transition(cfg);
  REQUIRE(curve.rows.size() == 1);
}

TEST_CASE("solver failures are counted, not fatal") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_values = {25};
  cfg.trials = 3;
  cfg.method = RecoveryMethod::kNodewiseGeneral;
  cfg.degree_bound = 2;
  cfg.max_features = 2;  // guarantees FeatureExplosion in every trial
  PhaseCurve curve = run_phase_transition(cfg);
  REQUIRE(curve.rows.size() == 1);
  for (const PhaseRow& row : curve.rows) {
    CHECK(row.solver_failures == 3);
    CHECK(row.success_rate == 0.0);
  }
}

TEST_CASE("corr-decay sweep runs with the top-k prescreen") {
  ExperimentConfig cfg = tiny_config();
  cfg.method = RecoveryMethod::kCorrDecay;
  cfg.n_values = {1500};
  cfg.trials = 3;
  cfg.degree_bound = 2;
  cfg.prescreen_topk = 5;  // floor(2.5 * d)
  cfg.lambda_c = 0.25;
  cfg.tau_c = 4.0;
  PhaseCurve curve = run_phase_transition(cfg);
  REQUIRE(curve.rows.size() == 1);
  CHECK(curve.rows[0].success_rate > 0.0);
}
