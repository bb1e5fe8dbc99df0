#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "gcm/mrf.hpp"
#include "oracles.hpp"

using namespace gcm;
using Catch::Matchers::WithinAbs;

TEST_CASE("statistic basis layout") {
  // graded lex over {0},{1},{2},{3},{0,2} with m = 3
  StatisticBasis basis = basis_vertices_plus_pow(4, 3, {{0, 2}});
  REQUIRE(basis.num_blocks() == 5);
  CHECK(basis.clique(4) == VertexSet{0, 2});
  CHECK(basis.dimension() == 4 * 2 + 4);
  CHECK(basis.block_dim(4) == 4);
  CHECK(basis.find_block({0, 2}) == 4);
  CHECK(basis.find_block({1, 3}) == -1);
  CHECK(basis.coord_label(0) == "{1}:1");
  CHECK(basis.coord_label(8) == "{1;3}:1,1");
  CHECK(basis.coord_label(11) == "{1;3}:2,2");

  CHECK_THROWS_AS(StatisticBasis(3, 2, {{0}, {0}}), InvalidSpec);  // duplicate
  CHECK_THROWS_AS(StatisticBasis(3, 2, {{}}), InvalidSpec);        // empty clique
  CHECK_THROWS_AS(StatisticBasis(3, 2, {{5}}), InvalidSpec);       // out of range
}

TEST_CASE("indicator vector on binary singletons is the identity map") {
  StatisticBasis basis = basis_vertices(3, 2);
  Eigen::VectorXd v = indicator_vector(basis, {1, 0, 1});
  CHECK(v == Eigen::Vector3d(1, 0, 1));
}

TEST_CASE("indicator vector with a pair statistic is the monomial x1*x3") {
  StatisticBasis basis(4, 2, {{0}, {2}, {0, 2}});
  Eigen::VectorXd v = indicator_vector(basis, {1, 0, 1, 0});
  CHECK(v == Eigen::Vector3d(1, 1, 1));
  v = indicator_vector(basis, {1, 1, 0, 0});
  CHECK(v == Eigen::Vector3d(1, 0, 0));
}

TEST_CASE("zero coordinates kill every statistic containing the vertex") {
  StatisticBasis basis = basis_vertices_plus_pow(2, 3, {{0, 1}});
  // blocks: {0} (2), {1} (2), {0,1} (4)
  Eigen::VectorXd v = indicator_vector(basis, {0, 2});
  Eigen::VectorXd expected(8);
  expected << 0, 0, 0, 1, 0, 0, 0, 0;
  CHECK(v == expected);
}

TEST_CASE("indicator vector input validation") {
  StatisticBasis basis = basis_vertices(3, 2);
  CHECK_THROWS_AS(indicator_vector(basis, {1, 0}), DimensionMismatch);
  CHECK_THROWS_AS(indicator_vector(basis, {1, 0, 2}), DimensionMismatch);
}

TEST_CASE("binary pow-basis coordinates are monomials") {
  Rng rng(2);
  StatisticBasis basis = basis_vertices_plus_pow(5, 2, {{0, 1, 2}, {2, 3, 4}});
  for (int trial = 0; trial < 50; ++trial) {
    Configuration x(5);
    for (int& xi : x) xi = rng.uniform_int(2);
    Eigen::VectorXd v = indicator_vector(basis, x);
    for (int b = 0; b < basis.num_blocks(); ++b) {
      int prod = 1;
      for (int s : basis.clique(b)) prod *= x[s];
      REQUIRE(v[basis.block_offset(b)] == static_cast<double>(prod));
    }
  }
}

TEST_CASE("exact distribution of a single fair coin") {
  DiscreteMRF model(1, 2);
  model.set_potential({0}, 0.0);
  ExactDistribution dist = exact_distribution(model);
  CHECK_THAT(dist.probs[0], WithinAbs(0.5, 1e-15));
  CHECK_THAT(dist.probs[1], WithinAbs(0.5, 1e-15));
  CHECK_THAT(dist.log_partition, WithinAbs(std::log(2.0), 1e-15));
}

TEST_CASE("exact distribution of a biased coin is logistic") {
  DiscreteMRF model(1, 2);
  model.set_potential({0}, 0.1);
  ExactDistribution dist = exact_distribution(model);
  CHECK_THAT(dist.probs[1], WithinAbs(std::exp(0.1) / (1 + std::exp(0.1)), 1e-12));
  CHECK_THAT(dist.probs[1], WithinAbs(0.524979, 1e-6));
}

TEST_CASE("chain distribution matches the direct-summation oracle") {
  Rng rng(0);
  Graph chain = generate_graph({GraphFamily::kChain, 4}, rng);
  DiscreteMRF model = ising_model(chain, 0.1, 2.0);
  ExactDistribution dist = exact_distribution(model);
  std::vector<double> brute = oracle::distribution_bruteforce(model);
  REQUIRE(dist.probs.size() == 16);
  double sum = 0.0;
  for (size_t s = 0; s < 16; ++s) {
    REQUIRE_THAT(dist.probs[s], WithinAbs(brute[s], 1e-14));
    REQUIRE(dist.probs[s] > 0);
    sum += dist.probs[s];
  }
  CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
}

TEST_CASE("partition function matches brute force on random models") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 2 + rng.uniform_int(5);
    const int m = 2 + rng.uniform_int(2);
    Graph g = oracle::random_graph(p, 0.5, rng);
    WeightSpec spec;
    spec.node = WeightDist::uniform(-1, 1);
    spec.edge = WeightDist::uniform(-1, 1);
    DiscreteMRF model = random_model(g, m, spec, rng);
    ExactDistribution dist = exact_distribution(model);
    const double direct = oracle::unnormalized_sum_bruteforce(model);
    REQUIRE_THAT(std::exp(dist.log_partition) / direct, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("enumeration cap is enforced") {
  DiscreteMRF model(12, 3);
  for (int v = 0; v < 12; ++v) model.set_potential({v}, std::vector<double>{0.1, 0.2});
  CHECK_THROWS_AS(exact_distribution(model, 1000), TooLargeToEnumerate);
}

TEST_CASE("marginals sum the right cells") {
  Rng rng(4);
  Graph g = oracle::random_graph(4, 0.6, rng);
  WeightSpec spec;
  spec.node = WeightDist::uniform(-0.5, 0.5);
  spec.edge = WeightDist::uniform(-0.5, 0.5);
  DiscreteMRF model = random_model(g, 3, spec, rng);
  ExactDistribution dist = exact_distribution(model);
  std::vector<double> marg = dist.marginal({1, 3});
  // brute-force the same marginal
  std::vector<double> expected(9, 0.0);
  for (int64_t s = 0; s < 81; ++s) {
    Configuration x = dist.config_of(s);
    expected[x[1] + 3 * x[3]] += dist.probs[s];
  }
  for (int i = 0; i < 9; ++i) REQUIRE_THAT(marg[i], WithinAbs(expected[i], 1e-14));
}

TEST_CASE("random model places potentials only on graph cliques") {
  Rng rng(9);
  Graph chain = generate_graph({GraphFamily::kChain, 4}, rng);
  DiscreteMRF example = ising_model(chain, 0.1, 2.0);
  REQUIRE(example.potentials().size() == 4 + 3);
  CHECK(example.potentials().at({0}).front() == 0.1);
  CHECK(example.potentials().at({1, 2}).front() == 2.0);
  CHECK(example.potentials().count({0, 2}) == 0);

  DiscreteMRF empty_graph_model = ising_model(Graph(3), 0.5, 1.0);
  REQUIRE(empty_graph_model.potentials().size() == 3);
  for (const auto& [c, t] : empty_graph_model.potentials()) CHECK(c.size() == 1);
}

TEST_CASE("random weights are reproducible and almost surely nonzero") {
  Rng a(77), b(77);
  Graph g = generate_graph({GraphFamily::kCycle, 5}, a);
  WeightSpec spec;
  spec.node = WeightDist::uniform(-1, 1);
  spec.edge = WeightDist::uniform(-1, 1);
  DiscreteMRF m1 = random_model(g, 2, spec, a);
  Rng b2(77);
  Graph g2 = generate_graph({GraphFamily::kCycle, 5}, b);
  DiscreteMRF m2 = random_model(g2, 2, spec, b);
  REQUIRE(m1.potentials().size() == m2.potentials().size());
  for (const auto& [c, t] : m1.potentials()) {
    REQUIRE(m2.potentials().at(c) == t);
    for (double w : t) REQUIRE(w != 0.0);
  }
}

TEST_CASE("higher-order potentials fill triangles") {
  Rng rng(1);
  Graph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(0, 2);
  WeightSpec spec;
  spec.higher = WeightDist::constant(0.7);
  spec.max_clique_size = 3;
  DiscreteMRF model = random_model(g, 2, spec, rng);
  REQUIRE(model.potentials().count({0, 1, 2}) == 1);
  CHECK(model.potentials().at({0, 1, 2}).front() == 0.7);
}

TEST_CASE("model text format round-trips bit-exactly") {
  Rng rng(31337);
  Graph g = oracle::random_graph(5, 0.5, rng);
  WeightSpec spec;
  spec.node = WeightDist::uniform(-2, 2);
  spec.edge = WeightDist::uniform(-2, 2);
  DiscreteMRF model = random_model(g, 3, spec, rng);

  std::stringstream first;
  write_model(first, model);
  DiscreteMRF reread = read_model(first);
  REQUIRE(reread.p() == model.p());
  REQUIRE(reread.m() == model.m());
  REQUIRE(reread.potentials().size() == model.potentials().size());
  for (const auto& [c, t] : model.potentials()) {
    const auto& rt = reread.potentials().at(c);
    for (size_t i = 0; i < t.size(); ++i) REQUIRE(rt[i] == t[i]);  // bit-exact
  }
  std::stringstream second;
  write_model(second, reread);
  CHECK(first.str() == second.str());
}
