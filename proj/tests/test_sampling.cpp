#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "gcm/sampling.hpp"
#include "oracles.hpp"

using namespace gcm;
using Catch::Matchers::WithinAbs;

namespace {

Graph chain_graph(int p) {
  Rng rng(0);
  return generate_graph({GraphFamily::kChain, p}, rng);
}

double empirical_marginal(const Dataset& data, int v) {
  double total = 0.0;
  for (int i = 0; i < data.n; ++i) total += data.values(i, v) != 0 ? 1.0 : 0.0;
  return total / data.n;
}

double empirical_pairwise11(const Dataset& data, int s, int t) {
  double total = 0.0;
  for (int i = 0; i < data.n; ++i)
    total += (data.values(i, s) == 1 && data.values(i, t) == 1) ? 1.0 : 0.0;
  return total / data.n;
}

}  // namespace

TEST_CASE("exact sampling of a fair coin") {
  DiscreteMRF model(1, 2);
  model.set_potential({0}, 0.0);
  Rng rng(100);
  Dataset data = exact_sample(model, 100000, rng);
  CHECK_THAT(empirical_marginal(data, 0), WithinAbs(0.5, 0.01));
}

TEST_CASE("exact sampling matches the full table by chi-square GOF") {
  DiscreteMRF model = ising_model(chain_graph(4), 0.1, 2.0);
  ExactDistribution dist = exact_distribution(model);
  Rng rng(7);
  const int n = 100000;
  Dataset data = sample_from(dist, n, rng);
  std::vector<double> counts(16, 0.0);
  for (int i = 0; i < n; ++i) {
    Configuration x{data.values(i, 0), data.values(i, 1), data.values(i, 2),
                    data.values(i, 3)};
    counts[dist.state_of(x)] += 1.0;
  }
  double chi2 = 0.0;
  for (int s = 0; s < 16; ++s) {
    const double expected = n * dist.probs[s];
    chi2 += (counts[s] - expected) * (counts[s] - expected) / expected;
  }
  // chi-square with 15 degrees of freedom, alpha = 0.01 -> 30.578
  CHECK(chi2 < 30.578);
}

TEST_CASE("sampling zero rows is fine") {
  DiscreteMRF model(2, 2);
  model.set_potential({0}, 0.1);
  model.set_potential({1}, 0.1);
  Rng rng(1);
  Dataset data = exact_sample(model, 0, rng);
  CHECK(data.n == 0);
  CHECK(data.p == 2);
}

TEST_CASE("gibbs pairwise marginals track the exact ones") {
  DiscreteMRF model = ising_model(chain_graph(4), 0.1, 2.0);
  ExactDistribution dist = exact_distribution(model);
  SamplerConfig cfg;
  cfg.mode = SamplerConfig::Mode::kGibbs;
  cfg.burn_in = 1000;
  cfg.thinning = 10;
  Rng rng(13);
  Dataset data = gibbs_sample(model, 20000, cfg, rng);
  for (auto [s, t] : chain_graph(4).sorted_edges()) {
    std::vector<double> joint = dist.marginal({s, t});
    CHECK_THAT(empirical_pairwise11(data, s, t), WithinAbs(joint[3], 0.02));
  }
}

TEST_CASE("gibbs on an independent-vertex model matches the logistic marginal") {
  DiscreteMRF model = ising_model(Graph(3), 0.4, 0.0);
  SamplerConfig cfg;
  cfg.burn_in = 200;
  cfg.thinning = 2;
  Rng rng(5);
  Dataset data = gibbs_sample(model, 30000, cfg, rng);
  const double logistic = std::exp(0.4) / (1 + std::exp(0.4));
  for (int v = 0; v < 3; ++v)
    CHECK_THAT(empirical_marginal(data, v), WithinAbs(logistic, 0.01));
}

TEST_CASE("gibbs on a zero-potential model is asymptotically uniform") {
  const int p = 6;
  DiscreteMRF model = ising_model(Graph(p), 0.0, 0.0);
  SamplerConfig cfg;
  cfg.burn_in = 500;
  cfg.thinning = 5;
  Rng rng(23);
  const int n = 100000;
  Dataset data = gibbs_sample(model, n, cfg, rng);
  std::vector<double> counts(1 << p, 0.0);
  for (int i = 0; i < n; ++i) {
    int state = 0;
    for (int v = 0; v < p; ++v) state |= data.values(i, v) << v;
    counts[state] += 1.0;
  }
  double entropy = 0.0;
  for (double c : counts)
    if (c > 0) entropy -= (c / n) * std::log(c / n);
  CHECK_THAT(entropy, WithinAbs(p * std::log(2.0), 0.02 * p * std::log(2.0)));
}

TEST_CASE("gibbs configuration validation") {
  DiscreteMRF model(2, 2);
  model.set_potential({0}, 0.1);
  model.set_potential({1}, 0.1);
  SamplerConfig bad;
  bad.thinning = 0;
  Rng rng(0);
  CHECK_THROWS_AS(gibbs_sample(model, 5, bad, rng), InvalidSpec);
}

TEST_CASE("exact and gibbs sampling agree on node and pair marginals") {
  Rng setup(314);
  Graph g = oracle::random_graph(5, 0.4, setup);
  DiscreteMRF model = ising_model(g, 0.1, 0.3);
  const int n = 40000;
  Rng r1(1001), r2(1002);
  Dataset exact = exact_sample(model, n, r1);
  SamplerConfig cfg;
  cfg.burn_in = 1000;
  cfg.thinning = 10;
  Dataset gibbs = gibbs_sample(model, n, cfg, r2);
  auto band = [&](double phat) {
    return 3.0 * std::sqrt(std::max(phat * (1 - phat), 0.01) * 2.0 / n) + 0.002;
  };
  for (int v = 0; v < 5; ++v) {
    const double a = empirical_marginal(exact, v), b = empirical_marginal(gibbs, v);
    REQUIRE(std::abs(a - b) <= band(a));
  }
  for (int s = 0; s < 5; ++s)
    for (int t = s + 1; t < 5; ++t) {
      const double a = empirical_pairwise11(exact, s, t);
      const double b = empirical_pairwise11(gibbs, s, t);
      REQUIRE(std::abs(a - b) <= band(a));
    }
}

TEST_CASE("corruption with rho zero is the identity") {
  DiscreteMRF model = ising_model(chain_graph(3), 0.1, 0.5);
  Rng rng(2);
  Dataset data = exact_sample(model, 500, rng);
  Dataset out = corrupt_missing(data, 0.0, rng);
  CHECK(out.values == data.values);
  CHECK(out.corrupted);
  CHECK(out.mask.sum() == 0);
}

TEST_CASE("corruption erases the right fraction") {
  Dataset data;
  data.n = 1000;
  data.p = 100;
  data.m = 2;
  data.values.setOnes(1000, 100);
  Rng rng(77);
  Dataset out = corrupt_missing(data, 0.2, rng);
  double erased = 0.0;
  for (int i = 0; i < out.n; ++i)
    for (int v = 0; v < out.p; ++v) {
      erased += out.mask(i, v);
      REQUIRE(out.values(i, v) == (out.mask(i, v) ? 0 : 1));
    }
  CHECK_THAT(erased / (1000.0 * 100.0), WithinAbs(0.2, 0.01));
  // original untouched
  CHECK(data.values.minCoeff() == 1);
}

TEST_CASE("corrupting all-ones at rho one half leaves mean one half") {
  Dataset data;
  data.n = 500;
  data.p = 100;
  data.m = 2;
  data.values.setOnes(500, 100);
  Rng rng(99);
  Dataset out = corrupt_missing(data, 0.5, rng);
  CHECK_THAT(out.values.cast<double>().mean(), WithinAbs(0.5, 0.02));
}

TEST_CASE("invalid rho is rejected") {
  Dataset data;
  data.n = 1;
  data.p = 1;
  data.values.setZero(1, 1);
  Rng rng(0);
  CHECK_THROWS_AS(corrupt_missing(data, -0.1, rng), InvalidRho);
  CHECK_THROWS_AS(corrupt_missing(data, 1.0, rng), InvalidRho);
}

TEST_CASE("identical seeds give identical datasets") {
  DiscreteMRF model = ising_model(chain_graph(4), 0.1, 0.3);
  Rng a(555), b(555);
  Dataset d1 = exact_sample(model, 200, a);
  Dataset d2 = exact_sample(model, 200, b);
  CHECK(d1 == d2);
  Rng ca(556), cb(556);
  Dataset c1 = corrupt_missing(d1, 0.3, ca);
  Dataset c2 = corrupt_missing(d2, 0.3, cb);
  CHECK(c1 == c2);

  SamplerConfig cfg;
  cfg.burn_in = 50;
  cfg.thinning = 2;
  Rng ga(557), gb(557);
  CHECK(gibbs_sample(model, 100, cfg, ga) == gibbs_sample(model, 100, cfg, gb));
}

TEST_CASE("dataset CSV round trip") {
  DiscreteMRF model = ising_model(chain_graph(3), 0.2, 0.4);
  Rng rng(8);
  Dataset data = exact_sample(model, 50, rng);
  std::stringstream ss;
  write_dataset_csv(ss, data);
  Dataset reread = read_dataset_csv(ss, 2);
  CHECK(reread.values == data.values);

  std::stringstream bad("0,1\n2,0\n");
  CHECK_THROWS_AS(read_dataset_csv(bad, 2), IoError);
}
