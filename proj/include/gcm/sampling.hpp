#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcm/errors.hpp"
#include "gcm/mrf.hpp"
#include "gcm/rng.hpp"

namespace gcm {

// n x p matrix of discrete observations, plus the corruption record when
// cells have been erased (erased cells are zero-filled, mask entry 1).
struct Dataset {
  int n = 0, p = 0, m = 2;
  Eigen::MatrixXi values;
  bool corrupted = false;
  double rho = 0.0;
  Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic> mask;  // 1 = erased

  bool operator==(const Dataset& other) const {
    return n == other.n && p == other.p && m == other.m && values == other.values &&
           corrupted == other.corrupted && rho == other.rho &&
           (!corrupted || mask == other.mask);
  }
};

struct SamplerConfig {
  enum class Mode { kExact, kGibbs } mode = Mode::kExact;
  int burn_in = 1000;  // sweeps discarded up front (gibbs)
  int thinning = 10;   // sweeps between retained samples (gibbs)
};

// i.i.d. draws by inverse CDF over a precomputed probability table.
inline Dataset sample_from(const ExactDistribution& dist, int n, Rng& rng) {
  std::vector<double> cdf(dist.probs.size());
  double acc = 0.0;
  for (size_t i = 0; i < dist.probs.size(); ++i) {
    acc += dist.probs[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  Dataset data;
  data.n = n;
  data.p = dist.p;
  data.m = dist.m;
  data.values.resize(n, dist.p);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const int64_t state = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    Configuration x = dist.config_of(std::min<int64_t>(state, cdf.size() - 1));
    for (int v = 0; v < dist.p; ++v) data.values(i, v) = x[v];
  }
  return data;
}

// i.i.d. draws by inverse CDF over the exact probability table.
inline Dataset exact_sample(const DiscreteMRF& model, int n, Rng& rng,
                            int64_t max_states = kDefaultEnumerationCap) {
  return sample_from(exact_distribution(model, max_states), n, rng);
}

// Single-site Gibbs sampler: sequential sweeps over vertices 0..p-1, each
// update drawing x_v from its conditional given the rest. The state starts
// uniform at random; after burn_in sweeps, every thinning-th sweep is
// recorded.
inline Dataset gibbs_sample(const DiscreteMRF& model, int n, const SamplerConfig& config,
                            Rng& rng) {
  if (config.burn_in < 0 || config.thinning < 1)
    throw InvalidSpec("gibbs needs burn_in >= 0 and thinning >= 1");
  const int p = model.p(), m = model.m();

  // vertex -> potentials containing it
  struct Local {
    const VertexSet* clique;
    const std::vector<double>* table;
  };
  std::vector<std::vector<Local>> at_vertex(p);
  for (const auto& [clique, table] : model.potentials())
    for (int v : clique) at_vertex[v].push_back({&clique, &table});

  Configuration x(p);
  for (int v = 0; v < p; ++v) x[v] = rng.uniform_int(m);

  std::vector<double> energy(m), prob(m);
  auto sweep = [&]() {
    for (int v = 0; v < p; ++v) {
      std::fill(energy.begin(), energy.end(), 0.0);
      for (const Local& loc : at_vertex[v]) {
        // index contribution of the other coordinates; skip if any is zero
        int base = 0, vweight = 0;
        bool rest_nonzero = true;
        int w = 1;
        for (int i = static_cast<int>(loc.clique->size()) - 1; i >= 0; --i) {
          const int u = (*loc.clique)[i];
          if (u == v) {
            vweight = w;
          } else if (x[u] == 0) {
            rest_nonzero = false;
            break;
          } else {
            base += (x[u] - 1) * w;
          }
          w *= (m - 1);
        }
        if (!rest_nonzero) continue;
        for (int j = 1; j < m; ++j) energy[j] += (*loc.table)[base + (j - 1) * vweight];
      }
      const double emax = *std::max_element(energy.begin(), energy.end());
      double total = 0.0;
      for (int j = 0; j < m; ++j) {
        prob[j] = std::exp(energy[j] - emax);
        total += prob[j];
      }
      double u = rng.uniform() * total;
      int j = 0;
      while (j + 1 < m && u >= prob[j]) {
        u -= prob[j];
        ++j;
      }
      x[v] = j;
    }
  };

  Dataset data;
  data.n = n;
  data.p = p;
  data.m = m;
  data.values.resize(n, p);
  for (int s = 0; s < config.burn_in; ++s) sweep();
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < config.thinning; ++s) sweep();
    for (int v = 0; v < p; ++v) data.values(i, v) = x[v];
  }
  return data;
}

// Erases each cell independently with probability rho, writing 0 in its
// place and recording the mask. Cells are visited row by row, then column
// by column, one Bernoulli draw each.
inline Dataset corrupt_missing(const Dataset& data, double rho, Rng& rng) {
  if (rho < 0.0 || rho >= 1.0) throw InvalidRho("rho must lie in [0, 1)");
  Dataset out = data;
  out.corrupted = true;
  out.rho = rho;
  out.mask.setZero(data.n, data.p);
  for (int i = 0; i < data.n; ++i)
    for (int v = 0; v < data.p; ++v)
      if (rng.bernoulli(rho)) {
        out.values(i, v) = 0;
        out.mask(i, v) = 1;
      }
  return out;
}

// ---------------------------------------------------------------------------
// CSV persistence: one row of integers per sample; the mask (if any) goes in
// a parallel CSV of 0/1 flags.
// ---------------------------------------------------------------------------

inline void write_dataset_csv(std::ostream& os, const Dataset& data) {
  for (int i = 0; i < data.n; ++i) {
    for (int v = 0; v < data.p; ++v) os << (v ? "," : "") << data.values(i, v);
    os << "\n";
  }
}

inline void write_mask_csv(std::ostream& os, const Dataset& data) {
  for (int i = 0; i < data.n; ++i) {
    for (int v = 0; v < data.p; ++v) os << (v ? "," : "") << static_cast<int>(data.mask(i, v));
    os << "\n";
  }
}

inline Dataset read_dataset_csv(std::istream& is, int m) {
  std::vector<std::vector<int>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<int> row;
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(std::stoi(tok));
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("ragged dataset CSV");
    rows.push_back(std::move(row));
  }
  Dataset data;
  data.n = static_cast<int>(rows.size());
  data.p = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  data.m = m;
  data.values.resize(data.n, data.p);
  for (int i = 0; i < data.n; ++i)
    for (int v = 0; v < data.p; ++v) {
      if (rows[i][v] < 0 || rows[i][v] >= m) throw IoError("dataset value out of range");
      data.values(i, v) = rows[i][v];
    }
  return data;
}

}  // namespace gcm
