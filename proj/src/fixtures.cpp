#include "sgdbench/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

namespace sgdbench::fixtures {

namespace {

std::vector<double> hidden_model(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(d);
  for (double& v : w) v = normal(rng);
  return w;
}

double label_for(double z, double noise, std::mt19937_64& rng) {
  double y = z >= 0.0 ? 1.0 : -1.0;
  if (noise > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < noise) y = -y;
  }
  return y;
}

}  // namespace

Dataset dense_classification(std::size_t n, std::size_t d, std::uint64_t seed,
                             double label_noise) {
  std::mt19937_64 rng(seed);
  std::vector<double> w_true = hidden_model(d, rng);
  std::uniform_real_distribution<double> uval(-1.0, 1.0);

  Dataset ds;
  ds.n_examples = n;
  ds.n_features = d;
  ds.layout = Layout::DenseRowMajor;
  ds.values.resize(n * d);
  ds.labels.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double v = uval(rng);
      ds.values[e * d + j] = v;
      z += v * w_true[j];
    }
    ds.labels[e] = label_for(z, label_noise, rng);
  }
  return ds;
}

Dataset sparse_classification(std::size_t n, std::size_t d, double avg_nnz,
                              std::uint64_t seed, double label_noise) {
  std::mt19937_64 rng(seed);
  std::vector<double> w_true = hidden_model(d, rng);
  std::uniform_real_distribution<double> uval(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(std::nextafter(0.0, 1.0), 1.0);
  std::uniform_int_distribution<std::uint32_t> uidx(0, static_cast<std::uint32_t>(d - 1));

  // Pareto(x_m = avg/2, shape 2) has mean avg; clamp the heavy tail.
  const double x_m = avg_nnz / 2.0;
  const auto max_nnz = static_cast<std::size_t>(std::min<double>(
      static_cast<double>(d), std::max(1.0, 20.0 * avg_nnz)));

  Dataset ds;
  ds.n_examples = n;
  ds.n_features = d;
  ds.layout = Layout::Csr;
  ds.labels.resize(n);
  ds.row_offsets.reserve(n + 1);
  ds.row_offsets.push_back(0);

  std::vector<std::uint32_t> row;
  std::unordered_set<std::uint32_t> seen;
  for (std::size_t e = 0; e < n; ++e) {
    double pareto = x_m / std::sqrt(u01(rng));
    std::size_t nnz = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(pareto)),
                                              1, max_nnz);
    row.clear();
    seen.clear();
    while (row.size() < nnz) {
      std::uint32_t j = uidx(rng);
      if (seen.insert(j).second) row.push_back(j);
    }
    std::sort(row.begin(), row.end());

    double z = 0.0;
    for (std::uint32_t j : row) {
      double v = uval(rng);
      ds.indices.push_back(j);
      ds.values.push_back(v);
      z += v * w_true[j];
    }
    ds.row_offsets.push_back(ds.values.size());
    ds.labels[e] = label_for(z, label_noise, rng);
  }
  return ds;
}

}  // namespace sgdbench::fixtures
