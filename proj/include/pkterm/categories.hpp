#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <vector>

#include "pkterm/common.hpp"

namespace pkterm {

struct ClusteringConfig {
  int k = 120;
  int iterations = 100;
  std::uint64_t seed = 0;
  std::size_t sample_cap = 500000;

  void validate() const {
    if (k < 2) throw DataError("clustering: K must be >= 2");
    if (iterations < 1) throw DataError("clustering: iterations must be >= 1");
  }
};

struct CentroidMatrix {
  Matrix m;  // k rows x dims cols
  int k() const { return static_cast<int>(m.rows); }
  std::size_t dims() const { return m.cols; }
};

struct KmeansResult {
  CentroidMatrix centroids;
  std::vector<int> assignment;  // row index -> category id
};

// Nearest category by dot-product similarity; ties break to the lowest id.
inline int assign_category(std::span<const double> v, const CentroidMatrix& centroids) {
  if (v.size() != centroids.dims())
    throw DataError("assign_category: vector dimension " + std::to_string(v.size()) +
                    " does not match centroid dimension " +
                    std::to_string(centroids.dims()));
  int best = 0;
  double best_sim = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < centroids.k(); ++c) {
    const double sim = dot(centroids.m.row_span(static_cast<std::size_t>(c)), v);
    if (sim > best_sim) {
      best_sim = sim;
      best = c;
    }
  }
  return best;
}

/// K-means over kterm feature vectors, stated in matrix form: similarities
/// are centroid-by-row dot products, each row joins its argmax centroid,
/// centroids update to the mean of their members. Centroids start uniform
/// random in [0,1]^dims; empty clusters re-seed to a random data row. Runs
/// a fixed number of iterations; fully deterministic given the seed.
inline KmeansResult kmeans_cluster(const Matrix& x, const ClusteringConfig& cfg) {
  cfg.validate();
  if (x.rows == 0) throw DataError("kmeans: input matrix is empty");
  for (double v : x.data)
    if (!std::isfinite(v)) throw DataError("kmeans: non-finite input value");

  int k = cfg.k;
  if (x.rows < static_cast<std::size_t>(k)) {
    std::fprintf(stderr, "kmeans: only %zu rows, reducing K from %d\n", x.rows, k);
    k = static_cast<int>(x.rows);
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CentroidMatrix centroids;
  centroids.m = Matrix(static_cast<std::size_t>(k), x.cols);
  for (double& v : centroids.m.data) v = unit(rng);

  std::vector<int> assignment(x.rows, 0);
  Matrix sums(static_cast<std::size_t>(k), x.cols);
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (std::size_t i = 0; i < x.rows; ++i)
      assignment[i] = assign_category(x.row_span(i), centroids);

    std::fill(sums.data.begin(), sums.data.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < x.rows; ++i) {
      const std::size_t c = static_cast<std::size_t>(assignment[i]);
      const double* r = x.row(i);
      double* s = sums.row(c);
      for (std::size_t j = 0; j < x.cols; ++j) s[j] += r[j];
      ++counts[c];
    }
    for (int c = 0; c < k; ++c) {
      const std::size_t cc = static_cast<std::size_t>(c);
      if (counts[cc] == 0) {
        std::uniform_int_distribution<std::size_t> pick(0, x.rows - 1);
        const double* r = x.row(pick(rng));
        std::copy(r, r + x.cols, centroids.m.row(cc));
      } else {
        const double inv = 1.0 / static_cast<double>(counts[cc]);
        const double* s = sums.row(cc);
        double* out = centroids.m.row(cc);
        for (std::size_t j = 0; j < x.cols; ++j) out[j] = s[j] * inv;
      }
    }
  }

  for (std::size_t i = 0; i < x.rows; ++i)
    assignment[i] = assign_category(x.row_span(i), centroids);
  return {std::move(centroids), std::move(assignment)};
}

}  // namespace pkterm
