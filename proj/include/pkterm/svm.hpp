#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <vector>

#include "pkterm/common.hpp"

namespace pkterm {

enum class KernelType : std::uint8_t { Rbf, Linear };

struct SvmConfig {
  KernelType kernel = KernelType::Rbf;
  double gamma = 0.15;       // RBF: exp(-gamma * |u - v|^2)
  double tolerance = 0.1;    // KKT tolerance
  double c_base = 1.0;
  int max_passes = 500;      // cap on outer SMO sweeps
  std::uint64_t seed = 0;
  std::size_t kernel_cache_rows = 4096;  // full kernel matrix below this

  void validate() const {
    if (gamma <= 0.0) throw DataError("svm: gamma must be positive");
    if (tolerance <= 0.0) throw DataError("svm: tolerance must be positive");
    if (c_base <= 0.0) throw DataError("svm: C must be positive");
  }
};

struct SvmModel {
  Matrix support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i per support vector
  double bias = 0.0;
  KernelType kernel = KernelType::Rbf;
  double gamma = 0.15;
  bool converged = false;
  int sweeps = 0;
  double max_kkt_violation = 0.0;  // over the training set at termination

  bool degenerate() const { return dual_coef.empty(); }
};

inline double kernel_value(KernelType kernel, double gamma,
                           std::span<const double> u, std::span<const double> v) {
  if (kernel == KernelType::Linear) return dot(u, v);
  return std::exp(-gamma * squared_distance(u, v));
}

inline double decision_function(const SvmModel& model, std::span<const double> x) {
  double f = model.bias;
  for (std::size_t i = 0; i < model.dual_coef.size(); ++i)
    f += model.dual_coef[i] *
         kernel_value(model.kernel, model.gamma, model.support_vectors.row_span(i), x);
  return f;
}

namespace detail {

// Sequential minimal optimization of the soft-margin dual with a
// per-point box constraint 0 <= alpha_i <= C_i. Platt-style outer loop
// with an error cache; the working-pair fallback scans start at a seeded
// random offset, which is the only source of randomness.
class SmoSolver {
 public:
  SmoSolver(const Matrix& x, const std::vector<int>& y, const std::vector<double>& c,
            const SvmConfig& cfg)
      : x_(x), y_(y), c_(c), cfg_(cfg), rng_(cfg.seed) {
    n_ = x.rows;
    alpha_.assign(n_, 0.0);
    error_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) error_[i] = -static_cast<double>(y_[i]);
    x_sq_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) x_sq_[i] = dot(x.row_span(i), x.row_span(i));
    if (n_ <= cfg.kernel_cache_rows) {
      cache_.assign(n_ * n_, 0.0);
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i; j < n_; ++j)
          cache_[i * n_ + j] = cache_[j * n_ + i] = kernel_raw(i, j);
      cached_ = true;
    }
  }

  SvmModel solve() {
    bool examine_all = true;
    std::size_t num_changed = 0;
    int sweeps = 0;
    bool converged = false;
    while (sweeps < cfg_.max_passes) {
      ++sweeps;
      num_changed = 0;
      if (examine_all) {
        for (std::size_t i = 0; i < n_; ++i) num_changed += examine(i);
      } else {
        for (std::size_t i = 0; i < n_; ++i)
          if (!at_lower(i) && !at_upper(i)) num_changed += examine(i);
      }
      if (examine_all) {
        if (num_changed == 0) {
          // error cache drift check: recompute exactly, resume if needed
          recompute_errors();
          if (max_violation() <= cfg_.tolerance) {
            converged = true;
            break;
          }
          continue;
        }
        examine_all = false;
      } else if (num_changed == 0) {
        examine_all = true;
      }
    }
    if (!converged) recompute_errors();

    SvmModel model;
    model.kernel = cfg_.kernel;
    model.gamma = cfg_.gamma;
    model.bias = b_;
    model.converged = converged;
    model.sweeps = sweeps;
    model.max_kkt_violation = max_violation();
    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n_; ++i)
      if (alpha_[i] > 1e-12) sv.push_back(i);
    model.support_vectors = Matrix(sv.size(), x_.cols);
    model.dual_coef.resize(sv.size());
    for (std::size_t s = 0; s < sv.size(); ++s) {
      const double* r = x_.row(sv[s]);
      std::copy(r, r + x_.cols, model.support_vectors.row(s));
      model.dual_coef[s] = alpha_[sv[s]] * static_cast<double>(y_[sv[s]]);
    }
    return model;
  }

  const std::vector<double>& alphas() const { return alpha_; }

 private:
  double kernel_raw(std::size_t i, std::size_t j) const {
    if (cfg_.kernel == KernelType::Linear) return dot(x_.row_span(i), x_.row_span(j));
    return std::exp(-cfg_.gamma * (x_sq_[i] + x_sq_[j] - 2.0 * dot(x_.row_span(i), x_.row_span(j))));
  }
  double kernel(std::size_t i, std::size_t j) const {
    return cached_ ? cache_[i * n_ + j] : kernel_raw(i, j);
  }

  double bound_eps(std::size_t i) const { return 1e-9 * std::max(1.0, c_[i]); }
  bool at_lower(std::size_t i) const { return alpha_[i] <= bound_eps(i); }
  bool at_upper(std::size_t i) const { return alpha_[i] >= c_[i] - bound_eps(i); }

  void recompute_errors() {
    for (std::size_t k = 0; k < n_; ++k) {
      double f = b_;
      for (std::size_t i = 0; i < n_; ++i)
        if (alpha_[i] > 0.0) f += alpha_[i] * static_cast<double>(y_[i]) * kernel(i, k);
      error_[k] = f - static_cast<double>(y_[k]);
    }
  }

  double max_violation() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double margin = static_cast<double>(y_[i]) * (error_[i] + static_cast<double>(y_[i]));
      if (!at_upper(i)) worst = std::max(worst, 1.0 - margin);
      if (!at_lower(i)) worst = std::max(worst, margin - 1.0);
    }
    return worst;
  }

  std::size_t examine(std::size_t i2) {
    const double y2 = static_cast<double>(y_[i2]);
    const double e2 = error_[i2];
    const double r2 = e2 * y2;
    const bool violates = (r2 < -cfg_.tolerance && !at_upper(i2)) ||
                          (r2 > cfg_.tolerance && !at_lower(i2));
    if (!violates) return 0;

    // best |E1 - E2| over non-bound points
    std::size_t best = n_;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (i == i2 || at_lower(i) || at_upper(i)) continue;
      const double gap = std::abs(error_[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < n_ && take_step(best, i2)) return 1;

    std::uniform_int_distribution<std::size_t> start_dist(0, n_ - 1);
    std::size_t start = start_dist(rng_);
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i1 = (start + k) % n_;
      if (i1 == i2 || at_lower(i1) || at_upper(i1)) continue;
      if (take_step(i1, i2)) return 1;
    }
    start = start_dist(rng_);
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i1 = (start + k) % n_;
      if (i1 == i2) continue;
      if (take_step(i1, i2)) return 1;
    }
    return 0;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    constexpr double eps = 1e-12;
    const double y1 = static_cast<double>(y_[i1]);
    const double y2 = static_cast<double>(y_[i2]);
    const double a1_old = alpha_[i1];
    const double a2_old = alpha_[i2];
    const double e1 = error_[i1];
    const double e2 = error_[i2];
    const double s = y1 * y2;
    const double c1 = c_[i1];
    const double c2 = c_[i2];

    double lo, hi;
    if (s < 0.0) {
      const double g = a2_old - a1_old;
      lo = std::max(0.0, g);
      hi = std::min(c2, c1 + g);
    } else {
      const double g = a1_old + a2_old;
      lo = std::max(0.0, g - c1);
      hi = std::min(c2, g);
    }
    if (lo >= hi - eps) return false;

    const double k11 = kernel(i1, i1);
    const double k12 = kernel(i1, i2);
    const double k22 = kernel(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;

    double a2;
    if (eta > eps) {
      a2 = a2_old + y2 * (e1 - e2) / eta;
      a2 = std::clamp(a2, lo, hi);
    } else {
      // objective at the segment ends
      const double f1 = y1 * (e1 + b_) - a1_old * k11 - s * a2_old * k12;
      const double f2 = y2 * (e2 + b_) - s * a1_old * k12 - a2_old * k22;
      const double l1 = a1_old + s * (a2_old - lo);
      const double h1 = a1_old + s * (a2_old - hi);
      const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                            0.5 * lo * lo * k22 + s * lo * l1 * k12;
      const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                            0.5 * hi * hi * k22 + s * hi * h1 * k12;
      if (obj_lo < obj_hi - eps) a2 = lo;
      else if (obj_lo > obj_hi + eps) a2 = hi;
      else a2 = a2_old;
    }
    if (std::abs(a2 - a2_old) < eps * (a2 + a2_old + eps)) return false;

    double a1 = a1_old + s * (a2_old - a2);
    if (a1 < 0.0) a1 = 0.0;
    if (a1 > c1) a1 = c1;

    const double d1 = y1 * (a1 - a1_old);
    const double d2 = y2 * (a2 - a2_old);
    const double b1 = b_ - error_[i1] - d1 * k11 - d2 * k12;
    const double b2 = b_ - error_[i2] - d1 * k12 - d2 * k22;
    double b_new;
    if (a1 > bound_eps(i1) && a1 < c1 - bound_eps(i1)) b_new = b1;
    else if (a2 > bound_eps(i2) && a2 < c2 - bound_eps(i2)) b_new = b2;
    else b_new = 0.5 * (b1 + b2);
    const double db = b_new - b_;

    alpha_[i1] = a1;
    alpha_[i2] = a2;
    b_ = b_new;
    for (std::size_t k = 0; k < n_; ++k)
      error_[k] += d1 * kernel(i1, k) + d2 * kernel(i2, k) + db;
    return true;
  }

  const Matrix& x_;
  const std::vector<int>& y_;
  const std::vector<double>& c_;
  SvmConfig cfg_;
  std::mt19937_64 rng_;
  std::size_t n_ = 0;
  double b_ = 0.0;
  std::vector<double> alpha_;
  std::vector<double> error_;
  std::vector<double> x_sq_;
  std::vector<double> cache_;
  bool cached_ = false;
};

}  // namespace detail

// Trains on rows of x with labels y in {+1,-1} and per-point penalty c.
inline SvmModel train_svm_raw(const Matrix& x, const std::vector<int>& y,
                              const std::vector<double>& c, const SvmConfig& cfg) {
  cfg.validate();
  if (x.rows < 2) throw DataError("svm: need at least 2 training rows");
  if (y.size() != x.rows || c.size() != x.rows)
    throw DataError("svm: label/penalty size mismatch");
  for (double v : x.data)
    if (!std::isfinite(v)) throw DataError("svm: non-finite feature value");
  for (int label : y)
    if (label != 1 && label != -1) throw DataError("svm: labels must be +1 or -1");

  detail::SmoSolver solver(x, y, c, cfg);
  SvmModel model = solver.solve();
  if (!model.converged)
    std::fprintf(stderr, "svm: stopped at %d sweeps with KKT violation %.4f > %.4f\n",
                 model.sweeps, model.max_kkt_violation, cfg.tolerance);
  return model;
}

}  // namespace pkterm
