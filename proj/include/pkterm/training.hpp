#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pkterm/categorizer.hpp"
#include "pkterm/common.hpp"
#include "pkterm/corpus_io.hpp"
#include "pkterm/document.hpp"
#include "pkterm/features.hpp"
#include "pkterm/hash.hpp"
#include "pkterm/kterm.hpp"
#include "pkterm/svm.hpp"

namespace pkterm {

inline constexpr double kCategoryWeightFloor = 0.01;

struct SkipInstance {
  const Document* doc = nullptr;
  int label = 0;      // +1 detection target, -1 follow-up
  int skip_pass = 0;
};

/// Skip evaluation: pass 0 keeps the original labels; pass p removes the
/// first p documents of each topic so the next one becomes the detection
/// target. A topic contributes to a pass only while at least two of its
/// documents remain (one target plus at least one follow-up). Targets per
/// topic come out to min(rounds + 1, topic_size - 1).
inline std::vector<SkipInstance> skip_expand(const std::vector<Document>& stream,
                                             const TopicAnnotations& ann, int rounds = 10) {
  if (rounds < 0) throw DataError("skip_expand: rounds must be >= 0");
  std::unordered_map<std::string, const Document*> by_id;
  by_id.reserve(stream.size());
  for (const auto& d : stream) by_id[d.id] = &d;

  std::vector<SkipInstance> out;
  for (const auto& [topic, docs] : ann.topics) {
    std::vector<const Document*> topic_docs;
    topic_docs.reserve(docs.size());
    for (const auto& id : docs) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw DataError("skip_expand: annotated doc '" + id + "' not in stream");
      topic_docs.push_back(it->second);
    }
    const int size = static_cast<int>(topic_docs.size());
    for (int pass = 0; pass <= rounds && size - pass >= 2; ++pass) {
      out.push_back({topic_docs[static_cast<std::size_t>(pass)], +1, pass});
      for (int r = pass + 1; r < size; ++r)
        out.push_back({topic_docs[static_cast<std::size_t>(r)], -1, pass});
    }
  }
  return out;
}

// Eq-style class weights: w(class) = 0.3 * (class fraction of all
// instances). Consumed inversely as per-class penalty C = C_base / w, so
// the rare detection-target class gets the stronger penalty.
struct ClassWeights {
  double target = 0.0;     // +1 class
  double followup = 0.0;   // -1 class

  double of(int label) const { return label > 0 ? target : followup; }
};

inline ClassWeights class_weights(std::span<const int> y) {
  std::size_t n_target = 0, n_follow = 0;
  for (int label : y) (label > 0 ? n_target : n_follow)++;
  if (n_target == 0 || n_follow == 0)
    throw DataError("class_weights: both classes must be present");
  const double total = static_cast<double>(y.size());
  return {0.3 * static_cast<double>(n_target) / total,
          0.3 * static_cast<double>(n_follow) / total};
}

struct LabeledTrainingSet {
  Matrix x;                       // documents x categories, column-scaled
  std::vector<int> y;             // +1 target, -1 follow-up
  std::vector<std::string> doc_ids;
  std::vector<int> skip_passes;
  FeatureScaler column_scaler;    // fitted on the raw count matrix
};

// One row per skip instance: counts of the document's kterms per
// category, then min-max scaled per column. Rows for the same document
// are computed once and reused across passes.
inline LabeledTrainingSet build_training_set(const std::vector<SkipInstance>& instances,
                                             const KtermCategorizer& categorizer,
                                             int k_max) {
  if (instances.empty()) throw DataError("build_training_set: no instances");
  const int k = categorizer.n_categories();

  std::unordered_map<const Document*, std::vector<double>> row_cache;
  LabeledTrainingSet t;
  t.x = Matrix(instances.size(), static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < instances.size(); ++r) {
    const SkipInstance& inst = instances[r];
    auto it = row_cache.find(inst.doc);
    if (it == row_cache.end()) {
      std::vector<double> row(static_cast<std::size_t>(k), 0.0);
      std::size_t formed = 0;
      for_each_kterm(inst.doc->unique_terms, k_max, [&](const KtermRef& kt) {
        ++formed;
        row[static_cast<std::size_t>(categorizer.categorize(kt))] += 1.0;
      });
      if (formed == 0)
        std::fprintf(stderr, "training: doc '%s' forms no kterms; zero row kept\n",
                     inst.doc->id.c_str());
      it = row_cache.emplace(inst.doc, std::move(row)).first;
    }
    std::copy(it->second.begin(), it->second.end(), t.x.row(r));
    t.y.push_back(inst.label);
    t.doc_ids.push_back(inst.doc->id);
    t.skip_passes.push_back(inst.skip_pass);
  }

  t.column_scaler = FeatureScaler::fit(t.x);
  for (std::size_t r = 0; r < t.x.rows; ++r) t.column_scaler.apply_in_place(t.x.row(r));
  return t;
}

inline SvmModel train_svm(const LabeledTrainingSet& t, const ClassWeights& cw,
                          const SvmConfig& cfg) {
  std::vector<double> c(t.x.rows);
  for (std::size_t i = 0; i < t.x.rows; ++i) c[i] = cfg.c_base / cw.of(t.y[i]);
  return train_svm_raw(t.x, t.y, c, cfg);
}

enum class WeightExtraction : std::uint8_t { Gradient, Linear };

inline const char* to_string(WeightExtraction m) {
  return m == WeightExtraction::Gradient ? "gradient" : "linear";
}

struct CategoryWeights {
  std::vector<double> alpha;  // mean 1.0, floor kCategoryWeightFloor
  bool degenerate = false;    // all-zero duals fell back to uniform
};

namespace detail {

// Clip to the floor and rescale to mean 1; repeat because rescaling can
// push clipped entries back below the floor. The floored set only grows,
// so this terminates.
inline void clip_and_normalize(std::vector<double>& a) {
  for (int pass = 0; pass < 1000; ++pass) {
    double mean = 0.0;
    for (double& v : a) {
      if (v < kCategoryWeightFloor) v = kCategoryWeightFloor;
      mean += v;
    }
    mean /= static_cast<double>(a.size());
    if (std::abs(mean - 1.0) <= 1e-12) return;
    for (double& v : a) v /= mean;
  }
  throw DataError("category weights: normalization did not converge");
}

// Distinct rows of a matrix (exact byte equality), preserving first
// occurrence order.
inline std::vector<std::size_t> distinct_rows(const Matrix& x) {
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto [h1, h2] = murmur3_x64_128(x.row(i), x.cols * sizeof(double));
    auto& bucket = buckets[h1 ^ h2];
    bool dup = false;
    for (std::size_t j : bucket) {
      if (std::equal(x.row(i), x.row(i) + x.cols, x.row(j))) {
        dup = true;
        break;
      }
    }
    if (!dup) {
      bucket.push_back(i);
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace detail

/// Scalarizes the trained classifier into one non-negative weight per
/// category. Gradient mode averages the decision-function gradient over
/// the distinct training rows (closed form for the RBF kernel), oriented
/// toward the detection-target class; linear mode reads the primal
/// weights of a linear-kernel retrain. Either way the result is clipped
/// at the floor and rescaled to mean 1.0 so uniform weighting stays the
/// identity case.
inline CategoryWeights extract_category_weights(
    const SvmModel& model, const LabeledTrainingSet& t,
    WeightExtraction mode = WeightExtraction::Gradient) {
  const std::size_t k = t.x.cols;
  CategoryWeights w;

  bool all_zero = model.dual_coef.empty();
  for (double d : model.dual_coef)
    if (d != 0.0) { all_zero = false; break; }
  if (model.dual_coef.empty() || all_zero) {
    std::fprintf(stderr, "category weights: degenerate model, using uniform weights\n");
    w.alpha.assign(k, 1.0);
    w.degenerate = true;
    return w;
  }

  std::vector<double> raw(k, 0.0);
  if (mode == WeightExtraction::Linear) {
    for (std::size_t s = 0; s < model.dual_coef.size(); ++s) {
      const double* sv = model.support_vectors.row(s);
      for (std::size_t j = 0; j < k; ++j) raw[j] += model.dual_coef[s] * sv[j];
    }
  } else {
    // mean over distinct rows x of grad f(x); for RBF,
    // df/dx_j = sum_i d_i K(x_i, x) * (-2 gamma) (x_j - x_ij).
    // Factored: sum_r s_r x_r - sum_i d_i q_i x_i with s_r = sum_i d_i K_ir
    // and q_i = sum_r K_ir.
    const auto rows = detail::distinct_rows(t.x);
    const std::size_t n_sv = model.dual_coef.size();
    std::vector<double> q(n_sv, 0.0);
    std::vector<double> accum(k, 0.0);
    for (std::size_t r : rows) {
      double s_r = 0.0;
      for (std::size_t i = 0; i < n_sv; ++i) {
        const double kv = kernel_value(model.kernel, model.gamma,
                                       model.support_vectors.row_span(i), t.x.row_span(r));
        s_r += model.dual_coef[i] * kv;
        q[i] += kv;
      }
      const double* xr = t.x.row(r);
      for (std::size_t j = 0; j < k; ++j) accum[j] += s_r * xr[j];
    }
    for (std::size_t i = 0; i < n_sv; ++i) {
      const double c = model.dual_coef[i] * q[i];
      const double* sv = model.support_vectors.row(i);
      for (std::size_t j = 0; j < k; ++j) accum[j] -= c * sv[j];
    }
    const double scale = -2.0 * model.gamma / static_cast<double>(rows.size());
    for (std::size_t j = 0; j < k; ++j) raw[j] = scale * accum[j];
  }

  detail::clip_and_normalize(raw);
  w.alpha = std::move(raw);
  return w;
}

struct TrainingReport {
  std::size_t n_targets = 0;
  std::size_t n_followups = 0;
  int skip_rounds = 0;
  ClassWeights weights;
  int svm_sweeps = 0;
  bool svm_converged = false;
  double kkt_residual = 0.0;
  WeightExtraction extraction = WeightExtraction::Gradient;
  bool degenerate_weights = false;
  std::vector<double> alpha;

  nlohmann::json to_json() const {
    return nlohmann::json{
        {"n_targets", n_targets},
        {"n_followups", n_followups},
        {"skip_rounds", skip_rounds},
        {"class_weight_target", weights.target},
        {"class_weight_followup", weights.followup},
        {"svm_sweeps", svm_sweeps},
        {"svm_converged", svm_converged},
        {"kkt_residual", kkt_residual},
        {"extraction", to_string(extraction)},
        {"degenerate_weights", degenerate_weights},
        {"alpha", alpha},
    };
  }

  static TrainingReport from_json(const nlohmann::json& j) {
    TrainingReport r;
    r.n_targets = j.at("n_targets").get<std::size_t>();
    r.n_followups = j.at("n_followups").get<std::size_t>();
    r.skip_rounds = j.at("skip_rounds").get<int>();
    r.weights.target = j.at("class_weight_target").get<double>();
    r.weights.followup = j.at("class_weight_followup").get<double>();
    r.svm_sweeps = j.at("svm_sweeps").get<int>();
    r.svm_converged = j.at("svm_converged").get<bool>();
    r.kkt_residual = j.at("kkt_residual").get<double>();
    r.extraction = j.at("extraction").get<std::string>() == "linear"
                       ? WeightExtraction::Linear
                       : WeightExtraction::Gradient;
    r.degenerate_weights = j.at("degenerate_weights").get<bool>();
    r.alpha = j.at("alpha").get<std::vector<double>>();
    return r;
  }
};

}  // namespace pkterm
