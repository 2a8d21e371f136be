#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pkterm/common.hpp"
#include "pkterm/corpus_io.hpp"

namespace pkterm {

// Standard TDT cost constants.
struct CostParams {
  double c_miss = 1.0;
  double c_fa = 0.1;
  double p_target = 0.02;

  void validate() const {
    if (c_miss <= 0.0 || c_fa <= 0.0 || p_target <= 0.0 || p_target >= 1.0)
      throw DataError("cost params: need c_miss, c_fa > 0 and 0 < p_target < 1");
  }
  double normalizer() const {
    return std::min(c_miss * p_target, c_fa * (1.0 - p_target));
  }
  double normalized_cost(double p_miss, double p_fa) const {
    return (c_miss * p_miss * p_target + c_fa * p_fa * (1.0 - p_target)) / normalizer();
  }
};

struct CurvePoint {
  double threshold = 0.0;
  double p_miss = 0.0;
  double p_fa = 0.0;
  double cost = 0.0;
};

struct EvaluationReport {
  double c_min = 0.0;
  double best_threshold = 0.0;
  std::vector<CurvePoint> curve;  // ascending threshold
  std::size_t n_targets = 0;
  std::size_t n_nontargets = 0;

  nlohmann::json to_json() const {
    nlohmann::json curve_json = nlohmann::json::array();
    for (const auto& p : curve)
      curve_json.push_back({{"threshold", p.threshold},
                            {"p_miss", p.p_miss},
                            {"p_fa", p.p_fa},
                            {"cost", p.cost}});
    return nlohmann::json{{"c_min", c_min},
                          {"best_threshold", best_threshold},
                          {"n_targets", n_targets},
                          {"n_nontargets", n_nontargets},
                          {"curve", curve_json}};
  }
};

/// Normalized topic-weighted minimum detection cost. The system emits a
/// first-story flag iff score >= threshold; candidate thresholds are every
/// distinct score of an annotated document plus +infinity (emit nothing).
/// Cost is the usual linear combination of miss and false-alarm rates,
/// normalized so the emit-nothing system costs exactly 1.0. The sweep
/// attains the true minimum because cost is piecewise constant between
/// adjacent distinct scores. Unannotated documents are ignored.
inline EvaluationReport sweep_cmin(const std::unordered_map<std::string, double>& scores,
                                   const TopicAnnotations& ann, const CostParams& params) {
  params.validate();
  if (ann.topics.empty()) throw DataError("sweep_cmin: no topics to evaluate");

  std::vector<double> target_scores;
  std::vector<double> nontarget_scores;
  for (const auto& [doc_id, rank] : ann.rank_of) {
    auto it = scores.find(doc_id);
    if (it == scores.end())
      throw DataError("sweep_cmin: annotated doc '" + doc_id + "' has no score");
    (rank == 0 ? target_scores : nontarget_scores).push_back(it->second);
  }

  std::sort(target_scores.begin(), target_scores.end());
  std::sort(nontarget_scores.begin(), nontarget_scores.end());

  std::vector<double> thresholds;
  thresholds.reserve(target_scores.size() + nontarget_scores.size() + 1);
  thresholds.insert(thresholds.end(), target_scores.begin(), target_scores.end());
  thresholds.insert(thresholds.end(), nontarget_scores.begin(), nontarget_scores.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  const double n_t = static_cast<double>(target_scores.size());
  const double n_n = static_cast<double>(nontarget_scores.size());

  EvaluationReport report;
  report.n_targets = target_scores.size();
  report.n_nontargets = nontarget_scores.size();
  report.c_min = std::numeric_limits<double>::infinity();
  for (double th : thresholds) {
    // misses: targets with score < th
    const auto missed = std::lower_bound(target_scores.begin(), target_scores.end(), th) -
                        target_scores.begin();
    // false alarms: non-targets with score >= th
    const auto fa = nontarget_scores.end() -
                    std::lower_bound(nontarget_scores.begin(), nontarget_scores.end(), th);
    CurvePoint p;
    p.threshold = th;
    p.p_miss = n_t > 0 ? static_cast<double>(missed) / n_t : 0.0;
    p.p_fa = n_n > 0 ? static_cast<double>(fa) / n_n : 0.0;
    p.cost = params.normalized_cost(p.p_miss, p.p_fa);
    report.curve.push_back(p);
    if (p.cost < report.c_min) {
      report.c_min = p.cost;
      report.best_threshold = th;
    }
  }
  return report;
}

// Relative difference in percent; negative means the variant improved.
// Undefined (NaN) when the baseline cost is zero.
inline double compare_runs(const EvaluationReport& baseline, const EvaluationReport& variant) {
  if (baseline.c_min == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (variant.c_min - baseline.c_min) / baseline.c_min * 100.0;
}

inline std::string format_percent(double pct) {
  if (std::isnan(pct)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", pct);
  return buf;
}

inline void write_report_json(const std::filesystem::path& path,
                              const EvaluationReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path.string());
  out << report.to_json().dump(2) << '\n';
}

inline void write_report_table(const std::filesystem::path& path,
                               const EvaluationReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path.string());
  char buf[128];
  std::snprintf(buf, sizeof buf, "C_min          %.4f\n", report.c_min);
  out << buf;
  std::snprintf(buf, sizeof buf, "best threshold %.6f\n", report.best_threshold);
  out << buf;
  out << "targets        " << report.n_targets << "\n";
  out << "non-targets    " << report.n_nontargets << "\n";
}

inline void write_curve_csv(const std::filesystem::path& path,
                            const EvaluationReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write curve: " + path.string());
  out << "threshold,p_miss,p_fa,cost\n";
  char buf[160];
  for (const auto& p : report.curve) {
    std::snprintf(buf, sizeof buf, "%.9g,%.6f,%.6f,%.6f\n", p.threshold, p.p_miss,
                  p.p_fa, p.cost);
    out << buf;
  }
}

}  // namespace pkterm
