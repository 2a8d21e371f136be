#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "pkterm/categories.hpp"
#include "pkterm/features.hpp"
#include "pkterm/kterm.hpp"
#include "pkterm/text_analysis.hpp"

namespace pkterm {

// Maps kterms to category ids through the fitted pipeline pieces:
// features over a frozen stats snapshot, mask, min-max scaling, nearest
// centroid. Per-term inputs are cached; safe because AnnotationMap hands
// out stable references.
class KtermCategorizer {
 public:
  KtermCategorizer(const CentroidMatrix& centroids, const FeatureScaler& scaler,
                   const FeatureMask& mask, const StreamStats& stats,
                   const AnnotationMap& annotations)
      : centroids_(&centroids),
        scaler_(&scaler),
        mask_(&mask),
        stats_(&stats),
        annotations_(&annotations),
        avg_idf_(stats.average_idf()),
        masked_(mask.dims()) {}

  int categorize(const KtermRef& kt) const {
    TermStatsView views[kMaxKtermLength];
    for (int i = 0; i < kt.len; ++i) views[i] = term_view(kt.term(i));
    const FeatureVector full = extract_features(views, kt.len, avg_idf_);
    mask_->select(full, masked_.data());
    scaler_->apply_in_place(masked_.data());
    return assign_category(masked_, centroids_);
  }

  int categorize(const Kterm& kt) const {
    KtermRef ref;
    ref.len = kt.length();
    for (int i = 0; i < ref.len; ++i)
      ref.parts[static_cast<std::size_t>(i)] = &kt.terms[static_cast<std::size_t>(i)];
    return categorize(ref);
  }

  int n_categories() const { return centroids_->k(); }

 private:
  int assign_category(const std::vector<double>& v, const CentroidMatrix* c) const {
    return pkterm::assign_category(std::span<const double>(v.data(), v.size()), *c);
  }

  const TermStatsView& term_view(const std::string& term) const {
    auto it = view_cache_.find(term);
    if (it == view_cache_.end()) {
      TermStatsView v{stats_->idf(term), static_cast<double>(stats_->tf(term)),
                      static_cast<double>(stats_->df(term)), &annotations_->get(term)};
      it = view_cache_.emplace(term, v).first;
    }
    return it->second;
  }

  const CentroidMatrix* centroids_;
  const FeatureScaler* scaler_;
  const FeatureMask* mask_;
  const StreamStats* stats_;
  const AnnotationMap* annotations_;
  double avg_idf_;
  mutable std::vector<double> masked_;
  mutable std::unordered_map<std::string, TermStatsView> view_cache_;
};

}  // namespace pkterm
