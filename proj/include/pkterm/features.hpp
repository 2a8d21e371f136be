#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pkterm/common.hpp"
#include "pkterm/kterm.hpp"
#include "pkterm/text_analysis.hpp"

namespace pkterm {

inline constexpr int kFeatureCount = 60;
using FeatureVector = std::array<double, kFeatureCount>;

// Fixed 60-dimension layout. Model files depend on these indices; do not
// reorder.
//
//   0..4    idf:      sum, min, max, avg, count(idf > corpus average idf)
//   5..9    tf:       sum, min, max, avg, count(tf == 0)
//   10..14  df:       sum, min, max, avg, count(df <= 1)
//   15..30  entity:   PERSON/LOCATION/ORGANIZATION/NONE x (count, min, max, ratio)
//   31..46  pos:      NOUN/VERB/ADJ/OTHER x (count, min, max, ratio)
//   47..48  spelling: ratio spelled ok, count not spelled ok
//   49..51  numbers:  presence, count, ratio
//   52..55  twitter:  hashtag count, hashtag ratio, username count, username ratio
//   56..59  length:   raw |kt|, one-hot(|kt| == 1, 2, 3)
struct FeatureGroup {
  const char* name;
  int begin;  // inclusive
  int end;    // exclusive
};

inline constexpr std::array<FeatureGroup, 9> kFeatureGroups{{
    {"idf", 0, 5},
    {"tf", 5, 10},
    {"df", 10, 15},
    {"entity", 15, 31},
    {"pos", 31, 47},
    {"spelling", 47, 49},
    {"numbers", 49, 52},
    {"twitter", 52, 56},
    {"length", 56, 60},
}};

inline std::vector<std::string> feature_names() {
  std::vector<std::string> names;
  names.reserve(kFeatureCount);
  for (const char* g : {"idf", "tf", "df"})
    for (const char* a : {"sum", "min", "max", "avg", "count"})
      names.push_back(std::string(g) + "_" + a);
  for (const char* e : {"person", "location", "organization", "none"})
    for (const char* a : {"count", "min", "max", "ratio"})
      names.push_back(std::string("entity_") + e + "_" + a);
  for (const char* p : {"noun", "verb", "adj", "other"})
    for (const char* a : {"count", "min", "max", "ratio"})
      names.push_back(std::string("pos_") + p + "_" + a);
  names.insert(names.end(), {"spelling_ok_ratio", "spelling_bad_count"});
  names.insert(names.end(), {"number_present", "number_count", "number_ratio"});
  names.insert(names.end(),
               {"hashtag_count", "hashtag_ratio", "username_count", "username_ratio"});
  names.insert(names.end(), {"length_raw", "length_is_1", "length_is_2", "length_is_3"});
  return names;
}

// Per-term inputs for feature aggregation.
struct TermStatsView {
  double idf = 0.0;
  double tf = 0.0;
  double df = 0.0;
  const TermAnnotation* annotation = nullptr;
};

// Core extractor over resolved per-term views; the (kterm, stats, map)
// overload below is a thin adapter.
inline FeatureVector extract_features(const TermStatsView* views, int len,
                                      double avg_corpus_idf) {
  FeatureVector f{};
  const double inv_len = 1.0 / static_cast<double>(len);

  auto aggregate = [&](int base, auto value, auto count_pred) {
    double sum = 0.0, mn = 0.0, mx = 0.0;
    int count = 0;
    for (int i = 0; i < len; ++i) {
      const double v = value(views[i]);
      sum += v;
      mn = i == 0 ? v : std::min(mn, v);
      mx = i == 0 ? v : std::max(mx, v);
      count += count_pred(views[i]) ? 1 : 0;
    }
    f[base + 0] = sum;
    f[base + 1] = mn;
    f[base + 2] = mx;
    f[base + 3] = sum * inv_len;
    f[base + 4] = static_cast<double>(count);
  };
  aggregate(0, [](const TermStatsView& v) { return v.idf; },
            [&](const TermStatsView& v) { return v.idf > avg_corpus_idf; });
  aggregate(5, [](const TermStatsView& v) { return v.tf; },
            [](const TermStatsView& v) { return v.tf == 0.0; });
  aggregate(10, [](const TermStatsView& v) { return v.df; },
            [](const TermStatsView& v) { return v.df <= 1.0; });

  auto indicator_block = [&](int base, auto pred) {
    int count = 0;
    for (int i = 0; i < len; ++i) count += pred(*views[i].annotation) ? 1 : 0;
    f[base + 0] = static_cast<double>(count);
    f[base + 1] = count == len ? 1.0 : 0.0;  // min over indicators
    f[base + 2] = count > 0 ? 1.0 : 0.0;     // max over indicators
    f[base + 3] = static_cast<double>(count) * inv_len;
  };
  const Entity entities[4] = {Entity::Person, Entity::Location, Entity::Organization,
                              Entity::None};
  for (int e = 0; e < 4; ++e)
    indicator_block(15 + 4 * e,
                    [&](const TermAnnotation& a) { return a.entity == entities[e]; });
  const Pos pos_tags[4] = {Pos::Noun, Pos::Verb, Pos::Adj, Pos::Other};
  for (int p = 0; p < 4; ++p)
    indicator_block(31 + 4 * p,
                    [&](const TermAnnotation& a) { return a.pos == pos_tags[p]; });

  int spelled = 0, numbers = 0, hashtags = 0, usernames = 0;
  for (int i = 0; i < len; ++i) {
    const TermAnnotation& a = *views[i].annotation;
    spelled += a.spelled_ok ? 1 : 0;
    numbers += a.is_number ? 1 : 0;
    hashtags += a.is_hashtag ? 1 : 0;
    usernames += a.is_username ? 1 : 0;
  }
  f[47] = static_cast<double>(spelled) * inv_len;
  f[48] = static_cast<double>(len - spelled);
  f[49] = numbers > 0 ? 1.0 : 0.0;
  f[50] = static_cast<double>(numbers);
  f[51] = static_cast<double>(numbers) * inv_len;
  f[52] = static_cast<double>(hashtags);
  f[53] = static_cast<double>(hashtags) * inv_len;
  f[54] = static_cast<double>(usernames);
  f[55] = static_cast<double>(usernames) * inv_len;
  f[56] = static_cast<double>(len);
  f[57] = len == 1 ? 1.0 : 0.0;
  f[58] = len == 2 ? 1.0 : 0.0;
  f[59] = len == 3 ? 1.0 : 0.0;
  return f;
}

inline FeatureVector extract_features(
    const Kterm& kt, const StreamStats& stats,
    const std::unordered_map<std::string, TermAnnotation>& annotations) {
  if (kt.terms.empty() || kt.length() > kMaxKtermLength)
    throw DataError("feature extraction: kterm length out of range");
  TermStatsView views[kMaxKtermLength];
  for (int i = 0; i < kt.length(); ++i) {
    const std::string& term = kt.terms[static_cast<std::size_t>(i)];
    auto it = annotations.find(term);
    if (it == annotations.end())
      throw DataError("feature extraction: missing annotation for term '" + term + "'");
    views[i] = {stats.idf(term), static_cast<double>(stats.tf(term)),
                static_cast<double>(stats.df(term)), &it->second};
  }
  return extract_features(views, kt.length(), stats.average_idf());
}

// Per-dimension min-max scaling to [0,1]. Constant dimensions map to 0;
// out-of-range values clamp.
struct FeatureScaler {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t dims() const { return min.size(); }

  static FeatureScaler fit(const Matrix& rows) {
    if (rows.rows == 0) throw DataError("feature scaler: cannot fit on empty set");
    FeatureScaler s;
    s.min.assign(rows.cols, 0.0);
    s.max.assign(rows.cols, 0.0);
    for (std::size_t j = 0; j < rows.cols; ++j) {
      s.min[j] = s.max[j] = rows.at(0, j);
    }
    for (std::size_t i = 1; i < rows.rows; ++i) {
      const double* r = rows.row(i);
      for (std::size_t j = 0; j < rows.cols; ++j) {
        s.min[j] = std::min(s.min[j], r[j]);
        s.max[j] = std::max(s.max[j], r[j]);
      }
    }
    return s;
  }

  double apply_dim(std::size_t j, double x) const {
    const double lo = min[j], hi = max[j];
    if (hi <= lo) return 0.0;
    const double v = (x - lo) / (hi - lo);
    return std::clamp(v, 0.0, 1.0);
  }

  void apply_in_place(double* row) const {
    for (std::size_t j = 0; j < min.size(); ++j) row[j] = apply_dim(j, row[j]);
  }
  std::vector<double> apply(std::span<const double> row) const {
    if (row.size() != min.size()) throw DataError("feature scaler: dimension mismatch");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = apply_dim(j, row[j]);
    return out;
  }
};

// Active feature dimensions; ablation removes one group's span.
struct FeatureMask {
  std::vector<int> active;

  static FeatureMask all() {
    FeatureMask m;
    m.active.resize(kFeatureCount);
    for (int i = 0; i < kFeatureCount; ++i) m.active[static_cast<std::size_t>(i)] = i;
    return m;
  }

  static FeatureMask without_group(const std::string& group_name) {
    for (const auto& g : kFeatureGroups) {
      if (group_name == g.name) {
        FeatureMask m;
        for (int i = 0; i < kFeatureCount; ++i)
          if (i < g.begin || i >= g.end) m.active.push_back(i);
        return m;
      }
    }
    std::string valid;
    for (const auto& g : kFeatureGroups) {
      if (!valid.empty()) valid += ", ";
      valid += g.name;
    }
    throw UsageError("unknown feature group '" + group_name + "' (valid: " + valid + ")");
  }

  std::size_t dims() const { return active.size(); }

  void select(const FeatureVector& full, double* out) const {
    for (std::size_t i = 0; i < active.size(); ++i)
      out[i] = full[static_cast<std::size_t>(active[i])];
  }
  std::vector<double> select(const FeatureVector& full) const {
    std::vector<double> out(active.size());
    select(full, out.data());
    return out;
  }
};

}  // namespace pkterm
