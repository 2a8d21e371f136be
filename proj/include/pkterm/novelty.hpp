#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "pkterm/common.hpp"
#include "pkterm/document.hpp"
#include "pkterm/kterm.hpp"
#include "pkterm/memory.hpp"

namespace pkterm {

struct NoveltyScore {
  double value = 0.0;
  std::uint64_t kterms_formed = 0;
  std::uint64_t kterms_new = 0;
};

/// Novelty of one document against the memory of the past:
///
///   N(d) = sum over kterms kt of d of  w(kt) * C(|d|, |kt|)^-1 * [kt not in M]
///
/// Membership is tested against the memory state before this document;
/// afterwards every kterm of the document is made persistent. One call is
/// one single-pass step: score, then insert.
template <class WeightFn>
NoveltyScore score_novelty(const Document& doc, NoveltyMemory& memory,
                           WeightFn&& weight_of, int k_max) {
  NoveltyScore score;
  const std::uint64_t n_terms = doc.unique_terms.size();
  if (n_terms == 0 || k_max < 1) return score;

  double inv_binomial[kMaxKtermLength + 1] = {0.0};
  for (int k = 1; k <= k_max && static_cast<std::uint64_t>(k) <= n_terms; ++k)
    inv_binomial[k] = 1.0 / static_cast<double>(binomial(n_terms, static_cast<std::uint64_t>(k)));

  // Two phases so that Bloom insertions within the document cannot shadow
  // membership answers for its remaining kterms.
  std::vector<std::string> keys;
  std::string key;
  for_each_kterm(doc.unique_terms, k_max, [&](const KtermRef& kt) {
    ++score.kterms_formed;
    kt.append_key(key);
    if (!memory.contains(key)) {
      ++score.kterms_new;
      score.value += weight_of(kt) * inv_binomial[kt.len];
    }
    keys.push_back(key);
  });
  for (const auto& k : keys) memory.insert(k);
  return score;
}

inline NoveltyScore score_novelty_uniform(const Document& doc, NoveltyMemory& memory,
                                          int k_max) {
  return score_novelty(doc, memory, [](const KtermRef&) { return 1.0; }, k_max);
}

struct ScoredDoc {
  std::string doc_id;
  NoveltyScore score;
};

// TSV: doc_id, novelty to 6 decimal places, kterms formed, kterms new.
inline void write_scores(const std::filesystem::path& path,
                         const std::vector<ScoredDoc>& scores) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write scores file: " + path.string());
  char buf[64];
  for (const auto& s : scores) {
    std::snprintf(buf, sizeof buf, "%.6f", s.score.value);
    out << s.doc_id << '\t' << buf << '\t' << s.score.kterms_formed << '\t'
        << s.score.kterms_new << '\n';
  }
}

inline std::vector<std::pair<std::string, double>> read_scores(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scores file: " + path.string());
  std::vector<std::pair<std::string, double>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    if (t1 == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected TSV");
    const auto t2 = line.find('\t', t1 + 1);
    const std::string value = line.substr(t1 + 1, t2 == std::string::npos
                                                      ? std::string::npos
                                                      : t2 - t1 - 1);
    try {
      out.emplace_back(line.substr(0, t1), std::stod(value));
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": bad novelty value '" + value + "'");
    }
  }
  return out;
}

}  // namespace pkterm
