#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pkterm/common.hpp"
#include "pkterm/document.hpp"

namespace pkterm {

inline constexpr int kMaxKtermLength = 4;   // enumeration cost guard
inline constexpr char kKtermSeparator = '\x1f';

// Canonical kterm: 1..k distinct terms, sorted lexicographically.
struct Kterm {
  std::vector<std::string> terms;

  Kterm() = default;
  explicit Kterm(std::vector<std::string> t) : terms(std::move(t)) {
    std::sort(terms.begin(), terms.end());
  }
  int length() const { return static_cast<int>(terms.size()); }
  std::string key() const {
    std::string k;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (i) k += kKtermSeparator;
      k += terms[i];
    }
    return k;
  }
  bool operator==(const Kterm& o) const { return terms == o.terms; }
};

// C(n, r); 0 when r > n. Throws on uint64 overflow (first hit around
// C(62, 31); document lengths in this pipeline stay far below that).
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  if (r > n - r) r = n - r;
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    c = c * (n - r + i) / i;
    if (c > std::numeric_limits<std::uint64_t>::max())
      throw std::overflow_error("binomial overflow: C(" + std::to_string(n) + "," +
                                std::to_string(r) + ") exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(c);
}

// Borrowed view of one enumerated kterm; valid only inside the callback.
struct KtermRef {
  std::array<const std::string*, kMaxKtermLength> parts{};
  int len = 0;

  const std::string& term(int i) const { return *parts[static_cast<std::size_t>(i)]; }
  void append_key(std::string& out) const {
    out.clear();
    for (int i = 0; i < len; ++i) {
      if (i) out += kKtermSeparator;
      out += *parts[static_cast<std::size_t>(i)];
    }
  }
  Kterm materialize() const {
    std::vector<std::string> t;
    t.reserve(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) t.push_back(*parts[static_cast<std::size_t>(i)]);
    return Kterm{std::move(t)};
  }
};

// Enumerates all kterms of lengths 1..k_max over the document's unique
// terms: combinations in lexicographic order over the sorted term list.
template <class Fn>
void for_each_kterm(const std::vector<std::string>& unique_terms, int k_max, Fn&& fn) {
  if (k_max < 1) return;
  k_max = std::min(k_max, kMaxKtermLength);
  std::vector<const std::string*> sorted;
  sorted.reserve(unique_terms.size());
  for (const auto& t : unique_terms) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });

  const int n = static_cast<int>(sorted.size());
  KtermRef ref;
  std::array<int, kMaxKtermLength> idx{};
  for (int k = 1; k <= k_max && k <= n; ++k) {
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      ref.len = k;
      for (int i = 0; i < k; ++i)
        ref.parts[static_cast<std::size_t>(i)] =
            sorted[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      fn(static_cast<const KtermRef&>(ref));
      int j = k - 1;
      while (j >= 0 && idx[static_cast<std::size_t>(j)] == n - k + j) --j;
      if (j < 0) break;
      ++idx[static_cast<std::size_t>(j)];
      for (int i = j + 1; i < k; ++i)
        idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
}

inline std::vector<Kterm> generate_kterms(const Document& doc, int k_max) {
  std::vector<Kterm> out;
  for_each_kterm(doc.unique_terms, k_max,
                 [&](const KtermRef& ref) { out.push_back(ref.materialize()); });
  return out;
}

}  // namespace pkterm
