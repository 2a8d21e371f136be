#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include "pkterm/common.hpp"
#include "pkterm/hash.hpp"

namespace pkterm {

// Exact record of seen kterm keys. No false positives, no false negatives.
class ExactMemory {
 public:
  bool contains(std::string_view key) const {
    return seen_.find(std::string(key)) != seen_.end();
  }
  void insert(std::string_view key) { seen_.insert(std::string(key)); }
  std::uint64_t size() const { return seen_.size(); }

 private:
  std::unordered_set<std::string> seen_;
};

// Fixed-size Bloom filter over kterm keys. Double hashing from one
// 128-bit hash: g_i = h1 + i*h2 mod m, i = 0..h-1. No false negatives.
class BloomMemory {
 public:
  explicit BloomMemory(std::uint64_t m_bits = std::uint64_t{1} << 28, int n_hashes = 4)
      : m_bits_(m_bits), n_hashes_(n_hashes), words_((m_bits + 63) / 64, 0) {
    if (m_bits_ == 0 || n_hashes_ < 1) throw DataError("bloom: m and h must be positive");
  }

  bool contains(std::string_view key) const {
    const auto [h1, h2] = murmur3_x64_128(key);
    for (int i = 0; i < n_hashes_; ++i) {
      const std::uint64_t bit = (h1 + static_cast<std::uint64_t>(i) * h2) % m_bits_;
      if (!(words_[bit >> 6] & (std::uint64_t{1} << (bit & 63)))) return false;
    }
    return true;
  }

  void insert(std::string_view key) {
    const auto [h1, h2] = murmur3_x64_128(key);
    bool changed = false;
    for (int i = 0; i < n_hashes_; ++i) {
      const std::uint64_t bit = (h1 + static_cast<std::uint64_t>(i) * h2) % m_bits_;
      std::uint64_t& w = words_[bit >> 6];
      const std::uint64_t mask = std::uint64_t{1} << (bit & 63);
      if (!(w & mask)) {
        w |= mask;
        changed = true;
      }
    }
    if (changed) ++n_inserted_;
  }

  std::uint64_t bits() const { return m_bits_; }
  int hashes() const { return n_hashes_; }
  // Count of inserts that set at least one new bit; approximates the
  // number of distinct keys inserted while the filter is sparse.
  std::uint64_t n_inserted() const { return n_inserted_; }

  // Standard estimate (1 - e^{-h*n/m})^h for n distinct insertions.
  static double analytic_fpr(std::uint64_t n, std::uint64_t m_bits, int n_hashes) {
    const double x = static_cast<double>(n_hashes) * static_cast<double>(n) /
                     static_cast<double>(m_bits);
    return std::pow(1.0 - std::exp(-x), n_hashes);
  }

 private:
  std::uint64_t m_bits_;
  int n_hashes_;
  std::vector<std::uint64_t> words_;
  std::uint64_t n_inserted_ = 0;
};

enum class MemoryBackend : std::uint8_t { Exact, Bloom };

// The persistent memory of the past M. Exact set for deterministic tests,
// Bloom filter as the constant-space backend.
class NoveltyMemory {
 public:
  NoveltyMemory() : impl_(ExactMemory{}) {}
  static NoveltyMemory exact() { return NoveltyMemory{ExactMemory{}}; }
  static NoveltyMemory bloom(std::uint64_t m_bits = std::uint64_t{1} << 28, int n_hashes = 4) {
    return NoveltyMemory{BloomMemory{m_bits, n_hashes}};
  }

  bool contains(std::string_view key) const {
    return std::visit([&](const auto& m) { return m.contains(key); }, impl_);
  }
  void insert(std::string_view key) {
    std::visit([&](auto& m) { m.insert(key); }, impl_);
  }
  MemoryBackend backend() const {
    return std::holds_alternative<ExactMemory>(impl_) ? MemoryBackend::Exact
                                                      : MemoryBackend::Bloom;
  }
  const ExactMemory* as_exact() const { return std::get_if<ExactMemory>(&impl_); }
  const BloomMemory* as_bloom() const { return std::get_if<BloomMemory>(&impl_); }

 private:
  explicit NoveltyMemory(std::variant<ExactMemory, BloomMemory> impl)
      : impl_(std::move(impl)) {}
  std::variant<ExactMemory, BloomMemory> impl_;
};

}  // namespace pkterm
