#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "pkterm/common.hpp"
#include "pkterm/corpus_io.hpp"
#include "pkterm/document.hpp"

namespace pkterm {

// Planted-event corpus generator. The vocabulary has vocab_size terms;
// the first n_topics * event_term_count of them are reserved as event
// terms (one disjoint block per topic), the rest form the background
// pool sampled with a Zipf-like skew.
struct SynthConfig {
  std::size_t n_topics = 10;
  std::size_t followups_per_topic = 5;
  std::size_t n_background_docs = 100;
  std::size_t vocab_size = 2000;
  std::size_t terms_per_doc = 10;
  std::size_t event_term_count = 4;
  double reuse_probability = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_topics == 0 || followups_per_topic == 0 || n_background_docs == 0 ||
        vocab_size == 0 || terms_per_doc == 0 || event_term_count == 0)
      throw DataError("synth config: all counts must be positive");
    if (reuse_probability < 0.0 || reuse_probability > 1.0)
      throw DataError("synth config: reuse_probability must be in [0,1]");
    if (event_term_count > terms_per_doc)
      throw DataError("synth config: event_term_count exceeds terms_per_doc");
    const std::size_t reserved = n_topics * event_term_count;
    if (vocab_size <= reserved || vocab_size - reserved < terms_per_doc)
      throw DataError("synth config: vocab_size too small to supply event terms");
  }
};

namespace detail {

inline std::string event_term_name(std::size_t global_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ev%05zu", global_index);
  return buf;
}

inline std::string background_term_name(std::size_t rank) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "bg%05zu", rank);
  return buf;
}

// Zipf(1.0) sampler over [0, n) by inverse CDF on the cumulative weights.
class ZipfSampler {
 public:
  explicit ZipfSampler(std::size_t n) : cum_(n) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      acc += 1.0 / static_cast<double>(r + 1);
      cum_[r] = acc;
    }
  }
  template <class Rng>
  std::size_t operator()(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, cum_.back());
    const double x = u(rng);
    return static_cast<std::size_t>(
        std::lower_bound(cum_.begin(), cum_.end(), x) - cum_.begin());
  }

 private:
  std::vector<double> cum_;
};

}  // namespace detail

struct SynthCorpus {
  std::vector<Document> docs;
  TopicAnnotations ann;
  // topic id -> event terms planted in its first story (provenance).
  std::map<std::string, std::vector<std::string>> event_terms;
};

inline SynthCorpus generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);

  const std::size_t background_pool = cfg.vocab_size - cfg.n_topics * cfg.event_term_count;
  detail::ZipfSampler zipf(background_pool);

  auto draw_background = [&](std::size_t count, std::unordered_set<std::size_t>& used,
                             std::vector<std::string>& out) {
    std::size_t guard = 0;
    while (out.size() < count) {
      const std::size_t r = zipf(rng);
      if (used.insert(r).second) out.push_back(detail::background_term_name(r));
      if (++guard > count * 1000 + 1000)
        throw DataError("synth: cannot draw enough distinct background terms");
    }
  };

  // Interleaving schedule: tickets shuffled globally, then each topic's
  // slots receive its documents in rank order.
  struct Ticket { std::int32_t topic; };  // -1 = background
  const std::size_t topic_docs = cfg.n_topics * (1 + cfg.followups_per_topic);
  const std::size_t total = topic_docs + cfg.n_background_docs;
  std::vector<Ticket> schedule(total);
  std::size_t pos = 0;
  for (std::size_t t = 0; t < cfg.n_topics; ++t)
    for (std::size_t k = 0; k <= cfg.followups_per_topic; ++k) schedule[pos++] = {static_cast<std::int32_t>(t)};
  for (std::size_t b = 0; b < cfg.n_background_docs; ++b) schedule[pos++] = {-1};
  std::shuffle(schedule.begin(), schedule.end(), rng);

  SynthCorpus corpus;
  corpus.docs.reserve(total);
  std::vector<std::size_t> next_rank(cfg.n_topics, 0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  for (std::size_t slot = 0; slot < total; ++slot) {
    const std::int32_t t = schedule[slot].topic;
    std::vector<std::string> terms;
    std::string topic_id;
    std::size_t rank = 0;
    if (t >= 0) {
      rank = next_rank[static_cast<std::size_t>(t)]++;
      char tb[32];
      std::snprintf(tb, sizeof tb, "T%03d", t);
      topic_id = tb;
      const std::size_t base = static_cast<std::size_t>(t) * cfg.event_term_count;
      std::unordered_set<std::size_t> used;
      if (rank == 0) {
        for (std::size_t i = 0; i < cfg.event_term_count; ++i)
          terms.push_back(detail::event_term_name(base + i));
        corpus.event_terms[topic_id] = terms;
      } else {
        for (std::size_t i = 0; i < cfg.event_term_count; ++i)
          if (coin(rng) < cfg.reuse_probability)
            terms.push_back(detail::event_term_name(base + i));
      }
      std::vector<std::string> fill;
      draw_background(cfg.terms_per_doc - terms.size(), used, fill);
      terms.insert(terms.end(), fill.begin(), fill.end());
    } else {
      std::unordered_set<std::size_t> used;
      draw_background(cfg.terms_per_doc, used, terms);
    }

    char db[32];
    std::snprintf(db, sizeof db, "d%06zu", slot);
    std::string text;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (i) text += ' ';
      text += terms[i];
    }
    corpus.docs.push_back(make_document(db, static_cast<std::int64_t>(1000 + slot), text));
    if (t >= 0) corpus.ann.add(topic_id, db, static_cast<int>(rank));
  }
  corpus.ann.validate();
  return corpus;
}

// Writes documents.jsonl, topics.tsv and a synth_config.json echo with the
// planted event terms for provenance.
inline SynthCorpus write_synthetic(const SynthConfig& cfg, const std::filesystem::path& dir) {
  SynthCorpus corpus = generate_synthetic(cfg);
  std::filesystem::create_directories(dir);
  write_stream(dir / "documents.jsonl", corpus.docs);
  write_annotations(dir / "topics.tsv", corpus.ann);

  nlohmann::json echo{
      {"n_topics", cfg.n_topics},
      {"followups_per_topic", cfg.followups_per_topic},
      {"n_background_docs", cfg.n_background_docs},
      {"vocab_size", cfg.vocab_size},
      {"terms_per_doc", cfg.terms_per_doc},
      {"event_term_count", cfg.event_term_count},
      {"reuse_probability", cfg.reuse_probability},
      {"seed", cfg.seed},
      {"n_documents", corpus.docs.size()},
      {"event_terms", corpus.event_terms},
  };
  std::ofstream out(dir / "synth_config.json");
  if (!out) throw DataError("cannot write synth_config.json in " + dir.string());
  out << echo.dump(2) << '\n';
  return corpus;
}

}  // namespace pkterm
