#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pkterm/common.hpp"
#include "pkterm/document.hpp"

namespace pkterm {

enum class Pos : std::uint8_t { Noun, Verb, Adj, Other };
enum class Entity : std::uint8_t { Person, Location, Organization, None };

inline const char* to_string(Pos p) {
  switch (p) {
    case Pos::Noun: return "NOUN";
    case Pos::Verb: return "VERB";
    case Pos::Adj: return "ADJ";
    default: return "OTHER";
  }
}

inline const char* to_string(Entity e) {
  switch (e) {
    case Entity::Person: return "PERSON";
    case Entity::Location: return "LOCATION";
    case Entity::Organization: return "ORGANIZATION";
    default: return "NONE";
  }
}

struct TermAnnotation {
  std::string term;
  Pos pos = Pos::Other;
  Entity entity = Entity::None;
  bool spelled_ok = false;
  bool is_number = false;
  bool is_hashtag = false;
  bool is_username = false;
};

// Wordlist-backed lexicons: dictionary, entity gazetteers and POS lists.
struct LexiconSet {
  std::unordered_set<std::string> dictionary;
  std::unordered_set<std::string> persons;
  std::unordered_set<std::string> locations;
  std::unordered_set<std::string> organizations;
  std::unordered_set<std::string> nouns;
  std::unordered_set<std::string> verbs;
  std::unordered_set<std::string> adjectives;

  static std::unordered_set<std::string> load_wordlist(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("missing lexicon file: " + path.string());
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (!line.empty()) words.insert(line);
    }
    return words;
  }

  // Loads the seven standard wordlists from one directory.
  static LexiconSet load(const std::filesystem::path& dir) {
    LexiconSet lex;
    lex.dictionary = load_wordlist(dir / "dictionary.txt");
    lex.persons = load_wordlist(dir / "persons.txt");
    lex.locations = load_wordlist(dir / "locations.txt");
    lex.organizations = load_wordlist(dir / "organizations.txt");
    lex.nouns = load_wordlist(dir / "pos_nouns.txt");
    lex.verbs = load_wordlist(dir / "pos_verbs.txt");
    lex.adjectives = load_wordlist(dir / "pos_adjs.txt");
    return lex;
  }
};

namespace detail {

inline bool matches_number(const std::string& t) {
  // digits with optional '.' or ',' separators, e.g. 23, 1,000, 3.14
  if (t.empty()) return false;
  bool prev_digit = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const char c = t[i];
    if (c >= '0' && c <= '9') {
      prev_digit = true;
    } else if ((c == '.' || c == ',') && prev_digit && i + 1 < t.size()) {
      prev_digit = false;
    } else {
      return false;
    }
  }
  return prev_digit;
}

inline bool ends_with(const std::string& s, const char* suffix, std::size_t min_len) {
  const std::size_t n = std::char_traits<char>::length(suffix);
  return s.size() >= min_len && s.size() >= n &&
         s.compare(s.size() - n, n, suffix) == 0;
}

}  // namespace detail

// Deterministic rule/lexicon tagger. Entity via gazetteers (person, then
// location, then organization); POS via lexicon, then suffix rules, then
// NOUN for gazetteer hits, else OTHER.
inline TermAnnotation annotate(const std::string& term, const LexiconSet& lex) {
  TermAnnotation a;
  a.term = term;
  a.is_hashtag = !term.empty() && term[0] == '#';
  a.is_username = !term.empty() && term[0] == '@';
  a.is_number = detail::matches_number(term);

  if (lex.persons.count(term)) a.entity = Entity::Person;
  else if (lex.locations.count(term)) a.entity = Entity::Location;
  else if (lex.organizations.count(term)) a.entity = Entity::Organization;

  if (lex.nouns.count(term)) a.pos = Pos::Noun;
  else if (lex.verbs.count(term)) a.pos = Pos::Verb;
  else if (lex.adjectives.count(term)) a.pos = Pos::Adj;
  else if (detail::ends_with(term, "ing", 5) || detail::ends_with(term, "ed", 4)) a.pos = Pos::Verb;
  else if (detail::ends_with(term, "ous", 5) || detail::ends_with(term, "ful", 5) ||
           detail::ends_with(term, "ive", 5)) a.pos = Pos::Adj;
  else if (a.entity != Entity::None) a.pos = Pos::Noun;
  else a.pos = Pos::Other;

  a.spelled_ok = a.is_number || a.is_hashtag || a.is_username ||
                 lex.dictionary.count(term) != 0;
  return a;
}

// Streaming corpus statistics. Single writer; snapshot_id bumps on every
// update so cached derived values can be invalidated.
class StreamStats {
 public:
  std::uint64_t n_docs() const { return n_docs_; }
  std::uint64_t snapshot_id() const { return snapshot_id_; }

  std::uint64_t tf(const std::string& term) const {
    auto it = tf_.find(term);
    return it == tf_.end() ? 0 : it->second;
  }
  std::uint64_t df(const std::string& term) const {
    auto it = df_.find(term);
    return it == df_.end() ? 0 : it->second;
  }
  const std::unordered_map<std::string, std::uint64_t>& tf_map() const { return tf_; }
  const std::unordered_map<std::string, std::uint64_t>& df_map() const { return df_; }

  // df once per unique term; tf by raw occurrence count in the text.
  void update(const Document& doc) {
    ++n_docs_;
    ++snapshot_id_;
    avg_idf_valid_ = false;
    if (doc.unique_terms.empty()) return;
    const auto tokens = tokenize(doc.text);
    std::unordered_map<std::string_view, std::uint64_t> counts;
    for (const auto& tok : tokens) ++counts[tok];
    for (const auto& term : doc.unique_terms) {
      ++df_[term];
      auto it = counts.find(term);
      // hand-built documents may carry terms absent from text; count >= 1
      tf_[term] += it == counts.end() ? 1 : it->second;
    }
  }

  // ln((N+1)/(df+1)) + 1; unseen terms use df = 0.
  double idf(const std::string& term) const {
    return idf_from_df(df(term));
  }
  double idf_from_df(std::uint64_t df_count) const {
    return std::log((static_cast<double>(n_docs_) + 1.0) /
                    (static_cast<double>(df_count) + 1.0)) + 1.0;
  }

  // Mean idf over the observed vocabulary; 1.0 when nothing was observed.
  // Summation runs over a sorted df histogram so the result does not
  // depend on hash-map iteration order.
  double average_idf() const {
    if (!avg_idf_valid_) {
      if (df_.empty()) {
        avg_idf_ = 1.0;
      } else {
        std::map<std::uint64_t, std::uint64_t> histogram;
        for (const auto& [term, d] : df_) ++histogram[d];
        double sum = 0.0;
        for (const auto& [d, count] : histogram)
          sum += static_cast<double>(count) * idf_from_df(d);
        avg_idf_ = sum / static_cast<double>(df_.size());
      }
      avg_idf_valid_ = true;
    }
    return avg_idf_;
  }

  void restore(std::uint64_t n_docs, std::uint64_t snapshot_id,
               std::unordered_map<std::string, std::uint64_t> tf,
               std::unordered_map<std::string, std::uint64_t> df) {
    n_docs_ = n_docs;
    snapshot_id_ = snapshot_id;
    tf_ = std::move(tf);
    df_ = std::move(df);
    avg_idf_valid_ = false;
  }

 private:
  std::uint64_t n_docs_ = 0;
  std::uint64_t snapshot_id_ = 0;
  std::unordered_map<std::string, std::uint64_t> tf_;
  std::unordered_map<std::string, std::uint64_t> df_;
  mutable bool avg_idf_valid_ = false;
  mutable double avg_idf_ = 1.0;
};

// Lexicon-backed annotation cache keyed by term.
class AnnotationMap {
 public:
  explicit AnnotationMap(const LexiconSet& lex) : lex_(&lex) {}

  const TermAnnotation& get(const std::string& term) const {
    auto it = cache_.find(term);
    if (it == cache_.end()) it = cache_.emplace(term, annotate(term, *lex_)).first;
    return it->second;
  }

 private:
  const LexiconSet* lex_;
  mutable std::unordered_map<std::string, TermAnnotation> cache_;
};

}  // namespace pkterm
