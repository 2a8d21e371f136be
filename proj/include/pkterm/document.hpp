#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace pkterm {

// One stream item. unique_terms is derived from text by tokenize():
// duplicates removed, first occurrence order preserved.
struct Document {
  std::string id;
  std::int64_t timestamp = 0;
  std::string text;
  std::vector<std::string> unique_terms;
};

namespace detail {

inline bool is_token_byte(unsigned char c) {
  // ASCII alphanumerics plus any non-ASCII byte, so UTF-8 sequences
  // survive tokenization as opaque units.
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline char lower_ascii(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

}  // namespace detail

// Lowercases and splits on non-alphanumerics. A '#' or '@' immediately
// preceding an alphanumeric run stays attached to that token. Duplicates
// are kept; order follows the text.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if ((c == '#' || c == '@') && i + 1 < n &&
        detail::is_token_byte(static_cast<unsigned char>(text[i + 1]))) {
      cur.clear();
      cur.push_back(static_cast<char>(c));
      ++i;
      while (i < n && detail::is_token_byte(static_cast<unsigned char>(text[i]))) {
        cur.push_back(detail::lower_ascii(static_cast<unsigned char>(text[i])));
        ++i;
      }
      tokens.push_back(cur);
    } else if (detail::is_token_byte(c)) {
      cur.clear();
      while (i < n && detail::is_token_byte(static_cast<unsigned char>(text[i]))) {
        cur.push_back(detail::lower_ascii(static_cast<unsigned char>(text[i])));
        ++i;
      }
      tokens.push_back(cur);
    } else {
      ++i;
    }
  }
  return tokens;
}

// Deduplicated tokens, first occurrence order.
inline std::vector<std::string> unique_terms_of(std::string_view text) {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (auto& t : tokenize(text)) {
    if (seen.count(t)) continue;
    out.push_back(std::move(t));
    seen.insert(out.back());
  }
  return out;
}

inline Document make_document(std::string id, std::int64_t ts, std::string text) {
  Document d;
  d.id = std::move(id);
  d.timestamp = ts;
  d.unique_terms = unique_terms_of(text);
  d.text = std::move(text);
  return d;
}

// Drops '#'-prefixed tokens from unique_terms. text is left untouched.
inline Document strip_hashtags(Document doc) {
  std::erase_if(doc.unique_terms,
                [](const std::string& t) { return !t.empty() && t[0] == '#'; });
  return doc;
}

}  // namespace pkterm
