#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "pkterm/common.hpp"
#include "pkterm/document.hpp"

namespace pkterm {

// Topic structure of an annotated corpus. Per topic, doc ids ordered by
// rank; rank 0 is the first story.
struct TopicAnnotations {
  std::map<std::string, std::vector<std::string>> topics;
  std::unordered_map<std::string, std::string> topic_of;
  std::unordered_map<std::string, int> rank_of;

  bool annotated(const std::string& doc_id) const { return rank_of.count(doc_id) != 0; }
  bool first_story(const std::string& doc_id) const {
    auto it = rank_of.find(doc_id);
    return it != rank_of.end() && it->second == 0;
  }

  void add(const std::string& topic_id, const std::string& doc_id, int rank) {
    if (rank < 0) throw DataError("negative rank for doc '" + doc_id + "'");
    if (topic_of.count(doc_id))
      throw DataError("doc '" + doc_id + "' appears in more than one topic entry");
    auto& docs = topics[topic_id];
    if (docs.size() < static_cast<std::size_t>(rank) + 1)
      docs.resize(static_cast<std::size_t>(rank) + 1);
    if (!docs[static_cast<std::size_t>(rank)].empty())
      throw DataError("duplicate rank " + std::to_string(rank) + " in topic '" + topic_id + "'");
    docs[static_cast<std::size_t>(rank)] = doc_id;
    topic_of[doc_id] = topic_id;
    rank_of[doc_id] = rank;
  }

  // Ranks must be consecutive from 0 within each topic.
  void validate() const {
    for (const auto& [topic, docs] : topics) {
      if (docs.empty() || docs[0].empty())
        throw DataError("topic '" + topic + "' has no rank-0 first story");
      for (std::size_t r = 0; r < docs.size(); ++r) {
        if (docs[r].empty())
          throw DataError("topic '" + topic + "' is missing rank " + std::to_string(r));
      }
    }
  }
};

// One JSON object per line, keys: id (string), ts (integer), text (string).
inline std::vector<Document> read_stream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stream file: " + path.string());

  std::vector<Document> docs;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": malformed JSON line: " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("ts") || !j.contains("text") ||
        !j["id"].is_string() || !j["ts"].is_number_integer() || !j["text"].is_string()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected object with string id, integer ts, string text");
    }
    std::string id = j["id"].get<std::string>();
    if (!ids.insert(id).second)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": duplicate id '" + id + "'");
    docs.push_back(make_document(std::move(id), j["ts"].get<std::int64_t>(),
                                 j["text"].get<std::string>()));
  }
  return docs;
}

// TSV lines: topic_id <TAB> doc_id <TAB> rank, no header.
inline TopicAnnotations read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open annotations file: " + path.string());

  TopicAnnotations ann;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected topic_id<TAB>doc_id<TAB>rank");
    const std::string topic = line.substr(0, t1);
    const std::string doc = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string rank_str = line.substr(t2 + 1);
    int rank = 0;
    try {
      std::size_t pos = 0;
      rank = std::stoi(rank_str, &pos);
      if (pos != rank_str.size()) throw std::invalid_argument(rank_str);
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": bad rank '" + rank_str + "'");
    }
    if (topic.empty() || doc.empty())
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": empty topic or doc id");
    ann.add(topic, doc, rank);
  }
  ann.validate();
  return ann;
}

// Within each topic, ranks must strictly increase with document timestamp.
// Needs the stream, so it is a separate check from read_annotations.
inline void check_rank_time_order(const TopicAnnotations& ann,
                                  const std::vector<Document>& docs) {
  std::unordered_map<std::string, std::int64_t> ts;
  ts.reserve(docs.size());
  for (const auto& d : docs) ts[d.id] = d.timestamp;
  for (const auto& [topic, topic_docs] : ann.topics) {
    std::int64_t prev = 0;
    for (std::size_t r = 0; r < topic_docs.size(); ++r) {
      auto it = ts.find(topic_docs[r]);
      if (it == ts.end())
        throw DataError("annotated doc '" + topic_docs[r] + "' not present in stream");
      if (r > 0 && it->second <= prev)
        throw DataError("topic '" + topic + "': rank " + std::to_string(r) +
                        " does not increase in timestamp");
      prev = it->second;
    }
  }
}

inline void write_stream(const std::filesystem::path& path,
                         const std::vector<Document>& docs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write stream file: " + path.string());
  for (const auto& d : docs) {
    nlohmann::json j{{"id", d.id}, {"ts", d.timestamp}, {"text", d.text}};
    out << j.dump() << '\n';
  }
}

inline void write_annotations(const std::filesystem::path& path,
                              const TopicAnnotations& ann) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write annotations file: " + path.string());
  for (const auto& [topic, docs] : ann.topics) {
    for (std::size_t r = 0; r < docs.size(); ++r)
      out << topic << '\t' << docs[r] << '\t' << r << '\n';
  }
}

}  // namespace pkterm
