#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "pkterm/corpus_io.hpp"
#include "pkterm/synth.hpp"

using namespace pkterm;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() /
                 ("pkterm_corpus_test_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& body) {
  fs::path p = dir / name;
  std::ofstream out(p);
  out << body;
  return p;
}

}  // namespace

TEST_CASE("read_stream parses JSONL in order") {
  auto dir = temp_dir();
  auto path = write_file(dir, "s.jsonl",
                         R"({"id":"t1","ts":10,"text":"Quake hits LA LA"})" "\n"
                         R"({"id":"t2","ts":11,"text":"#quake @bob 23"})" "\n"
                         R"({"id":"t3","ts":12,"text":"calm day"})" "\n");
  const auto docs = read_stream(path);
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].id == "t1");
  CHECK(docs[0].unique_terms == std::vector<std::string>{"quake", "hits", "la"});
  CHECK(docs[1].unique_terms == std::vector<std::string>{"#quake", "@bob", "23"});
  CHECK(docs[2].id == "t3");
}

TEST_CASE("read_stream reports the offending line number") {
  auto dir = temp_dir();
  auto path = write_file(dir, "bad.jsonl",
                         R"({"id":"t1","ts":10,"text":"ok"})" "\n"
                         "not json\n");
  try {
    read_stream(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("read_stream rejects duplicate ids and missing keys") {
  auto dir = temp_dir();
  CHECK_THROWS_AS(read_stream(write_file(dir, "dup.jsonl",
                                         R"({"id":"a","ts":1,"text":"x"})" "\n"
                                         R"({"id":"a","ts":2,"text":"y"})" "\n")),
                  DataError);
  CHECK_THROWS_AS(read_stream(write_file(dir, "missing.jsonl",
                                         R"({"id":"a","ts":1})" "\n")),
                  DataError);
  CHECK_THROWS_AS(read_stream(dir / "does_not_exist.jsonl"), DataError);
}

TEST_CASE("read_annotations parses topics") {
  auto dir = temp_dir();
  auto path = write_file(dir, "t.tsv", "T1\ta\t0\nT1\tb\t1\n");
  const auto ann = read_annotations(path);
  REQUIRE(ann.topics.count("T1") == 1);
  CHECK(ann.topics.at("T1") == std::vector<std::string>{"a", "b"});
  CHECK(ann.first_story("a"));
  CHECK_FALSE(ann.first_story("b"));
  CHECK(ann.rank_of.at("b") == 1);
}

TEST_CASE("read_annotations rejects invariant violations") {
  auto dir = temp_dir();
  // doc in two topics
  CHECK_THROWS_AS(read_annotations(write_file(dir, "two.tsv", "T1\ta\t0\nT2\ta\t0\n")),
                  DataError);
  // missing rank 0
  CHECK_THROWS_AS(read_annotations(write_file(dir, "norank0.tsv", "T1\tb\t1\n")),
                  DataError);
  // duplicate (topic, rank)
  CHECK_THROWS_AS(read_annotations(write_file(dir, "dup.tsv", "T1\ta\t0\nT1\tb\t0\n")),
                  DataError);
  // rank gap
  CHECK_THROWS_AS(read_annotations(write_file(dir, "gap.tsv", "T1\ta\t0\nT1\tb\t2\n")),
                  DataError);
  // malformed rank
  CHECK_THROWS_AS(read_annotations(write_file(dir, "badrank.tsv", "T1\ta\tzero\n")),
                  DataError);
}

TEST_CASE("synthetic corpus has the configured shape") {
  SynthConfig cfg;
  cfg.n_topics = 2;
  cfg.followups_per_topic = 3;
  cfg.n_background_docs = 10;
  cfg.vocab_size = 500;
  cfg.terms_per_doc = 8;
  cfg.event_term_count = 3;
  cfg.seed = 7;
  const auto corpus = generate_synthetic(cfg);
  CHECK(corpus.docs.size() == 18);
  REQUIRE(corpus.ann.topics.size() == 2);
  for (const auto& [topic, docs] : corpus.ann.topics) CHECK(docs.size() == 4);
  check_rank_time_order(corpus.ann, corpus.docs);
}

TEST_CASE("synthetic generation is deterministic per seed") {
  SynthConfig cfg;
  cfg.n_topics = 3;
  cfg.followups_per_topic = 4;
  cfg.n_background_docs = 30;
  cfg.seed = 99;
  auto dir_a = temp_dir();
  auto dir_b = temp_dir();
  write_synthetic(cfg, dir_a);
  write_synthetic(cfg, dir_b);
  for (const char* name : {"documents.jsonl", "topics.tsv", "synth_config.json"}) {
    std::ifstream a(dir_a / name), b(dir_b / name);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    INFO(name);
    CHECK(sa.str() == sb.str());
  }
  cfg.seed = 100;
  const auto other = generate_synthetic(cfg);
  const auto base = generate_synthetic([&] { auto c = cfg; c.seed = 99; return c; }());
  CHECK(other.docs[0].text != base.docs[0].text);
}

TEST_CASE("first stories introduce terms unseen earlier in the stream") {
  SynthConfig cfg;
  cfg.n_topics = 5;
  cfg.followups_per_topic = 4;
  cfg.n_background_docs = 60;
  cfg.vocab_size = 400;
  cfg.event_term_count = 3;
  cfg.seed = 3;
  const auto corpus = generate_synthetic(cfg);

  // brute-force scan of first occurrence positions
  std::set<std::string> seen;
  std::unordered_map<std::string, std::size_t> first_seen_count;
  for (const auto& doc : corpus.docs) {
    if (corpus.ann.first_story(doc.id)) {
      std::size_t fresh = 0;
      for (const auto& t : doc.unique_terms)
        if (!seen.count(t)) ++fresh;
      first_seen_count[doc.id] = fresh;
    }
    for (const auto& t : doc.unique_terms) seen.insert(t);
  }
  for (const auto& [topic, docs] : corpus.ann.topics) {
    INFO(topic);
    CHECK(first_seen_count.at(docs[0]) >= cfg.event_term_count);
  }
}

TEST_CASE("synthetic corpus round-trips through the writers") {
  SynthConfig cfg;
  cfg.n_topics = 2;
  cfg.followups_per_topic = 2;
  cfg.n_background_docs = 12;
  cfg.seed = 11;
  auto dir = temp_dir();
  const auto corpus = write_synthetic(cfg, dir);
  const auto docs = read_stream(dir / "documents.jsonl");
  const auto ann = read_annotations(dir / "topics.tsv");

  REQUIRE(docs.size() == corpus.docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(docs[i].id == corpus.docs[i].id);
    CHECK(docs[i].timestamp == corpus.docs[i].timestamp);
    CHECK(docs[i].unique_terms == corpus.docs[i].unique_terms);
  }
  CHECK(ann.topics == corpus.ann.topics);
}

TEST_CASE("synth config validation") {
  SynthConfig cfg;
  cfg.n_topics = 50;
  cfg.event_term_count = 10;
  cfg.vocab_size = 400;  // 500 reserved > 400
  CHECK_THROWS_AS(generate_synthetic(cfg), DataError);

  SynthConfig zero;
  zero.n_topics = 0;
  CHECK_THROWS_AS(generate_synthetic(zero), DataError);

  SynthConfig bad_reuse;
  bad_reuse.reuse_probability = 1.5;
  CHECK_THROWS_AS(generate_synthetic(bad_reuse), DataError);
}
