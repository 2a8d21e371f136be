#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <unordered_map>

#include "pkterm/document.hpp"
#include "pkterm/features.hpp"
#include "pkterm/text_analysis.hpp"

using namespace pkterm;

namespace {

LexiconSet tiny_lexicons() {
  LexiconSet lex;
  lex.dictionary = {"the", "la", "downtown", "earthquake", "quake"};
  lex.locations = {"la"};
  lex.nouns = {"earthquake", "quake"};
  return lex;
}

std::unordered_map<std::string, TermAnnotation> annotate_all(
    const std::vector<std::string>& terms, const LexiconSet& lex) {
  std::unordered_map<std::string, TermAnnotation> m;
  for (const auto& t : terms) m.emplace(t, annotate(t, lex));
  return m;
}

}  // namespace

TEST_CASE("feature schema is frozen at 60 dimensions") {
  const auto names = feature_names();
  REQUIRE(names.size() == kFeatureCount);
  // group spans tile [0,60) without gaps
  int expected_begin = 0;
  for (const auto& g : kFeatureGroups) {
    CHECK(g.begin == expected_begin);
    CHECK(g.end > g.begin);
    expected_begin = g.end;
  }
  CHECK(expected_begin == kFeatureCount);
  CHECK(names[0] == "idf_sum");
  CHECK(names[56] == "length_raw");
}

TEST_CASE("single-component kterm identities") {
  const auto lex = tiny_lexicons();
  StreamStats stats;
  for (int i = 0; i < 20; ++i)
    stats.update(make_document("d" + std::to_string(i), i, "the filler"));

  const Kterm kt({"the"});
  const auto ann = annotate_all(kt.terms, lex);
  const auto f = extract_features(kt, stats, ann);

  CHECK(f[56] == 1.0);                   // raw length
  CHECK(f[57] == 1.0);                   // one-hot length 1
  CHECK(f[58] == 0.0);
  CHECK(f[59] == 0.0);
  CHECK(f[15 + 4 * 3 + 3] == 1.0);       // entity NONE ratio
  CHECK(f[15 + 4 * 3 + 0] == 1.0);       // entity NONE count
  CHECK(f[47] == 1.0);                   // spelled ratio ("the" in dictionary)
  CHECK(f[48] == 0.0);                   // none misspelled
}

TEST_CASE("two-component kterm with a hashtag") {
  const auto lex = tiny_lexicons();
  StreamStats stats;
  stats.update(make_document("d0", 0, "#quake la"));

  const Kterm kt({"#quake", "la"});
  const auto ann = annotate_all(kt.terms, lex);
  const auto f = extract_features(kt, stats, ann);

  CHECK(f[52] == 1.0);   // hashtag count
  CHECK(f[53] == 0.5);   // hashtag ratio
  CHECK(f[54] == 0.0);   // username count
  CHECK(f[56] == 2.0);   // raw length
  CHECK(f[57] == 0.0);
  CHECK(f[58] == 1.0);   // one-hot length 2
  CHECK(f[59] == 0.0);
}

TEST_CASE("df aggregation arithmetic") {
  const auto lex = tiny_lexicons();
  StreamStats stats;
  // df(la)=50, df(downtown)=3, df(earthquake)=1 over 99 docs
  for (int i = 0; i < 99; ++i) {
    std::string text = "filler";
    if (i < 50) text += " la";
    if (i < 3) text += " downtown";
    if (i < 1) text += " earthquake";
    stats.update(make_document("d" + std::to_string(i), i, text));
  }
  REQUIRE(stats.n_docs() == 99);
  REQUIRE(stats.df("la") == 50);
  REQUIRE(stats.df("downtown") == 3);
  REQUIRE(stats.df("earthquake") == 1);

  const Kterm kt({"downtown", "earthquake", "la"});
  const auto ann = annotate_all(kt.terms, lex);
  const auto f = extract_features(kt, stats, ann);

  CHECK(f[10] == 54.0);  // df sum
  CHECK(f[11] == 1.0);   // df min
  CHECK(f[12] == 50.0);  // df max
  CHECK(f[13] == Catch::Approx(18.0));
  CHECK(f[14] == 1.0);   // count df <= 1
}

TEST_CASE("idf occurrence feature counts above-average components") {
  const auto lex = tiny_lexicons();
  StreamStats stats;
  for (int i = 0; i < 40; ++i) {
    std::string text = "common";
    if (i == 0) text += " rare";
    stats.update(make_document("d" + std::to_string(i), i, text));
  }
  const Kterm kt({"common", "rare"});
  const auto ann = annotate_all(kt.terms, lex);
  const auto f = extract_features(kt, stats, ann);
  // avg corpus idf lies between idf(common) and idf(rare)
  CHECK(f[4] == 1.0);
  CHECK(f[0] == Catch::Approx(stats.idf("common") + stats.idf("rare")));
}

TEST_CASE("tf zero-count feature flags unseen components") {
  const auto lex = tiny_lexicons();
  StreamStats stats;
  stats.update(make_document("d0", 0, "seen"));
  const Kterm kt({"seen", "unseen"});
  const auto ann = annotate_all(kt.terms, lex);
  const auto f = extract_features(kt, stats, ann);
  CHECK(f[9] == 1.0);   // one component with tf == 0
  CHECK(f[5] == 1.0);   // tf sum
}

TEST_CASE("ratio dimensions stay in [0,1] and counts bounded by length") {
  const auto lex = tiny_lexicons();
  StreamStats stats;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    std::string text;
    for (int t = 0; t < 6; ++t) text += "w" + std::to_string(rng() % 40) + " ";
    if (i % 3 == 0) text += "#tag @user 42";
    stats.update(make_document("d" + std::to_string(i), i, text));
  }

  const int ratio_dims[] = {18, 22, 26, 30, 34, 38, 42, 46, 47, 51, 53, 55};
  const int count_dims[] = {15, 19, 23, 27, 31, 35, 39, 43, 48, 50, 52, 54};
  std::vector<std::string> pool;
  for (int i = 0; i < 40; ++i) pool.push_back("w" + std::to_string(i));
  pool.insert(pool.end(), {"#tag", "@user", "42"});

  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> terms;
    const int len = 1 + static_cast<int>(rng() % 3);
    while (static_cast<int>(terms.size()) < len) {
      const auto& cand = pool[rng() % pool.size()];
      if (std::find(terms.begin(), terms.end(), cand) == terms.end())
        terms.push_back(cand);
    }
    const Kterm kt(terms);
    const auto ann = annotate_all(kt.terms, lex);
    const auto f = extract_features(kt, stats, ann);
    for (int d : ratio_dims) {
      CHECK(f[static_cast<std::size_t>(d)] >= 0.0);
      CHECK(f[static_cast<std::size_t>(d)] <= 1.0);
    }
    for (int d : count_dims) CHECK(f[static_cast<std::size_t>(d)] <= kt.length());
    for (double v : f) CHECK(std::isfinite(v));
  }
}

TEST_CASE("component order does not change the feature vector") {
  const auto lex = tiny_lexicons();
  StreamStats stats;
  stats.update(make_document("d0", 0, "la downtown earthquake"));
  const Kterm a({"la", "downtown", "earthquake"});
  const Kterm b({"earthquake", "la", "downtown"});
  const auto ann = annotate_all(a.terms, lex);
  CHECK(extract_features(a, stats, ann) == extract_features(b, stats, ann));
}

TEST_CASE("missing annotation raises with the term name") {
  StreamStats stats;
  stats.update(make_document("d0", 0, "la"));
  std::unordered_map<std::string, TermAnnotation> empty;
  try {
    extract_features(Kterm({"la"}), stats, empty);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("la") != std::string::npos);
  }
}

TEST_CASE("scaler maps fitted range onto [0,1]") {
  Matrix rows(2, 1);
  rows.at(0, 0) = 2.0;
  rows.at(1, 0) = 4.0;
  const auto scaler = FeatureScaler::fit(rows);
  CHECK(scaler.apply_dim(0, 3.0) == 0.5);
  CHECK(scaler.apply_dim(0, 2.0) == 0.0);
  CHECK(scaler.apply_dim(0, 4.0) == 1.0);
  CHECK(scaler.apply_dim(0, 10.0) == 1.0);   // clamp above
  CHECK(scaler.apply_dim(0, -1.0) == 0.0);   // clamp below
}

TEST_CASE("constant dimensions scale to zero") {
  Matrix rows(3, 1);
  rows.at(0, 0) = rows.at(1, 0) = rows.at(2, 0) = 7.0;
  const auto scaler = FeatureScaler::fit(rows);
  CHECK(scaler.apply_dim(0, 7.0) == 0.0);
  CHECK(scaler.apply_dim(0, 100.0) == 0.0);
}

TEST_CASE("scaler refuses an empty fit and mismatched dimensions") {
  CHECK_THROWS_AS(FeatureScaler::fit(Matrix(0, 4)), DataError);
  Matrix rows(2, 2);
  const auto scaler = FeatureScaler::fit(rows);
  std::vector<double> wrong(3, 0.0);
  CHECK_THROWS_AS(scaler.apply(std::span<const double>(wrong.data(), wrong.size())),
                  DataError);
}

TEST_CASE("scaling the fitting set lands exactly in [0,1]") {
  std::mt19937_64 rng(8);
  Matrix rows(40, 6);
  for (double& v : rows.data) v = static_cast<double>(rng() % 1000) / 7.0 - 30.0;
  const auto scaler = FeatureScaler::fit(rows);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    const auto scaled = scaler.apply(rows.row_span(i));
    for (double v : scaled) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("feature masks select group complements") {
  const auto all = FeatureMask::all();
  CHECK(all.dims() == 60);
  const auto no_entity = FeatureMask::without_group("entity");
  CHECK(no_entity.dims() == 44);
  for (int idx : no_entity.active) CHECK((idx < 15 || idx >= 31));

  const auto no_length = FeatureMask::without_group("length");
  CHECK(no_length.dims() == 56);

  try {
    FeatureMask::without_group("bogus");
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bogus") != std::string::npos);
    CHECK(msg.find("entity") != std::string::npos);  // lists valid groups
  }
}

TEST_CASE("mask selection projects the right values") {
  FeatureVector full{};
  for (int i = 0; i < kFeatureCount; ++i) full[static_cast<std::size_t>(i)] = i;
  const auto no_idf = FeatureMask::without_group("idf");
  const auto sel = no_idf.select(full);
  REQUIRE(sel.size() == 55);
  CHECK(sel[0] == 5.0);  // first surviving dim is tf_sum
  CHECK(sel.back() == 59.0);
}
