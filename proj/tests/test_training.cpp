#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "pkterm/categorizer.hpp"
#include "pkterm/document.hpp"
#include "pkterm/training.hpp"

using namespace pkterm;

namespace {

// topic layout -> (stream, annotations); doc i of topic t is "t<t>d<i>"
std::pair<std::vector<Document>, TopicAnnotations> make_topics(
    const std::vector<int>& topic_sizes) {
  std::vector<Document> docs;
  TopicAnnotations ann;
  std::int64_t ts = 0;
  for (std::size_t t = 0; t < topic_sizes.size(); ++t) {
    for (int r = 0; r < topic_sizes[t]; ++r) {
      Document d;
      d.id = "t" + std::to_string(t) + "d" + std::to_string(r);
      d.timestamp = ts++;
      d.unique_terms = {"w" + std::to_string(t), "x" + std::to_string(r)};
      docs.push_back(d);
      ann.add("T" + std::to_string(t), d.id, r);
    }
  }
  ann.validate();
  return {docs, ann};
}

std::size_t targets_for_topic(const std::vector<SkipInstance>& instances,
                              const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& i : instances)
    if (i.label == 1 && i.doc->id.rfind(prefix, 0) == 0) ++n;
  return n;
}

// categorizer fixture: mask = length dims, orthogonal centroids so that
// kterm length 1 -> category 7, length 2 -> category 12
struct LengthCategorizer {
  FeatureMask mask;
  FeatureScaler scaler;
  CentroidMatrix centroids;
  StreamStats stats;
  LexiconSet lexicons;
  AnnotationMap annotations{lexicons};

  LengthCategorizer() {
    mask.active = {56, 57, 58, 59};
    scaler.min = {0.0, 0.0, 0.0, 0.0};
    scaler.max = {3.0, 1.0, 1.0, 1.0};
    centroids.m = Matrix(13, 4);
    centroids.m.at(7, 1) = 1.0;   // length_is_1
    centroids.m.at(12, 2) = 1.0;  // length_is_2
  }

  KtermCategorizer make() const {
    return KtermCategorizer(centroids, scaler, mask, stats, annotations);
  }
};

LabeledTrainingSet column_indicator_set(std::size_t n_pos, std::size_t n_neg,
                                        std::size_t dims, std::size_t signal_col,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LabeledTrainingSet t;
  t.x = Matrix(n_pos + n_neg, dims);
  for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
    const bool positive = i < n_pos;
    for (std::size_t j = 0; j < dims; ++j)
      t.x.at(i, j) = static_cast<double>(rng() % 100) / 200.0;  // noise in [0, 0.5)
    t.x.at(i, signal_col) = positive ? 1.0 : 0.0;
    t.y.push_back(positive ? 1 : -1);
    t.doc_ids.push_back("d" + std::to_string(i));
    t.skip_passes.push_back(0);
  }
  return t;
}

}  // namespace

TEST_CASE("skip expansion of a six-document topic") {
  const auto [docs, ann] = make_topics({6});
  const auto instances = skip_expand(docs, ann, 10);
  // passes 0..4, targets t0d0..t0d4
  CHECK(targets_for_topic(instances, "t0") == 5);
  // pass p contributes (6 - p) instances
  std::size_t expected_rows = 6 + 5 + 4 + 3 + 2;
  CHECK(instances.size() == expected_rows);
}

TEST_CASE("zero rounds keeps original labels only") {
  const auto [docs, ann] = make_topics({4, 3});
  const auto instances = skip_expand(docs, ann, 0);
  CHECK(instances.size() == 7);
  std::size_t targets = 0;
  for (const auto& i : instances) {
    CHECK(i.skip_pass == 0);
    if (i.label == 1) {
      ++targets;
      CHECK(ann.first_story(i.doc->id));
    }
  }
  CHECK(targets == 2);
}

TEST_CASE("a two-document topic survives only pass zero") {
  const auto [docs, ann] = make_topics({2});
  const auto instances = skip_expand(docs, ann, 10);
  CHECK(instances.size() == 2);
  CHECK(targets_for_topic(instances, "t0") == 1);
}

TEST_CASE("targets per topic follow min(rounds+1, size-1)") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> sizes;
    const int n_topics = 1 + static_cast<int>(rng() % 5);
    for (int t = 0; t < n_topics; ++t) sizes.push_back(2 + static_cast<int>(rng() % 12));
    const int rounds = static_cast<int>(rng() % 12);
    const auto [docs, ann] = make_topics(sizes);
    const auto instances = skip_expand(docs, ann, rounds);
    for (int t = 0; t < n_topics; ++t) {
      const auto expected = std::min<std::size_t>(
          static_cast<std::size_t>(rounds) + 1,
          static_cast<std::size_t>(sizes[static_cast<std::size_t>(t)]) - 1);
      INFO("topic " << t << " size " << sizes[static_cast<std::size_t>(t)]
                    << " rounds " << rounds);
      CHECK(targets_for_topic(instances, "t" + std::to_string(t)) == expected);
    }
  }
}

TEST_CASE("skip expansion rejects docs missing from the stream") {
  auto [docs, ann] = make_topics({3});
  docs.pop_back();
  CHECK_THROWS_AS(skip_expand(docs, ann, 2), DataError);
}

TEST_CASE("class weights follow the 0.3-scaled fractions") {
  std::vector<int> y(1000, -1);
  y[0] = 1;
  const auto w = class_weights(y);
  CHECK(w.target == Catch::Approx(0.0003).epsilon(1e-12));
  CHECK(w.followup == Catch::Approx(0.2997).epsilon(1e-12));

  std::vector<int> balanced{1, 1, -1, -1};
  const auto wb = class_weights(balanced);
  CHECK(wb.target == Catch::Approx(0.15));
  CHECK(wb.followup == Catch::Approx(0.15));

  const std::vector<int> single(5, 1);
  CHECK_THROWS_AS(class_weights(single), DataError);
}

TEST_CASE("class weights sum to 0.3") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> y;
    const int pos = 1 + static_cast<int>(rng() % 50);
    const int neg = 1 + static_cast<int>(rng() % 200);
    y.insert(y.end(), static_cast<std::size_t>(pos), 1);
    y.insert(y.end(), static_cast<std::size_t>(neg), -1);
    const auto w = class_weights(y);
    CHECK(w.target + w.followup == Catch::Approx(0.3).epsilon(1e-12));
  }
}

TEST_CASE("training rows count kterms per category") {
  LengthCategorizer fixture;
  const auto categorizer = fixture.make();

  Document ab;
  ab.id = "ab";
  ab.unique_terms = {"a", "b"};  // kterms {a},{b} -> 7 and {a,b} -> 12
  Document c;
  c.id = "c";
  c.unique_terms = {"c"};        // kterm {c} -> 7

  std::vector<SkipInstance> instances{{&ab, 1, 0}, {&c, -1, 0}};
  const auto t = build_training_set(instances, categorizer, 3);

  REQUIRE(t.x.rows == 2);
  REQUIRE(t.x.cols == 13);
  // pre-scaling counts are recoverable from the column scaler
  CHECK(t.column_scaler.max[7] == 2.0);
  CHECK(t.column_scaler.min[7] == 1.0);
  CHECK(t.column_scaler.max[12] == 1.0);
  // max-count column value maps to 1.0
  CHECK(t.x.at(0, 7) == 1.0);
  CHECK(t.x.at(0, 12) == 1.0);
  CHECK(t.x.at(1, 7) == 0.0);
  CHECK(t.y == std::vector<int>{1, -1});
}

TEST_CASE("identical documents produce identical rows") {
  LengthCategorizer fixture;
  const auto categorizer = fixture.make();
  Document a;
  a.id = "a";
  a.unique_terms = {"x", "y"};
  Document b;
  b.id = "b";
  b.unique_terms = {"x", "y"};
  Document other;
  other.id = "other";
  other.unique_terms = {"z"};
  std::vector<SkipInstance> instances{{&a, 1, 0}, {&b, -1, 0}, {&other, -1, 0}};
  const auto t = build_training_set(instances, categorizer, 3);
  for (std::size_t j = 0; j < t.x.cols; ++j) CHECK(t.x.at(0, j) == t.x.at(1, j));
}

TEST_CASE("zero-kterm documents keep a zero row") {
  LengthCategorizer fixture;
  const auto categorizer = fixture.make();
  Document empty;
  empty.id = "empty";
  Document full;
  full.id = "full";
  full.unique_terms = {"x"};
  std::vector<SkipInstance> instances{{&empty, 1, 0}, {&full, -1, 0}};
  const auto t = build_training_set(instances, categorizer, 3);
  for (std::size_t j = 0; j < t.x.cols; ++j) CHECK(t.x.at(0, j) == 0.0);
}

TEST_CASE("degenerate svm model yields uniform weights") {
  SvmModel model;  // no support vectors
  LabeledTrainingSet t;
  t.x = Matrix(2, 5);
  t.y = {1, -1};
  const auto w = extract_category_weights(model, t);
  CHECK(w.degenerate);
  REQUIRE(w.alpha.size() == 5);
  for (double a : w.alpha) CHECK(a == 1.0);
}

TEST_CASE("linear extraction finds the separating category") {
  const auto t = column_indicator_set(20, 60, 8, 5, 21);
  const auto cw = class_weights(t.y);
  SvmConfig cfg;
  cfg.kernel = KernelType::Linear;
  cfg.seed = 5;
  const SvmModel model = train_svm(t, cw, cfg);
  const auto w = extract_category_weights(model, t, WeightExtraction::Linear);
  const auto argmax = std::max_element(w.alpha.begin(), w.alpha.end()) - w.alpha.begin();
  CHECK(argmax == 5);
}

TEST_CASE("gradient extraction favors the separating category") {
  const auto t = column_indicator_set(15, 45, 8, 3, 22);
  const auto cw = class_weights(t.y);
  SvmConfig cfg;
  cfg.seed = 6;
  const SvmModel model = train_svm(t, cw, cfg);
  const auto w = extract_category_weights(model, t, WeightExtraction::Gradient);
  const auto argmax = std::max_element(w.alpha.begin(), w.alpha.end()) - w.alpha.begin();
  CHECK(argmax == 3);
}

TEST_CASE("category weights keep mean 1 and the floor") {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 5; ++trial) {
    const auto t = column_indicator_set(10, 40, 12, rng() % 12, 100 + trial);
    const auto cw = class_weights(t.y);
    SvmConfig cfg;
    cfg.seed = trial;
    const SvmModel model = train_svm(t, cw, cfg);
    for (auto mode : {WeightExtraction::Gradient, WeightExtraction::Linear}) {
      const SvmModel used =
          mode == WeightExtraction::Linear
              ? train_svm(t, cw,
                          [&] { auto c = cfg; c.kernel = KernelType::Linear; return c; }())
              : model;
      const auto w = extract_category_weights(used, t, mode);
      const double mean = std::accumulate(w.alpha.begin(), w.alpha.end(), 0.0) /
                          static_cast<double>(w.alpha.size());
      CHECK(mean == Catch::Approx(1.0).margin(1e-9));
      for (double a : w.alpha) CHECK(a >= kCategoryWeightFloor - 1e-12);
    }
  }
}

TEST_CASE("duplicated training rows do not change gradient extraction") {
  const auto t = column_indicator_set(12, 36, 6, 2, 40);
  const auto cw = class_weights(t.y);
  SvmConfig cfg;
  cfg.seed = 8;
  const SvmModel model = train_svm(t, cw, cfg);
  const auto base = extract_category_weights(model, t, WeightExtraction::Gradient);

  LabeledTrainingSet dup;
  dup.x = Matrix(t.x.rows + 1, t.x.cols);
  std::copy(t.x.data.begin(), t.x.data.end(), dup.x.data.begin());
  std::copy(t.x.row(0), t.x.row(0) + t.x.cols, dup.x.row(t.x.rows));
  dup.y = t.y;
  dup.y.push_back(t.y[0]);
  const auto with_dup = extract_category_weights(model, dup, WeightExtraction::Gradient);

  REQUIRE(base.alpha.size() == with_dup.alpha.size());
  for (std::size_t j = 0; j < base.alpha.size(); ++j)
    CHECK(std::abs(base.alpha[j] - with_dup.alpha[j]) < 1e-6);
}

TEST_CASE("training report round-trips through JSON") {
  TrainingReport r;
  r.n_targets = 42;
  r.n_followups = 1042;
  r.skip_rounds = 10;
  r.weights = {0.0003, 0.2997};
  r.svm_sweeps = 17;
  r.svm_converged = true;
  r.kkt_residual = 0.07;
  r.extraction = WeightExtraction::Linear;
  r.alpha = {1.0, 0.5, 1.5};
  const auto back = TrainingReport::from_json(r.to_json());
  CHECK(back.n_targets == 42);
  CHECK(back.weights.target == 0.0003);
  CHECK(back.extraction == WeightExtraction::Linear);
  CHECK(back.alpha == r.alpha);
  CHECK(back.kkt_residual == 0.07);
}
