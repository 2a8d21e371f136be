#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "pkterm/categorizer.hpp"
#include "pkterm/common.hpp"
#include "pkterm/corpus_io.hpp"
#include "pkterm/evaluation.hpp"
#include "pkterm/model.hpp"
#include "pkterm/novelty.hpp"
#include "pkterm/synth.hpp"
#include "pkterm/training.hpp"

namespace pkterm {

struct KtermSettings {
  int k_max = 3;
  MemoryBackend backend = MemoryBackend::Bloom;
  std::uint64_t bloom_bits = std::uint64_t{1} << 28;
  int bloom_hashes = 4;

  void validate() const {
    if (k_max < 1 || k_max > kMaxKtermLength)
      throw DataError("kterm: k_max must be in [1," + std::to_string(kMaxKtermLength) + "]");
  }
  NoveltyMemory make_memory() const {
    return backend == MemoryBackend::Exact ? NoveltyMemory::exact()
                                           : NoveltyMemory::bloom(bloom_bits, bloom_hashes);
  }
};

struct TrainingSettings {
  int skip_rounds = 10;
  double gamma = 0.15;
  double tolerance = 0.1;
  double c_base = 1.0;
  int max_passes = 500;
  WeightExtraction extraction = WeightExtraction::Gradient;

  SvmConfig svm_config(std::uint64_t seed, KernelType kernel = KernelType::Rbf) const {
    SvmConfig cfg;
    cfg.kernel = kernel;
    cfg.gamma = gamma;
    cfg.tolerance = tolerance;
    cfg.c_base = c_base;
    cfg.max_passes = max_passes;
    cfg.seed = seed;
    return cfg;
  }
};

// One config document drives every command; flags override fields.
struct RunConfig {
  std::filesystem::path stream;
  std::filesystem::path annotations;
  std::filesystem::path lexicon_dir;
  std::filesystem::path model;
  std::filesystem::path out_dir = ".";
  std::filesystem::path train_stream;
  std::filesystem::path train_annotations;
  std::filesystem::path test_stream;
  std::filesystem::path test_annotations;

  KtermSettings kterm;
  ClusteringConfig clustering;
  TrainingSettings training;
  CostParams evaluation;
  SynthConfig synth;
  bool strip_hashtags = false;
  std::uint64_t seed = 42;

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    c.seed = j.value("seed", c.seed);
    c.clustering.seed = c.seed;
    c.synth.seed = c.seed;
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      auto get_path = [&](const char* key, std::filesystem::path& out) {
        if (p.contains(key)) out = p[key].get<std::string>();
      };
      get_path("stream", c.stream);
      get_path("annotations", c.annotations);
      get_path("lexicon_dir", c.lexicon_dir);
      get_path("model", c.model);
      get_path("out_dir", c.out_dir);
      get_path("train_stream", c.train_stream);
      get_path("train_annotations", c.train_annotations);
      get_path("test_stream", c.test_stream);
      get_path("test_annotations", c.test_annotations);
    }
    if (j.contains("kterm")) {
      const auto& k = j["kterm"];
      c.kterm.k_max = k.value("k_max", c.kterm.k_max);
      if (k.contains("memory")) {
        const std::string mem = k["memory"].get<std::string>();
        if (mem == "exact") c.kterm.backend = MemoryBackend::Exact;
        else if (mem == "bloom") c.kterm.backend = MemoryBackend::Bloom;
        else throw UsageError("kterm.memory must be 'exact' or 'bloom', got '" + mem + "'");
      }
      c.kterm.bloom_bits = k.value("bloom_bits", c.kterm.bloom_bits);
      c.kterm.bloom_hashes = k.value("bloom_hashes", c.kterm.bloom_hashes);
    }
    if (j.contains("clustering")) {
      const auto& cl = j["clustering"];
      c.clustering.k = cl.value("k", c.clustering.k);
      c.clustering.iterations = cl.value("iterations", c.clustering.iterations);
      c.clustering.seed = cl.value("seed", c.clustering.seed);
      c.clustering.sample_cap = cl.value("sample_cap", c.clustering.sample_cap);
    }
    if (j.contains("training")) {
      const auto& t = j["training"];
      c.training.skip_rounds = t.value("skip_rounds", c.training.skip_rounds);
      c.training.gamma = t.value("gamma", c.training.gamma);
      c.training.tolerance = t.value("tolerance", c.training.tolerance);
      c.training.c_base = t.value("c_base", c.training.c_base);
      c.training.max_passes = t.value("max_passes", c.training.max_passes);
      if (t.contains("extraction")) {
        const std::string mode = t["extraction"].get<std::string>();
        if (mode == "gradient") c.training.extraction = WeightExtraction::Gradient;
        else if (mode == "linear") c.training.extraction = WeightExtraction::Linear;
        else throw UsageError("training.extraction must be 'gradient' or 'linear'");
      }
    }
    if (j.contains("evaluation")) {
      const auto& e = j["evaluation"];
      c.evaluation.c_miss = e.value("c_miss", c.evaluation.c_miss);
      c.evaluation.c_fa = e.value("c_fa", c.evaluation.c_fa);
      c.evaluation.p_target = e.value("p_target", c.evaluation.p_target);
    }
    if (j.contains("preprocess"))
      c.strip_hashtags = j["preprocess"].value("strip_hashtags", c.strip_hashtags);
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      c.synth.n_topics = s.value("n_topics", c.synth.n_topics);
      c.synth.followups_per_topic = s.value("followups_per_topic", c.synth.followups_per_topic);
      c.synth.n_background_docs = s.value("n_background_docs", c.synth.n_background_docs);
      c.synth.vocab_size = s.value("vocab_size", c.synth.vocab_size);
      c.synth.terms_per_doc = s.value("terms_per_doc", c.synth.terms_per_doc);
      c.synth.event_term_count = s.value("event_term_count", c.synth.event_term_count);
      c.synth.reuse_probability = s.value("reuse_probability", c.synth.reuse_probability);
      c.synth.seed = s.value("seed", c.synth.seed);
    }
    return c;
  }

  static RunConfig from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed config file " + path.string() + ": " + e.what());
    }
    return from_json(j);
  }

  nlohmann::json to_json() const {
    return nlohmann::json{
        {"seed", seed},
        {"paths",
         {{"stream", stream.string()},
          {"annotations", annotations.string()},
          {"lexicon_dir", lexicon_dir.string()},
          {"model", model.string()},
          {"out_dir", out_dir.string()},
          {"train_stream", train_stream.string()},
          {"train_annotations", train_annotations.string()},
          {"test_stream", test_stream.string()},
          {"test_annotations", test_annotations.string()}}},
        {"kterm",
         {{"k_max", kterm.k_max},
          {"memory", kterm.backend == MemoryBackend::Exact ? "exact" : "bloom"},
          {"bloom_bits", kterm.bloom_bits},
          {"bloom_hashes", kterm.bloom_hashes}}},
        {"clustering",
         {{"k", clustering.k},
          {"iterations", clustering.iterations},
          {"seed", clustering.seed},
          {"sample_cap", clustering.sample_cap}}},
        {"training",
         {{"skip_rounds", training.skip_rounds},
          {"gamma", training.gamma},
          {"tolerance", training.tolerance},
          {"c_base", training.c_base},
          {"max_passes", training.max_passes},
          {"extraction", to_string(training.extraction)}}},
        {"evaluation",
         {{"c_miss", evaluation.c_miss},
          {"c_fa", evaluation.c_fa},
          {"p_target", evaluation.p_target}}},
        {"preprocess", {{"strip_hashtags", strip_hashtags}}},
        {"synth",
         {{"n_topics", synth.n_topics},
          {"followups_per_topic", synth.followups_per_topic},
          {"n_background_docs", synth.n_background_docs},
          {"vocab_size", synth.vocab_size},
          {"terms_per_doc", synth.terms_per_doc},
          {"event_term_count", synth.event_term_count},
          {"reuse_probability", synth.reuse_probability},
          {"seed", synth.seed}}},
    };
  }
};

inline std::vector<Document> load_stream(const std::filesystem::path& path,
                                         bool strip_tags) {
  std::vector<Document> docs = read_stream(path);
  if (strip_tags)
    for (auto& d : docs) d = strip_hashtags(std::move(d));
  return docs;
}

namespace detail {

// Distinct kterms across the stream, reservoir-sampled to the cap.
// Distinctness goes through a 64-bit key hash; a collision merely drops
// one kterm from the sampling pool.
inline std::vector<Kterm> sample_distinct_kterms(const std::vector<Document>& docs,
                                                 int k_max, std::size_t cap,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(fmix64(seed ^ 0x5a5a5a5a5a5a5a5aULL));
  std::unordered_set<std::uint64_t> seen;
  std::vector<Kterm> sample;
  std::string key;
  std::uint64_t n_distinct = 0;
  for (const auto& doc : docs) {
    for_each_kterm(doc.unique_terms, k_max, [&](const KtermRef& kt) {
      kt.append_key(key);
      const auto [h1, h2] = murmur3_x64_128(key);
      if (!seen.insert(h1 ^ (h2 << 1 | h2 >> 63)).second) return;
      ++n_distinct;
      if (sample.size() < cap) {
        sample.push_back(kt.materialize());
      } else {
        std::uniform_int_distribution<std::uint64_t> pick(0, n_distinct - 1);
        const std::uint64_t j = pick(rng);
        if (j < cap) sample[static_cast<std::size_t>(j)] = kt.materialize();
      }
    });
  }
  return sample;
}

}  // namespace detail

/// Clustering stage: ingest the stream into frozen statistics, sample
/// distinct kterms, fit the scaler, and run K-means. Produces a partial
/// model (no category weights yet).
inline Model fit_clustering(const std::vector<Document>& docs, const LexiconSet& lexicons,
                            const RunConfig& cfg, const FeatureMask& mask) {
  cfg.kterm.validate();
  cfg.clustering.validate();
  if (docs.empty()) throw DataError("fit_clustering: empty stream");

  Model model;
  model.mask = mask;
  for (const auto& d : docs) model.stats.update(d);

  const auto sample = detail::sample_distinct_kterms(docs, cfg.kterm.k_max,
                                                     cfg.clustering.sample_cap,
                                                     cfg.clustering.seed);
  if (sample.empty()) throw DataError("fit_clustering: stream yields no kterms");

  AnnotationMap annotations(lexicons);
  const double avg_idf = model.stats.average_idf();
  Matrix x(sample.size(), mask.dims());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Kterm& kt = sample[i];
    TermStatsView views[kMaxKtermLength];
    for (int t = 0; t < kt.length(); ++t) {
      const std::string& term = kt.terms[static_cast<std::size_t>(t)];
      views[t] = {model.stats.idf(term), static_cast<double>(model.stats.tf(term)),
                  static_cast<double>(model.stats.df(term)), &annotations.get(term)};
    }
    const FeatureVector full = extract_features(views, kt.length(), avg_idf);
    mask.select(full, x.row(i));
  }

  model.scaler = FeatureScaler::fit(x);
  for (std::size_t i = 0; i < x.rows; ++i) model.scaler.apply_in_place(x.row(i));

  auto result = kmeans_cluster(x, cfg.clustering);
  model.centroids = std::move(result.centroids);
  model.config_echo = cfg.to_json();
  return model;
}

/// Training stage: skip-expand the annotated topics, build the
/// document-by-category training set, train the class-weighted SVM and
/// extract per-category weights into the model.
inline void fit_weights(Model& model, const std::vector<Document>& docs,
                        const TopicAnnotations& ann, const LexiconSet& lexicons,
                        const RunConfig& cfg) {
  const auto instances = skip_expand(docs, ann, cfg.training.skip_rounds);
  if (instances.empty()) throw DataError("fit_weights: no training instances");

  AnnotationMap annotations(lexicons);
  KtermCategorizer categorizer(model.centroids, model.scaler, model.mask, model.stats,
                               annotations);
  const LabeledTrainingSet t = build_training_set(instances, categorizer, cfg.kterm.k_max);
  const ClassWeights cw = class_weights(t.y);

  const SvmModel svm = train_svm(t, cw, cfg.training.svm_config(cfg.seed));
  CategoryWeights weights;
  if (cfg.training.extraction == WeightExtraction::Linear) {
    const SvmModel linear =
        train_svm(t, cw, cfg.training.svm_config(cfg.seed, KernelType::Linear));
    weights = extract_category_weights(linear, t, WeightExtraction::Linear);
  } else {
    weights = extract_category_weights(svm, t, WeightExtraction::Gradient);
  }

  model.alpha = weights.alpha;
  model.has_weights = true;
  model.training.n_targets = 0;
  model.training.n_followups = 0;
  for (int label : t.y) (label > 0 ? model.training.n_targets : model.training.n_followups)++;
  model.training.skip_rounds = cfg.training.skip_rounds;
  model.training.weights = cw;
  model.training.svm_sweeps = svm.sweeps;
  model.training.svm_converged = svm.converged;
  model.training.kkt_residual = svm.max_kkt_violation;
  model.training.extraction = cfg.training.extraction;
  model.training.degenerate_weights = weights.degenerate;
  model.training.alpha = weights.alpha;
  model.has_training_report = true;
}

enum class DetectMode : std::uint8_t { Uniform, Parameterized };

/// Single pass over the stream: per document, score against the memory of
/// the past and persist its kterms. Parameterized mode weights each novel
/// kterm by its category weight from the model.
inline std::vector<ScoredDoc> detect_stream(const std::vector<Document>& docs,
                                            DetectMode mode, const Model* model,
                                            const LexiconSet* lexicons,
                                            const RunConfig& cfg) {
  cfg.kterm.validate();
  NoveltyMemory memory = cfg.kterm.make_memory();
  std::vector<ScoredDoc> out;
  out.reserve(docs.size());

  if (mode == DetectMode::Uniform) {
    for (const auto& d : docs)
      out.push_back({d.id, score_novelty_uniform(d, memory, cfg.kterm.k_max)});
    return out;
  }

  if (model == nullptr) throw UsageError("parameterized detection requires a model");
  if (!model->has_weights)
    throw DataError("model has no category weights; run the train command first");
  if (lexicons == nullptr) throw UsageError("parameterized detection requires lexicons");

  AnnotationMap annotations(*lexicons);
  KtermCategorizer categorizer(model->centroids, model->scaler, model->mask, model->stats,
                               annotations);
  const std::vector<double>& alpha = model->alpha;
  auto weight_of = [&](const KtermRef& kt) {
    return alpha[static_cast<std::size_t>(categorizer.categorize(kt))];
  };
  for (const auto& d : docs)
    out.push_back({d.id, score_novelty(d, memory, weight_of, cfg.kterm.k_max)});
  return out;
}

inline std::unordered_map<std::string, double> scores_map(const std::vector<ScoredDoc>& scored) {
  std::unordered_map<std::string, double> m;
  m.reserve(scored.size());
  for (const auto& s : scored) m[s.doc_id] = s.score.value;
  return m;
}

inline EvaluationReport evaluate_scores(const std::vector<ScoredDoc>& scored,
                                        const TopicAnnotations& ann,
                                        const CostParams& params) {
  return sweep_cmin(scores_map(scored), ann, params);
}

struct AblationEntry {
  std::string group;
  double ablated_cmin = 0.0;
  double delta_pct = 0.0;  // vs the full feature set; negative = improvement
};

struct AblationReport {
  double full_cmin = 0.0;
  std::vector<AblationEntry> entries;

  nlohmann::json to_json() const {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& e : entries)
      groups.push_back({{"group", e.group},
                        {"c_min", e.ablated_cmin},
                        {"delta_pct", e.delta_pct}});
    return nlohmann::json{{"full_c_min", full_cmin}, {"groups", groups}};
  }
};

/// Feature ablation: re-runs clustering, training, detection and
/// evaluation with one feature group removed at a time, with the same
/// seeds throughout, and reports the relative change in C_min.
inline AblationReport run_ablation(const std::vector<Document>& train_docs,
                                   const TopicAnnotations& train_ann,
                                   const std::vector<Document>& test_docs,
                                   const TopicAnnotations& test_ann,
                                   const LexiconSet& lexicons, const RunConfig& cfg) {
  auto cmin_for = [&](const FeatureMask& mask) {
    Model model = fit_clustering(train_docs, lexicons, cfg, mask);
    fit_weights(model, train_docs, train_ann, lexicons, cfg);
    const auto scored =
        detect_stream(test_docs, DetectMode::Parameterized, &model, &lexicons, cfg);
    return evaluate_scores(scored, test_ann, cfg.evaluation).c_min;
  };

  AblationReport report;
  report.full_cmin = cmin_for(FeatureMask::all());
  for (const auto& g : kFeatureGroups) {
    AblationEntry e;
    e.group = g.name;
    e.ablated_cmin = cmin_for(FeatureMask::without_group(g.name));
    e.delta_pct = report.full_cmin == 0.0
                      ? std::numeric_limits<double>::quiet_NaN()
                      : (e.ablated_cmin - report.full_cmin) / report.full_cmin * 100.0;
    report.entries.push_back(e);
  }
  return report;
}

inline void write_ablation_table(const std::filesystem::path& path,
                                 const AblationReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write ablation table: " + path.string());
  char buf[128];
  std::snprintf(buf, sizeof buf, "full feature set C_min: %.4f\n\n", report.full_cmin);
  out << buf;
  out << "group      C_min     relative impact\n";
  for (const auto& e : report.entries) {
    std::snprintf(buf, sizeof buf, "%-10s %.4f    %s\n", e.group.c_str(), e.ablated_cmin,
                  format_percent(e.delta_pct).c_str());
    out << buf;
  }
}

}  // namespace pkterm
