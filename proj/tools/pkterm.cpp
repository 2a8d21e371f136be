// pkterm command line: synth | cluster | train | detect | eval | ablate
//
// Every command reads an optional JSON config (--config); explicit flags
// win over config fields. Exit codes: 0 success, 1 usage error, 2 data
// error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>

#include <CLI11.hpp>

#include "pkterm/pkterm.hpp"

namespace fs = std::filesystem;
using namespace pkterm;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  CLI::Option* config_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* cmd) {
    config_opt = cmd->add_option("--config", config, "JSON run config file");
    out_opt = cmd->add_option("--out", out, "output directory");
    seed_opt = cmd->add_option("--seed", seed, "override every seed in the config");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (*config_opt) cfg = RunConfig::from_file(config);
    if (*seed_opt) {
      cfg.seed = seed;
      cfg.clustering.seed = seed;
      cfg.synth.seed = seed;
    }
    if (*out_opt) cfg.out_dir = out;
    return cfg;
  }
};

fs::path ensure_out_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  return cfg.out_dir;
}

void require_path(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("missing required path: ") + what);
  if (!fs::exists(p)) throw DataError(std::string(what) + " not found: " + p.string());
}

int run(int argc, char** argv) {
  CLI::App app{"parameterized kterm hashing for first story detection"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a planted-event corpus");
  CommonFlags synth_common;
  synth_common.attach(synth);
  std::size_t topics = 0, followups = 0, background = 0, vocab = 0, terms = 0, event_terms = 0;
  double reuse = 0.0;
  auto* o_topics = synth->add_option("--topics", topics, "number of topics");
  auto* o_follow = synth->add_option("--followups", followups, "follow-ups per topic");
  auto* o_bg = synth->add_option("--background", background, "background documents");
  auto* o_vocab = synth->add_option("--vocab", vocab, "vocabulary size");
  auto* o_terms = synth->add_option("--terms-per-doc", terms, "unique terms per document");
  auto* o_event = synth->add_option("--event-terms", event_terms, "novel terms per first story");
  auto* o_reuse = synth->add_option("--reuse", reuse, "event term reuse probability");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "fit scaler and centroids (partial model)");
  CommonFlags cluster_common;
  cluster_common.attach(cluster);
  std::string cl_stream, cl_lex, cl_model;
  auto* o_cl_stream = cluster->add_option("--stream", cl_stream, "documents.jsonl");
  auto* o_cl_lex = cluster->add_option("--lexicons", cl_lex, "lexicon directory");
  auto* o_cl_model = cluster->add_option("--model", cl_model, "model file to write");

  // train
  auto* train = app.add_subcommand("train", "learn category weights into the model");
  CommonFlags train_common;
  train_common.attach(train);
  std::string tr_stream, tr_ann, tr_lex, tr_model;
  auto* o_tr_stream = train->add_option("--stream", tr_stream, "documents.jsonl");
  auto* o_tr_ann = train->add_option("--annotations", tr_ann, "topics.tsv");
  auto* o_tr_lex = train->add_option("--lexicons", tr_lex, "lexicon directory");
  auto* o_tr_model = train->add_option("--model", tr_model, "partial model file (updated in place)");

  // detect
  auto* detect = app.add_subcommand("detect", "score a stream in a single pass");
  CommonFlags detect_common;
  detect_common.attach(detect);
  std::string de_stream, de_lex, de_model, de_mode = "uniform", de_memory;
  bool de_strip = false;
  auto* o_de_stream = detect->add_option("--stream", de_stream, "documents.jsonl");
  auto* o_de_model = detect->add_option("--model", de_model, "model file");
  auto* o_de_lex = detect->add_option("--lexicons", de_lex, "lexicon directory");
  detect->add_option("--mode", de_mode, "uniform|parameterized")
      ->check(CLI::IsMember({"uniform", "parameterized"}));
  auto* o_de_memory = detect->add_option("--memory", de_memory, "exact|bloom")
                          ->check(CLI::IsMember({"exact", "bloom"}));
  auto* o_de_strip = detect->add_flag("--strip-hashtags", de_strip, "drop '#' terms");

  // eval
  auto* eval = app.add_subcommand("eval", "detection cost from a scores file");
  CommonFlags eval_common;
  eval_common.attach(eval);
  std::string ev_scores, ev_ann;
  auto* o_ev_scores = eval->add_option("--scores", ev_scores, "scores.tsv from detect");
  auto* o_ev_ann = eval->add_option("--annotations", ev_ann, "topics.tsv");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "feature-group ablation study");
  CommonFlags ablate_common;
  ablate_common.attach(ablate);
  std::string ab_train_stream, ab_train_ann, ab_test_stream, ab_test_ann, ab_lex;
  auto* o_ab_ts = ablate->add_option("--train-stream", ab_train_stream, "training documents.jsonl");
  auto* o_ab_ta = ablate->add_option("--train-annotations", ab_train_ann, "training topics.tsv");
  auto* o_ab_es = ablate->add_option("--test-stream", ab_test_stream, "test documents.jsonl");
  auto* o_ab_ea = ablate->add_option("--test-annotations", ab_test_ann, "test topics.tsv");
  auto* o_ab_lex = ablate->add_option("--lexicons", ab_lex, "lexicon directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help text or the parse error
    return code == 0 ? 0 : 1;
  }

  if (synth->parsed()) {
    RunConfig cfg = synth_common.resolve();
    if (*o_topics) cfg.synth.n_topics = topics;
    if (*o_follow) cfg.synth.followups_per_topic = followups;
    if (*o_bg) cfg.synth.n_background_docs = background;
    if (*o_vocab) cfg.synth.vocab_size = vocab;
    if (*o_terms) cfg.synth.terms_per_doc = terms;
    if (*o_event) cfg.synth.event_term_count = event_terms;
    if (*o_reuse) cfg.synth.reuse_probability = reuse;
    const fs::path dir = ensure_out_dir(cfg);
    const SynthCorpus corpus = write_synthetic(cfg.synth, dir);
    std::printf("wrote %zu documents, %zu topics to %s\n", corpus.docs.size(),
                corpus.ann.topics.size(), dir.string().c_str());
    return 0;
  }

  if (cluster->parsed()) {
    RunConfig cfg = cluster_common.resolve();
    if (*o_cl_stream) cfg.stream = cl_stream;
    if (*o_cl_lex) cfg.lexicon_dir = cl_lex;
    if (*o_cl_model) cfg.model = cl_model;
    require_path(cfg.stream, "stream");
    require_path(cfg.lexicon_dir, "lexicon_dir");
    if (cfg.model.empty()) throw UsageError("missing required path: model");
    const auto docs = load_stream(cfg.stream, cfg.strip_hashtags);
    const auto lexicons = LexiconSet::load(cfg.lexicon_dir);
    const Model model = fit_clustering(docs, lexicons, cfg, FeatureMask::all());
    model.save(cfg.model);
    std::printf("clustered %zu docs into %d categories; model: %s\n", docs.size(),
                model.centroids.k(), cfg.model.string().c_str());
    return 0;
  }

  if (train->parsed()) {
    RunConfig cfg = train_common.resolve();
    if (*o_tr_stream) cfg.stream = tr_stream;
    if (*o_tr_ann) cfg.annotations = tr_ann;
    if (*o_tr_lex) cfg.lexicon_dir = tr_lex;
    if (*o_tr_model) cfg.model = tr_model;
    require_path(cfg.stream, "stream");
    require_path(cfg.annotations, "annotations");
    require_path(cfg.lexicon_dir, "lexicon_dir");
    require_path(cfg.model, "model");
    Model model = Model::load(cfg.model);
    const auto docs = load_stream(cfg.stream, cfg.strip_hashtags);
    const auto ann = read_annotations(cfg.annotations);
    check_rank_time_order(ann, docs);
    const auto lexicons = LexiconSet::load(cfg.lexicon_dir);
    fit_weights(model, docs, ann, lexicons, cfg);
    model.save(cfg.model);
    const fs::path dir = ensure_out_dir(cfg);
    std::ofstream report(dir / "training_report.json");
    report << model.training.to_json().dump(2) << '\n';
    std::printf("trained on %zu targets / %zu follow-ups; model: %s\n",
                model.training.n_targets, model.training.n_followups,
                cfg.model.string().c_str());
    return 0;
  }

  if (detect->parsed()) {
    RunConfig cfg = detect_common.resolve();
    if (*o_de_stream) cfg.stream = de_stream;
    if (*o_de_lex) cfg.lexicon_dir = de_lex;
    if (*o_de_memory)
      cfg.kterm.backend = de_memory == "exact" ? MemoryBackend::Exact : MemoryBackend::Bloom;
    if (*o_de_strip) cfg.strip_hashtags = de_strip;
    if (*o_de_model) cfg.model = de_model;
    require_path(cfg.stream, "stream");
    const auto docs = load_stream(cfg.stream, cfg.strip_hashtags);

    const DetectMode mode =
        de_mode == "parameterized" ? DetectMode::Parameterized : DetectMode::Uniform;
    std::vector<ScoredDoc> scored;
    if (mode == DetectMode::Parameterized) {
      if (cfg.model.empty()) throw UsageError("parameterized detection requires --model");
      require_path(cfg.model, "model");
      require_path(cfg.lexicon_dir, "lexicon_dir");
      const Model model = Model::load(cfg.model);
      const auto lexicons = LexiconSet::load(cfg.lexicon_dir);
      scored = detect_stream(docs, mode, &model, &lexicons, cfg);
    } else {
      scored = detect_stream(docs, mode, nullptr, nullptr, cfg);
    }
    const fs::path dir = ensure_out_dir(cfg);
    write_scores(dir / "scores.tsv", scored);
    std::printf("scored %zu documents (%s): %s\n", scored.size(), de_mode.c_str(),
                (dir / "scores.tsv").string().c_str());
    return 0;
  }

  if (eval->parsed()) {
    RunConfig cfg = eval_common.resolve();
    if (*o_ev_ann) cfg.annotations = ev_ann;
    fs::path scores_path = *o_ev_scores ? fs::path(ev_scores) : cfg.out_dir / "scores.tsv";
    require_path(scores_path, "scores");
    require_path(cfg.annotations, "annotations");
    const auto scores = read_scores(scores_path);
    std::unordered_map<std::string, double> map;
    for (const auto& [id, value] : scores) map[id] = value;
    const auto ann = read_annotations(cfg.annotations);
    const EvaluationReport report = sweep_cmin(map, ann, cfg.evaluation);
    const fs::path dir = ensure_out_dir(cfg);
    write_report_json(dir / "report.json", report);
    write_report_table(dir / "report.txt", report);
    write_curve_csv(dir / "curve.csv", report);
    std::printf("C_min %.4f at threshold %.6f (%zu targets, %zu non-targets)\n",
                report.c_min, report.best_threshold, report.n_targets,
                report.n_nontargets);
    return 0;
  }

  if (ablate->parsed()) {
    RunConfig cfg = ablate_common.resolve();
    if (*o_ab_ts) cfg.train_stream = ab_train_stream;
    if (*o_ab_ta) cfg.train_annotations = ab_train_ann;
    if (*o_ab_es) cfg.test_stream = ab_test_stream;
    if (*o_ab_ea) cfg.test_annotations = ab_test_ann;
    if (*o_ab_lex) cfg.lexicon_dir = ab_lex;
    require_path(cfg.train_stream, "train_stream");
    require_path(cfg.train_annotations, "train_annotations");
    require_path(cfg.test_stream, "test_stream");
    require_path(cfg.test_annotations, "test_annotations");
    require_path(cfg.lexicon_dir, "lexicon_dir");
    const auto train_docs = load_stream(cfg.train_stream, cfg.strip_hashtags);
    const auto train_ann = read_annotations(cfg.train_annotations);
    const auto test_docs = load_stream(cfg.test_stream, cfg.strip_hashtags);
    const auto test_ann = read_annotations(cfg.test_annotations);
    const auto lexicons = LexiconSet::load(cfg.lexicon_dir);
    const AblationReport report =
        run_ablation(train_docs, train_ann, test_docs, test_ann, lexicons, cfg);
    const fs::path dir = ensure_out_dir(cfg);
    std::ofstream json_out(dir / "ablation.json");
    json_out << report.to_json().dump(2) << '\n';
    write_ablation_table(dir / "ablation.txt", report);
    std::printf("full C_min %.4f; ablation table: %s\n", report.full_cmin,
                (dir / "ablation.txt").string().c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
