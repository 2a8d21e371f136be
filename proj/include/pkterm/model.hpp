#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pkterm/categories.hpp"
#include "pkterm/common.hpp"
#include "pkterm/features.hpp"
#include "pkterm/text_analysis.hpp"
#include "pkterm/training.hpp"

namespace pkterm {

inline constexpr const char* kModelFormatVersion = "pkterm-model-v1";

// Everything detection needs, in one JSON file: the feature schema and
// active dimensions, the fitted scaler and centroids, learned category
// weights, and the frozen stream statistics the features were computed
// against.
struct Model {
  std::string version = kModelFormatVersion;
  std::vector<std::string> schema = feature_names();
  FeatureMask mask = FeatureMask::all();
  FeatureScaler scaler;
  CentroidMatrix centroids;
  bool has_weights = false;
  std::vector<double> alpha;
  StreamStats stats;
  TrainingReport training;
  bool has_training_report = false;
  nlohmann::json config_echo;

  void save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["format_version"] = version;
    j["feature_schema"] = {{"names", schema}, {"active_dims", mask.active}};
    j["feature_scaler"] = {{"min", scaler.min}, {"max", scaler.max}};
    j["centroids"] = {{"k", centroids.m.rows}, {"dims", centroids.m.cols},
                      {"data", centroids.m.data}};
    j["has_weights"] = has_weights;
    j["alpha"] = alpha;
    j["stats"] = {{"n_docs", stats.n_docs()},
                  {"snapshot_id", stats.snapshot_id()},
                  {"tf", stats.tf_map()},
                  {"df", stats.df_map()}};
    j["training_report"] = has_training_report ? training.to_json() : nlohmann::json();
    j["config_echo"] = config_echo;

    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path.string());
    out << j.dump(2) << '\n';
  }

  static Model load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed model file " + path.string() + ": " + e.what());
    }

    Model m;
    try {
      m.version = j.at("format_version").get<std::string>();
      if (m.version != kModelFormatVersion)
        throw DataError("model file " + path.string() + " has format version '" +
                        m.version + "', expected '" + kModelFormatVersion + "'");
      m.schema = j.at("feature_schema").at("names").get<std::vector<std::string>>();
      m.mask.active = j.at("feature_schema").at("active_dims").get<std::vector<int>>();
      m.scaler.min = j.at("feature_scaler").at("min").get<std::vector<double>>();
      m.scaler.max = j.at("feature_scaler").at("max").get<std::vector<double>>();
      const auto& c = j.at("centroids");
      m.centroids.m.rows = c.at("k").get<std::size_t>();
      m.centroids.m.cols = c.at("dims").get<std::size_t>();
      m.centroids.m.data = c.at("data").get<std::vector<double>>();
      if (m.centroids.m.data.size() != m.centroids.m.rows * m.centroids.m.cols)
        throw DataError("model file: centroid matrix size mismatch");
      m.has_weights = j.at("has_weights").get<bool>();
      m.alpha = j.at("alpha").get<std::vector<double>>();
      if (m.has_weights && m.alpha.size() != m.centroids.m.rows)
        throw DataError("model file: weight count does not match centroid count");
      const auto& s = j.at("stats");
      m.stats.restore(
          s.at("n_docs").get<std::uint64_t>(), s.at("snapshot_id").get<std::uint64_t>(),
          s.at("tf").get<std::unordered_map<std::string, std::uint64_t>>(),
          s.at("df").get<std::unordered_map<std::string, std::uint64_t>>());
      if (!j.at("training_report").is_null()) {
        m.training = TrainingReport::from_json(j.at("training_report"));
        m.has_training_report = true;
      }
      m.config_echo = j.value("config_echo", nlohmann::json());
    } catch (const nlohmann::json::exception& e) {
      throw DataError("model file " + path.string() + " is missing fields: " + e.what());
    }
    return m;
  }
};

}  // namespace pkterm
