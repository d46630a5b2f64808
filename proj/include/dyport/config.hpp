// Run configuration: flat `key = value` file plus command-line overrides.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "dyport/baselines.hpp"
#include "dyport/common.hpp"
#include "dyport/dyngraph.hpp"
#include "dyport/evaluation.hpp"
#include "dyport/gcn.hpp"

namespace dyport {

struct ModelSpec {
  enum class Kind { gcn, translation, bilinear, common_neighbors, score_file };
  Kind kind = Kind::gcn;
  std::string path;  // score_file only

  /// Stable identifier used in reports and file names.
  std::string id() const {
    switch (kind) {
      case Kind::gcn: return "gcn";
      case Kind::translation: return "translation";
      case Kind::bilinear: return "bilinear";
      case Kind::common_neighbors: return "common_neighbors";
      case Kind::score_file: return "score_file_" + std::filesystem::path(path).stem().string();
    }
    return {};
  }
  bool learned() const { return kind == Kind::gcn || kind == Kind::translation || kind == Kind::bilinear; }

  static ModelSpec parse(const std::string& s) {
    if (s == "gcn") return {Kind::gcn, {}};
    if (s == "translation") return {Kind::translation, {}};
    if (s == "bilinear") return {Kind::bilinear, {}};
    if (s == "common_neighbors") return {Kind::common_neighbors, {}};
    if (s.rfind("score_file:", 0) == 0 && s.size() > 11) return {Kind::score_file, s.substr(11)};
    throw ValidationError("unknown model '" + s + "'");
  }
  std::string str() const { return kind == Kind::score_file ? "score_file:" + path : id(); }
};

struct RunConfig {
  std::filesystem::path corpus_dir;
  int train_year = 0;
  int test_year = 0;
  int horizon_year = 0;
  std::size_t negatives_per_positive = 10;
  std::size_t importance_bins = 3;
  std::vector<ModelSpec> models = {ModelSpec::parse("gcn"), ModelSpec::parse("translation"),
                                   ModelSpec::parse("bilinear"),
                                   ModelSpec::parse("common_neighbors")};
  std::size_t feature_dim = 8;  // synthesized features; a corpus feature file overrides
  GcnConfig gcn;
  int ig_steps = 50;
  bool ig_weighted = false;
  KgeConfig kge;
  bool kge_semantic_relations = false;
  WeightMode weight_mode = WeightMode::cumulative;
  TieCredit auc_ties = TieCredit::none;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";

  /// Keys accepted in config files and overrides.
  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> k = {
        "corpus_dir", "train_year", "test_year", "horizon_year", "negatives_per_positive",
        "importance_bins", "models", "feature_dim", "gcn_hidden", "gcn_out", "gcn_epochs",
        "gcn_learning_rate", "gcn_neg_ratio", "ig_steps", "ig_weighted", "kge_dim",
        "kge_margin", "kge_epochs", "kge_learning_rate", "kge_norm", "kge_semantic_relations",
        "weight_mode", "auc_tie_credit", "seed", "out_dir"};
    return k;
  }

  /// Applies one setting. Relative paths resolve against `base`.
  void set(const std::string& key, const std::string& value,
           const std::filesystem::path& base = {}) {
    auto as_int = [&](long long lo) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size() || v < lo) {
        throw ValidationError("config key '" + key + "': expected integer >= " +
                              std::to_string(lo) + ", got '" + value + "'");
      }
      return v;
    };
    auto as_double = [&] {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size() || !std::isfinite(v)) {
        throw ValidationError("config key '" + key + "': expected a number, got '" + value + "'");
      }
      return v;
    };
    auto as_bool = [&] {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      throw ValidationError("config key '" + key + "': expected true or false, got '" + value + "'");
    };
    auto as_path = [&] {
      std::filesystem::path p(value);
      return p.is_relative() && !base.empty() ? base / p : p;
    };

    if (key == "corpus_dir") corpus_dir = as_path();
    else if (key == "train_year") train_year = static_cast<int>(as_int(-100000));
    else if (key == "test_year") test_year = static_cast<int>(as_int(-100000));
    else if (key == "horizon_year") horizon_year = static_cast<int>(as_int(-100000));
    else if (key == "negatives_per_positive") negatives_per_positive = static_cast<std::size_t>(as_int(1));
    else if (key == "importance_bins") importance_bins = static_cast<std::size_t>(as_int(1));
    else if (key == "models") {
      models.clear();
      for (const auto& part : text::split(value, ',')) {
        const auto t = std::string(text::trim(part));
        if (t.empty()) continue;
        auto m = ModelSpec::parse(t);
        if (m.kind == ModelSpec::Kind::score_file) m.path = as_path_of(m.path, base);
        models.push_back(std::move(m));
      }
    }
    else if (key == "feature_dim") feature_dim = static_cast<std::size_t>(as_int(1));
    else if (key == "gcn_hidden") gcn.hidden = static_cast<std::size_t>(as_int(1));
    else if (key == "gcn_out") gcn.out = static_cast<std::size_t>(as_int(1));
    else if (key == "gcn_epochs") gcn.epochs = static_cast<int>(as_int(0));
    else if (key == "gcn_learning_rate") gcn.learning_rate = as_double();
    else if (key == "gcn_neg_ratio") gcn.neg_ratio = static_cast<std::size_t>(as_int(1));
    else if (key == "ig_steps") ig_steps = static_cast<int>(as_int(1));
    else if (key == "ig_weighted") ig_weighted = as_bool();
    else if (key == "kge_dim") kge.dim = static_cast<std::size_t>(as_int(1));
    else if (key == "kge_margin") kge.margin = as_double();
    else if (key == "kge_epochs") kge.epochs = static_cast<int>(as_int(0));
    else if (key == "kge_learning_rate") kge.learning_rate = as_double();
    else if (key == "kge_norm") {
      if (value == "l1") kge.norm = DistanceNorm::l1;
      else if (value == "l2") kge.norm = DistanceNorm::l2;
      else throw ValidationError("kge_norm must be l1 or l2");
    }
    else if (key == "kge_semantic_relations") kge_semantic_relations = as_bool();
    else if (key == "weight_mode") {
      if (value == "cumulative") weight_mode = WeightMode::cumulative;
      else if (value == "per_year") weight_mode = WeightMode::per_year;
      else throw ValidationError("weight_mode must be cumulative or per_year");
    }
    else if (key == "auc_tie_credit") auc_ties = as_bool() ? TieCredit::half : TieCredit::none;
    else if (key == "seed") {
      std::size_t used = 0;
      std::uint64_t v = 0;
      try {
        v = std::stoull(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size() || value.front() == '-') {
        throw ValidationError("seed must be an unsigned 64-bit integer, got '" + value + "'");
      }
      seed = v;
    }
    else if (key == "out_dir") out_dir = as_path();
    else throw ValidationError("unknown config key '" + key + "'");
  }

  /// Applies "key=value" overrides.
  void apply_overrides(const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ValidationError("override '" + o + "' is not key=value");
      set(std::string(text::trim(o.substr(0, eq))), std::string(text::trim(o.substr(eq + 1))));
    }
  }

  void validate() const {
    if (corpus_dir.empty()) throw ValidationError("config: corpus_dir is required");
    if (!(train_year < test_year)) {
      throw ValidationError("config: train_year (" + std::to_string(train_year) +
                            ") must be < test_year (" + std::to_string(test_year) + ")");
    }
    if (!(test_year <= horizon_year)) {
      throw ValidationError("config: test_year (" + std::to_string(test_year) +
                            ") must be <= horizon_year (" + std::to_string(horizon_year) + ")");
    }
    if (models.empty()) throw ValidationError("config: model roster is empty");
    std::set<std::string> ids;
    for (const auto& m : models) {
      if (!ids.insert(m.id()).second) throw ValidationError("config: duplicate model '" + m.id() + "'");
    }
    if (kge.margin <= 0) throw ValidationError("config: kge_margin must be positive");
    if (gcn.learning_rate <= 0 || kge.learning_rate <= 0) {
      throw ValidationError("config: learning rates must be positive");
    }
  }

  /// Canonical text of every setting except out_dir (which does not change
  /// results). Paths are reduced to their contents' identity elsewhere.
  std::map<std::string, std::string> canonical() const {
    std::map<std::string, std::string> c;
    c["train_year"] = std::to_string(train_year);
    c["test_year"] = std::to_string(test_year);
    c["horizon_year"] = std::to_string(horizon_year);
    c["negatives_per_positive"] = std::to_string(negatives_per_positive);
    c["importance_bins"] = std::to_string(importance_bins);
    std::vector<std::string> ms;
    for (const auto& m : models) ms.push_back(m.kind == ModelSpec::Kind::score_file ? "score_file:" + m.id() : m.id());
    c["models"] = text::join(ms, ",");
    c["feature_dim"] = std::to_string(feature_dim);
    c["gcn_hidden"] = std::to_string(gcn.hidden);
    c["gcn_out"] = std::to_string(gcn.out);
    c["gcn_epochs"] = std::to_string(gcn.epochs);
    c["gcn_learning_rate"] = text::format_double(gcn.learning_rate);
    c["gcn_neg_ratio"] = std::to_string(gcn.neg_ratio);
    c["ig_steps"] = std::to_string(ig_steps);
    c["ig_weighted"] = ig_weighted ? "true" : "false";
    c["kge_dim"] = std::to_string(kge.dim);
    c["kge_margin"] = text::format_double(kge.margin);
    c["kge_epochs"] = std::to_string(kge.epochs);
    c["kge_learning_rate"] = text::format_double(kge.learning_rate);
    c["kge_norm"] = kge.norm == DistanceNorm::l1 ? "l1" : "l2";
    c["kge_semantic_relations"] = kge_semantic_relations ? "true" : "false";
    c["weight_mode"] = weight_mode == WeightMode::cumulative ? "cumulative" : "per_year";
    c["auc_tie_credit"] = auc_ties == TieCredit::half ? "true" : "false";
    c["seed"] = std::to_string(seed);
    return c;
  }

  std::string hash() const {
    StableHash h;
    for (const auto& [k, v] : canonical()) h.add(k).add(v);
    return hex64(h.digest());
  }

  static RunConfig parse(std::istream& in, const std::string& source,
                         const std::filesystem::path& base) {
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto t = text::trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key = value");
      const std::string key(text::trim(t.substr(0, eq)));
      const std::string value(text::trim(t.substr(eq + 1)));
      if (!seen.insert(key).second) throw ParseError(source, line_no, "duplicate key '" + key + "'");
      try {
        cfg.set(key, value, base);
      } catch (const ParseError&) {
        throw;
      } catch (const ValidationError& e) {
        throw ParseError(source, line_no, e.what());
      }
    }
    return cfg;
  }

  static RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());
    return parse(in, path.string(), path.parent_path());
  }

 private:
  static std::string as_path_of(const std::string& value, const std::filesystem::path& base) {
    std::filesystem::path p(value);
    return (p.is_relative() && !base.empty() ? base / p : p).string();
  }
};

}  // namespace dyport
