// Stage orchestration: ingest -> snapshot -> attribute -> importance -> train
// -> evaluate -> report, with content-hash caching and a run ledger.

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "dyport/attribution.hpp"
#include "dyport/baselines.hpp"
#include "dyport/common.hpp"
#include "dyport/config.hpp"
#include "dyport/dyngraph.hpp"
#include "dyport/evaluation.hpp"
#include "dyport/gcn.hpp"
#include "dyport/ingest.hpp"
#include "dyport/measures.hpp"

namespace dyport {

inline constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;

struct ReportRow {
  std::string model_id;
  StratumReport stratum;
};

struct StageRecord {
  std::string name;
  std::string status;  // ran | cached | failed
  double wall_ms = 0;
  std::vector<std::string> artifacts;  // relative to the output directory
};

struct RunLedger {
  std::string config_hash;
  std::vector<StageRecord> stages;
};

namespace detail {

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Scores a record set with every model's score file: global, semantic,
/// importance and temporal strata per model, in roster order. `main_year`
/// selects the record set used for the non-temporal strata.
inline std::vector<ReportRow> build_report(const std::vector<EvalRecord>& records,
                                           const std::vector<std::pair<std::string, ScoreFile>>& scores,
                                           int main_year, std::size_t bins, TieCredit ties) {
  std::vector<ReportRow> rows;
  for (const auto& [model, sf] : scores) {
    std::vector<EvalRecord> scored = records;
    for (auto& r : scored) {
      auto s = sf.find(r.pair());
      if (!s) throw ValidationError("model '" + model + "' has no score for " + to_string(r.pair()));
      r.score = *s;
    }
    std::map<int, std::vector<EvalRecord>> by_year;
    for (const auto& r : scored) by_year[r.test_year].push_back(r);
    const auto& main = by_year[main_year];
    if (auto g = stratum_report("global", "all", main, ties)) rows.push_back({model, *g});
    for (auto& s : stratify_semantic(main, ties)) rows.push_back({model, std::move(s)});
    for (auto& s : stratify_importance(main, bins, ties)) rows.push_back({model, std::move(s)});
    for (auto& s : stratify_temporal(by_year, ties)) rows.push_back({model, std::move(s)});
  }
  return rows;
}

inline nlohmann::ordered_json report_to_json(const std::vector<ReportRow>& rows,
                                             const RunConfig& cfg) {
  auto j = nlohmann::ordered_json::array();
  const std::string hash = cfg.hash();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["stratum_kind"] = r.stratum.kind;
    o["stratum_key"] = r.stratum.key;
    o["auc"] = r.stratum.auc;
    o["n_pos"] = r.stratum.n_pos;
    o["n_neg"] = r.stratum.n_neg;
    o["model_id"] = r.model_id;
    o["train_year"] = cfg.train_year;
    o["test_year"] = cfg.test_year;
    o["horizon_year"] = cfg.horizon_year;
    o["config_hash"] = hash;
    j.push_back(std::move(o));
  }
  return j;
}

inline std::vector<ReportRow> report_from_json(const nlohmann::json& j) {
  std::vector<ReportRow> rows;
  try {
    for (const auto& o : j) {
      rows.push_back({o.at("model_id").get<std::string>(),
                      {o.at("stratum_kind").get<std::string>(), o.at("stratum_key").get<std::string>(),
                       o.at("auc").get<double>(), o.at("n_pos").get<std::size_t>(),
                       o.at("n_neg").get<std::size_t>()}});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return rows;
}

/// report.json from saved records and per-model score files `<dir>/<id>.tsv`.
inline void evaluate_saved(const RunConfig& cfg, const fs::path& records_path,
                           const fs::path& scores_dir, const fs::path& report_path) {
  const auto records = read_records(records_path);
  std::vector<std::pair<std::string, ScoreFile>> scores;
  for (const auto& m : cfg.models) {
    scores.emplace_back(m.id(), load_scores(scores_dir / (m.id() + ".tsv")));
  }
  const auto rows = build_report(records, scores, cfg.test_year, cfg.importance_bins, cfg.auc_ties);
  detail::write_file(report_path, report_to_json(rows, cfg).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg) : cfg_(std::move(cfg)), out_(cfg_.out_dir) {
    cfg_.validate();
    hash_ = cfg_.hash();
    fs::create_directories(out_);
    load_ledger();
  }

  const RunConfig& config() const { return cfg_; }
  const fs::path& out_dir() const { return out_; }
  const RunLedger& ledger() const { return ledger_; }

  RunLedger run() {
    ingest();
    snapshot();
    attribute();
    importance();
    train();
    evaluate();
    report();
    return ledger_;
  }

  void ingest() {
    const auto paths = CorpusPaths::in_directory(cfg_.corpus_dir);
    std::vector<fs::path> inputs = {cfg_.corpus_dir / "manifest.txt", paths.nodes, paths.curated,
                                    paths.mentions, paths.citations};
    if (paths.features) inputs.push_back(*paths.features);
    stage("ingest", inputs, {"bundle.json"}, [&] {
      auto bundle = load_corpus_dir(cfg_.corpus_dir);
      check_years(bundle.manifest);
      save_bundle(bundle, out_ / "bundle.json");
      log::info("ingest: " + std::to_string(bundle.nodes.size()) + " nodes, " +
                std::to_string(bundle.curated.size()) + " curated pairs, " +
                std::to_string(bundle.mentions.size()) + " mentions");
    });
  }

  /// All snapshots the run needs, or only `year`.
  void snapshot(std::optional<int> year = std::nullopt) {
    if (year) {
      const auto& b = bundle();
      if (!b.manifest.contains_year(*year)) {
        throw ValidationError("snapshot year " + std::to_string(*year) + " outside corpus range [" +
                              std::to_string(b.manifest.year_min) + ", " +
                              std::to_string(b.manifest.year_max) + "]");
      }
    }
    std::vector<int> years;
    if (year) {
      years.push_back(*year);
    } else {
      for (int y = first_year(); y <= last_year(); ++y) years.push_back(y);
    }
    std::vector<std::string> outputs;
    for (int y : years) {
      outputs.push_back("snapshots/G_" + std::to_string(y) + ".tsv");
      outputs.push_back("snapshots/G_" + std::to_string(y) + ".json");
    }
    stage(year ? "snapshot_" + std::to_string(*year) : "snapshot", {out_ / "bundle.json"}, outputs, [&] {
      fs::create_directories(out_ / "snapshots");
      for (int y : years) {
        const auto& g = graph(y);
        write_snapshot(g, out_ / ("snapshots/G_" + std::to_string(y) + ".tsv"),
                       out_ / ("snapshots/G_" + std::to_string(y) + ".json"));
      }
    });
  }

  /// IG attribution of G_test's edges toward Ê_{test+1}.
  void attribute() {
    stage("attribute", {out_ / "bundle.json"}, {"attribution.tsv", "ig_model.json"}, [&] {
      const int t = cfg_.test_year;
      const auto& g = graph(t);
      const auto& future = graph(future_year());
      const auto targets = new_edges(g, future);
      AttributionResult result;
      nlohmann::ordered_json meta;
      meta["format"] = "dyport-attribution";
      meta["config_hash"] = hash_;
      meta["year"] = t;
      meta["future_year"] = future.year();
      meta["steps"] = cfg_.ig_steps;
      if (targets.empty()) {
        log::warn("attribute: no new edges after " + std::to_string(t) + ", attributions are 0");
        result.edge_attribution.assign(g.num_edges(), 0.0);
        meta["trained"] = false;
      } else {
        const Eigen::MatrixXd x = to_matrix(features(g));
        GcnConfig gc = cfg_.gcn;
        gc.seed = derive_seed(cfg_.seed, "attribute-gcn");
        const auto model = train_link_predictor(g, x, targets.keys, gc);
        save_gcn(model, out_ / "ig_gcn.json");
        result = integrated_gradients(GcnPairScore(model, x), g, targets.keys, cfg_.ig_steps,
                                      cfg_.ig_weighted);
        meta["trained"] = true;
        meta["model"] = "ig_gcn.json";
        auto tj = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < targets.size(); ++i) {
          tj.push_back({{"a", targets.pairs[i].a.str()},
                        {"b", targets.pairs[i].b.str()},
                        {"output_delta", result.output_deltas[i]},
                        {"residual", result.residuals[i]}});
        }
        meta["targets"] = tj;
      }
      std::vector<std::pair<ConceptPair, double>> rows;
      for (std::size_t e = 0; e < g.num_edges(); ++e) {
        rows.emplace_back(g.pair_of(g.edges()[e]), result.edge_attribution[e]);
      }
      std::sort(rows.begin(), rows.end());
      std::ofstream out(out_ / "attribution.tsv");
      if (!out) throw Error("cannot write attribution.tsv");
      out << "concept_a\tconcept_b\tig\n";
      for (const auto& [p, v] : rows) out << p.a << '\t' << p.b << '\t' << text::format_double(v) << '\n';
      detail::write_file(out_ / "ig_model.json", meta.dump(2) + "\n");
    });
  }

  /// Importance of the test-year positives.
  void importance() {
    stage("importance", {out_ / "bundle.json", out_ / "attribution.tsv"}, {"importance.tsv"}, [&] {
      const int t = cfg_.test_year;
      const auto positives = positives_at(t);
      if (positives.empty()) {
        throw ValidationError("no test positives: no edge first appears in " + std::to_string(t) +
                              " between concepts known in " + std::to_string(cfg_.train_year));
      }
      std::map<ConceptPair, double> ig;
      detail::read_tsv(out_ / "attribution.tsv", 3, 3, [&](const auto& f, std::size_t line) {
        const std::string file = (out_ / "attribution.tsv").string();
        ig.emplace(make_pair(detail::parse_concept(f[0], file, line),
                             detail::parse_concept(f[1], file, line)),
                   detail::parse_double(f[2], file, line, "ig"));
      });
      const auto& current = graph(t);
      const auto& future = graph(future_year());
      const auto future_edges = new_edges(current, future);
      const LiteratureIndex lit(bundle());
      const ImportanceContext ctx{graph(t - 1), current, future, future_edges, lit,
                                  cfg_.horizon_year, ig};
      std::vector<ConceptPair> edges;
      for (const auto& p : positives) edges.push_back(p.pair);
      write_importance(combine_importance(importance_components(ctx, edges)),
                       out_ / "importance.tsv");
    });
  }

  void train() {
    std::vector<std::string> outputs;
    for (const auto& m : cfg_.models) {
      if (m.learned()) outputs.push_back("models/" + m.id() + ".json");
    }
    if (outputs.empty()) {
      log::info("train: no learned models in the roster, skipped");
      return;
    }
    stage("train", {out_ / "bundle.json"}, outputs, [&] {
      fs::create_directories(out_ / "models");
      for (const auto& m : cfg_.models) {
        if (!m.learned()) continue;
        const auto path = out_ / "models" / (m.id() + ".json");
        if (m.kind == ModelSpec::Kind::gcn) {
          save_gcn(train_predictor_gcn(), path);
        } else {
          KgeConfig kc = cfg_.kge;
          kc.seed = derive_seed(cfg_.seed, "train-" + m.id());
          const auto variant =
              m.kind == ModelSpec::Kind::translation ? KgeVariant::translation : KgeVariant::bilinear;
          save_kge(train_kge(graph(cfg_.train_year), variant, kc, labeler()), path);
        }
        log::info("train: " + m.id() + " done");
      }
    });
  }

  void evaluate() {
    std::vector<fs::path> inputs = {out_ / "bundle.json", out_ / "importance.tsv"};
    std::vector<std::string> outputs = {"eval_records.tsv", "report.json"};
    for (const auto& m : cfg_.models) {
      if (m.learned()) inputs.push_back(out_ / "models" / (m.id() + ".json"));
      if (m.kind == ModelSpec::Kind::score_file) inputs.push_back(m.path);
      outputs.push_back("scores/" + m.id() + ".tsv");
    }
    stage("evaluate", inputs, outputs, [&] {
      const auto records = build_records();
      write_records(records, out_ / "eval_records.tsv");
      std::set<ConceptPair> pairs;
      for (const auto& r : records) pairs.insert(r.pair());
      fs::create_directories(out_ / "scores");
      for (const auto& m : cfg_.models) {
        save_scores(score_model(m, pairs), out_ / "scores" / (m.id() + ".tsv"));
      }
      evaluate_saved(cfg_, out_ / "eval_records.tsv", out_ / "scores", out_ / "report.json");
    });
  }

  void report() {
    stage("report", {out_ / "report.json"}, {"report.csv", "plot_data.csv", "report.md"}, [&] {
      write_report_views(report_from_json(nlohmann::json::parse(detail::read_file(out_ / "report.json"))));
    });
  }

  void write_report_views(const std::vector<ReportRow>& rows) {
    const std::string hash = hash_;
    std::ostringstream csv;
    csv << "model_id,stratum_kind,stratum_key,auc,n_pos,n_neg,train_year,test_year,horizon_year,config_hash\n";
    for (const auto& r : rows) {
      csv << detail::csv_field(r.model_id) << ',' << r.stratum.kind << ','
          << detail::csv_field(r.stratum.key) << ',' << text::format_double(r.stratum.auc) << ','
          << r.stratum.n_pos << ',' << r.stratum.n_neg << ',' << cfg_.train_year << ','
          << cfg_.test_year << ',' << cfg_.horizon_year << ',' << hash << '\n';
    }
    detail::write_file(out_ / "report.csv", csv.str());

    std::vector<std::string> models;
    std::map<std::string, std::map<std::string, double>> by_year;
    for (const auto& r : rows) {
      if (std::find(models.begin(), models.end(), r.model_id) == models.end()) models.push_back(r.model_id);
      if (r.stratum.kind == "temporal") by_year[r.stratum.key][r.model_id] = r.stratum.auc;
    }
    std::ostringstream plot;
    plot << "year";
    for (const auto& m : models) plot << ',' << detail::csv_field(m);
    plot << '\n';
    for (const auto& [year, aucs] : by_year) {
      plot << year;
      for (const auto& m : models) {
        auto it = aucs.find(m);
        plot << ',' << (it == aucs.end() ? "" : text::format_double(it->second));
      }
      plot << '\n';
    }
    detail::write_file(out_ / "plot_data.csv", plot.str());

    std::ostringstream md;
    md << "# Link prediction report\n\n"
       << "train " << cfg_.train_year << ", test " << cfg_.test_year << ", importance horizon "
       << cfg_.horizon_year << ", config " << hash << "\n\n"
       << "| model | stratum | key | AUC | positives | negatives |\n"
       << "|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      char auc[32];
      std::snprintf(auc, sizeof auc, "%.4f", r.stratum.auc);
      md << "| " << r.model_id << " | " << r.stratum.kind << " | " << r.stratum.key << " | " << auc
         << " | " << r.stratum.n_pos << " | " << r.stratum.n_neg << " |\n";
    }
    detail::write_file(out_ / "report.md", md.str());
  }

  // -------------------------------------------------------------------------
  // Shared state, exposed for tests
  // -------------------------------------------------------------------------

  const CorpusBundle& bundle() {
    if (!bundle_) {
      const auto path = out_ / "bundle.json";
      if (!fs::exists(path)) throw ValidationError(path.string() + " is missing; run `ingest` first");
      bundle_ = load_bundle(path);
      check_years(bundle_->manifest);
      xref_ = cross_reference(*bundle_);
    }
    return *bundle_;
  }

  const SnapshotGraph& graph(int year) {
    bundle();
    auto it = graphs_.find(year);
    if (it == graphs_.end()) it = graphs_.emplace(year, build_snapshot(*xref_, year, cfg_.weight_mode)).first;
    return it->second;
  }

  int future_year() { return std::min(cfg_.test_year + 1, bundle().manifest.year_max); }

  /// Edges first appearing in `year` whose endpoints are both known at the
  /// training year.
  std::vector<PositivePair> positives_at(int year) {
    const auto& train = graph(cfg_.train_year);
    std::vector<PositivePair> out;
    for (const auto& e : xref_->edges) {
      if (e.first_year() == year && train.find(e.pair.a) && train.find(e.pair.b)) {
        out.push_back({e.pair, year});
      }
    }
    return out;
  }

  /// Records for every test year; the test-year set carries importance.
  std::vector<EvalRecord> build_records() {
    std::map<ConceptPair, double> imp;
    for (const auto& r : read_importance(out_ / "importance.tsv")) imp.emplace(r.edge, r.combined);
    const auto& train = graph(cfg_.train_year);
    const std::vector<ConceptId> universe(train.nodes().begin(), train.nodes().end());
    std::vector<EvalRecord> all;
    for (int year = cfg_.test_year; year <= cfg_.horizon_year; ++year) {
      const auto positives = positives_at(year);
      if (positives.empty()) {
        log::warn("test year " + std::to_string(year) + " has no new edges");
        continue;
      }
      auto records = sample_negatives(positives, bundle(), graph(year), universe,
                                      cfg_.negatives_per_positive,
                                      derive_seed(cfg_.seed, "negatives-" + std::to_string(year)), year);
      if (year == cfg_.test_year) {
        for (auto& r : records) {
          if (!r.positive) continue;
          auto it = imp.find(r.pair());
          if (it == imp.end()) throw ValidationError("importance.tsv lacks " + to_string(r.pair()));
          r.importance = it->second;
        }
      }
      all.insert(all.end(), records.begin(), records.end());
    }
    return all;
  }

  FeatureMatrix features(const SnapshotGraph& g) {
    const auto& b = bundle();
    if (!b.features.empty()) return features_from_table(g, b.features, b.manifest.feature_dim);
    return synth_features(g, cfg_.feature_dim, derive_seed(cfg_.seed, "features"));
  }

  /// Predictor GCN: input G_{train-1}, targets Ê_train; scores on G_train.
  GcnModel train_predictor_gcn() {
    const int t = cfg_.train_year;
    if (t - 1 < bundle().manifest.year_min) {
      throw ValidationError("gcn needs train_year - 1 (" + std::to_string(t - 1) +
                            ") inside the corpus range");
    }
    const auto& prev = graph(t - 1);
    const auto targets = new_edges(prev, graph(t));
    if (targets.empty()) {
      throw ValidationError("gcn: no new edges in " + std::to_string(t) + " to train on");
    }
    GcnConfig gc = cfg_.gcn;
    gc.seed = derive_seed(cfg_.seed, "train-gcn");
    return train_link_predictor(prev, to_matrix(features(prev)), targets.keys, gc);
  }

  RelationLabeler labeler() {
    if (!cfg_.kge_semantic_relations) return {};
    return semantic_relation_labeler(bundle());
  }

  ScoreFile score_model(const ModelSpec& m, const std::set<ConceptPair>& pairs) {
    const auto& g = graph(cfg_.train_year);
    ScoreFile out;
    switch (m.kind) {
      case ModelSpec::Kind::gcn: {
        const auto model = load_gcn(out_ / "models" / "gcn.json");
        const Eigen::MatrixXd z =
            gcn_forward(dense_adjacency(g, true), to_matrix(features(g)), model);
        for (const auto& p : pairs) out.scores.emplace(p, decode(z, g.index_of(p.a), g.index_of(p.b)));
        break;
      }
      case ModelSpec::Kind::translation:
      case ModelSpec::Kind::bilinear: {
        const auto model = load_kge(out_ / "models" / (m.id() + ".json"));
        const auto label = labeler();
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(model.entity.cols());
        for (const auto& [name, v] : model.relations) mean += v;
        mean /= static_cast<double>(model.relations.size());
        for (const auto& p : pairs) {
          const std::string rel = label ? label(p.a, p.b) : std::string(kDefaultRelation);
          auto it = model.relations.find(rel);
          const Eigen::VectorXd& r = it == model.relations.end() ? mean : it->second;
          const auto h = model.entity_vector(p.a), t = model.entity_vector(p.b);
          out.scores.emplace(p, model.variant == KgeVariant::translation
                                    ? score_translation(h, r, t, model.norm)
                                    : score_bilinear(h, r, t));
        }
        break;
      }
      case ModelSpec::Kind::common_neighbors:
        for (const auto& p : pairs) out.scores.emplace(p, score_common_neighbors(g, p));
        break;
      case ModelSpec::Kind::score_file: {
        const auto external = load_scores(m.path);
        for (const auto& p : pairs) {
          auto s = external.find(p);
          if (!s) throw ValidationError(m.path + " has no score for " + to_string(p));
          out.scores.emplace(p, *s);
        }
        break;
      }
    }
    return out;
  }

 private:
  int first_year() {
    const bool needs_prev = std::any_of(cfg_.models.begin(), cfg_.models.end(),
                                        [](const ModelSpec& m) { return m.kind == ModelSpec::Kind::gcn; });
    return std::max(bundle().manifest.year_min, cfg_.train_year - (needs_prev ? 1 : 0));
  }
  int last_year() { return std::max(cfg_.horizon_year, future_year()); }

  void check_years(const Manifest& m) const {
    if (!m.contains_year(cfg_.train_year) || !m.contains_year(cfg_.horizon_year)) {
      throw ValidationError("config years [" + std::to_string(cfg_.train_year) + ", " +
                            std::to_string(cfg_.horizon_year) + "] outside corpus range [" +
                            std::to_string(m.year_min) + ", " + std::to_string(m.year_max) + "]");
    }
  }

  template <class Fn>
  void stage(const std::string& name, const std::vector<fs::path>& inputs,
             const std::vector<std::string>& outputs, Fn&& body) {
    const auto start = std::chrono::steady_clock::now();
    StableHash h;
    h.add(name).add(hash_).add(kVersion);
    for (const auto& in : inputs) {
      if (!fs::exists(in)) {
        throw ValidationError("stage " + name + ": missing input " + in.string());
      }
      h.add(detail::read_file(in));
    }
    const std::string key = hex64(h.digest());
    const auto key_path = out_ / ".cache" / (name + ".key");
    const bool fresh = fs::exists(key_path) && detail::read_file(key_path) == key &&
                       std::all_of(outputs.begin(), outputs.end(),
                                   [&](const std::string& o) { return fs::exists(out_ / o); });
    StageRecord rec{name, fresh ? "cached" : "ran", 0, outputs};
    if (fresh) {
      log::info(name + ": inputs unchanged, cached");
    } else {
      fs::remove(key_path);
      try {
        body();
      } catch (const std::exception& e) {
        rec.status = "failed";
        rec.wall_ms = elapsed_ms(start);
        append(std::move(rec));
        log::warn("stage " + name + " failed: " + e.what());
        throw;
      }
      fs::create_directories(key_path.parent_path());
      detail::write_file(key_path, key);
    }
    rec.wall_ms = elapsed_ms(start);
    append(std::move(rec));
  }

  static double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }

  void load_ledger() {
    ledger_.config_hash = hash_;
    const auto path = out_ / "run_ledger.json";
    if (!fs::exists(path)) return;
    try {
      const auto j = nlohmann::json::parse(detail::read_file(path));
      for (const auto& s : j.at("stages")) {
        ledger_.stages.push_back({s.at("name"), s.at("status"), s.at("wall_ms"),
                                  s.at("artifacts").get<std::vector<std::string>>()});
      }
    } catch (const nlohmann::json::exception&) {
      log::warn("run_ledger.json unreadable, starting a new ledger");
      ledger_.stages.clear();
    }
  }

  void append(StageRecord rec) {
    ledger_.stages.push_back(std::move(rec));
    nlohmann::ordered_json j;
    j["config_hash"] = hash_;
    j["versions"] = {{"dyport", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    auto stages = nlohmann::ordered_json::array();
    for (const auto& s : ledger_.stages) {
      stages.push_back({{"name", s.name}, {"status", s.status}, {"wall_ms", s.wall_ms},
                        {"artifacts", s.artifacts}});
    }
    j["stages"] = stages;
    detail::write_file(out_ / "run_ledger.json", j.dump(2) + "\n");
  }

  RunConfig cfg_;
  fs::path out_;
  std::string hash_;
  RunLedger ledger_;
  std::optional<CorpusBundle> bundle_;
  std::optional<CrossReferenced> xref_;
  std::map<int, SnapshotGraph> graphs_;
};

}  // namespace dyport
