// Reference predictors: translation (TransE-style) and bilinear
// (DistMult-style) embeddings, common neighbours, and an adapter for scores
// produced by external systems.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dyport/common.hpp"
#include "dyport/dyngraph.hpp"
#include "dyport/gcn.hpp"
#include "dyport/ingest.hpp"

namespace dyport {

enum class KgeVariant { translation, bilinear };
enum class DistanceNorm { l1, l2 };

inline constexpr const char* kDefaultRelation = "co_occurs";

inline std::string to_string(KgeVariant v) {
  return v == KgeVariant::translation ? "translation" : "bilinear";
}

/// Score of a translation embedding: −‖h + r − t‖ so that higher means more
/// plausible.
inline double score_translation(const Eigen::VectorXd& h, const Eigen::VectorXd& r,
                                const Eigen::VectorXd& t, DistanceNorm norm) {
  const Eigen::VectorXd d = h + r - t;
  return norm == DistanceNorm::l1 ? -d.lpNorm<1>() : -d.norm();
}

/// Σ_k h_k r_k t_k.
inline double score_bilinear(const Eigen::VectorXd& h, const Eigen::VectorXd& r,
                             const Eigen::VectorXd& t) {
  return (h.array() * r.array() * t.array()).sum();
}

struct KgeConfig {
  std::size_t dim = 32;
  double margin = 1.0;
  int epochs = 200;
  double learning_rate = 0.05;
  double l2 = 1e-4;  // bilinear only
  DistanceNorm norm = DistanceNorm::l2;
  std::uint64_t seed = 0;
};

struct KgeModel {
  KgeVariant variant = KgeVariant::translation;
  DistanceNorm norm = DistanceNorm::l2;
  std::uint64_t seed = 0;
  std::vector<ConceptId> entities;
  Eigen::MatrixXd entity;  // one row per entity
  std::map<std::string, Eigen::VectorXd> relations;
  std::vector<double> loss_trace;

  std::optional<std::size_t> find(const ConceptId& id) const {
    if (index_.empty() && !entities.empty()) reindex();
    auto it = index_.find(id.str());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  Eigen::VectorXd entity_vector(const ConceptId& id) const {
    auto i = find(id);
    if (!i) throw ValidationError("unknown entity '" + id.str() + "'");
    return entity.row(static_cast<Eigen::Index>(*i)).transpose();
  }

  const Eigen::VectorXd& relation_vector(const std::string& rel) const {
    auto it = relations.find(rel);
    if (it == relations.end()) throw ValidationError("unknown relation '" + rel + "'");
    return it->second;
  }

  double score(const ConceptId& h, const std::string& rel, const ConceptId& t) const {
    const auto hv = entity_vector(h);
    const auto tv = entity_vector(t);
    const auto& rv = relation_vector(rel);
    return variant == KgeVariant::translation ? score_translation(hv, rv, tv, norm)
                                              : score_bilinear(hv, rv, tv);
  }

  void reindex() const {
    index_.clear();
    for (std::size_t i = 0; i < entities.size(); ++i) index_.emplace(entities[i].str(), i);
  }

 private:
  mutable std::unordered_map<std::string, std::size_t> index_;
};

/// Maps an edge to its relation label.
using RelationLabeler = std::function<std::string(const ConceptId&, const ConceptId&)>;

/// Relation label = unordered pair of the endpoints' primary (first sorted)
/// semantic types, e.g. "Chemical|Gene".
inline RelationLabeler semantic_relation_labeler(const CorpusBundle& bundle) {
  return [&bundle](const ConceptId& a, const ConceptId& b) {
    const auto* na = bundle.find_node(a);
    const auto* nb = bundle.find_node(b);
    if (!na || !nb) throw ValidationError("relation labeler: unknown concept");
    std::string x = na->semantic_types.front(), y = nb->semantic_types.front();
    if (y < x) std::swap(x, y);
    return x + "|" + y;
  };
}

namespace detail {

struct KgeTriple {
  std::size_t h;
  std::size_t rel;
  std::size_t t;
};

}  // namespace detail

/// Trains entity and relation embeddings on the edges of `g` (canonical
/// direction a -> b). Translation: margin ranking against a uniformly
/// corrupted head or tail, entity rows renormalized to unit length each
/// epoch. Bilinear: logistic loss on the positive and one corruption, small
/// L2 penalty. Per-triple SGD in a seeded order. loss_trace[k] is the loss on
/// a fixed seeded corruption sample before epoch k, plus a final entry.
inline KgeModel train_kge(const SnapshotGraph& g, KgeVariant variant, const KgeConfig& cfg,
                          const RelationLabeler& labeler = {}) {
  if (g.num_edges() == 0) throw ValidationError("KGE training needs a non-empty snapshot");
  if (cfg.dim == 0) throw ValidationError("KGE dimension must be positive");
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const auto k = static_cast<Eigen::Index>(cfg.dim);

  KgeModel m;
  m.variant = variant;
  m.norm = cfg.norm;
  m.seed = cfg.seed;
  m.entities.assign(g.nodes().begin(), g.nodes().end());

  Rng init(derive_seed(cfg.seed, "kge-init"));
  const double bound = 6.0 / std::sqrt(static_cast<double>(cfg.dim));
  m.entity.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) m.entity(i, j) = init.uniform(-bound, bound);
  }
  if (variant == KgeVariant::translation) m.entity.rowwise().normalize();

  std::vector<detail::KgeTriple> triples;
  std::vector<std::string> rel_names;
  std::map<std::string, std::size_t> rel_index;
  for (const auto& e : g.edges()) {
    const std::string label =
        labeler ? labeler(g.node_id(e.u), g.node_id(e.v)) : std::string(kDefaultRelation);
    auto [it, inserted] = rel_index.emplace(label, rel_names.size());
    if (inserted) rel_names.push_back(label);
    triples.push_back({e.u, it->second, e.v});
  }
  std::vector<Eigen::VectorXd> rel(rel_names.size());
  for (auto& r : rel) {
    r.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) r(j) = init.uniform(-bound, bound);
    if (variant == KgeVariant::translation) r.normalize();
  }

  auto corrupt = [&](const detail::KgeTriple& tr, Rng& rng) {
    detail::KgeTriple c = tr;
    for (int attempt = 0; attempt < 16; ++attempt) {
      const auto x = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)));
      const bool head = rng.below(2) == 0;
      c = tr;
      (head ? c.h : c.t) = x;
      if (c.h != c.t && !g.has_edge(static_cast<NodeIndex>(c.h), static_cast<NodeIndex>(c.t))) {
        break;
      }
    }
    return c;
  };

  auto raw = [&](const detail::KgeTriple& tr) {
    const Eigen::VectorXd h = m.entity.row(static_cast<Eigen::Index>(tr.h)).transpose();
    const Eigen::VectorXd t = m.entity.row(static_cast<Eigen::Index>(tr.t)).transpose();
    return variant == KgeVariant::translation ? score_translation(h, rel[tr.rel], t, cfg.norm)
                                              : score_bilinear(h, rel[tr.rel], t);
  };
  auto pair_loss = [&](const detail::KgeTriple& pos, const detail::KgeTriple& neg) {
    if (variant == KgeVariant::translation) {
      // distance = −score
      return std::max(0.0, cfg.margin - raw(pos) + raw(neg));
    }
    return detail::softplus(-raw(pos)) + detail::softplus(raw(neg));
  };

  Rng eval_rng(derive_seed(cfg.seed, "kge-eval"));
  std::vector<detail::KgeTriple> eval_neg;
  for (const auto& tr : triples) eval_neg.push_back(corrupt(tr, eval_rng));
  auto eval_loss = [&] {
    double s = 0;
    for (std::size_t i = 0; i < triples.size(); ++i) s += pair_loss(triples[i], eval_neg[i]);
    return s / static_cast<double>(triples.size());
  };

  auto distance = [&](const Eigen::VectorXd& x) {
    return cfg.norm == DistanceNorm::l1 ? x.lpNorm<1>() : x.norm();
  };
  // d‖x‖/dx for the translation residual x = h + r − t.
  auto distance_grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    if (cfg.norm == DistanceNorm::l1) return x.array().sign().matrix();
    const double len = x.norm();
    return len > 0 ? Eigen::VectorXd(x / len) : Eigen::VectorXd::Zero(x.size());
  };

  Rng rng(derive_seed(cfg.seed, "kge-train"));
  std::vector<std::size_t> order(triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const double lr = cfg.learning_rate;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = eval_loss();
    if (!std::isfinite(loss)) throw DivergenceError("KGE training loss is not finite", epoch);
    m.loss_trace.push_back(loss);
    if (variant == KgeVariant::translation) m.entity.rowwise().normalize();
    rng.partial_shuffle(order, order.size());
    for (std::size_t idx : order) {
      const auto& pos = triples[idx];
      const auto neg = corrupt(pos, rng);
      auto hp = m.entity.row(static_cast<Eigen::Index>(pos.h));
      auto tp = m.entity.row(static_cast<Eigen::Index>(pos.t));
      auto hn = m.entity.row(static_cast<Eigen::Index>(neg.h));
      auto tn = m.entity.row(static_cast<Eigen::Index>(neg.t));
      Eigen::VectorXd& r = rel[pos.rel];
      if (variant == KgeVariant::translation) {
        const Eigen::VectorXd xp = hp.transpose() + r - tp.transpose();
        const Eigen::VectorXd xn = hn.transpose() + r - tn.transpose();
        if (cfg.margin + distance(xp) - distance(xn) <= 0.0) continue;
        const Eigen::VectorXd gp = distance_grad(xp);
        const Eigen::VectorXd gn = distance_grad(xn);
        // loss = margin + ‖xp‖ − ‖xn‖
        const Eigen::VectorXd dhp = gp, dtp = -gp, dhn = -gn, dtn = gn;
        r -= lr * (gp - gn);
        m.entity.row(static_cast<Eigen::Index>(pos.h)) -= lr * dhp.transpose();
        m.entity.row(static_cast<Eigen::Index>(pos.t)) -= lr * dtp.transpose();
        m.entity.row(static_cast<Eigen::Index>(neg.h)) -= lr * dhn.transpose();
        m.entity.row(static_cast<Eigen::Index>(neg.t)) -= lr * dtn.transpose();
      } else {
        const Eigen::VectorXd h1 = hp.transpose(), t1 = tp.transpose();
        const Eigen::VectorXd h0 = hn.transpose(), t0 = tn.transpose();
        const double sp = score_bilinear(h1, r, t1);
        const double sn = score_bilinear(h0, r, t0);
        const double gp = -detail::sigmoid(-sp);  // d softplus(−s)/ds
        const double gn = detail::sigmoid(sn);    // d softplus(s)/ds
        const Eigen::VectorXd dr =
            gp * h1.cwiseProduct(t1) + gn * h0.cwiseProduct(t0) + cfg.l2 * r;
        m.entity.row(static_cast<Eigen::Index>(pos.h)) -=
            lr * (gp * r.cwiseProduct(t1) + cfg.l2 * h1).transpose();
        m.entity.row(static_cast<Eigen::Index>(pos.t)) -=
            lr * (gp * r.cwiseProduct(h1) + cfg.l2 * t1).transpose();
        m.entity.row(static_cast<Eigen::Index>(neg.h)) -=
            lr * (gn * r.cwiseProduct(t0) + cfg.l2 * h0).transpose();
        m.entity.row(static_cast<Eigen::Index>(neg.t)) -=
            lr * (gn * r.cwiseProduct(h0) + cfg.l2 * t0).transpose();
        r -= lr * dr;
      }
    }
  }
  if (cfg.epochs > 0 && variant == KgeVariant::translation) m.entity.rowwise().normalize();
  const double final_loss = eval_loss();
  if (!std::isfinite(final_loss)) throw DivergenceError("KGE training loss is not finite", cfg.epochs);
  m.loss_trace.push_back(final_loss);

  for (std::size_t i = 0; i < rel.size(); ++i) m.relations.emplace(rel_names[i], rel[i]);
  m.reindex();
  return m;
}

// ---------------------------------------------------------------------------
// Checkpoint
// ---------------------------------------------------------------------------

inline constexpr const char* kKgeFormat = "dyport-kge";

inline void save_kge(const KgeModel& m, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["format"] = kKgeFormat;
  j["version"] = 1;
  j["variant"] = to_string(m.variant);
  j["norm"] = m.norm == DistanceNorm::l1 ? "l1" : "l2";
  j["seed"] = m.seed;
  j["dim"] = m.entity.cols();
  std::vector<std::string> ids;
  for (const auto& e : m.entities) ids.push_back(e.str());
  j["entities"] = ids;
  j["entity"] = detail::matrix_to_json(m.entity);
  nlohmann::ordered_json rels = nlohmann::ordered_json::object();
  for (const auto& [name, v] : m.relations) {
    rels[name] = std::vector<double>(v.data(), v.data() + v.size());
  }
  j["relations"] = rels;
  j["loss_trace"] = m.loss_trace;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump() << '\n';
}

inline KgeModel load_kge(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.value("format", "") != kKgeFormat || j.value("version", 0) != 1) {
      throw SchemaVersionError("not a version-1 KGE checkpoint: " + path.string());
    }
    KgeModel m;
    const auto variant = j.at("variant").get<std::string>();
    m.variant = variant == "translation" ? KgeVariant::translation : KgeVariant::bilinear;
    m.norm = j.at("norm").get<std::string>() == "l1" ? DistanceNorm::l1 : DistanceNorm::l2;
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto dim = j.at("dim").get<Eigen::Index>();
    for (const auto& id : j.at("entities")) m.entities.emplace_back(id.get<std::string>());
    m.entity = detail::matrix_from_json(j.at("entity"),
                                        static_cast<Eigen::Index>(m.entities.size()), dim);
    for (const auto& [name, v] : j.at("relations").items()) {
      const auto values = v.get<std::vector<double>>();
      m.relations.emplace(name, Eigen::Map<const Eigen::VectorXd>(
                                    values.data(), static_cast<Eigen::Index>(values.size())));
    }
    m.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    m.reindex();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaVersionError("malformed KGE checkpoint " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Heuristics
// ---------------------------------------------------------------------------

/// |N(u) ∩ N(v)|.
inline double score_common_neighbors(const SnapshotGraph& g, NodeIndex u, NodeIndex v) {
  const auto nu = g.neighbors(u);
  const auto nv = g.neighbors(v);
  std::size_t i = 0, j = 0, common = 0;
  while (i < nu.size() && j < nv.size()) {
    if (nu[i].node == nv[j].node) {
      ++common;
      ++i;
      ++j;
    } else if (nu[i].node < nv[j].node) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(common);
}

inline double score_common_neighbors(const SnapshotGraph& g, const ConceptPair& p) {
  return score_common_neighbors(g, g.index_of(p.a), g.index_of(p.b));
}

// ---------------------------------------------------------------------------
// Score files
// ---------------------------------------------------------------------------

/// Externally produced scores, one row per unordered pair.
struct ScoreFile {
  std::map<ConceptPair, double> scores;

  std::optional<double> find(const ConceptPair& p) const {
    auto it = scores.find(p);
    if (it == scores.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const { return scores.size(); }
};

inline ScoreFile load_scores(const std::filesystem::path& path) {
  ScoreFile out;
  const std::string file = path.string();
  detail::read_tsv(path, 3, 3, [&](const auto& f, std::size_t line) {
    auto a = detail::parse_concept(f[0], file, line);
    auto b = detail::parse_concept(f[1], file, line);
    if (a == b) throw ParseError(file, line, "self-pair '" + f[0] + "'");
    const double s = detail::parse_double(f[2], file, line, "score");
    if (!out.scores.emplace(make_pair(std::move(a), std::move(b)), s).second) {
      throw ParseError(file, line, "duplicate pair (" + f[0] + ", " + f[1] + ")");
    }
  });
  return out;
}

inline void save_scores(const ScoreFile& scores, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "concept_a\tconcept_b\tscore\n";
  for (const auto& [p, s] : scores.scores) {
    out << p.a << '\t' << p.b << '\t' << text::format_double(s) << '\n';
  }
}

}  // namespace dyport
