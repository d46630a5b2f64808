// Cumulative yearly snapshots, new-edge sets, neighborhoods and node
// features.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "dyport/common.hpp"
#include "dyport/ingest.hpp"

namespace dyport {

using NodeIndex = std::uint32_t;

/// Undirected edge between dense node indices, u < v.
struct Edge {
  NodeIndex u = 0;
  NodeIndex v = 0;
  std::uint32_t weight = 1;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Index-space node pair, u < v.
struct EdgeKey {
  NodeIndex u = 0;
  NodeIndex v = 0;

  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

inline EdgeKey make_key(NodeIndex x, NodeIndex y) {
  return x < y ? EdgeKey{x, y} : EdgeKey{y, x};
}

struct Neighbor {
  NodeIndex node = 0;
  std::uint32_t weight = 0;
  std::size_t edge = 0;  // index into SnapshotGraph::edges()
};

/// Immutable simple undirected weighted graph for one year.
class SnapshotGraph {
 public:
  SnapshotGraph() = default;

  /// Validates simplicity (no loops, no multi-edges) and weight >= 1.
  /// Edges are stored sorted by (u, v).
  SnapshotGraph(int year, std::vector<ConceptId> nodes, std::vector<Edge> edges,
                std::uint64_t corpus_fingerprint = 0)
      : year_(year),
        nodes_(std::move(nodes)),
        edges_(std::move(edges)),
        fingerprint_(corpus_fingerprint) {
    for (NodeIndex i = 0; i < nodes_.size(); ++i) {
      if (!index_.emplace(nodes_[i].str(), i).second) {
        throw ValidationError("duplicate node '" + nodes_[i].str() + "'");
      }
    }
    for (auto& e : edges_) {
      if (e.u == e.v) throw ValidationError("self-loop in snapshot");
      if (e.u >= nodes_.size() || e.v >= nodes_.size()) {
        throw ValidationError("edge endpoint out of range");
      }
      if (e.weight == 0) throw ValidationError("edge weight must be >= 1");
      if (e.v < e.u) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    for (std::size_t i = 1; i < edges_.size(); ++i) {
      if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
        throw ValidationError("multi-edge in snapshot");
      }
    }
    adjacency_.assign(nodes_.size(), {});
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      adjacency_[e.u].push_back({e.v, e.weight, i});
      adjacency_[e.v].push_back({e.u, e.weight, i});
    }
    for (auto& list : adjacency_) {
      std::sort(list.begin(), list.end(),
                [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    }
  }

  /// Convenience constructor from concept pairs with unit weights; node order
  /// is first-seen order in `pairs` after any explicit `nodes`.
  static SnapshotGraph from_pairs(int year,
                                  const std::vector<std::pair<std::string, std::string>>& pairs,
                                  const std::vector<std::string>& nodes = {}) {
    std::vector<ConceptId> ids;
    std::unordered_map<std::string, NodeIndex> idx;
    auto intern = [&](const std::string& s) {
      auto [it, inserted] = idx.emplace(s, static_cast<NodeIndex>(ids.size()));
      if (inserted) ids.emplace_back(s);
      return it->second;
    };
    for (const auto& n : nodes) intern(n);
    std::vector<Edge> edges;
    for (const auto& [a, b] : pairs) edges.push_back({intern(a), intern(b), 1});
    return SnapshotGraph(year, std::move(ids), std::move(edges));
  }

  int year() const noexcept { return year_; }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  std::span<const ConceptId> nodes() const noexcept { return nodes_; }
  const ConceptId& node_id(NodeIndex i) const { return nodes_.at(i); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Neighbor> neighbors(NodeIndex i) const { return adjacency_.at(i); }

  std::size_t degree(NodeIndex i) const { return adjacency_.at(i).size(); }
  std::uint64_t weighted_degree(NodeIndex i) const {
    std::uint64_t s = 0;
    for (const auto& n : adjacency_.at(i)) s += n.weight;
    return s;
  }

  std::optional<NodeIndex> find(const ConceptId& id) const {
    auto it = index_.find(id.str());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  NodeIndex index_of(const ConceptId& id) const {
    auto i = find(id);
    if (!i) {
      throw ValidationError("unknown node '" + id.str() + "' in snapshot " +
                            std::to_string(year_));
    }
    return *i;
  }

  std::optional<std::size_t> edge_index(NodeIndex a, NodeIndex b) const {
    if (a >= nodes_.size() || b >= nodes_.size()) return std::nullopt;
    const auto& list = adjacency_[a];
    auto it = std::lower_bound(
        list.begin(), list.end(), b,
        [](const Neighbor& n, NodeIndex key) { return n.node < key; });
    if (it == list.end() || it->node != b) return std::nullopt;
    return it->edge;
  }
  bool has_edge(NodeIndex a, NodeIndex b) const { return edge_index(a, b).has_value(); }
  bool has_edge(const ConceptPair& p) const {
    auto a = find(p.a), b = find(p.b);
    return a && b && has_edge(*a, *b);
  }

  ConceptPair pair_of(const Edge& e) const {
    return make_pair(nodes_[e.u], nodes_[e.v]);
  }
  ConceptPair pair_of(const EdgeKey& k) const {
    return make_pair(nodes_.at(k.u), nodes_.at(k.v));
  }

 private:
  int year_ = 0;
  std::vector<ConceptId> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::uint64_t fingerprint_ = 0;
};

/// cumulative: documents mentioning the pair in any year <= t.
/// per_year: documents mentioning the pair in year t; edges without a
/// mention in year t keep weight 1.
enum class WeightMode { cumulative, per_year };

/// G_t over E: every cross-referenced pair first mentioned in or before t.
/// Node indices follow first appearance in (first_year, pair) order, so the
/// node list of G_t is a prefix of the node list of G_{t+1}.
inline SnapshotGraph build_snapshot(const CrossReferenced& xref, int year,
                                    WeightMode mode = WeightMode::cumulative) {
  if (year < xref.year_min || year > xref.year_max) {
    throw ValidationError("snapshot year " + std::to_string(year) +
                          " outside corpus range [" + std::to_string(xref.year_min) +
                          ", " + std::to_string(xref.year_max) + "]");
  }
  std::vector<const CrossEdge*> order;
  for (const auto& e : xref.edges) {
    if (e.first_year() <= year) order.push_back(&e);
  }
  std::stable_sort(order.begin(), order.end(), [](const CrossEdge* a, const CrossEdge* b) {
    return a->first_year() < b->first_year();
  });

  std::vector<ConceptId> nodes;
  std::unordered_map<std::string, NodeIndex> idx;
  auto intern = [&](const ConceptId& c) {
    auto [it, inserted] = idx.emplace(c.str(), static_cast<NodeIndex>(nodes.size()));
    if (inserted) nodes.push_back(c);
    return it->second;
  };
  std::vector<Edge> edges;
  edges.reserve(order.size());
  for (const CrossEdge* e : order) {
    std::uint32_t w = 0;
    for (const auto& m : e->mentions) {
      if (mode == WeightMode::cumulative ? m.year <= year : m.year == year) ++w;
    }
    const NodeIndex u = intern(e->pair.a);
    const NodeIndex v = intern(e->pair.b);
    edges.push_back({u, v, std::max<std::uint32_t>(w, 1)});
  }
  return SnapshotGraph(year, std::move(nodes), std::move(edges), xref.fingerprint);
}

/// Ê_{t+1}: edges of G_{t+1} absent from G_t whose endpoints both exist in
/// G_t. Keys are in G_prev's index space.
struct NewEdgeSet {
  int year = 0;
  std::vector<ConceptPair> pairs;  // sorted
  std::vector<EdgeKey> keys;       // aligned with pairs, indices in G_prev

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }

  /// Sorted unique endpoints (G_prev indices).
  std::vector<NodeIndex> endpoints() const {
    std::vector<NodeIndex> out;
    for (const auto& k : keys) {
      out.push_back(k.u);
      out.push_back(k.v);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

inline NewEdgeSet new_edges(const SnapshotGraph& prev, const SnapshotGraph& next) {
  if (prev.fingerprint() != next.fingerprint()) {
    throw ValidationError("snapshots " + std::to_string(prev.year()) + " and " +
                          std::to_string(next.year()) + " come from different corpora");
  }
  if (next.year() < prev.year()) {
    throw ValidationError("new_edges expects prev.year <= next.year");
  }
  NewEdgeSet out;
  out.year = next.year();
  std::vector<std::pair<ConceptPair, EdgeKey>> found;
  for (const auto& e : next.edges()) {
    auto u = prev.find(next.node_id(e.u));
    auto v = prev.find(next.node_id(e.v));
    if (!u || !v) continue;  // new-node edge: outside the prediction universe
    if (prev.has_edge(*u, *v)) continue;
    found.emplace_back(next.pair_of(e), make_key(*u, *v));
  }
  std::sort(found.begin(), found.end());
  for (auto& [p, k] : found) {
    out.pairs.push_back(std::move(p));
    out.keys.push_back(k);
  }
  return out;
}

/// N₂(u) = ∪_{w ∈ N(u)} N(w), sorted. Contains u whenever deg(u) >= 1.
inline std::vector<NodeIndex> second_order_neighborhood(const SnapshotGraph& g,
                                                        NodeIndex u) {
  if (u >= g.num_nodes()) throw ValidationError("unknown node index");
  std::vector<NodeIndex> out;
  for (const auto& w : g.neighbors(u)) {
    for (const auto& x : g.neighbors(w.node)) out.push_back(x.node);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Node features
// ---------------------------------------------------------------------------

/// Row-major |N_t| x dim matrix of finite values.
struct FeatureMatrix {
  int year = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::size_t rows() const { return dim ? values.size() / dim : 0; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * dim, dim);
  }
  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// Deterministic stand-in node features: column 0 is deg/max_deg, column 1 is
/// weighted_deg/max_weighted_deg, the rest are uniform in [-1, 1) drawn from
/// a stream keyed by (seed, concept id), independent of node order.
inline FeatureMatrix synth_features(const SnapshotGraph& g, std::size_t dim,
                                    std::uint64_t seed) {
  if (dim == 0) throw ValidationError("feature dimension must be >= 1");
  FeatureMatrix fm{g.year(), dim, std::vector<double>(g.num_nodes() * dim, 0.0)};
  std::size_t max_deg = 0;
  std::uint64_t max_wdeg = 0;
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    max_deg = std::max(max_deg, g.degree(i));
    max_wdeg = std::max(max_wdeg, g.weighted_degree(i));
  }
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    double* row = fm.values.data() + i * dim;
    row[0] = max_deg ? static_cast<double>(g.degree(i)) / static_cast<double>(max_deg) : 0.0;
    if (dim > 1) {
      row[1] = max_wdeg ? static_cast<double>(g.weighted_degree(i)) /
                              static_cast<double>(max_wdeg)
                        : 0.0;
    }
    Rng rng(StableHash(seed).add(g.node_id(i).str()).digest());
    for (std::size_t k = 2; k < dim; ++k) row[k] = rng.uniform(-1.0, 1.0);
  }
  return fm;
}

/// Features from the corpus table: for each node the most recent vector with
/// year <= g.year().
inline FeatureMatrix features_from_table(const SnapshotGraph& g,
                                         const FeatureTable& table, std::size_t dim) {
  FeatureMatrix fm{g.year(), dim, {}};
  fm.values.reserve(g.num_nodes() * dim);
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    const auto& id = g.node_id(i);
    auto it = table.upper_bound(std::make_pair(id, g.year()));
    if (it == table.begin() || std::prev(it)->first.first != id) {
      throw ValidationError("no feature vector for '" + id.str() + "' at or before " +
                            std::to_string(g.year()));
    }
    const auto& v = std::prev(it)->second;
    fm.values.insert(fm.values.end(), v.begin(), v.end());
  }
  return fm;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// Edge list `a <TAB> b <TAB> weight` with a header row, plus a JSON manifest.
inline void write_snapshot(const SnapshotGraph& g, const std::filesystem::path& tsv,
                           const std::filesystem::path& json_path) {
  {
    std::ofstream out(tsv);
    if (!out) throw Error("cannot write " + tsv.string());
    out << "concept_a\tconcept_b\tweight\n";
    std::vector<std::pair<ConceptPair, std::uint32_t>> rows;
    for (const auto& e : g.edges()) rows.emplace_back(g.pair_of(e), e.weight);
    std::sort(rows.begin(), rows.end());
    for (const auto& [p, w] : rows) out << p.a << '\t' << p.b << '\t' << w << '\n';
  }
  std::ofstream out(json_path);
  if (!out) throw Error("cannot write " + json_path.string());
  nlohmann::ordered_json j;
  j["year"] = g.year();
  j["num_nodes"] = g.num_nodes();
  j["num_edges"] = g.num_edges();
  out << j.dump(2) << '\n';
}

}  // namespace dyport
