// Per-edge importance components and their mean-percentile-rank combination.

#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dyport/common.hpp"
#include "dyport/dyngraph.hpp"
#include "dyport/ingest.hpp"

namespace dyport {

// ---------------------------------------------------------------------------
// Betweenness
// ---------------------------------------------------------------------------

/// Edge betweenness over unordered target pairs {s, t}, s != t, both in
/// `targets`: Σ σ_st(e) / σ_st with hop-count shortest paths. Brandes-style
/// accumulation with sources limited to the targets. Result is aligned with
/// g.edges().
inline std::vector<double> edge_betweenness_restricted(const SnapshotGraph& g,
                                                       std::span<const NodeIndex> targets) {
  const std::size_t n = g.num_nodes();
  std::vector<double> cb(g.num_edges(), 0.0);
  std::vector<NodeIndex> sources(targets.begin(), targets.end());
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  if (sources.empty()) {
    log::warn("edge betweenness: empty target set, all values are 0");
    return cb;
  }
  std::vector<char> is_target(n, 0);
  for (NodeIndex t : sources) {
    if (t >= n) throw ValidationError("betweenness target outside the snapshot");
    is_target[t] = 1;
  }

  std::vector<long> dist(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<std::vector<std::pair<NodeIndex, std::size_t>>> preds(n);
  std::vector<NodeIndex> order;
  order.reserve(n);
  for (NodeIndex s : sources) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : preds) p.clear();
    order.clear();

    dist[s] = 0;
    sigma[s] = 1.0;
    std::queue<NodeIndex> queue;
    queue.push(s);
    while (!queue.empty()) {
      const NodeIndex v = queue.front();
      queue.pop();
      order.push_back(v);
      for (const auto& nb : g.neighbors(v)) {
        const NodeIndex w = nb.node;
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].emplace_back(v, nb.edge);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeIndex w = *it;
      const double coeff = ((is_target[w] && w != s) ? 1.0 : 0.0) + delta[w];
      for (const auto& [v, e] : preds[w]) {
        const double c = sigma[v] / sigma[w] * coeff;
        cb[e] += c;
        delta[v] += c;
      }
    }
  }
  // Each unordered pair was accumulated once from each endpoint.
  for (auto& x : cb) x *= 0.5;
  return cb;
}

inline std::vector<double> edge_betweenness(const SnapshotGraph& g) {
  std::vector<NodeIndex> all(g.num_nodes());
  std::iota(all.begin(), all.end(), NodeIndex{0});
  return edge_betweenness_restricted(g, all);
}

// ---------------------------------------------------------------------------
// Eigenvector centrality
// ---------------------------------------------------------------------------

struct EigenvectorOptions {
  double tolerance = 1e-8;  // max-norm change between successive iterates
  int max_iterations = 10000;
};

/// Connected components as sorted node lists, ordered by smallest member.
inline std::vector<std::vector<NodeIndex>> connected_components(const SnapshotGraph& g) {
  std::vector<int> comp(g.num_nodes(), -1);
  std::vector<std::vector<NodeIndex>> out;
  for (NodeIndex s = 0; s < g.num_nodes(); ++s) {
    if (comp[s] >= 0) continue;
    std::vector<NodeIndex> members{s};
    comp[s] = static_cast<int>(out.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (const auto& nb : g.neighbors(members[i])) {
        if (comp[nb.node] < 0) {
          comp[nb.node] = comp[s];
          members.push_back(nb.node);
        }
      }
    }
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  return out;
}

/// Principal eigenvector of the weighted adjacency matrix, per connected
/// component, each L2-normalized and non-negative. Power iteration runs on
/// A + I (same eigenvectors, keeps bipartite components from oscillating)
/// from an all-ones start.
inline std::vector<double> eigenvector_centrality(const SnapshotGraph& g,
                                                  const EigenvectorOptions& opt = {}) {
  if (g.num_nodes() == 0) throw ValidationError("eigenvector centrality of an empty graph");
  std::vector<double> result(g.num_nodes(), 0.0);
  std::vector<double> next(g.num_nodes(), 0.0);
  for (const auto& members : connected_components(g)) {
    const double init = 1.0 / std::sqrt(static_cast<double>(members.size()));
    for (NodeIndex v : members) result[v] = init;
    bool converged = false;
    int iter = 0;
    while (iter < opt.max_iterations) {
      ++iter;
      double norm2 = 0.0;
      for (NodeIndex v : members) {
        double acc = result[v];
        for (const auto& nb : g.neighbors(v)) acc += nb.weight * result[nb.node];
        next[v] = acc;
        norm2 += acc * acc;
      }
      const double norm = std::sqrt(norm2);
      double change = 0.0;
      for (NodeIndex v : members) {
        const double x = next[v] / norm;
        change = std::max(change, std::abs(x - result[v]));
        result[v] = x;
      }
      if (change < opt.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw ConvergenceError("eigenvector centrality did not converge", iter);
    }
  }
  return result;
}

/// C_E(e) = |C_E(u) - C_E(v)|.
inline double edge_centrality_gap(std::span<const double> centrality, NodeIndex u,
                                  NodeIndex v) {
  return std::abs(centrality[u] - centrality[v]);
}

/// Signed change C_{E,t+1}(e) - C_{E,t}(e) for each pair. Both endpoints must
/// exist in both snapshots.
inline std::vector<double> edge_ec_delta(const SnapshotGraph& now,
                                         std::span<const double> centrality_now,
                                         const SnapshotGraph& next,
                                         std::span<const double> centrality_next,
                                         std::span<const ConceptPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto a0 = now.find(p.a), b0 = now.find(p.b);
    auto a1 = next.find(p.a), b1 = next.find(p.b);
    if (!a0 || !b0) {
      throw ValidationError("edge " + to_string(p) + " has an endpoint missing from " +
                            std::to_string(now.year()));
    }
    if (!a1 || !b1) {
      throw Error("edge " + to_string(p) + " has an endpoint missing from the future snapshot " +
                  std::to_string(next.year()));
    }
    out.push_back(edge_centrality_gap(centrality_next, *a1, *b1) -
                  edge_centrality_gap(centrality_now, *a0, *b0));
  }
  return out;
}

inline std::vector<double> edge_ec_delta(const SnapshotGraph& now, const SnapshotGraph& next,
                                         std::span<const ConceptPair> pairs,
                                         const EigenvectorOptions& opt = {}) {
  const auto c0 = eigenvector_centrality(now, opt);
  const auto c1 = eigenvector_centrality(next, opt);
  return edge_ec_delta(now, c0, next, c1, pairs);
}

// ---------------------------------------------------------------------------
// Second-order Jaccard
// ---------------------------------------------------------------------------

/// |N₂(u) ∩ N₂(v)| / |N₂(u) ∪ N₂(v)|; 0 when both neighborhoods are empty.
inline double jaccard2(const SnapshotGraph& g, NodeIndex u, NodeIndex v) {
  const auto nu = second_order_neighborhood(g, u);
  const auto nv = second_order_neighborhood(g, v);
  std::size_t inter = 0, i = 0, j = 0;
  while (i < nu.size() && j < nv.size()) {
    if (nu[i] == nv[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (nu[i] < nv[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = nu.size() + nv.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double jaccard2(const SnapshotGraph& g, const ConceptPair& p) {
  auto u = g.find(p.a), v = g.find(p.b);
  if (!u || !v) {
    throw ValidationError("jaccard2: endpoint of " + to_string(p) + " absent from snapshot " +
                          std::to_string(g.year()));
  }
  return jaccard2(g, *u, *v);
}

// ---------------------------------------------------------------------------
// Literature measures
// ---------------------------------------------------------------------------

/// Mention and citation lookups over a bundle.
class LiteratureIndex {
 public:
  explicit LiteratureIndex(const CorpusBundle& bundle) {
    for (const auto& m : bundle.mentions) {
      by_pair_[m.pair].push_back({m.doc_id, m.year});
      auto [it, inserted] = doc_year_.emplace(m.doc_id, m.year);
      if (!inserted) it->second = std::min(it->second, m.year);
    }
    for (const auto& c : bundle.citations) citing_of_[c.cited_doc].push_back(c.citing_doc);
  }

  /// Distinct documents mentioning the pair in years <= horizon.
  std::uint64_t mention_count(const ConceptPair& p, int horizon) const {
    auto it = by_pair_.find(p);
    if (it == by_pair_.end()) return 0;
    std::uint64_t n = 0;
    for (const auto& m : it->second) n += (m.year <= horizon);
    return n;
  }

  /// In-degree of `doc` counting citing documents with year <= horizon;
  /// citing documents of unknown year are counted.
  std::uint64_t citations_of(const std::string& doc, int horizon) const {
    auto it = citing_of_.find(doc);
    if (it == citing_of_.end()) return 0;
    std::uint64_t n = 0;
    for (const auto& citing : it->second) {
      auto y = doc_year_.find(citing);
      n += (y == doc_year_.end() || y->second <= horizon);
    }
    return n;
  }

  /// Σ citations over the documents mentioning the pair up to the horizon.
  std::uint64_t citation_sum(const ConceptPair& p, int horizon) const {
    auto it = by_pair_.find(p);
    if (it == by_pair_.end()) return 0;
    std::uint64_t n = 0;
    for (const auto& m : it->second) {
      if (m.year <= horizon) n += citations_of(m.doc_id, horizon);
    }
    return n;
  }

 private:
  std::map<ConceptPair, std::vector<MentionRef>> by_pair_;
  std::unordered_map<std::string, int> doc_year_;
  std::unordered_map<std::string, std::vector<std::string>> citing_of_;
};

// ---------------------------------------------------------------------------
// Combination
// ---------------------------------------------------------------------------

/// Percentile rank with average-rank ties: rank / n, so the maximum maps to
/// 1.0 and every value lies in (0, 1].
inline std::vector<double> pct_rank(std::span<const double> values) {
  if (values.empty()) throw ValidationError("pct_rank of an empty multiset");
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("pct_rank: non-finite value");
  }
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> out(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    // Ranks i+1 .. j+1 share their average.
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) out[idx[k]] = avg / static_cast<double>(n);
    i = j + 1;
  }
  return out;
}

inline constexpr std::size_t kImportanceComponents = 6;

/// Mean of the six oriented percentile ranks.
inline double combine_ranks(std::span<const double, kImportanceComponents> ranks) {
  double s = 0.0;
  for (double r : ranks) s += r;
  return s / static_cast<double>(kImportanceComponents);
}

/// Raw component values, each aligned with `edges`.
struct ImportanceComponents {
  std::vector<ConceptPair> edges;
  std::vector<double> ig;
  std::vector<double> bc;
  std::vector<double> ec_delta;
  std::vector<double> jc2;
  std::vector<std::uint64_t> mentions;
  std::vector<std::uint64_t> citations;
};

struct ImportanceVector {
  ConceptPair edge;
  double ig = 0;
  double bc = 0;
  double ec_delta = 0;
  double jc2 = 0;
  std::uint64_t mentions = 0;
  std::uint64_t citations = 0;
  double combined = 0;
};

/// I(e) = mean over components of PCTRank. JC2 is negated before ranking
/// (similar neighborhoods mark a trivial edge); every other component ranks
/// larger-is-more-important.
inline std::vector<ImportanceVector> combine_importance(const ImportanceComponents& c) {
  const std::size_t n = c.edges.size();
  auto check = [n](std::size_t size, const char* name) {
    if (size != n) {
      throw ValidationError(std::string("importance component '") + name +
                            "' is missing values for some edges");
    }
  };
  check(c.ig.size(), "ig");
  check(c.bc.size(), "bc");
  check(c.ec_delta.size(), "ec_delta");
  check(c.jc2.size(), "jc2");
  check(c.mentions.size(), "mentions");
  check(c.citations.size(), "citations");
  if (n == 0) return {};

  std::vector<double> neg_jc2(n), ment(n), cit(n);
  for (std::size_t i = 0; i < n; ++i) {
    neg_jc2[i] = -c.jc2[i];
    ment[i] = static_cast<double>(c.mentions[i]);
    cit[i] = static_cast<double>(c.citations[i]);
  }
  const std::array<std::vector<double>, kImportanceComponents> ranks = {
      pct_rank(c.ig), pct_rank(c.bc), pct_rank(c.ec_delta),
      pct_rank(neg_jc2), pct_rank(ment), pct_rank(cit)};

  std::vector<ImportanceVector> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, kImportanceComponents> r;
    for (std::size_t k = 0; k < kImportanceComponents; ++k) r[k] = ranks[k][i];
    out[i] = ImportanceVector{c.edges[i], c.ig[i], c.bc[i], c.ec_delta[i], c.jc2[i],
                              c.mentions[i], c.citations[i], combine_ranks(r)};
  }
  return out;
}

/// Snapshots and lookups needed to score edges discovered at year t.
struct ImportanceContext {
  const SnapshotGraph& before;      // G_{t-1}: JC2
  const SnapshotGraph& current;     // G_t: BC, IG
  const SnapshotGraph& future;      // G_{t+1}: EC delta
  const NewEdgeSet& future_edges;   // Ê_{t+1}, keys in G_t's index space
  const LiteratureIndex& literature;
  int horizon = 0;                  // mentions/citations accumulate through here
  const std::map<ConceptPair, double>& ig;  // attribution of G_t's edges
  EigenvectorOptions eigen{};
};

/// Raw components for `edges` (each an edge of G_t with both endpoints in
/// G_{t-1}).
inline ImportanceComponents importance_components(const ImportanceContext& ctx,
                                                  std::span<const ConceptPair> edges) {
  ImportanceComponents c;
  c.edges.assign(edges.begin(), edges.end());
  const auto targets = ctx.future_edges.endpoints();
  const auto bc_all = edge_betweenness_restricted(ctx.current, targets);
  const auto ec_now = eigenvector_centrality(ctx.current, ctx.eigen);
  const auto ec_next = eigenvector_centrality(ctx.future, ctx.eigen);
  c.ec_delta = edge_ec_delta(ctx.current, ec_now, ctx.future, ec_next, edges);
  for (const auto& p : edges) {
    const auto u = ctx.current.index_of(p.a);
    const auto v = ctx.current.index_of(p.b);
    const auto e = ctx.current.edge_index(u, v);
    if (!e) throw ValidationError("edge " + to_string(p) + " is not in snapshot " +
                                  std::to_string(ctx.current.year()));
    c.bc.push_back(bc_all[*e]);
    auto ig = ctx.ig.find(p);
    if (ig == ctx.ig.end()) {
      throw ValidationError("missing integrated-gradients value for " + to_string(p));
    }
    c.ig.push_back(ig->second);
    c.jc2.push_back(jaccard2(ctx.before, p));
    c.mentions.push_back(ctx.literature.mention_count(p, ctx.horizon));
    c.citations.push_back(ctx.literature.citation_sum(p, ctx.horizon));
  }
  return c;
}

// ---------------------------------------------------------------------------
// importance.tsv
// ---------------------------------------------------------------------------

inline void write_importance(const std::vector<ImportanceVector>& rows,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "a\tb\tig\tbc\tec_delta\tjc2\tmentions\tcitations\tcombined\n";
  for (const auto& r : rows) {
    out << r.edge.a << '\t' << r.edge.b << '\t' << text::format_double(r.ig) << '\t'
        << text::format_double(r.bc) << '\t' << text::format_double(r.ec_delta) << '\t'
        << text::format_double(r.jc2) << '\t' << r.mentions << '\t' << r.citations << '\t'
        << text::format_double(r.combined) << '\n';
  }
}

inline std::vector<ImportanceVector> read_importance(const std::filesystem::path& path) {
  std::vector<ImportanceVector> rows;
  const std::string file = path.string();
  detail::read_tsv(path, 9, 9, [&](const auto& f, std::size_t line) {
    ImportanceVector r;
    r.edge = make_pair(detail::parse_concept(f[0], file, line),
                       detail::parse_concept(f[1], file, line));
    r.ig = detail::parse_double(f[2], file, line, "ig");
    r.bc = detail::parse_double(f[3], file, line, "bc");
    r.ec_delta = detail::parse_double(f[4], file, line, "ec_delta");
    r.jc2 = detail::parse_double(f[5], file, line, "jc2");
    r.mentions = static_cast<std::uint64_t>(std::stoull(f[6]));
    r.citations = static_cast<std::uint64_t>(std::stoull(f[7]));
    r.combined = detail::parse_double(f[8], file, line, "combined");
    rows.push_back(std::move(r));
  });
  return rows;
}

}  // namespace dyport
