// Typed negative sampling, ROC AUC and stratified reports.

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dyport/common.hpp"
#include "dyport/dyngraph.hpp"
#include "dyport/ingest.hpp"

namespace dyport {

/// One positive pair or one sampled negative. `group` is the ordinal of the
/// positive that spawned the record (positives carry their own ordinal).
struct EvalRecord {
  ConceptId subject;
  ConceptId object;
  bool positive = false;
  double score = 0;
  std::vector<std::string> semantic_pairs;  // sorted "TypeA|TypeB" keys
  int test_year = 0;
  std::optional<int> discovery_year;  // positives only
  std::optional<double> importance;   // positives only
  std::size_t group = 0;

  ConceptPair pair() const { return make_pair(subject, object); }
};

/// Every unordered (type of x, type of y) combination, as "A|B" with A <= B.
inline std::vector<std::string> semantic_pair_keys(const NodeMeta& x, const NodeMeta& y) {
  std::set<std::string> keys;
  for (const auto& tx : x.semantic_types) {
    for (const auto& ty : y.semantic_types) {
      keys.insert(tx < ty ? tx + "|" + ty : ty + "|" + tx);
    }
  }
  return {keys.begin(), keys.end()};
}

struct PositivePair {
  ConceptPair pair;  // subject = a, object = b
  int year = 0;
};

/// For each positive (s, o): up to `n` distinct negatives (s, o') with o' in
/// `universe`, o' ∉ {s, o}, o' sharing a semantic type with o, (s, o') not an
/// edge of `known` and not itself a positive. Uniform without replacement.
/// Short candidate pools emit what exists and log a warning. Output order:
/// each positive followed by its negatives.
inline std::vector<EvalRecord> sample_negatives(std::span<const PositivePair> positives,
                                                const CorpusBundle& bundle,
                                                const SnapshotGraph& known,
                                                std::span<const ConceptId> universe,
                                                std::size_t n, std::uint64_t seed,
                                                int test_year) {
  std::map<std::string, std::vector<const NodeMeta*>> by_type;
  for (const auto& id : universe) {
    const auto* meta = bundle.find_node(id);
    if (!meta) throw ValidationError("negative sampling: unknown concept '" + id.str() + "'");
    for (const auto& t : meta->semantic_types) by_type[t].push_back(meta);
  }
  std::set<ConceptPair> positive_set;
  for (const auto& p : positives) positive_set.insert(make_pair(p.pair.a, p.pair.b));

  Rng rng(seed);
  std::vector<EvalRecord> out;
  for (std::size_t g = 0; g < positives.size(); ++g) {
    const auto& pos = positives[g];
    const auto* s = bundle.find_node(pos.pair.a);
    const auto* o = bundle.find_node(pos.pair.b);
    if (!s || !o) throw ValidationError("positive " + to_string(pos.pair) + " has unknown concept");
    const auto keys = semantic_pair_keys(*s, *o);
    out.push_back({s->id, o->id, true, 0.0, keys, test_year, pos.year, std::nullopt, g});

    std::set<std::string> seen;
    std::vector<const NodeMeta*> pool;
    for (const auto& t : o->semantic_types) {
      auto it = by_type.find(t);
      if (it == by_type.end()) continue;
      for (const auto* cand : it->second) {
        if (cand->id == o->id || cand->id == s->id) continue;
        if (!seen.insert(cand->id.str()).second) continue;
        const auto pair = make_pair(s->id, cand->id);
        if (known.has_edge(pair) || positive_set.count(pair)) continue;
        pool.push_back(cand);
      }
    }
    std::sort(pool.begin(), pool.end(),
              [](const NodeMeta* x, const NodeMeta* y) { return x->id < y->id; });
    if (pool.size() < n) {
      log::warn("negative sampling: " + std::to_string(pool.size()) + " candidate(s) for " +
                to_string(pos.pair) + ", wanted " + std::to_string(n));
    }
    rng.partial_shuffle(pool, n);
    pool.resize(std::min(n, pool.size()));
    for (const auto* cand : pool) {
      out.push_back({s->id, cand->id, false, 0.0, keys, test_year, std::nullopt,
                     std::nullopt, g});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// AUC
// ---------------------------------------------------------------------------

enum class TieCredit { none, half };

/// Fraction of (negative, positive) pairs with f(neg) < f(pos). Ties count 0,
/// or ½ with TieCredit::half. O(n log n) via a sorted negative list; the
/// result is an exact integer count divided once, so it matches a double loop
/// bit for bit.
inline double roc_auc(std::span<const double> pos, std::span<const double> neg,
                      TieCredit ties = TieCredit::none) {
  if (pos.empty() || neg.empty()) {
    throw ValidationError("AUC needs at least one positive and one negative");
  }
  std::vector<double> sorted(neg.begin(), neg.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t half_units = 0;  // 2·wins + ties
  for (double p : pos) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), p);
    const auto hi = std::upper_bound(lo, sorted.end(), p);
    half_units += 2 * static_cast<std::uint64_t>(lo - sorted.begin());
    if (ties == TieCredit::half) half_units += static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(half_units) /
         (2.0 * static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

inline double roc_auc(std::span<const EvalRecord> records, TieCredit ties = TieCredit::none) {
  std::vector<double> pos, neg;
  for (const auto& r : records) (r.positive ? pos : neg).push_back(r.score);
  return roc_auc(pos, neg, ties);
}

// ---------------------------------------------------------------------------
// Strata
// ---------------------------------------------------------------------------

struct StratumReport {
  std::string kind;  // global | semantic | importance | temporal
  std::string key;
  double auc = 0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;

  friend bool operator==(const StratumReport&, const StratumReport&) = default;
};

/// AUC for one stratum, or nullopt (with a warning) when a class is missing.
inline std::optional<StratumReport> stratum_report(std::string kind, std::string key,
                                                   std::span<const EvalRecord> records,
                                                   TieCredit ties = TieCredit::none) {
  std::size_t np = 0, nn = 0;
  for (const auto& r : records) (r.positive ? np : nn) += 1;
  if (np == 0 || nn == 0) {
    log::warn(kind + " stratum '" + key + "' lacks " + (np == 0 ? "positives" : "negatives") +
              ", omitted");
    return std::nullopt;
  }
  return StratumReport{std::move(kind), std::move(key), roc_auc(records, ties), np, nn};
}

/// One report per semantic-type pair. Records listing several keys count in
/// each of them.
inline std::vector<StratumReport> stratify_semantic(std::span<const EvalRecord> records,
                                                    TieCredit ties = TieCredit::none) {
  std::map<std::string, std::vector<EvalRecord>> groups;
  for (const auto& r : records) {
    for (const auto& k : r.semantic_pairs) groups[k].push_back(r);
  }
  std::vector<StratumReport> out;
  for (const auto& [key, rs] : groups) {
    if (auto rep = stratum_report("semantic", key, rs, ties)) out.push_back(std::move(*rep));
  }
  return out;
}

inline std::string importance_bin_name(std::size_t bin, std::size_t bins) {
  if (bins == 3) {
    static constexpr const char* names[] = {"low", "medium", "high"};
    return names[bin];
  }
  return "bin" + std::to_string(bin + 1);
}

/// Bin index per positive group: positives ordered by (importance, pair) and
/// cut into `bins` consecutive runs whose sizes differ by at most one, the
/// larger runs first.
inline std::map<std::size_t, std::size_t> importance_bins(std::span<const EvalRecord> records,
                                                          std::size_t bins) {
  if (bins == 0) throw ValidationError("importance bins must be >= 1");
  std::vector<const EvalRecord*> pos;
  for (const auto& r : records) {
    if (!r.positive) continue;
    if (!r.importance) {
      throw ValidationError("positive " + to_string(r.pair()) + " has no importance score");
    }
    pos.push_back(&r);
  }
  if (pos.size() < bins) {
    throw ValidationError("importance stratification: " + std::to_string(pos.size()) +
                          " positives for " + std::to_string(bins) + " bins");
  }
  std::sort(pos.begin(), pos.end(), [](const EvalRecord* x, const EvalRecord* y) {
    if (*x->importance != *y->importance) return *x->importance < *y->importance;
    return x->pair() < y->pair();
  });
  const std::size_t base = pos.size() / bins, extra = pos.size() % bins;
  std::map<std::size_t, std::size_t> out;
  std::size_t i = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k, ++i) out.emplace(pos[i]->group, b);
  }
  return out;
}

/// One report per importance bin; negatives follow their spawning positive.
inline std::vector<StratumReport> stratify_importance(std::span<const EvalRecord> records,
                                                      std::size_t bins,
                                                      TieCredit ties = TieCredit::none) {
  const auto bin_of = importance_bins(records, bins);
  std::vector<std::vector<EvalRecord>> groups(bins);
  for (const auto& r : records) {
    auto it = bin_of.find(r.group);
    if (it == bin_of.end()) {
      throw ValidationError("negative " + to_string(r.pair()) + " has no spawning positive");
    }
    groups[it->second].push_back(r);
  }
  std::vector<StratumReport> out;
  for (std::size_t b = 0; b < bins; ++b) {
    if (auto rep = stratum_report("importance", importance_bin_name(b, bins), groups[b], ties)) {
      out.push_back(std::move(*rep));
    }
  }
  return out;
}

/// One report per test year.
inline std::vector<StratumReport> stratify_temporal(
    const std::map<int, std::vector<EvalRecord>>& by_year, TieCredit ties = TieCredit::none) {
  std::vector<StratumReport> out;
  for (const auto& [year, rs] : by_year) {
    if (rs.empty()) {
      log::warn("test year " + std::to_string(year) + " has no new edges, omitted");
      continue;
    }
    if (auto rep = stratum_report("temporal", std::to_string(year), rs, ties)) {
      out.push_back(std::move(*rep));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Record files
// ---------------------------------------------------------------------------

/// eval_records.tsv: scores are not stored here; they live in per-model
/// score files.
inline void write_records(std::span<const EvalRecord> records,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "test_year\tsubject\tobject\tlabel\tgroup\tdiscovery_year\tsemantic_pairs\timportance\n";
  for (const auto& r : records) {
    out << r.test_year << '\t' << r.subject << '\t' << r.object << '\t'
        << (r.positive ? "positive" : "negative") << '\t' << r.group << '\t'
        << (r.discovery_year ? std::to_string(*r.discovery_year) : "-") << '\t'
        << text::join(r.semantic_pairs, ";") << '\t'
        << (r.importance ? text::format_double(*r.importance) : "-") << '\n';
  }
}

inline std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  std::vector<EvalRecord> out;
  const std::string file = path.string();
  detail::read_tsv(path, 8, 8, [&](const auto& f, std::size_t line) {
    EvalRecord r;
    r.test_year = detail::parse_int(f[0], file, line, "test_year");
    r.subject = detail::parse_concept(f[1], file, line);
    r.object = detail::parse_concept(f[2], file, line);
    if (f[3] != "positive" && f[3] != "negative") {
      throw ParseError(file, line, "label must be positive or negative");
    }
    r.positive = f[3] == "positive";
    r.group = static_cast<std::size_t>(detail::parse_int(f[4], file, line, "group"));
    if (f[5] != "-") r.discovery_year = detail::parse_int(f[5], file, line, "discovery_year");
    if (!f[6].empty()) r.semantic_pairs = text::split(f[6], ';');
    if (f[7] != "-") r.importance = detail::parse_double(f[7], file, line, "importance");
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace dyport
