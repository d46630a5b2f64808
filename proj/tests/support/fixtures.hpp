// Fixture locations and shared fixture setups for tests and the acceptance
// runner.

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "dyport/dyport.hpp"

#ifndef DYPORT_FIXTURE_DIR
#error "DYPORT_FIXTURE_DIR must point at tests/fixtures"
#endif
#ifndef DYPORT_DEMO_DIR
#error "DYPORT_DEMO_DIR must point at demo"
#endif

namespace fixtures {

namespace fs = std::filesystem;

inline fs::path dir(const std::string& name) { return fs::path(DYPORT_FIXTURE_DIR) / name; }
inline fs::path demo_dir() { return fs::path(DYPORT_DEMO_DIR); }

/// Fresh empty directory under the system temp dir.
inline fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("dyport_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

inline void write_text(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

/// Unit-weight graph from an `a <TAB> b` edge list, plus a target list in
/// the same format.
struct PairGraph {
  dyport::SnapshotGraph graph;
  std::vector<dyport::EdgeKey> targets;
};

inline std::vector<std::pair<std::string, std::string>> read_pairs(const fs::path& p) {
  std::vector<std::pair<std::string, std::string>> out;
  dyport::detail::read_tsv(p, 2, 2, [&](const auto& f, std::size_t) { out.emplace_back(f[0], f[1]); });
  return out;
}

inline PairGraph load_pair_graph(const std::string& name) {
  PairGraph pg{dyport::SnapshotGraph::from_pairs(0, read_pairs(dir(name) / "edges.tsv")), {}};
  for (const auto& [a, b] : read_pairs(dir(name) / "targets.tsv")) {
    pg.targets.push_back(dyport::make_key(pg.graph.index_of(dyport::ConceptId(a)),
                                          pg.graph.index_of(dyport::ConceptId(b))));
  }
  return pg;
}

/// Two 6-cliques with 3 cross edges. The GCN learns Ê_2002 from G_2001 and
/// scores on G_2002; the other models fit G_2002. Ê_2003 holds the test
/// positives. Negatives for each
/// positive share its subject and are absent from G_2003, which leaves only
/// cross-cluster pairs.
struct TwoCluster {
  dyport::CorpusBundle bundle;
  dyport::SnapshotGraph g2001, g2002, g2003;
  dyport::NewEdgeSet train_targets;  // keys in G_2001
  std::vector<dyport::EvalRecord> records;
};

inline constexpr std::size_t kTwoClusterNegatives = 4;

inline TwoCluster two_cluster(std::uint64_t seed = 5) {
  TwoCluster tc;
  tc.bundle = dyport::load_corpus_dir(dir("two_cluster"));
  const auto xref = dyport::cross_reference(tc.bundle);
  tc.g2001 = dyport::build_snapshot(xref, 2001);
  tc.g2002 = dyport::build_snapshot(xref, 2002);
  tc.g2003 = dyport::build_snapshot(xref, 2003);
  tc.train_targets = dyport::new_edges(tc.g2001, tc.g2002);
  const auto test = dyport::new_edges(tc.g2002, tc.g2003);
  std::vector<dyport::PositivePair> positives;
  for (const auto& p : test.pairs) positives.push_back({p, 2003});
  const std::vector<dyport::ConceptId> universe(tc.g2002.nodes().begin(), tc.g2002.nodes().end());
  tc.records = dyport::sample_negatives(positives, tc.bundle, tc.g2003, universe,
                                        kTwoClusterNegatives, seed, 2003);
  return tc;
}

/// AUC of a pair scorer over the two-cluster records.
template <class Score>
double two_cluster_auc(const TwoCluster& tc, Score&& score) {
  auto rs = tc.records;
  for (auto& r : rs) r.score = score(r.pair());
  return dyport::roc_auc(rs);
}

}  // namespace fixtures
