#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace dyport;

namespace {

ConceptPair P(const char* a, const char* b) { return make_pair(ConceptId(a), ConceptId(b)); }

}  // namespace

TEST(Betweenness, PathAndCycle) {
  const auto path = SnapshotGraph::from_pairs(0, {{"a", "b"}, {"b", "c"}});
  for (double x : edge_betweenness(path)) EXPECT_DOUBLE_EQ(x, 2.0);
  const auto c4 = SnapshotGraph::from_pairs(0, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "a"}});
  for (double x : edge_betweenness(c4)) EXPECT_DOUBLE_EQ(x, 2.0);
}

TEST(Betweenness, SingleTargetIsZero) {
  const auto path = SnapshotGraph::from_pairs(0, {{"a", "b"}, {"b", "c"}});
  const std::vector<NodeIndex> t{1};
  for (double x : edge_betweenness_restricted(path, t)) EXPECT_EQ(x, 0.0);
  log::ScopedCapture cap;
  for (double x : edge_betweenness_restricted(path, {})) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(cap.warnings().size(), 1u);
}

TEST(Betweenness, RestrictedEndpointsOnly) {
  // Path a-b-c-d with targets {a, c}: only edges a-b and b-c carry the pair.
  const auto g = SnapshotGraph::from_pairs(0, {{"a", "b"}, {"b", "c"}, {"c", "d"}});
  const std::vector<NodeIndex> t{0, 2};
  const auto bc = edge_betweenness_restricted(g, t);
  EXPECT_DOUBLE_EQ(bc[*g.edge_index(0, 1)], 1.0);
  EXPECT_DOUBLE_EQ(bc[*g.edge_index(1, 2)], 1.0);
  EXPECT_DOUBLE_EQ(bc[*g.edge_index(2, 3)], 0.0);
}

TEST(Betweenness, MatchesPathEnumeration) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = oracle::random_graph(9, 0.3, rng, true);
    std::vector<NodeIndex> targets;
    for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
      if (rng.uniform() < 0.6) targets.push_back(v);
    }
    const auto got = edge_betweenness_restricted(g, targets);
    const auto want = oracle::brute_force_betweenness(g, targets);
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-9);
  }
}

TEST(Eigenvector, StarAndEdge) {
  const auto star = SnapshotGraph::from_pairs(0, {{"h", "x"}, {"h", "y"}, {"h", "z"}});
  const auto c = eigenvector_centrality(star);
  EXPECT_NEAR(c[0], 0.70711, 1e-5);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(c[i], 0.40825, 1e-5);
  const auto e = eigenvector_centrality(SnapshotGraph::from_pairs(0, {{"a", "b"}}));
  EXPECT_NEAR(e[0], std::sqrt(0.5), 1e-7);
  EXPECT_NEAR(e[1], std::sqrt(0.5), 1e-7);
}

TEST(Eigenvector, CycleIsUniform) {
  const auto c6 = SnapshotGraph::from_pairs(
      0, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "e"}, {"e", "f"}, {"f", "a"}});
  for (double x : eigenvector_centrality(c6)) EXPECT_NEAR(x, 1.0 / std::sqrt(6.0), 1e-7);
}

TEST(Eigenvector, PerComponentNormalization) {
  const auto g = SnapshotGraph::from_pairs(0, {{"a", "b"}, {"c", "d"}, {"d", "e"}}, {"iso"});
  const auto c = eigenvector_centrality(g);
  for (const auto& comp : connected_components(g)) {
    double s = 0;
    for (auto v : comp) s += c[v] * c[v];
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  EXPECT_DOUBLE_EQ(c[g.index_of(ConceptId("iso"))], 1.0);
}

TEST(Eigenvector, MatchesDenseSolver) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = oracle::random_connected_graph(10, 0.25, rng);
    const auto got = eigenvector_centrality(g, {1e-12, 100000});
    const auto want = oracle::dense_eigenvector(g);
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-6);
  }
}

TEST(Eigenvector, IterationCapRaises) {
  const auto g = SnapshotGraph::from_pairs(0, {{"a", "b"}, {"b", "c"}, {"c", "d"}});
  EXPECT_THROW(eigenvector_centrality(g, {1e-15, 2}), ConvergenceError);
  EXPECT_THROW(eigenvector_centrality(SnapshotGraph{}), ValidationError);
}

TEST(EcDelta, IdentityIsZero) {
  const auto g = SnapshotGraph::from_pairs(0, {{"a", "b"}, {"b", "c"}, {"c", "d"}});
  const std::vector<ConceptPair> ps{P("a", "b"), P("c", "d")};
  for (double x : edge_ec_delta(g, g, ps)) EXPECT_EQ(x, 0.0);
}

TEST(EcDelta, VertexTransitiveGapIsZero) {
  const auto k4 = SnapshotGraph::from_pairs(
      0, {{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}, {"c", "d"}});
  const auto c = eigenvector_centrality(k4);
  for (const auto& e : k4.edges()) EXPECT_NEAR(edge_centrality_gap(c, e.u, e.v), 0.0, 1e-9);
}

TEST(EcDelta, PathToStarMatchesOracle) {
  const auto path = SnapshotGraph::from_pairs(1, {{"a", "b"}, {"b", "c"}, {"c", "d"}});
  const auto star = SnapshotGraph::from_pairs(2, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"b", "d"}});
  const std::vector<ConceptPair> ps{P("a", "b")};
  const auto c0 = oracle::dense_eigenvector(path);
  const auto c1 = oracle::dense_eigenvector(star);
  const double want = std::abs(c1[star.index_of(ConceptId("a"))] - c1[star.index_of(ConceptId("b"))]) -
                      std::abs(c0[path.index_of(ConceptId("a"))] - c0[path.index_of(ConceptId("b"))]);
  EXPECT_NEAR(edge_ec_delta(path, star, ps, {1e-13, 100000})[0], want, 1e-7);
}

TEST(EcDelta, MissingEndpointRaises) {
  const auto g = SnapshotGraph::from_pairs(0, {{"a", "b"}});
  const auto h = SnapshotGraph::from_pairs(0, {{"a", "c"}});
  const std::vector<ConceptPair> ps{P("a", "b")};
  EXPECT_THROW(edge_ec_delta(g, h, ps), Error);
}

TEST(Jaccard2, Examples) {
  const auto path = SnapshotGraph::from_pairs(0, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "e"}});
  EXPECT_DOUBLE_EQ(jaccard2(path, P("a", "c")), 2.0 / 3.0);
  const auto star = SnapshotGraph::from_pairs(0, {{"h", "x"}, {"h", "y"}}, {"iso", "iso2"});
  EXPECT_DOUBLE_EQ(jaccard2(star, P("x", "y")), 1.0);
  EXPECT_DOUBLE_EQ(jaccard2(star, P("iso", "iso2")), 0.0);
  EXPECT_DOUBLE_EQ(jaccard2(star, P("h", "iso")), 0.0);
  EXPECT_THROW(jaccard2(star, P("h", "nowhere")), ValidationError);
}

TEST(Literature, MentionsAndCitations) {
  const LiteratureIndex lit(load_corpus_dir(fixtures::dir("small")));
  EXPECT_EQ(lit.mention_count(P("C001", "C002"), 2002), 2u);
  EXPECT_EQ(lit.mention_count(P("C001", "C002"), 2005), 3u);
  EXPECT_EQ(lit.mention_count(P("C004", "C005"), 2005), 0u);
  // d1 <- d4, d5; d2 <- d3, d4; d3 <- d5.
  EXPECT_EQ(lit.citation_sum(P("C001", "C002"), 2005), 5u);
  // Through 2002 only d5 is old enough to count, and only d1 is mentioned.
  EXPECT_EQ(lit.citation_sum(P("C001", "C002"), 2002), 1u);
  // d2 <- d3, d4; d4 is uncited.
  EXPECT_EQ(lit.citation_sum(P("C002", "C003"), 2005), 2u);
}

TEST(PctRank, Examples) {
  const std::vector<double> v{10, 20, 20, 30};
  EXPECT_EQ(pct_rank(v), (std::vector<double>{0.25, 0.625, 0.625, 1.0}));
  const std::vector<double> same{3, 3, 3};
  for (double r : pct_rank(same)) EXPECT_DOUBLE_EQ(r, 2.0 / 3.0);
  const std::vector<double> one{-7};
  EXPECT_EQ(pct_rank(one), std::vector<double>{1.0});
  EXPECT_THROW(pct_rank(std::vector<double>{}), ValidationError);
  EXPECT_THROW(pct_rank(std::vector<double>{1, NAN}), ValidationError);
}

TEST(Combine, MeanOfRanks) {
  const std::array<double, 6> r{1, 1, 1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(combine_ranks(r), 1.0);
  const std::array<double, 6> s{0.25, 0.5, 0.75, 1, 0.5, 0};
  EXPECT_DOUBLE_EQ(combine_ranks(s), 0.5);
}

namespace {

ImportanceComponents random_components(Rng& rng, std::size_t n) {
  ImportanceComponents c;
  for (std::size_t i = 0; i < n; ++i) {
    c.edges.push_back(P(("a" + std::to_string(i)).c_str(), ("b" + std::to_string(i)).c_str()));
    c.ig.push_back(rng.uniform());
    c.bc.push_back(static_cast<double>(rng.below(5)));
    c.ec_delta.push_back(rng.uniform(-1, 1));
    c.jc2.push_back(rng.uniform());
    c.mentions.push_back(rng.below(10));
    c.citations.push_back(rng.below(10));
  }
  return c;
}

}  // namespace

TEST(Combine, BoundedAndRescaleInvariant) {
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    auto c = random_components(rng, 1 + rng.below(30));
    const auto base = combine_importance(c);
    for (const auto& v : base) {
      ASSERT_GT(v.combined, 0.0);
      ASSERT_LE(v.combined, 1.0);
    }
    for (auto& x : c.ig) x *= 1000;
    for (auto& x : c.bc) x = 3 * x + 1;
    for (auto& x : c.ec_delta) x *= 0.01;
    const auto scaled = combine_importance(c);
    for (std::size_t i = 0; i < base.size(); ++i) ASSERT_EQ(base[i].combined, scaled[i].combined);
  }
}

TEST(Combine, Jc2RanksInverted) {
  ImportanceComponents c;
  c.edges = {P("a", "b"), P("c", "d")};
  c.ig = {0, 0};
  c.bc = {0, 0};
  c.ec_delta = {0, 0};
  c.jc2 = {0.1, 0.9};
  c.mentions = {0, 0};
  c.citations = {0, 0};
  const auto v = combine_importance(c);
  EXPECT_GT(v[0].combined, v[1].combined);
}

TEST(Combine, MissingComponentRaises) {
  Rng rng(1);
  auto c = random_components(rng, 4);
  c.citations.pop_back();
  EXPECT_THROW(combine_importance(c), ValidationError);
}

TEST(Combine, ImportanceFileRoundTrip) {
  Rng rng(2);
  const auto rows = combine_importance(random_components(rng, 7));
  const auto d = fixtures::temp_dir("importance_rt");
  write_importance(rows, d / "i.tsv");
  const auto back = read_importance(d / "i.tsv");
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].edge, rows[i].edge);
    EXPECT_EQ(back[i].ig, rows[i].ig);
    EXPECT_EQ(back[i].ec_delta, rows[i].ec_delta);
    EXPECT_EQ(back[i].combined, rows[i].combined);
  }
}
