#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace dyport;

namespace {

ConceptPair P(const char* a, const char* b) { return make_pair(ConceptId(a), ConceptId(b)); }

CorpusBundle typed_bundle(const std::vector<std::pair<std::string, std::vector<std::string>>>& nodes) {
  CorpusBundle b;
  for (const auto& [id, types] : nodes) b.nodes.push_back({ConceptId(id), types, std::nullopt});
  std::sort(b.nodes.begin(), b.nodes.end(),
            [](const NodeMeta& x, const NodeMeta& y) { return x.id < y.id; });
  return b;
}

std::vector<ConceptId> ids(std::initializer_list<const char*> xs) {
  std::vector<ConceptId> out;
  for (auto x : xs) out.emplace_back(x);
  return out;
}

EvalRecord rec(bool positive, double score, std::size_t group, std::vector<std::string> keys = {},
               std::optional<double> importance = std::nullopt) {
  EvalRecord r;
  r.subject = ConceptId("s" + std::to_string(group));
  r.object = ConceptId(std::string(positive ? "p" : "n") + std::to_string(group) + "_" +
                       std::to_string(static_cast<int>(score * 1000)));
  r.positive = positive;
  r.score = score;
  r.group = group;
  r.semantic_pairs = std::move(keys);
  r.importance = importance;
  r.test_year = 2000;
  return r;
}

}  // namespace

TEST(Auc, Examples) {
  const std::vector<double> pos{0.9, 0.8}, neg{0.1, 0.2};
  EXPECT_EQ(roc_auc(pos, neg), 1.0);
  EXPECT_EQ(roc_auc(neg, pos), 0.0);
  const std::vector<double> p1{0.5}, n1{0.5};
  EXPECT_EQ(roc_auc(p1, n1), 0.0);
  EXPECT_EQ(roc_auc(p1, n1, TieCredit::half), 0.5);
  const std::vector<double> p2{0.3, 0.7}, n2{0.5};
  EXPECT_EQ(roc_auc(p2, n2), 0.5);
  EXPECT_THROW(roc_auc(std::span<const double>{}, n1), ValidationError);
  EXPECT_THROW(roc_auc(p1, std::span<const double>{}), ValidationError);
}

TEST(Auc, EqualsDoubleLoopExactly) {
  Rng rng(10);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> pos(1 + rng.below(40)), neg(1 + rng.below(40));
    // Coarse values force ties.
    for (auto& x : pos) x = static_cast<double>(rng.below(8)) / 4.0;
    for (auto& x : neg) x = static_cast<double>(rng.below(8)) / 4.0;
    ASSERT_EQ(roc_auc(pos, neg), oracle::double_loop_auc(pos, neg));
    ASSERT_EQ(roc_auc(pos, neg, TieCredit::half), oracle::double_loop_auc(pos, neg, true));
  }
}

TEST(Auc, RandomScoresNearHalf) {
  Rng rng(11);
  std::vector<double> pos(2000), neg(2000);
  for (auto& x : pos) x = rng.uniform();
  for (auto& x : neg) x = rng.uniform();
  const double auc = roc_auc(pos, neg);
  EXPECT_GE(auc, 0.4);
  EXPECT_LE(auc, 0.6);
}

TEST(Negatives, ExactCandidateSet) {
  // s-o is the positive; o1, o2 share o's type; x has another type; k is
  // already linked to s.
  const auto b = typed_bundle({{"s", {"S"}}, {"o", {"T"}}, {"o1", {"T"}}, {"o2", {"T", "U"}},
                               {"x", {"U"}}, {"k", {"T"}}});
  const auto known = SnapshotGraph::from_pairs(2000, {{"s", "k"}}, {"o", "o1", "o2", "x"});
  const std::vector<PositivePair> pos{{P("o", "s"), 2001}};
  // make_pair puts "o" first; use explicit subject/object order instead.
  const std::vector<PositivePair> ordered{{ConceptPair{ConceptId("o"), ConceptId("s")}, 2001}};
  (void)pos;
  const auto universe = ids({"s", "o", "o1", "o2", "x", "k"});
  const auto rs = sample_negatives(ordered, b, known, universe, 10, 1, 2001);
  // Subject is "o", object "s" of type S: no other S nodes.
  ASSERT_EQ(rs.size(), 1u);

  const std::vector<PositivePair> sp{{ConceptPair{ConceptId("s"), ConceptId("o")}, 2001}};
  log::ScopedCapture cap;
  const auto rs2 = sample_negatives(sp, b, known, universe, 10, 1, 2001);
  ASSERT_EQ(rs2.size(), 3u);
  EXPECT_TRUE(rs2[0].positive);
  std::set<std::string> objs;
  for (std::size_t i = 1; i < rs2.size(); ++i) {
    EXPECT_FALSE(rs2[i].positive);
    EXPECT_EQ(rs2[i].subject.str(), "s");
    EXPECT_EQ(rs2[i].group, 0u);
    objs.insert(rs2[i].object.str());
  }
  EXPECT_EQ(objs, (std::set<std::string>{"o1", "o2"}));
  EXPECT_EQ(cap.warnings().size(), 1u);
}

TEST(Negatives, ShortPoolWarns) {
  const auto b = typed_bundle({{"s", {"S"}}, {"o", {"T"}}, {"o1", {"T"}}});
  const auto known = SnapshotGraph::from_pairs(2000, {}, {"s", "o", "o1"});
  const std::vector<PositivePair> sp{{ConceptPair{ConceptId("s"), ConceptId("o")}, 2001}};
  log::ScopedCapture cap;
  const auto rs = sample_negatives(sp, b, known, ids({"s", "o", "o1"}), 5, 1, 2001);
  EXPECT_EQ(rs.size(), 2u);
  ASSERT_EQ(cap.warnings().size(), 1u);
  EXPECT_NE(cap.warnings()[0].find("1 candidate"), std::string::npos);
}

TEST(Negatives, OtherPositivesExcludedAndDeterministic) {
  const auto b = typed_bundle({{"s", {"S"}}, {"o", {"T"}}, {"o1", {"T"}}, {"o2", {"T"}}, {"o3", {"T"}}});
  const auto known = SnapshotGraph::from_pairs(2000, {}, {"s", "o", "o1", "o2", "o3"});
  const std::vector<PositivePair> sp{{ConceptPair{ConceptId("s"), ConceptId("o")}, 2001},
                                     {ConceptPair{ConceptId("s"), ConceptId("o1")}, 2001}};
  const auto u = ids({"s", "o", "o1", "o2", "o3"});
  const auto a = sample_negatives(sp, b, known, u, 2, 9, 2001);
  const auto c = sample_negatives(sp, b, known, u, 2, 9, 2001);
  ASSERT_EQ(a.size(), c.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].pair(), c[i].pair());
  for (const auto& r : a) {
    if (!r.positive) {
      EXPECT_NE(r.object.str(), "o");
      EXPECT_NE(r.object.str(), "o1");
    }
  }
}

TEST(Strata, SemanticKeysAndSplit) {
  const NodeMeta x{ConceptId("x"), {"B", "A"}, std::nullopt};
  const NodeMeta y{ConceptId("y"), {"A"}, std::nullopt};
  EXPECT_EQ(semantic_pair_keys(x, y), (std::vector<std::string>{"A|A", "A|B"}));
  std::vector<EvalRecord> rs{rec(true, 0.9, 0, {"A|A"}), rec(false, 0.1, 0, {"A|A"}),
                             rec(true, 0.2, 1, {"A|B"}), rec(false, 0.5, 1, {"A|B"}),
                             rec(true, 0.6, 2, {"A|C"})};
  log::ScopedCapture cap;
  const auto s = stratify_semantic(rs);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].key, "A|A");
  EXPECT_EQ(s[0].auc, 1.0);
  EXPECT_EQ(s[1].auc, 0.0);
  EXPECT_EQ(cap.warnings().size(), 1u);  // A|C has no negative
}

namespace {

std::vector<EvalRecord> importance_records(std::size_t positives, Rng& rng) {
  std::vector<EvalRecord> rs;
  for (std::size_t g = 0; g < positives; ++g) {
    rs.push_back(rec(true, rng.uniform(), g, {}, rng.uniform()));
    for (int k = 0; k < 2; ++k) rs.push_back(rec(false, rng.uniform(), g));
  }
  return rs;
}

}  // namespace

TEST(Strata, ImportanceBinSizes) {
  Rng rng(3);
  for (std::size_t n : {9u, 10u, 11u}) {
    const auto rs = importance_records(n, rng);
    const auto bins = importance_bins(rs, 3);
    std::vector<std::size_t> size(3, 0);
    for (const auto& [g, b] : bins) ++size[b];
    EXPECT_EQ(bins.size(), n);
    EXPECT_LE(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()), 1u);
    EXPECT_GE(size[0], size[2]);
  }
}

TEST(Strata, ImportanceBinsOrderedByScore) {
  Rng rng(4);
  const auto rs = importance_records(12, rng);
  const auto bins = importance_bins(rs, 3);
  for (const auto& a : rs) {
    for (const auto& b : rs) {
      if (a.positive && b.positive && *a.importance < *b.importance) {
        EXPECT_LE(bins.at(a.group), bins.at(b.group));
      }
    }
  }
  const auto rep = stratify_importance(rs, 3);
  ASSERT_EQ(rep.size(), 3u);
  EXPECT_EQ(rep[0].key, "low");
  EXPECT_EQ(rep[2].key, "high");
  EXPECT_EQ(rep[0].n_neg, 2 * rep[0].n_pos);
}

TEST(Strata, SingleBinEqualsGlobal) {
  Rng rng(5);
  const auto rs = importance_records(7, rng);
  const auto rep = stratify_importance(rs, 1);
  ASSERT_EQ(rep.size(), 1u);
  EXPECT_EQ(rep[0].key, "bin1");
  EXPECT_EQ(rep[0].auc, roc_auc(rs));
}

TEST(Strata, TooFewPositivesRaises) {
  Rng rng(6);
  const auto rs = importance_records(2, rng);
  EXPECT_THROW(importance_bins(rs, 3), ValidationError);
  auto missing = rs;
  missing[0].importance.reset();
  EXPECT_THROW(importance_bins(missing, 1), ValidationError);
}

TEST(Strata, TemporalOmitsEmptyYears) {
  std::map<int, std::vector<EvalRecord>> by_year;
  by_year[2001] = {rec(true, 0.9, 0), rec(false, 0.1, 0)};
  by_year[2002] = {};
  by_year[2003] = {rec(true, 0.1, 0), rec(false, 0.9, 0)};
  log::ScopedCapture cap;
  const auto t = stratify_temporal(by_year);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].key, "2001");
  EXPECT_EQ(t[1].auc, 0.0);
  EXPECT_EQ(cap.warnings().size(), 1u);
}

TEST(Records, RoundTrip) {
  std::vector<EvalRecord> rs{rec(true, 0, 0, {"A|B", "B|C"}, 1.0 / 3.0), rec(false, 0, 0, {"A|B", "B|C"})};
  rs[0].discovery_year = 2004;
  const auto d = fixtures::temp_dir("records_rt");
  write_records(rs, d / "r.tsv");
  const auto back = read_records(d / "r.tsv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].pair(), rs[0].pair());
  EXPECT_TRUE(back[0].positive);
  EXPECT_EQ(back[0].discovery_year, 2004);
  EXPECT_EQ(back[0].importance, 1.0 / 3.0);
  EXPECT_EQ(back[0].semantic_pairs, rs[0].semantic_pairs);
  EXPECT_FALSE(back[1].importance.has_value());
  EXPECT_FALSE(back[1].positive);
}
