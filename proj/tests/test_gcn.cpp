#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace dyport;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-1, 1);
  }
  return m;
}

}  // namespace

TEST(GcnForward, IsolatedNodeKeepsOwnFeatures) {
  // A single isolated node: S = [1], so Z = relu(X W1) W2.
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 1);
  Rng rng(1);
  const auto m = init_gcn(3, 4, 2, 9);
  const Eigen::MatrixXd x = random_matrix(1, 3, rng);
  const Eigen::MatrixXd want = (x * m.w1).cwiseMax(0.0) * m.w2;
  EXPECT_LT((gcn_forward(a, x, m) - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GcnForward, ZeroFeaturesGiveZeroEmbeddings) {
  const auto g = SnapshotGraph::from_pairs(0, {{"a", "b"}, {"b", "c"}});
  const auto m = init_gcn(2, 4, 3, 1);
  EXPECT_EQ(gcn_forward(dense_adjacency(g, true), Eigen::MatrixXd::Zero(3, 2), m).cwiseAbs().maxCoeff(),
            0.0);
}

TEST(GcnForward, MatchesLoopImplementation) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto g = oracle::random_graph(3 + rng.below(6), 0.4, rng, true);
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    const auto m = init_gcn(4, 5, 3, static_cast<std::uint64_t>(t));
    const Eigen::MatrixXd x = random_matrix(n, 4, rng);
    const Eigen::MatrixXd a = dense_adjacency(g, true);
    ASSERT_LT((gcn_forward(a, x, m) - oracle::loop_gcn(a, x, m.w1, m.w2)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GcnForward, DecodeIsInnerProduct) {
  Eigen::MatrixXd z(3, 2);
  z << 1, 2, 3, 4, -1, 0.5;
  EXPECT_DOUBLE_EQ(decode(z, 0, 1), 11.0);
  EXPECT_DOUBLE_EQ(decode(z, 1, 2), -1.0);
  EXPECT_DOUBLE_EQ(decode(z, 0, 0), 5.0);
}

TEST(GcnForward, DimensionMismatchRaises) {
  const auto m = init_gcn(3, 4, 2, 0);
  EXPECT_THROW(gcn_forward(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 4), m), ValidationError);
  EXPECT_THROW(gcn_forward(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3), m), ValidationError);
  EXPECT_THROW(init_gcn(0, 4, 2, 0), ValidationError);
}

TEST(GcnGradient, MatchesFiniteDifferences) {
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto g = oracle::random_connected_graph(4 + rng.below(5), 0.3, rng);
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    const auto m = init_gcn(3, 6, 4, static_cast<std::uint64_t>(100 + t));
    const Eigen::MatrixXd x = random_matrix(n, 3, rng);
    const auto r = oracle::finite_difference_check(dense_adjacency(g, true), x, m, make_key(0, 1));
    EXPECT_LE(r.max_rel_error, 1e-4);
    EXPECT_GT(r.checked, r.skipped);
  }
}

TEST(GcnGradient, WeightGradientsMatchFiniteDifferences) {
  Rng rng(4);
  const auto g = oracle::random_connected_graph(6, 0.3, rng);
  const Eigen::MatrixXd a = dense_adjacency(g, true);
  const Eigen::MatrixXd x = random_matrix(6, 3, rng);
  auto m = init_gcn(3, 5, 2, 8);
  const std::vector<EdgeKey> pairs{make_key(0, 1), make_key(2, 4)};
  const std::vector<double> labels{1, 0};
  Eigen::MatrixXd dz;
  const auto act = gcn_activations(a, x, m);
  link_loss(act.z, pairs, labels, &dz);
  const auto grads = weight_gradients(act, x, m, dz);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < m.w2.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.w2.cols(); ++j) {
      auto mp = m, mm = m;
      mp.w2(i, j) += h;
      mm.w2(i, j) -= h;
      const double fd = (link_loss(gcn_forward(a, x, mp), pairs, labels, nullptr) -
                         link_loss(gcn_forward(a, x, mm), pairs, labels, nullptr)) /
                        (2 * h);
      EXPECT_NEAR(fd, grads.w2(i, j), 1e-7);
    }
  }
}

TEST(GcnTraining, ZeroEpochsKeepsInitialization) {
  const auto tc = fixtures::two_cluster();
  const Eigen::MatrixXd x = to_matrix(synth_features(tc.g2001, 4, 1));
  GcnConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 11;
  const auto m = train_link_predictor(tc.g2001, x, tc.train_targets.keys, cfg);
  const auto init = init_gcn(4, cfg.hidden, cfg.out, 11);
  EXPECT_EQ(m.w1, init.w1);
  EXPECT_EQ(m.w2, init.w2);
  EXPECT_EQ(m.loss_trace.size(), 1u);
}

TEST(GcnTraining, DeterministicAndLossDecreases) {
  const auto tc = fixtures::two_cluster();
  const Eigen::MatrixXd x = to_matrix(synth_features(tc.g2001, 4, 1));
  GcnConfig cfg;
  cfg.epochs = 100;
  cfg.seed = 3;
  const auto a = train_link_predictor(tc.g2001, x, tc.train_targets.keys, cfg);
  const auto b = train_link_predictor(tc.g2001, x, tc.train_targets.keys, cfg);
  EXPECT_EQ(a.w1, b.w1);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  ASSERT_EQ(a.loss_trace.size(), 101u);
  EXPECT_LT(a.loss_trace.back(), a.loss_trace.front());
}

TEST(GcnTraining, RejectsBadTargets) {
  const auto g = SnapshotGraph::from_pairs(0, {{"a", "b"}});
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 1);
  EXPECT_THROW(train_link_predictor(g, x, {}, GcnConfig{}), ValidationError);
  const std::vector<EdgeKey> bad{make_key(0, 5)};
  EXPECT_THROW(train_link_predictor(g, x, bad, GcnConfig{}), ValidationError);
}

TEST(GcnCheckpoint, RoundTripIsExact) {
  auto m = init_gcn(3, 4, 2, 77);
  m.loss_trace = {0.7, 0.5};
  const auto d = fixtures::temp_dir("gcn_ckpt");
  save_gcn(m, d / "m.json");
  const auto back = load_gcn(d / "m.json");
  EXPECT_EQ(back.w1, m.w1);
  EXPECT_EQ(back.w2, m.w2);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.loss_trace, m.loss_trace);
  fixtures::write_text(d / "bad.json", "{\"format\": \"dyport-gcn\", \"version\": 2}");
  EXPECT_THROW(load_gcn(d / "bad.json"), SchemaVersionError);
}
