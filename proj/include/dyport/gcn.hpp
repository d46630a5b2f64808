// Two-layer graph-convolutional encoder with a dot-product decoder, explicit
// reverse-mode gradients, and full-batch link-prediction training.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dyport/common.hpp"
#include "dyport/dyngraph.hpp"

namespace dyport {

struct GcnConfig {
  std::size_t hidden = 32;
  std::size_t out = 16;
  int epochs = 200;
  double learning_rate = 0.01;
  std::size_t neg_ratio = 1;
  std::uint64_t seed = 0;
};

struct GcnModel {
  Eigen::MatrixXd w1;  // in x hidden
  Eigen::MatrixXd w2;  // hidden x out
  std::uint64_t seed = 0;
  std::vector<double> loss_trace;

  Eigen::Index in_dim() const { return w1.rows(); }
  Eigen::Index hidden_dim() const { return w1.cols(); }
  Eigen::Index out_dim() const { return w2.cols(); }
};

/// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)) from `seed`.
inline GcnModel init_gcn(std::size_t in_dim, std::size_t hidden, std::size_t out,
                         std::uint64_t seed) {
  if (in_dim == 0 || hidden == 0 || out == 0) {
    throw ValidationError("GCN dimensions must be positive");
  }
  auto glorot = [](std::size_t rows, std::size_t cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-limit, limit);
    }
    return w;
  };
  Rng rng(derive_seed(seed, "gcn-init"));
  GcnModel m;
  m.w1 = glorot(in_dim, hidden, rng);
  m.w2 = glorot(hidden, out, rng);
  m.seed = seed;
  return m;
}

/// Dense symmetric adjacency with zero diagonal. Binary entries unless
/// `weighted`, in which case entries are mention counts.
inline Eigen::MatrixXd dense_adjacency(const SnapshotGraph& g, bool weighted) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    const double w = weighted ? static_cast<double>(e.weight) : 1.0;
    a(e.u, e.v) = w;
    a(e.v, e.u) = w;
  }
  return a;
}

inline Eigen::MatrixXd to_matrix(const FeatureMatrix& f) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(f.rows()), static_cast<Eigen::Index>(f.dim));
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (std::size_t k = 0; k < f.dim; ++k) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = f.values[i * f.dim + k];
    }
  }
  return x;
}

/// Intermediate values of one forward pass, kept for backpropagation.
///   S = D̃^{-1/2} (A + I) D̃^{-1/2},  D̃ = rowsum(A + I)
///   Q = X W1,  H = S Q,  R = max(H, 0),  P = R W2,  Z = S P
struct GcnActivations {
  Eigen::MatrixXd a_tilde;
  Eigen::VectorXd inv_sqrt_deg;
  Eigen::MatrixXd s;
  Eigen::MatrixXd q;
  Eigen::MatrixXd h;
  Eigen::MatrixXd r;
  Eigen::MatrixXd p;
  Eigen::MatrixXd z;
};

inline GcnActivations gcn_activations(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x,
                                      const GcnModel& model) {
  if (a.rows() != a.cols()) throw ValidationError("adjacency must be square");
  if (x.rows() != a.rows()) {
    throw ValidationError("feature rows (" + std::to_string(x.rows()) +
                          ") do not match node count (" + std::to_string(a.rows()) + ")");
  }
  if (x.cols() != model.in_dim()) {
    throw ValidationError("feature dimension " + std::to_string(x.cols()) +
                          " does not match model input dimension " +
                          std::to_string(model.in_dim()));
  }
  GcnActivations act;
  act.a_tilde = a;
  act.a_tilde.diagonal().array() += 1.0;
  const Eigen::VectorXd deg = act.a_tilde.rowwise().sum();
  act.inv_sqrt_deg = deg.array().rsqrt();
  act.s = act.inv_sqrt_deg.asDiagonal() * act.a_tilde * act.inv_sqrt_deg.asDiagonal();
  act.q = x * model.w1;
  act.h = act.s * act.q;
  act.r = act.h.cwiseMax(0.0);
  act.p = act.r * model.w2;
  act.z = act.s * act.p;
  return act;
}

/// Node embeddings Z.
inline Eigen::MatrixXd gcn_forward(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x,
                                   const GcnModel& model) {
  return gcn_activations(a, x, model).z;
}

/// Σ_k Z[i,k] Z[j,k].
inline double decode(const Eigen::MatrixXd& z, Eigen::Index i, Eigen::Index j) {
  return z.row(i).dot(z.row(j));
}

/// Upstream gradient of decode(Z, i, j) with respect to Z.
inline Eigen::MatrixXd decode_gradient(const Eigen::MatrixXd& z, Eigen::Index i,
                                       Eigen::Index j) {
  Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(z.rows(), z.cols());
  dz.row(i) += z.row(j);
  dz.row(j) += z.row(i);
  return dz;
}

/// Backpropagates dL/dZ to dL/dA, treating every entry of A as an independent
/// input (the degree of row a is Σ_b Ã_ab).
inline Eigen::MatrixXd adjacency_gradient(const GcnActivations& act, const GcnModel& model,
                                          const Eigen::MatrixXd& dz) {
  // Z = S P
  Eigen::MatrixXd ds = dz * act.p.transpose();
  const Eigen::MatrixXd dp = act.s.transpose() * dz;
  // P = R W2, R = relu(H)
  Eigen::MatrixXd dh = dp * model.w2.transpose();
  dh.array() *= (act.h.array() > 0.0).cast<double>();
  // H = S Q
  ds.noalias() += dh * act.q.transpose();

  // S_xy = Ã_xy r_x r_y with r = deg^{-1/2}.
  const Eigen::VectorXd& r = act.inv_sqrt_deg;
  const Eigen::MatrixXd weighted = ds.cwiseProduct(act.a_tilde);
  const Eigen::VectorXd dr = weighted * r + weighted.transpose() * r;
  const Eigen::VectorXd ddeg = dr.cwiseProduct(r.cwiseProduct(r).cwiseProduct(r)) * -0.5;

  Eigen::MatrixXd da = ds.cwiseProduct(r * r.transpose());
  da.colwise() += ddeg;
  return da;
}

struct GcnGradients {
  Eigen::MatrixXd w1;
  Eigen::MatrixXd w2;
};

/// Backpropagates dL/dZ to the layer weights.
inline GcnGradients weight_gradients(const GcnActivations& act, const Eigen::MatrixXd& x,
                                     const GcnModel& model, const Eigen::MatrixXd& dz) {
  const Eigen::MatrixXd dp = act.s.transpose() * dz;
  GcnGradients g;
  g.w2 = act.r.transpose() * dp;
  Eigen::MatrixXd dh = dp * model.w2.transpose();
  dh.array() *= (act.h.array() > 0.0).cast<double>();
  const Eigen::MatrixXd dq = act.s.transpose() * dh;
  g.w1 = x.transpose() * dq;
  return g;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace detail {

inline double softplus(double s) { return std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s))); }
inline double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

/// Up to `count` distinct node pairs that are neither edges of `g` nor in
/// `exclude`, uniformly at random.
inline std::vector<EdgeKey> sample_non_edges(const SnapshotGraph& g,
                                             const std::set<EdgeKey>& exclude,
                                             std::size_t count, Rng& rng) {
  const std::size_t n = g.num_nodes();
  if (n < 2 || count == 0) return {};
  const std::size_t total = n * (n - 1) / 2;
  std::vector<EdgeKey> out;
  if (count * 4 >= total) {
    std::vector<EdgeKey> pool;
    for (NodeIndex u = 0; u < n; ++u) {
      for (NodeIndex v = u + 1; v < n; ++v) {
        if (!g.has_edge(u, v) && !exclude.count({u, v})) pool.push_back({u, v});
      }
    }
    rng.partial_shuffle(pool, count);
    pool.resize(std::min(count, pool.size()));
    return pool;
  }
  std::set<EdgeKey> chosen;
  while (chosen.size() < count) {
    const auto u = static_cast<NodeIndex>(rng.below(n));
    const auto v = static_cast<NodeIndex>(rng.below(n));
    if (u == v) continue;
    const EdgeKey k = make_key(u, v);
    if (g.has_edge(k.u, k.v) || exclude.count(k) || chosen.count(k)) continue;
    chosen.insert(k);
    out.push_back(k);
  }
  return out;
}

struct Adam {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int step = 0;
  Eigen::MatrixXd m1, v1, m2, v2;

  void update(GcnModel& model, const GcnGradients& g) {
    if (step == 0) {
      m1 = Eigen::MatrixXd::Zero(g.w1.rows(), g.w1.cols());
      v1 = m1;
      m2 = Eigen::MatrixXd::Zero(g.w2.rows(), g.w2.cols());
      v2 = m2;
    }
    ++step;
    apply(model.w1, g.w1, m1, v1);
    apply(model.w2, g.w2, m2, v2);
  }

 private:
  void apply(Eigen::MatrixXd& w, const Eigen::MatrixXd& g, Eigen::MatrixXd& m,
             Eigen::MatrixXd& v) const {
    m = beta1 * m + (1 - beta1) * g;
    v = beta2 * v + (1 - beta2) * g.cwiseProduct(g);
    const double c1 = 1 - std::pow(beta1, step);
    const double c2 = 1 - std::pow(beta2, step);
    w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace detail

/// Logistic link-prediction loss over labelled pairs and its gradient with
/// respect to Z.
inline double link_loss(const Eigen::MatrixXd& z, std::span<const EdgeKey> pairs,
                        std::span<const double> labels, Eigen::MatrixXd* dz) {
  if (dz) *dz = Eigen::MatrixXd::Zero(z.rows(), z.cols());
  double loss = 0.0;
  const double scale = 1.0 / static_cast<double>(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(pairs[k].u);
    const auto j = static_cast<Eigen::Index>(pairs[k].v);
    const double s = decode(z, i, j);
    loss += detail::softplus(s) - labels[k] * s;
    if (dz) {
      const double g = (detail::sigmoid(s) - labels[k]) * scale;
      dz->row(i) += g * z.row(j);
      dz->row(j) += g * z.row(i);
    }
  }
  return loss * scale;
}

/// Trains on positives = `targets` and neg_ratio·|targets| uniformly sampled
/// non-edges of `g` (fixed for the run). Full-batch Adam for cfg.epochs.
/// loss_trace holds the loss before each update plus the final loss.
inline GcnModel train_link_predictor(const SnapshotGraph& g, const Eigen::MatrixXd& x,
                                     std::span<const EdgeKey> targets, const GcnConfig& cfg,
                                     bool weighted_adjacency = true) {
  if (targets.empty()) throw ValidationError("GCN training needs at least one target edge");
  for (const auto& t : targets) {
    if (t.u >= g.num_nodes() || t.v >= g.num_nodes() || t.u == t.v) {
      throw ValidationError("GCN target endpoint outside the training snapshot");
    }
  }
  GcnModel model = init_gcn(static_cast<std::size_t>(x.cols()), cfg.hidden, cfg.out, cfg.seed);

  std::set<EdgeKey> positive_set(targets.begin(), targets.end());
  Rng rng(derive_seed(cfg.seed, "gcn-negatives"));
  // Negatives avoid targets; targets may themselves be edges of g.
  auto negatives = detail::sample_non_edges(g, positive_set, cfg.neg_ratio * targets.size(), rng);

  std::vector<EdgeKey> pairs(positive_set.begin(), positive_set.end());
  std::vector<double> labels(pairs.size(), 1.0);
  for (const auto& k : negatives) {
    pairs.push_back(k);
    labels.push_back(0.0);
  }

  const Eigen::MatrixXd a = dense_adjacency(g, weighted_adjacency);
  detail::Adam adam;
  adam.lr = cfg.learning_rate;
  Eigen::MatrixXd dz;
  for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
    const auto act = gcn_activations(a, x, model);
    const bool last = epoch == cfg.epochs;
    const double loss = link_loss(act.z, pairs, labels, last ? nullptr : &dz);
    if (!std::isfinite(loss)) throw DivergenceError("GCN training loss is not finite", epoch);
    model.loss_trace.push_back(loss);
    if (last) break;
    adam.update(model, weight_gradients(act, x, model, dz));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Checkpoint
// ---------------------------------------------------------------------------

inline constexpr const char* kGcnFormat = "dyport-gcn";

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                        Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw SchemaVersionError("matrix has wrong row count");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row = j.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw SchemaVersionError("matrix has wrong column count");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)];
  }
  return m;
}

}  // namespace detail

inline void save_gcn(const GcnModel& m, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["format"] = kGcnFormat;
  j["version"] = 1;
  j["in_dim"] = m.in_dim();
  j["hidden"] = m.hidden_dim();
  j["out"] = m.out_dim();
  j["seed"] = m.seed;
  j["w1"] = detail::matrix_to_json(m.w1);
  j["w2"] = detail::matrix_to_json(m.w2);
  j["loss_trace"] = m.loss_trace;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump() << '\n';
}

inline GcnModel load_gcn(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.value("format", "") != kGcnFormat || j.value("version", 0) != 1) {
      throw SchemaVersionError("not a version-1 GCN checkpoint: " + path.string());
    }
    GcnModel m;
    const auto in_dim = j.at("in_dim").get<Eigen::Index>();
    const auto hidden = j.at("hidden").get<Eigen::Index>();
    const auto out = j.at("out").get<Eigen::Index>();
    m.w1 = detail::matrix_from_json(j.at("w1"), in_dim, hidden);
    m.w2 = detail::matrix_from_json(j.at("w2"), hidden, out);
    m.seed = j.at("seed").get<std::uint64_t>();
    m.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaVersionError("malformed GCN checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace dyport
