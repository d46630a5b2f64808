// Integrated-gradients attribution of adjacency entries toward link scores.

#pragma once

#include <cmath>
#include <concepts>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dyport/common.hpp"
#include "dyport/dyngraph.hpp"
#include "dyport/gcn.hpp"

namespace dyport {

struct ScoreWithGradient {
  double value = 0;
  Eigen::MatrixXd gradient;  // dF/dA, same shape as A
};

/// A differentiable scalar function of the adjacency matrix, one per target
/// pair.
template <class F>
concept AdjacencyScore = requires(const F& f, const Eigen::MatrixXd& a, const EdgeKey& t) {
  { f.value(a, t) } -> std::convertible_to<double>;
  { f.value_and_gradient(a, t) } -> std::same_as<ScoreWithGradient>;
};

/// F_t(A) = decode(gcn_forward(A, X), t).
class GcnPairScore {
 public:
  GcnPairScore(const GcnModel& model, Eigen::MatrixXd features)
      : model_(model), features_(std::move(features)) {}

  double value(const Eigen::MatrixXd& a, const EdgeKey& t) const {
    return decode(gcn_forward(a, features_, model_), t.u, t.v);
  }

  ScoreWithGradient value_and_gradient(const Eigen::MatrixXd& a, const EdgeKey& t) const {
    const auto act = gcn_activations(a, features_, model_);
    return {decode(act.z, t.u, t.v),
            adjacency_gradient(act, model_, decode_gradient(act.z, t.u, t.v))};
  }

  /// One forward pass shared by all targets.
  std::vector<ScoreWithGradient> batch(const Eigen::MatrixXd& a,
                                       std::span<const EdgeKey> targets) const {
    const auto act = gcn_activations(a, features_, model_);
    std::vector<ScoreWithGradient> out;
    out.reserve(targets.size());
    for (const auto& t : targets) {
      out.push_back({decode(act.z, t.u, t.v),
                     adjacency_gradient(act, model_, decode_gradient(act.z, t.u, t.v))});
    }
    return out;
  }

 private:
  const GcnModel& model_;
  Eigen::MatrixXd features_;
};

struct TargetAttribution {
  EdgeKey target;
  Eigen::MatrixXd ig;        // per adjacency entry
  double f_input = 0;        // F(x)
  double f_baseline = 0;     // F(0)
  double residual = 0;       // |Σ ig − (F(x) − F(0))|
};

namespace detail {

template <class F>
std::vector<ScoreWithGradient> evaluate_all(const F& f, const Eigen::MatrixXd& a,
                                            std::span<const EdgeKey> targets) {
  if constexpr (requires { f.batch(a, targets); }) {
    return f.batch(a, targets);
  } else {
    std::vector<ScoreWithGradient> out;
    out.reserve(targets.size());
    for (const auto& t : targets) out.push_back(f.value_and_gradient(a, t));
    return out;
  }
}

}  // namespace detail

/// IG with a zero baseline: x ⊙ mean_k ∇F(α_k x), α_k = (k + ½)/m (midpoint
/// rule over the straight path).
template <AdjacencyScore F>
std::vector<TargetAttribution> integrate_gradients(const F& f, const Eigen::MatrixXd& input,
                                                   std::span<const EdgeKey> targets,
                                                   int steps) {
  if (steps < 1) throw ValidationError("integrated gradients needs steps >= 1");
  const Eigen::MatrixXd baseline = Eigen::MatrixXd::Zero(input.rows(), input.cols());
  std::vector<TargetAttribution> out(targets.size());
  std::vector<Eigen::MatrixXd> grad_sum(targets.size(),
                                        Eigen::MatrixXd::Zero(input.rows(), input.cols()));
  for (int k = 0; k < steps; ++k) {
    const double alpha = (static_cast<double>(k) + 0.5) / static_cast<double>(steps);
    const auto evals = detail::evaluate_all(f, Eigen::MatrixXd(alpha * input), targets);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (!evals[t].gradient.allFinite()) {
        throw Error("non-finite gradient while integrating toward target (" +
                    std::to_string(targets[t].u) + ", " + std::to_string(targets[t].v) + ")");
      }
      grad_sum[t] += evals[t].gradient;
    }
  }
  const auto at_input = detail::evaluate_all(f, input, targets);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    auto& r = out[t];
    r.target = targets[t];
    r.ig = input.cwiseProduct(grad_sum[t]) / static_cast<double>(steps);
    r.f_input = at_input[t].value;
    r.f_baseline = f.value(baseline, targets[t]);
    r.residual = std::abs(r.ig.sum() - (r.f_input - r.f_baseline));
  }
  return out;
}

struct AttributionResult {
  std::vector<double> edge_attribution;  // aligned with g.edges()
  std::vector<EdgeKey> targets;
  std::vector<double> residuals;         // aligned with targets
  std::vector<double> output_deltas;     // F(x) − F(0), aligned with targets
};

/// Attribution of each existing edge {i,j} of g: per target the undirected
/// value IG_ij + IG_ji, aggregated as the mean absolute value over targets.
/// The input is the binary adjacency unless `weighted_input`; the diagonal is
/// never attributed.
template <AdjacencyScore F>
AttributionResult integrated_gradients(const F& f, const SnapshotGraph& g,
                                       std::span<const EdgeKey> targets, int steps,
                                       bool weighted_input = false) {
  AttributionResult result;
  result.edge_attribution.assign(g.num_edges(), 0.0);
  result.targets.assign(targets.begin(), targets.end());
  if (targets.empty()) {
    log::warn("integrated gradients: no target edges, attributions are 0");
    return result;
  }
  const Eigen::MatrixXd x = dense_adjacency(g, weighted_input);
  const auto per_target = integrate_gradients(f, x, targets, steps);
  for (const auto& t : per_target) {
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      const auto& edge = g.edges()[e];
      result.edge_attribution[e] += std::abs(t.ig(edge.u, edge.v) + t.ig(edge.v, edge.u));
    }
    result.residuals.push_back(t.residual);
    result.output_deltas.push_back(t.f_input - t.f_baseline);
  }
  for (auto& v : result.edge_attribution) v /= static_cast<double>(targets.size());
  return result;
}

/// Edge attribution keyed by concept pair.
inline std::map<ConceptPair, double> attribution_by_pair(const SnapshotGraph& g,
                                                         const AttributionResult& r) {
  std::map<ConceptPair, double> out;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    out.emplace(g.pair_of(g.edges()[e]), r.edge_attribution[e]);
  }
  return out;
}

}  // namespace dyport
