// Gradient training of the embedding angles and the overlap classifier used
// to check the learned embedding on held-out points.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qembed/embedding.hpp"
#include "qembed/random.hpp"

namespace qembed {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int iterations = 200;
  // Points drawn from each class for every gradient step, and for the fixed
  // batch the cost trace is evaluated on.
  int batch_per_class = 25;
  int eval_per_class = 25;
  double fd_step = 1e-5;
  std::uint64_t seed = 2021;
  AdamConfig adam;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw std::invalid_argument("learning_rate must be > 0");
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (batch_per_class < 1) throw std::invalid_argument("batch_per_class must be >= 1");
    if (eval_per_class < 1) throw std::invalid_argument("eval_per_class must be >= 1");
    if (!(fd_step > 0.0)) throw std::invalid_argument("fd_step must be > 0");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw std::invalid_argument("adam.beta1 must be in [0, 1)");
    if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw std::invalid_argument("adam.beta2 must be in [0, 1)");
    if (!(adam.epsilon > 0.0)) throw std::invalid_argument("adam.epsilon must be > 0");
  }
};

/// Adam with bias-corrected moments. The moments start at zero, so a zero
/// gradient leaves the parameters bit-for-bit unchanged.
template <std::size_t N>
class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, AdamConfig cfg) : lr_(learning_rate), cfg_(cfg) {}

  void step(std::array<double, N>& params, const std::array<double, N>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t k = 0; k < N; ++k) {
      m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * grad[k];
      v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * grad[k] * grad[k];
      const double mhat = m_[k] / c1;
      const double vhat = v_[k] / c2;
      params[k] -= lr_ * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }

  int steps() const { return t_; }

 private:
  double lr_;
  AdamConfig cfg_;
  std::array<double, N> m_{};
  std::array<double, N> v_{};
  int t_ = 0;
};

/// Central finite differences of cost() with step h in every angle.
inline std::array<double, 3> cost_gradient(std::span<const LabeledPoint> batch,
                                           const EmbeddingParams& p, double h = 1e-5) {
  std::array<double, 3> g{};
  const auto base = p.as_array();
  for (std::size_t k = 0; k < 3; ++k) {
    auto plus = base, minus = base;
    plus[k] += h;
    minus[k] -= h;
    g[k] = (cost(batch, EmbeddingParams::from_array(plus)) -
            cost(batch, EmbeddingParams::from_array(minus))) /
           (2.0 * h);
  }
  return g;
}

/// Up to `per_class` points of each class, sampled without replacement.
/// Classes smaller than `per_class` are taken whole.
inline std::vector<LabeledPoint> sample_batch(const LabeledDataset& ds, int per_class, Rng& rng) {
  std::vector<LabeledPoint> batch;
  for (Label l : {Label::A, Label::B}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.points.size(); ++i)
      if (ds.points[i].label == l) idx.push_back(i);
    const std::size_t take = std::min(idx.size(), static_cast<std::size_t>(per_class));
    for (std::size_t i = 0; i < take; ++i) {
      const auto j = static_cast<std::size_t>(
          uniform_index(rng, static_cast<std::int64_t>(i), static_cast<std::int64_t>(idx.size() - 1)));
      std::swap(idx[i], idx[j]);
      batch.push_back(ds.points[idx[i]]);
    }
  }
  return batch;
}

/// Uniform in (-pi, pi]^3.
inline EmbeddingParams random_params(Rng& rng) {
  return {pi - uniform(rng, 0.0, 2.0 * pi), pi - uniform(rng, 0.0, 2.0 * pi),
          pi - uniform(rng, 0.0, 2.0 * pi)};
}

struct TrainTrace {
  std::uint64_t seed = 0;
  TrainConfig config;
  EmbeddingParams initial_params;
  std::vector<double> cost_trace;  // iterations + 1 entries, initial cost first
  EmbeddingParams final_params;
};

/// Adam on the cost, one freshly sampled batch per step.
///
/// Seeds: initial angles from derive_seed(seed, "init"), the evaluation
/// batch from derive_seed(seed, "eval") and the batch of step k from
/// derive_seed(seed, {"batch", k}). The run is a pure function of
/// (dataset, config).
inline TrainTrace train(const LabeledDataset& dataset, const TrainConfig& cfg) {
  cfg.validate();
  dataset.validate();

  TrainTrace trace;
  trace.seed = cfg.seed;
  trace.config = cfg;

  Rng init_rng = make_rng(derive_seed(cfg.seed, "init"));
  trace.initial_params = random_params(init_rng);

  Rng eval_rng = make_rng(derive_seed(cfg.seed, "eval"));
  const auto eval_batch = sample_batch(dataset, cfg.eval_per_class, eval_rng);

  auto theta = trace.initial_params.as_array();
  AdamOptimizer<3> adam(cfg.learning_rate, cfg.adam);
  trace.cost_trace.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
  trace.cost_trace.push_back(cost(eval_batch, trace.initial_params));

  for (int it = 0; it < cfg.iterations; ++it) {
    Rng batch_rng = make_rng(derive_seed(cfg.seed, {hash_tag("batch"), static_cast<std::uint64_t>(it)}));
    const auto batch = sample_batch(dataset, cfg.batch_per_class, batch_rng);
    const auto grad = cost_gradient(batch, EmbeddingParams::from_array(theta), cfg.fd_step);
    adam.step(theta, grad);
    trace.cost_trace.push_back(cost(eval_batch, EmbeddingParams::from_array(theta)));
  }
  trace.final_params = EmbeddingParams::from_array(theta);
  return trace;
}

// ---------------------------------------------------------------------------
// Classification

struct Classification {
  Label label = Label::A;
  bool tie = false;
  double mean_fidelity_a = 0.0;
  double mean_fidelity_b = 0.0;
};

/// Assigns the class whose embedded training states have the larger mean
/// fidelity with the query state. Exact ties go to A and are flagged.
class OverlapClassifier {
 public:
  OverlapClassifier(std::vector<PureQubitState> class_a, std::vector<PureQubitState> class_b)
      : a_(std::move(class_a)), b_(std::move(class_b)) {
    if (a_.empty() && b_.empty()) throw std::invalid_argument("classifier needs training states");
  }

  OverlapClassifier(const EmbeddingParams& params, const LabeledDataset& training)
      : OverlapClassifier(embed_all(training.values_of(Label::A), params),
                          embed_all(training.values_of(Label::B), params)) {
    params_ = params;
  }

  Classification classify_state(const PureQubitState& s) const {
    Classification c;
    c.mean_fidelity_a = mean_fidelity(a_, s);
    c.mean_fidelity_b = mean_fidelity(b_, s);
    if (c.mean_fidelity_a == c.mean_fidelity_b) {
      c.label = Label::A;
      c.tie = true;
    } else {
      c.label = c.mean_fidelity_a > c.mean_fidelity_b ? Label::A : Label::B;
    }
    return c;
  }

  Classification classify(double x) const { return classify_state(feature_map(x, params_)); }

 private:
  static double mean_fidelity(const std::vector<PureQubitState>& states, const PureQubitState& s) {
    if (states.empty()) return 0.0;
    double total = 0.0;
    for (const auto& t : states) total += fidelity(t, s);
    return total / static_cast<double>(states.size());
  }

  std::vector<PureQubitState> a_, b_;
  EmbeddingParams params_;
};

inline Classification classify(double x, const EmbeddingParams& params, const LabeledDataset& training) {
  if (training.empty()) throw std::invalid_argument("classify: empty training set");
  return OverlapClassifier(params, training).classify(x);
}

/// Fraction of `test` points whose predicted label matches.
inline double evaluate(const LabeledDataset& test, const EmbeddingParams& params,
                       const LabeledDataset& training) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
  if (training.empty()) throw std::invalid_argument("evaluate: empty training set");
  const OverlapClassifier clf(params, training);
  std::size_t correct = 0;
  for (const auto& p : test.points) correct += (clf.classify(p.value).label == p.label);
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace qembed
