#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ud/corpus.hpp"
#include "ud/model.hpp"

namespace ud {

enum class Optimizer { Sgd, Adagrad };

Optimizer parse_optimizer(const std::string& s);
std::string to_string(Optimizer o);

struct TrainConfig {
  Optimizer optimizer = Optimizer::Sgd;
  double lr = 0.03;  // sgd 0.03, adagrad 0.1
  std::size_t minibatch = 10;
  double l2_weight = 1e-5;
  std::optional<double> clip_norm;  // global-norm clipping, RNN default 5.0
  std::size_t max_epochs = 0;
  std::uint64_t seed = 1;
  double adagrad_eps = 1e-8;
  // stop once dev F1 reaches this value (requires a dev set)
  std::optional<double> early_stop_f1;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_precision = 0.0;
  double dev_recall = 0.0;
  double dev_f1 = 0.0;
};

struct TrainResult {
  std::vector<EpochMetrics> metrics;
  std::size_t best_epoch = 0;  // 0 when no dev set was used
};

// p <- p - lr * (g + l2 * p)
void sgd_step(const std::vector<TensorPtr>& params, double lr, double l2);

struct AdagradState {
  std::vector<std::vector<double>> accum;  // one buffer per parameter

  void reset(const std::vector<TensorPtr>& params);
};

// s <- s + g^2; p <- p - lr * g / (sqrt(s) + eps), with g = grad + l2 * p
void adagrad_step(const std::vector<TensorPtr>& params, AdagradState& state,
                  double lr, double l2, double eps);

// scales all grads by max_norm/norm when the global L2 norm exceeds max_norm;
// returns the pre-clipping norm
double clip_gradients(const std::vector<TensorPtr>& params, double max_norm);

double global_grad_norm(const std::vector<TensorPtr>& params);

// Minibatch training with per-epoch seeded shuffling; the minibatch gradient
// is the mean over its examples. With a dev set, records P/R/F1 per epoch and
// restores the parameters of the best-F1 epoch (earliest on ties); without
// one, trains for max_epochs and keeps the final parameters.
TrainResult train(Model& model, const std::vector<Example>& train_set,
                  const std::vector<Example>& dev_set,
                  const TrainConfig& config);

double example_loss(const Model& model, const Example& ex);

}  // namespace ud
