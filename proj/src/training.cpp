#include "ud/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ud/errors.hpp"
#include "ud/eval.hpp"
#include "ud/rng.hpp"

namespace ud {

Optimizer parse_optimizer(const std::string& s) {
  if (s == "sgd") return Optimizer::Sgd;
  if (s == "adagrad") return Optimizer::Adagrad;
  throw ConfigError("optimizer: expected sgd|adagrad, got '" + s + "'");
}

std::string to_string(Optimizer o) {
  return o == Optimizer::Sgd ? "sgd" : "adagrad";
}

void sgd_step(const std::vector<TensorPtr>& params, double lr, double l2) {
  for (const auto& p : params)
    for (std::size_t i = 0; i < p->size(); ++i)
      p->values[i] -= lr * (p->grad[i] + l2 * p->values[i]);
}

void AdagradState::reset(const std::vector<TensorPtr>& params) {
  accum.clear();
  for (const auto& p : params) accum.emplace_back(p->size(), 0.0);
}

void adagrad_step(const std::vector<TensorPtr>& params, AdagradState& state,
                  double lr, double l2, double eps) {
  if (state.accum.size() != params.size()) state.reset(params);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = *params[pi];
    auto& s = state.accum[pi];
    for (std::size_t i = 0; i < p.size(); ++i) {
      double g = p.grad[i] + l2 * p.values[i];
      s[i] += g * g;
      p.values[i] -= lr * g / (std::sqrt(s[i]) + eps);
    }
  }
}

double global_grad_norm(const std::vector<TensorPtr>& params) {
  double sq = 0.0;
  for (const auto& p : params)
    for (double g : p->grad) sq += g * g;
  return std::sqrt(sq);
}

double clip_gradients(const std::vector<TensorPtr>& params, double max_norm) {
  double norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    double scale = max_norm / norm;
    for (const auto& p : params)
      for (auto& g : p->grad) g *= scale;
  }
  return norm;
}

double example_loss(const Model& model, const Example& ex) {
  Tape tape;
  auto trace = model.forward(tape, ex.tokens);
  auto loss = bce_with_logits(tape, trace.logit, double(ex.label));
  return loss->values[0];
}

namespace {

EvalReport eval_on(const Model& model, const std::vector<Example>& examples) {
  std::vector<int> preds, gold;
  preds.reserve(examples.size());
  for (const auto& ex : examples) {
    Tape tape;
    preds.push_back(model.forward(tape, ex.tokens).label());
    gold.push_back(ex.label);
  }
  return score(preds, gold);
}

std::vector<std::vector<double>> snapshot(const std::vector<TensorPtr>& params) {
  std::vector<std::vector<double>> copy;
  copy.reserve(params.size());
  for (const auto& p : params) copy.push_back(p->values);
  return copy;
}

void restore(const std::vector<TensorPtr>& params,
             const std::vector<std::vector<double>>& copy) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->values = copy[i];
}

}  // namespace

TrainResult train(Model& model, const std::vector<Example>& train_set,
                  const std::vector<Example>& dev_set,
                  const TrainConfig& config) {
  if (train_set.empty()) throw UsageError("train: empty corpus");
  if (config.minibatch < 1) throw UsageError("train: minibatch must be >= 1");
  if (config.lr <= 0.0) throw UsageError("train: learning rate must be > 0");

  auto params = model.parameters();
  AdagradState ada;
  ada.reset(params);
  Rng shuffle_rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  double best_f1 = -1.0;
  std::vector<std::vector<double>> best_params;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    double epoch_loss = 0.0;
    std::size_t batches = (order.size() + config.minibatch - 1) / config.minibatch;
    for (std::size_t b = 0; b < batches; ++b) {
      std::size_t begin = b * config.minibatch;
      std::size_t end = std::min(begin + config.minibatch, order.size());
      double inv = 1.0 / double(end - begin);
      for (const auto& p : params) p->zero_grad();
      if (model.cfg.train_embeddings &&
          model.cfg.source == AttentionSource::External)
        model.lexicon.recompute(model.table);
      for (std::size_t i = begin; i < end; ++i) {
        const auto& ex = train_set[order[i]];
        Tape tape;
        auto trace = model.forward(tape, ex.tokens);
        auto loss = bce_with_logits(tape, trace.logit, double(ex.label));
        if (!std::isfinite(loss->values[0]))
          throw NumericError("train: non-finite loss in epoch " +
                             std::to_string(epoch) + ", minibatch " +
                             std::to_string(b));
        epoch_loss += loss->values[0];
        tape.backward(scale(tape, loss, inv));
      }
      if (config.clip_norm) clip_gradients(params, *config.clip_norm);
      if (config.optimizer == Optimizer::Sgd)
        sgd_step(params, config.lr, config.l2_weight);
      else
        adagrad_step(params, ada, config.lr, config.l2_weight,
                     config.adagrad_eps);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = epoch_loss / double(train_set.size());
    if (!dev_set.empty()) {
      auto report = eval_on(model, dev_set);
      m.dev_precision = report.precision;
      m.dev_recall = report.recall;
      m.dev_f1 = report.f1;
      if (report.f1 > best_f1) {  // ties keep the earliest epoch
        best_f1 = report.f1;
        result.best_epoch = epoch;
        best_params = snapshot(params);
      }
    }
    result.metrics.push_back(m);
    if (!dev_set.empty() && config.early_stop_f1 &&
        m.dev_f1 >= *config.early_stop_f1)
      break;
  }

  if (!dev_set.empty() && !best_params.empty()) restore(params, best_params);
  return result;
}

}  // namespace ud
