// Copyright 2026 The BiasLab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "biaslab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "biaslab/error.hpp"
#include "biaslab/metrics.hpp"
#include "biaslab/random.hpp"

namespace biaslab {

namespace {

constexpr double kProbClamp = 1e-12;

template <typename Params>
auto tensor_list(Params& p) {
  using Ptr = std::conditional_t<std::is_const_v<Params>, const Matrix*, Matrix*>;
  std::vector<std::pair<Ptr, bool>> out;
  p.for_each([&](const std::string&, auto& m, bool decays) { out.emplace_back(&m, decays); });
  return out;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Matrix eval_probs(const Model& model, const std::vector<TokenSequence>& seqs) {
  constexpr std::size_t kChunk = 256;
  Matrix probs(static_cast<Eigen::Index>(seqs.size()),
               static_cast<Eigen::Index>(model.config.n_classes));
  for (std::size_t start = 0; start < seqs.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, seqs.size() - start);
    auto out = forward(model.params, model.config,
                       std::span<const TokenSequence>(seqs).subspan(start, count));
    probs.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(count)) =
        out.probs;
  }
  return probs;
}

}  // namespace

TrainConfig TrainConfig::finetune() { return TrainConfig{}; }

TrainConfig TrainConfig::synthetic() {
  TrainConfig c;
  c.learning_rate = 1e-3;
  return c;
}

TrainConfig TrainConfig::preset(const std::string& name) {
  if (name == "finetune") return finetune();
  if (name == "synthetic") return synthetic();
  throw ValidationError("unknown training preset '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (patience < 1) throw ValidationError("patience must be >= 1");
  if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ValidationError("adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ValidationError("adam_epsilon must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"batch_size", batch_size},
          {"max_epochs", max_epochs},       {"patience", patience},
          {"weight_decay", weight_decay},   {"adam_beta1", adam_beta1},
          {"adam_beta2", adam_beta2},       {"adam_epsilon", adam_epsilon},
          {"seed", seed},                   {"min_freq", min_freq},
          {"max_vocab", max_vocab}};
}

double bce_loss(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) {
    throw ValidationError("bce_loss: length mismatch (" + std::to_string(probs.size()) +
                          " vs " + std::to_string(labels.size()) + ")");
  }
  if (probs.empty()) throw ValidationError("bce_loss: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
    sum += labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return -sum / static_cast<double>(probs.size());
}

Matrix one_hot(std::span<const int> labels, std::size_t n_classes) {
  Matrix t = Matrix::Zero(static_cast<Eigen::Index>(labels.size()),
                          static_cast<Eigen::Index>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= n_classes) {
      throw ValidationError("label out of range at index " + std::to_string(i));
    }
    t(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return t;
}

AdamState AdamState::zeros_like(const EncoderConfig& config) {
  return {EncoderParams::zeros(config), EncoderParams::zeros(config)};
}

void adamw_step(EncoderParams& params, const EncoderParams& grads, AdamState& state,
                const TrainConfig& config, std::size_t step_index) {
  if (step_index < 1) throw ValidationError("adamw_step: step_index is 1-based");
  auto p = tensor_list(params);
  auto g = tensor_list(grads);
  auto m = tensor_list(state.m);
  auto v = tensor_list(state.v);
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw ValidationError("adamw_step: tensor count mismatch");
  }
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double t = static_cast<double>(step_index);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  const double lr = config.learning_rate;
  for (std::size_t i = 0; i < p.size(); ++i) {
    Matrix& w = *p[i].first;
    const Matrix& gr = *g[i].first;
    Matrix& mi = *m[i].first;
    Matrix& vi = *v[i].first;
    if (gr.rows() != w.rows() || gr.cols() != w.cols() || mi.rows() != w.rows() ||
        mi.cols() != w.cols() || vi.rows() != w.rows() || vi.cols() != w.cols()) {
      throw ValidationError("adamw_step: shape mismatch in tensor " + std::to_string(i));
    }
    const double decay = p[i].second ? config.weight_decay : 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const double gk = gr.data()[k];
      double& mk = mi.data()[k];
      double& vk = vi.data()[k];
      mk = b1 * mk + (1.0 - b1) * gk;
      vk = b2 * vk + (1.0 - b2) * gk * gk;
      const double m_hat = mk / c1;
      const double v_hat = vk / c2;
      double& wk = w.data()[k];
      wk -= lr * (m_hat / (std::sqrt(v_hat) + config.adam_epsilon) + decay * wk);
    }
  }
}

double TrainHistory::best_f1() const {
  if (best_epoch == 0 || best_epoch > epochs.size()) {
    throw ValidationError("training history has no best epoch");
  }
  return epochs[best_epoch - 1].val_f1;
}

nlohmann::json TrainHistory::to_json() const {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& e : epochs) {
    records.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_f1", e.val_f1}});
  }
  return {{"epochs", records},
          {"best_epoch", best_epoch},
          {"best_val_f1", epochs.empty() ? 0.0 : best_f1()},
          {"stopped_early", stopped_early}};
}

double macro_f1_metric(const Matrix& probs, const Matrix& targets) {
  auto pred = predicted_labels(probs);
  auto gold = predicted_labels(targets);
  return macro_f1(confusion(pred, gold));
}

TrainHistory fit(Model& model, const TrainingSet& train, const TrainingSet& val,
                 const TrainConfig& config, const ValidationMetric& metric) {
  config.validate();
  model.config.validate();
  model.params.check(model.config);
  if (train.size() == 0 || val.size() == 0) {
    throw ValidationError("training and validation sets must be non-empty");
  }
  if (train.targets.rows() != static_cast<Eigen::Index>(train.size()) ||
      val.targets.rows() != static_cast<Eigen::Index>(val.size())) {
    throw ValidationError("targets must have one row per sequence");
  }

  AdamState state = AdamState::zeros_like(model.config);
  EncoderParams best = model.params;
  TrainHistory history;
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::size_t step = 0;

  std::vector<std::size_t> order(train.size());
  std::vector<TokenSequence> batch;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const std::uint64_t epoch_seed = derive_seed(config.seed, epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(epoch_seed);
    rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      std::span<const std::size_t> rows(order.data() + start, count);
      batch.clear();
      for (auto i : rows) batch.push_back(train.sequences[i]);
      Matrix targets = gather_rows(train.targets, rows);
      auto result = backward(model.params, model.config, batch, targets,
                             derive_seed(epoch_seed, 1 + batch_index));
      adamw_step(model.params, result.grads, state, config, ++step);
      loss_sum += result.loss * static_cast<double>(count);
    }
    if (!model.params.token_embedding.allFinite()) {
      throw NumericalError("parameters diverged in epoch " + std::to_string(epoch));
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(train.size());
    record.val_f1 = metric(eval_probs(model, val.sequences), val.targets);
    history.epochs.push_back(record);

    if (record.val_f1 > best_score) {
      best_score = record.val_f1;
      history.best_epoch = epoch;
      best = model.params;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      history.stopped_early = epoch < config.max_epochs;
      break;
    }
  }
  model.params = std::move(best);
  return history;
}

TrainResult train(const LabeledCorpus& train_corpus, const LabeledCorpus& val_corpus,
                  EncoderConfig encoder_config, const TrainConfig& train_config) {
  if (train_corpus.empty() || val_corpus.empty()) {
    throw ValidationError("training and validation corpora must be non-empty");
  }
  if (val_corpus.label_count(0) == 0 || val_corpus.label_count(1) == 0) {
    throw ValidationError("degenerate validation set: it must contain both classes");
  }
  if (encoder_config.head != HeadKind::softmax || encoder_config.n_classes != 2) {
    throw ValidationError("the bias detector needs a 2-way softmax head");
  }
  train_config.validate();

  TrainResult result;
  Model& model = result.model;
  model.vocab = build_vocab(train_corpus, train_config.min_freq, train_config.max_vocab);
  encoder_config.vocab_size = model.vocab.size();
  model.config = encoder_config;
  model.config.validate();
  model.params = init_params(model.config, derive_seed(train_config.seed, 0x1417));

  auto encode_set = [&](const LabeledCorpus& corpus) {
    TrainingSet set;
    auto texts = corpus.texts();
    set.sequences = encode_batch(texts, model.vocab, model.config.max_len);
    auto labels = corpus.labels();
    set.targets = one_hot(labels, 2);
    return set;
  };
  const TrainingSet train_set = encode_set(train_corpus);
  const TrainingSet val_set = encode_set(val_corpus);
  result.history = fit(model, train_set, val_set, train_config, macro_f1_metric);
  return result;
}

}  // namespace biaslab
