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

#include "biaslab/pipeline.hpp"

#include <algorithm>
#include <set>

#include "biaslab/error.hpp"
#include "biaslab/metrics.hpp"
#include "biaslab/random.hpp"

namespace biaslab {

namespace {

void check_detector(const Model& m) {
  if (m.config.head != HeadKind::softmax || m.config.n_classes != 2) {
    throw ValidationError("detector checkpoint must have a 2-way softmax head");
  }
}

void check_type_model(const Model& m) {
  if (m.config.head != HeadKind::sigmoid) {
    throw ValidationError("type classifier checkpoint must have a sigmoid head");
  }
  if (m.info.labels.empty() || m.info.labels.size() != m.config.n_classes) {
    throw ValidationError("type classifier checkpoint is missing its label list");
  }
  if (m.info.thresholds.size() != m.info.labels.size()) {
    throw ValidationError("type classifier checkpoint is missing per-label thresholds");
  }
}

}  // namespace

std::vector<double> TypeClassifierConfig::resolved_thresholds() const {
  return thresholds.empty() ? std::vector<double>(labels.size(), 0.5) : thresholds;
}

void TypeClassifierConfig::validate() const {
  if (labels.empty()) throw ValidationError("type label set is empty");
  std::set<std::string> unique(labels.begin(), labels.end());
  if (unique.size() != labels.size()) throw ValidationError("type labels must be unique");
  if (!thresholds.empty() && thresholds.size() != labels.size()) {
    throw ValidationError("one threshold per type label required");
  }
  for (double t : thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw ValidationError("type thresholds must lie in (0, 1)");
  }
}

TrainingSet encode_typed(const LabeledCorpus& corpus, const TypeClassifierConfig& types,
                         const Vocabulary& vocab, std::size_t max_len) {
  std::vector<const LabeledSentence*> annotated;
  for (const auto& s : corpus.sentences()) {
    if (!s.type_labels.empty()) annotated.push_back(&s);
  }
  if (annotated.empty()) {
    throw ValidationError("corpus has no bias-type annotations");
  }
  TrainingSet set;
  set.targets = Matrix::Zero(static_cast<Eigen::Index>(annotated.size()),
                             static_cast<Eigen::Index>(types.labels.size()));
  for (std::size_t i = 0; i < annotated.size(); ++i) {
    set.sequences.push_back(encode(annotated[i]->text, vocab, max_len));
    for (const auto& t : annotated[i]->type_labels) {
      auto it = std::find(types.labels.begin(), types.labels.end(), t);
      if (it == types.labels.end()) {
        throw ValidationError("sentence '" + annotated[i]->id + "' has unknown type '" +
                              t + "'");
      }
      set.targets(static_cast<Eigen::Index>(i), it - types.labels.begin()) = 1.0;
    }
  }
  return set;
}

double mean_label_f1(const Matrix& probs, const Matrix& targets,
                     std::span<const double> thresholds) {
  if (probs.rows() != targets.rows() || probs.cols() != targets.cols() ||
      static_cast<std::size_t>(probs.cols()) != thresholds.size()) {
    throw ValidationError("mean_label_f1: shape mismatch");
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    std::vector<int> pred(static_cast<std::size_t>(probs.rows()));
    std::vector<int> gold(pred.size());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      pred[static_cast<std::size_t>(i)] =
          probs(i, j) >= thresholds[static_cast<std::size_t>(j)] ? 1 : 0;
      gold[static_cast<std::size_t>(i)] = targets(i, j) > 0.5 ? 1 : 0;
    }
    sum += class_f1(confusion(pred, gold), 1);
  }
  return sum / static_cast<double>(probs.cols());
}

TrainResult train_type_classifier(const LabeledCorpus& train_corpus,
                                  const LabeledCorpus& val_corpus,
                                  const TypeClassifierConfig& types,
                                  EncoderConfig encoder_config,
                                  const TrainConfig& train_config) {
  types.validate();
  train_config.validate();

  TrainResult result;
  Model& model = result.model;
  model.vocab = build_vocab(train_corpus, train_config.min_freq, train_config.max_vocab);
  encoder_config.vocab_size = model.vocab.size();
  encoder_config.head = HeadKind::sigmoid;
  encoder_config.n_classes = types.labels.size();
  model.config = encoder_config;
  model.config.validate();
  model.info.kind = "type_classifier";
  model.info.labels = types.labels;
  model.info.thresholds = types.resolved_thresholds();

  const TrainingSet train_set =
      encode_typed(train_corpus, types, model.vocab, model.config.max_len);
  const TrainingSet val_set = encode_typed(val_corpus, types, model.vocab, model.config.max_len);
  for (std::size_t j = 0; j < types.labels.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    if (train_set.targets.col(col).sum() == 0.0 || val_set.targets.col(col).sum() == 0.0) {
      throw ValidationError("type label '" + types.labels[j] +
                            "' has no positive example in the training or validation set");
    }
  }

  model.params = init_params(model.config, derive_seed(train_config.seed, 0x7e5));
  const auto thresholds = model.info.thresholds;
  result.history = fit(model, train_set, val_set, train_config,
                       [thresholds](const Matrix& probs, const Matrix& targets) {
                         return mean_label_f1(probs, targets, thresholds);
                       });
  return result;
}

nlohmann::json BiasAnalysis::to_json() const {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& [label, p] : types) t.push_back({{"label", label}, {"probability", p}});
  return {{"text", text},
          {"is_biased", is_biased},
          {"bias_probability", bias_probability},
          {"types", t},
          {"stage2_skipped", stage2_skipped}};
}

BiasAnalysis combine_stages(std::string text, double bias_probability,
                            std::span<const double> type_probs,
                            std::span<const std::string> labels,
                            std::span<const double> thresholds, double gate) {
  BiasAnalysis a;
  a.text = std::move(text);
  a.bias_probability = bias_probability;
  if (bias_probability < gate) {
    a.is_biased = false;
    a.stage2_skipped = true;
    return a;
  }
  if (type_probs.size() != labels.size() || thresholds.size() != labels.size() ||
      labels.empty()) {
    throw ValidationError("stage-2 scores, labels and thresholds differ in length");
  }
  a.is_biased = true;
  a.stage2_skipped = false;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (type_probs[j] >= thresholds[j]) a.types.emplace_back(labels[j], type_probs[j]);
  }
  if (a.types.empty()) {
    auto best = std::max_element(type_probs.begin(), type_probs.end()) - type_probs.begin();
    a.types.emplace_back(labels[static_cast<std::size_t>(best)],
                         type_probs[static_cast<std::size_t>(best)]);
  }
  std::stable_sort(a.types.begin(), a.types.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return a;
}

BiasAnalysis analyze(const Model& detector, const Model& type_model,
                     std::string_view sentence, double gate) {
  std::string text(sentence);
  return analyze_batch(detector, type_model, std::span<const std::string>(&text, 1), gate)
      .front();
}

std::vector<BiasAnalysis> analyze_batch(const Model& detector, const Model& type_model,
                                        std::span<const std::string> sentences,
                                        double gate) {
  check_detector(detector);
  check_type_model(type_model);
  std::vector<BiasAnalysis> out;
  if (sentences.empty()) return out;

  const Matrix bias = predict_probs(detector, sentences);
  std::vector<std::string> gated;
  std::vector<std::size_t> gated_index;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (bias(static_cast<Eigen::Index>(i), 1) >= gate) {
      gated.push_back(sentences[i]);
      gated_index.push_back(i);
    }
  }
  Matrix type_probs;
  if (!gated.empty()) type_probs = predict_probs(type_model, gated);

  out.reserve(sentences.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::vector<double> scores;
    if (next < gated_index.size() && gated_index[next] == i) {
      auto row = type_probs.row(static_cast<Eigen::Index>(next));
      scores.assign(row.begin(), row.end());
      ++next;
    }
    out.push_back(combine_stages(sentences[i], bias(static_cast<Eigen::Index>(i), 1), scores,
                                 type_model.info.labels, type_model.info.thresholds, gate));
  }
  return out;
}

}  // namespace biaslab
