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

#include "biaslab/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "biaslab/error.hpp"
#include "biaslab/random.hpp"
#include "encoder_internal.hpp"

namespace biaslab {

namespace {

const char* head_name(HeadKind h) {
  return h == HeadKind::softmax ? "softmax" : "sigmoid";
}

Matrix dropout_multipliers(std::size_t rows, std::size_t cols, double rate,
                           std::uint64_t seed, std::size_t sequence,
                           std::uint64_t site) {
  Matrix m(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double u = counter_uniform(seed, sequence, site, i * cols + j);
      m(i, j) = u < rate ? 0.0 : keep_scale;
    }
  }
  return m;
}

void layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias,
                double eps, Matrix& xhat, Eigen::VectorXd& inv_std,
                Matrix& out) {
  const auto rows = x.rows();
  const auto d = static_cast<double>(x.cols());
  xhat.resize(rows, x.cols());
  inv_std.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mean = x.row(i).sum() / d;
    const double var = (x.row(i).array() - mean).square().sum() / d;
    inv_std(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (x.row(i).array() - mean) * inv_std(i);
  }
  out = (xhat.array().rowwise() * gain.row(0).array()).rowwise() +
        bias.row(0).array();
}

}  // namespace

namespace detail {

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
}

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

void validate_batch(const EncoderConfig& config,
                    std::span<const TokenSequence> batch) {
  if (batch.empty()) throw ValidationError("forward: empty batch");
  const std::size_t len = batch.front().length();
  if (len < 1 || len > config.max_len) {
    throw ValidationError("forward: sequence length " + std::to_string(len) +
                          " outside [1, max_len=" +
                          std::to_string(config.max_len) + "]");
  }
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& seq = batch[b];
    if (seq.ids.size() != len || seq.mask.size() != len) {
      throw ValidationError("forward: batch row " + std::to_string(b) +
                            " has mismatched length");
    }
    bool in_prefix = true;
    for (std::size_t t = 0; t < len; ++t) {
      if (seq.ids[t] < 0 || static_cast<std::size_t>(seq.ids[t]) >= config.vocab_size) {
        throw ValidationError("forward: token id " + std::to_string(seq.ids[t]) +
                              " out of range for vocab_size " +
                              std::to_string(config.vocab_size));
      }
      if (seq.mask[t] > 1 || (seq.mask[t] == 1 && !in_prefix)) {
        throw ValidationError("forward: mask of row " + std::to_string(b) +
                              " is not a prefix of ones");
      }
      if (seq.mask[t] == 0) in_prefix = false;
    }
    if (seq.mask[0] != 1) {
      throw ValidationError("forward: row " + std::to_string(b) +
                            " has no unmasked tokens");
    }
  }
}

SequenceCache forward_sequence(const EncoderParams& params,
                               const EncoderConfig& config,
                               const TokenSequence& seq, std::size_t rows,
                               bool train, std::uint64_t dropout_seed,
                               std::size_t sequence_index) {
  const std::size_t d = config.d_model;
  const std::size_t dk = config.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  const bool dropout = train && config.dropout_rate > 0.0;

  SequenceCache cache;
  cache.rows = rows;
  cache.real_length = static_cast<std::size_t>(
      std::count(seq.mask.begin(), seq.mask.end(), std::uint8_t{1}));
  const auto valid = static_cast<Eigen::Index>(std::min(cache.real_length, rows));
  const auto r = static_cast<Eigen::Index>(rows);

  Matrix x(r, static_cast<Eigen::Index>(d));
  for (Eigen::Index t = 0; t < r; ++t) {
    x.row(t) = params.token_embedding.row(seq.ids[static_cast<std::size_t>(t)]) +
               params.position_embedding.row(t);
  }
  if (dropout) {
    cache.embed_dropout = dropout_multipliers(rows, d, config.dropout_rate,
                                              dropout_seed, sequence_index, 0);
    x = x.cwiseProduct(cache.embed_dropout);
  }

  cache.layers.resize(config.n_layers);
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    const auto& p = params.layers[l];
    auto& lc = cache.layers[l];
    lc.input = x;
    lc.q = x * p.query;
    lc.k = x * p.key;
    lc.v = x * p.value;
    lc.context.resize(r, static_cast<Eigen::Index>(d));
    lc.attn.resize(config.n_heads);
    for (std::size_t h = 0; h < config.n_heads; ++h) {
      const auto off = static_cast<Eigen::Index>(h * dk);
      const auto w = static_cast<Eigen::Index>(dk);
      Matrix scores = lc.q.middleCols(off, w) * lc.k.middleCols(off, w).transpose();
      scores *= scale;
      Matrix& a = lc.attn[h];
      a.setZero(r, r);
      for (Eigen::Index i = 0; i < r; ++i) {
        auto row = scores.row(i).head(valid);
        const double m = row.maxCoeff();
        a.row(i).head(valid) = (row.array() - m).exp();
        a.row(i).head(valid) /= a.row(i).head(valid).sum();
      }
      lc.context.middleCols(off, w) = a * lc.v.middleCols(off, w);
    }
    Matrix attn_out = lc.context * p.output;
    if (dropout) {
      lc.attn_dropout = dropout_multipliers(rows, d, config.dropout_rate,
                                            dropout_seed, sequence_index, 1 + 2 * l);
      attn_out = attn_out.cwiseProduct(lc.attn_dropout);
    }
    Matrix residual1 = x + attn_out;
    layer_norm(residual1, p.norm1_gain, p.norm1_bias, config.layer_norm_epsilon,
               lc.norm1_xhat, lc.norm1_inv_std, lc.x1);

    lc.ffn_pre = lc.x1 * p.ffn_in;
    lc.ffn_pre.rowwise() += p.ffn_in_bias.row(0);
    lc.ffn_act = lc.ffn_pre.unaryExpr([](double v) { return gelu(v); });
    Matrix ffn_out = lc.ffn_act * p.ffn_out;
    ffn_out.rowwise() += p.ffn_out_bias.row(0);
    if (dropout) {
      lc.ffn_dropout = dropout_multipliers(rows, d, config.dropout_rate,
                                           dropout_seed, sequence_index, 2 + 2 * l);
      ffn_out = ffn_out.cwiseProduct(lc.ffn_dropout);
    }
    Matrix residual2 = lc.x1 + ffn_out;
    layer_norm(residual2, p.norm2_gain, p.norm2_bias, config.layer_norm_epsilon,
               lc.norm2_xhat, lc.norm2_inv_std, x);
  }
  cache.hidden = std::move(x);
  return cache;
}

}  // namespace detail

void EncoderConfig::validate() const {
  if (vocab_size < Vocabulary::kNumSpecial) {
    throw ValidationError("vocab_size must cover the special tokens");
  }
  if (d_model < 1 || n_layers < 1 || n_heads < 1 || d_ff < 1 || max_len < 3 ||
      n_classes < 1) {
    throw ValidationError("encoder dimensions must be >= 1 (max_len >= 3)");
  }
  if (d_model % n_heads != 0) {
    throw ValidationError("d_model (" + std::to_string(d_model) +
                          ") must be divisible by n_heads (" +
                          std::to_string(n_heads) + ")");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ValidationError("dropout_rate must lie in [0, 1)");
  }
  if (!(layer_norm_epsilon > 0.0)) {
    throw ValidationError("layer_norm_epsilon must be positive");
  }
}

nlohmann::json EncoderConfig::to_json() const {
  return {{"vocab_size", vocab_size},
          {"d_model", d_model},
          {"n_layers", n_layers},
          {"n_heads", n_heads},
          {"d_ff", d_ff},
          {"max_len", max_len},
          {"n_classes", n_classes},
          {"dropout_rate", dropout_rate},
          {"layer_norm_epsilon", layer_norm_epsilon},
          {"head", head_name(head)}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  try {
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.d_model = j.at("d_model").get<std::size_t>();
    c.n_layers = j.at("n_layers").get<std::size_t>();
    c.n_heads = j.at("n_heads").get<std::size_t>();
    c.d_ff = j.at("d_ff").get<std::size_t>();
    c.max_len = j.at("max_len").get<std::size_t>();
    c.n_classes = j.at("n_classes").get<std::size_t>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    c.layer_norm_epsilon = j.at("layer_norm_epsilon").get<double>();
    const auto head = j.value("head", std::string("softmax"));
    if (head == "softmax") {
      c.head = HeadKind::softmax;
    } else if (head == "sigmoid") {
      c.head = HeadKind::sigmoid;
    } else {
      throw ValidationError("unknown head kind '" + head + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed encoder config: ") + e.what());
  }
  c.validate();
  return c;
}

EncoderParams EncoderParams::zeros(const EncoderConfig& c) {
  const auto d = static_cast<Eigen::Index>(c.d_model);
  const auto ff = static_cast<Eigen::Index>(c.d_ff);
  EncoderParams p;
  p.token_embedding = Matrix::Zero(static_cast<Eigen::Index>(c.vocab_size), d);
  p.position_embedding = Matrix::Zero(static_cast<Eigen::Index>(c.max_len), d);
  p.layers.resize(c.n_layers);
  for (auto& l : p.layers) {
    l.query = l.key = l.value = l.output = Matrix::Zero(d, d);
    l.ffn_in = Matrix::Zero(d, ff);
    l.ffn_in_bias = Matrix::Zero(1, ff);
    l.ffn_out = Matrix::Zero(ff, d);
    l.ffn_out_bias = Matrix::Zero(1, d);
    l.norm1_gain = l.norm1_bias = l.norm2_gain = l.norm2_bias = Matrix::Zero(1, d);
  }
  p.classifier = Matrix::Zero(d, static_cast<Eigen::Index>(c.n_classes));
  p.classifier_bias = Matrix::Zero(1, static_cast<Eigen::Index>(c.n_classes));
  return p;
}

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Matrix& m, bool) {
    n += static_cast<std::size_t>(m.size());
  });
  return n;
}

bool EncoderParams::identical(const EncoderParams& other) const {
  std::vector<const Matrix*> mine, theirs;
  for_each([&](const std::string&, const Matrix& m, bool) { mine.push_back(&m); });
  other.for_each([&](const std::string&, const Matrix& m, bool) { theirs.push_back(&m); });
  if (mine.size() != theirs.size()) return false;
  for (std::size_t i = 0; i < mine.size(); ++i) {
    const Matrix& a = *mine[i];
    const Matrix& b = *theirs[i];
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (a.size() > 0 && std::memcmp(a.data(), b.data(),
                                    sizeof(double) * static_cast<std::size_t>(a.size())) != 0) {
      return false;
    }
  }
  return true;
}

void EncoderParams::check(const EncoderConfig& config) const {
  const EncoderParams ref = zeros(config);
  std::vector<std::pair<std::string, const Matrix*>> expected;
  ref.for_each([&](const std::string& name, const Matrix& m, bool) {
    expected.emplace_back(name, &m);
  });
  std::size_t i = 0;
  bool ok = true;
  for_each([&](const std::string& name, const Matrix& m, bool) {
    if (i >= expected.size()) {
      ok = false;
      return;
    }
    const Matrix& e = *expected[i++].second;
    if (m.rows() != e.rows() || m.cols() != e.cols()) {
      throw ValidationError("tensor '" + name + "' has shape " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            ", expected " + std::to_string(e.rows()) + "x" +
                            std::to_string(e.cols()));
    }
    if (!m.allFinite()) throw ValidationError("tensor '" + name + "' is not finite");
  });
  if (!ok || i != expected.size()) {
    throw ValidationError("parameter set does not match the layer count");
  }
}

EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  EncoderParams p = EncoderParams::zeros(config);
  Rng rng(seed);
  p.for_each([&](const std::string& name, Matrix& m, bool decays) {
    if (decays) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 0.02 * rng.normal();
    } else if (name.ends_with(".gain")) {
      m.setOnes();
    }
  });
  return p;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.begin(), scores.end());
  if (out.empty()) return out;
  const double m = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (auto& v : out) {
    v = std::exp(v - m);
    sum += v;
  }
  for (auto& v : out) v /= sum;
  return out;
}

std::vector<int> predicted_labels(const Matrix& probs) {
  std::vector<int> out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < probs.cols(); ++j) {
      if (probs(i, j) > probs(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

ForwardOutput forward(const EncoderParams& params, const EncoderConfig& config,
                      std::span<const TokenSequence> batch,
                      const ForwardOptions& options) {
  detail::validate_batch(config, batch);
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto nc = static_cast<Eigen::Index>(config.n_classes);
  const bool train = options.mode == Mode::train;

  ForwardOutput out;
  out.logits.resize(n, nc);
  out.probs.resize(n, nc);
  out.h_cls.resize(n, static_cast<Eigen::Index>(config.d_model));
  if (options.capture_attention) out.attention.resize(batch.size());

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& seq = batch[b];
    const std::size_t real = static_cast<std::size_t>(
        std::count(seq.mask.begin(), seq.mask.end(), std::uint8_t{1}));
    const std::size_t rows = options.capture_attention ? seq.length() : real;
    auto cache = detail::forward_sequence(params, config, seq, rows, train,
                                          options.dropout_seed, b);
    const auto row = static_cast<Eigen::Index>(b);
    out.h_cls.row(row) = cache.hidden.row(0);
    out.logits.row(row) = cache.hidden.row(0) * params.classifier + params.classifier_bias;

    if (config.head == HeadKind::softmax) {
      std::vector<double> z(out.logits.row(row).begin(), out.logits.row(row).end());
      auto p = softmax(z);
      for (Eigen::Index j = 0; j < nc; ++j) out.probs(row, j) = p[static_cast<std::size_t>(j)];
    } else {
      out.probs.row(row) = out.logits.row(row).unaryExpr(
          [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    }

    if (options.capture_attention) {
      auto& maps = out.attention[b];
      maps.n_layers = config.n_layers;
      maps.n_heads = config.n_heads;
      maps.length = rows;
      maps.values.resize(config.n_layers * config.n_heads * rows * rows);
      std::size_t pos = 0;
      for (const auto& lc : cache.layers) {
        for (const auto& a : lc.attn) {
          std::copy(a.data(), a.data() + a.size(), maps.values.begin() +
                                                       static_cast<std::ptrdiff_t>(pos));
          pos += static_cast<std::size_t>(a.size());
        }
      }
    }
  }
  if (!out.probs.allFinite()) throw NumericalError("forward produced non-finite probabilities");
  return out;
}

std::vector<TokenSequence> encode_batch(std::span<const std::string> texts,
                                        const Vocabulary& vocab,
                                        std::size_t max_len) {
  std::vector<TokenSequence> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(encode(t, vocab, max_len));
  return out;
}

Matrix predict_probs(const Model& model, std::span<const std::string> texts,
                     std::size_t batch_size) {
  const auto nc = static_cast<Eigen::Index>(model.config.n_classes);
  Matrix probs(static_cast<Eigen::Index>(texts.size()), nc);
  batch_size = std::max<std::size_t>(batch_size, 1);
  for (std::size_t start = 0; start < texts.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, texts.size() - start);
    auto batch = encode_batch(texts.subspan(start, count), model.vocab,
                              model.config.max_len);
    auto out = forward(model.params, model.config, batch);
    probs.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(count)) =
        out.probs;
  }
  return probs;
}

Model majority_baseline(std::size_t n_positive, std::size_t n_total) {
  if (n_positive > n_total) throw ValidationError("n_positive exceeds n_total");
  Model m;
  m.config.vocab_size = Vocabulary::kNumSpecial;
  m.config.d_model = 4;
  m.config.n_layers = 1;
  m.config.n_heads = 1;
  m.config.d_ff = 4;
  m.config.dropout_rate = 0.0;
  m.params = EncoderParams::zeros(m.config);
  for (auto& l : m.params.layers) {
    l.norm1_gain.setOnes();
    l.norm2_gain.setOnes();
  }
  const double total = static_cast<double>(n_total) + 2.0;
  m.params.classifier_bias(0, 0) =
      std::log((static_cast<double>(n_total - n_positive) + 1.0) / total);
  m.params.classifier_bias(0, 1) = std::log((static_cast<double>(n_positive) + 1.0) / total);
  m.info.kind = "majority_baseline";
  return m;
}

}  // namespace biaslab
