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

// Reverse-mode gradients for the encoder, written out by hand against the
// forward pass in encoder.cpp.

#include <algorithm>
#include <cmath>

#include "biaslab/error.hpp"
#include "biaslab/trainer.hpp"
#include "encoder_internal.hpp"

namespace biaslab {

namespace {

constexpr double kProbClamp = 1e-12;

Matrix layer_norm_backward(const Matrix& dy, const Matrix& xhat,
                           const Eigen::VectorXd& inv_std, const Matrix& gain,
                           Matrix& dgain, Matrix& dbias) {
  dgain.row(0) += dy.cwiseProduct(xhat).colwise().sum();
  dbias.row(0) += dy.colwise().sum();
  Matrix dxhat = dy.array().rowwise() * gain.row(0).array();
  const double d = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double mean_dxhat = dxhat.row(i).sum() / d;
    const double mean_dxhat_xhat = dxhat.row(i).dot(xhat.row(i)) / d;
    dx.row(i) = inv_std(i) * (dxhat.row(i).array() - mean_dxhat -
                              xhat.row(i).array() * mean_dxhat_xhat);
  }
  return dx;
}

void backprop_sequence(const EncoderParams& params, const EncoderConfig& config,
                       const TokenSequence& seq, const detail::SequenceCache& cache,
                       const Eigen::RowVectorXd& dh, EncoderParams& grads) {
  const auto r = static_cast<Eigen::Index>(cache.rows);
  const auto d = static_cast<Eigen::Index>(config.d_model);
  const auto dk = static_cast<Eigen::Index>(config.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  Matrix dx = Matrix::Zero(r, d);
  dx.row(0) = dh;

  for (std::size_t li = config.n_layers; li-- > 0;) {
    const auto& p = params.layers[li];
    auto& g = grads.layers[li];
    const auto& lc = cache.layers[li];

    Matrix d_res2 = layer_norm_backward(dx, lc.norm2_xhat, lc.norm2_inv_std,
                                        p.norm2_gain, g.norm2_gain, g.norm2_bias);
    Matrix d_ffn_out = d_res2;
    if (lc.ffn_dropout.size() > 0) d_ffn_out = d_ffn_out.cwiseProduct(lc.ffn_dropout);
    g.ffn_out.noalias() += lc.ffn_act.transpose() * d_ffn_out;
    g.ffn_out_bias.row(0) += d_ffn_out.colwise().sum();
    Matrix d_pre = d_ffn_out * p.ffn_out.transpose();
    d_pre.array() *= lc.ffn_pre.unaryExpr([](double v) {
      return detail::gelu_derivative(v);
    }).array();
    g.ffn_in.noalias() += lc.x1.transpose() * d_pre;
    g.ffn_in_bias.row(0) += d_pre.colwise().sum();
    Matrix d_x1 = d_res2;
    d_x1.noalias() += d_pre * p.ffn_in.transpose();

    Matrix d_res1 = layer_norm_backward(d_x1, lc.norm1_xhat, lc.norm1_inv_std,
                                        p.norm1_gain, g.norm1_gain, g.norm1_bias);
    Matrix d_attn_out = d_res1;
    if (lc.attn_dropout.size() > 0) d_attn_out = d_attn_out.cwiseProduct(lc.attn_dropout);
    g.output.noalias() += lc.context.transpose() * d_attn_out;
    Matrix d_context = d_attn_out * p.output.transpose();

    Matrix dq = Matrix::Zero(r, d);
    Matrix dk_all = Matrix::Zero(r, d);
    Matrix dv = Matrix::Zero(r, d);
    for (std::size_t h = 0; h < config.n_heads; ++h) {
      const auto off = static_cast<Eigen::Index>(h) * dk;
      const Matrix& a = lc.attn[h];
      Matrix d_ctx_h = d_context.middleCols(off, dk);
      Matrix da = d_ctx_h * lc.v.middleCols(off, dk).transpose();
      dv.middleCols(off, dk).noalias() += a.transpose() * d_ctx_h;
      // Softmax Jacobian; masked entries have a = 0 and drop out.
      Eigen::VectorXd row_dot = da.cwiseProduct(a).rowwise().sum();
      Matrix ds = a.cwiseProduct((da.colwise() - row_dot).matrix());
      ds *= scale;
      dq.middleCols(off, dk).noalias() += ds * lc.k.middleCols(off, dk);
      dk_all.middleCols(off, dk).noalias() += ds.transpose() * lc.q.middleCols(off, dk);
    }
    g.query.noalias() += lc.input.transpose() * dq;
    g.key.noalias() += lc.input.transpose() * dk_all;
    g.value.noalias() += lc.input.transpose() * dv;

    dx = d_res1;
    dx.noalias() += dq * p.query.transpose();
    dx.noalias() += dk_all * p.key.transpose();
    dx.noalias() += dv * p.value.transpose();
  }

  if (cache.embed_dropout.size() > 0) dx = dx.cwiseProduct(cache.embed_dropout);
  for (Eigen::Index t = 0; t < r; ++t) {
    grads.token_embedding.row(seq.ids[static_cast<std::size_t>(t)]) += dx.row(t);
    grads.position_embedding.row(t) += dx.row(t);
  }
}

Eigen::RowVectorXd head_probs(const Eigen::RowVectorXd& logits, HeadKind head) {
  Eigen::RowVectorXd p(logits.size());
  if (head == HeadKind::softmax) {
    std::vector<double> z(logits.data(), logits.data() + logits.size());
    auto s = softmax(z);
    for (Eigen::Index j = 0; j < logits.size(); ++j) p(j) = s[static_cast<std::size_t>(j)];
  } else {
    p = logits.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
  return p;
}

bool clamped(double p) { return p < kProbClamp || p > 1.0 - kProbClamp; }

// d(batch_loss)/d(logits) for one row, given the batch size.
Eigen::RowVectorXd logit_gradient(const Eigen::RowVectorXd& probs,
                                  const Eigen::RowVectorXd& target, HeadKind head,
                                  std::size_t batch) {
  const auto n = static_cast<double>(batch);
  const auto k = probs.size();
  if (head == HeadKind::sigmoid) {
    Eigen::RowVectorXd dz = (probs - target) / (n * static_cast<double>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
      if (clamped(probs(j))) dz(j) = 0.0;
    }
    return dz;
  }
  Eigen::Index cls = 0;
  target.maxCoeff(&cls);
  const double p_loss = k == 2 ? probs(1) : probs(cls);
  if (clamped(p_loss)) return Eigen::RowVectorXd::Zero(k);
  return (probs - target) / n;
}

}  // namespace

double batch_loss(const Matrix& probs, const Matrix& targets, HeadKind head) {
  if (probs.rows() != targets.rows() || probs.cols() != targets.cols()) {
    throw ValidationError("loss: probabilities and targets differ in shape");
  }
  if (probs.rows() == 0) throw ValidationError("loss: empty batch");
  if (head == HeadKind::softmax && probs.cols() == 2) {
    std::vector<double> p(static_cast<std::size_t>(probs.rows()));
    std::vector<int> y(p.size());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      p[static_cast<std::size_t>(i)] = probs(i, 1);
      y[static_cast<std::size_t>(i)] = targets(i, 1) > 0.5 ? 1 : 0;
    }
    return bce_loss(p, y);
  }
  double sum = 0.0;
  if (head == HeadKind::softmax) {
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      Eigen::Index cls = 0;
      targets.row(i).maxCoeff(&cls);
      sum -= std::log(std::clamp(probs(i, cls), kProbClamp, 1.0 - kProbClamp));
    }
    return sum / static_cast<double>(probs.rows());
  }
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      const double p = std::clamp(probs(i, j), kProbClamp, 1.0 - kProbClamp);
      const double y = targets(i, j);
      sum -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    }
  }
  return sum / static_cast<double>(probs.size());
}

GradientResult backward(const EncoderParams& params, const EncoderConfig& config,
                        std::span<const TokenSequence> batch, const Matrix& targets,
                        std::uint64_t dropout_seed) {
  detail::validate_batch(config, batch);
  if (targets.rows() != static_cast<Eigen::Index>(batch.size()) ||
      targets.cols() != static_cast<Eigen::Index>(config.n_classes)) {
    throw ValidationError("backward: targets shape does not match batch x n_classes");
  }
  GradientResult result;
  result.grads = EncoderParams::zeros(config);
  Matrix probs(targets.rows(), targets.cols());

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& seq = batch[b];
    const std::size_t real = static_cast<std::size_t>(
        std::count(seq.mask.begin(), seq.mask.end(), std::uint8_t{1}));
    auto cache = detail::forward_sequence(params, config, seq, real, true,
                                          dropout_seed, b);
    const Eigen::RowVectorXd h = cache.hidden.row(0);
    const Eigen::RowVectorXd logits = h * params.classifier + params.classifier_bias;
    const Eigen::RowVectorXd p = head_probs(logits, config.head);
    probs.row(static_cast<Eigen::Index>(b)) = p;

    const Eigen::RowVectorXd dz = logit_gradient(
        p, targets.row(static_cast<Eigen::Index>(b)), config.head, batch.size());
    result.grads.classifier.noalias() += h.transpose() * dz;
    result.grads.classifier_bias.row(0) += dz;
    const Eigen::RowVectorXd dh = dz * params.classifier.transpose();
    backprop_sequence(params, config, seq, cache, dh, result.grads);
  }
  result.loss = batch_loss(probs, targets, config.head);
  if (!std::isfinite(result.loss)) throw NumericalError("non-finite training loss");
  return result;
}

double loss_at(const EncoderParams& params, const EncoderConfig& config,
               std::span<const TokenSequence> batch, const Matrix& targets,
               Mode mode, std::uint64_t dropout_seed) {
  ForwardOptions opts;
  opts.mode = mode;
  opts.dropout_seed = dropout_seed;
  auto out = forward(params, config, batch, opts);
  return batch_loss(out.probs, targets, config.head);
}

}  // namespace biaslab
