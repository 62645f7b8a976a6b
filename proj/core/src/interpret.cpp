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

#include "biaslab/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "biaslab/error.hpp"

namespace biaslab {

namespace {

double positive_probability(const Matrix& probs, Eigen::Index row) {
  if (probs.cols() == 2) return probs(row, 1);
  return probs.row(row).maxCoeff();
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

nlohmann::json TokenAttribution::to_json() const {
  return {{"tokens", tokens},
          {"weights", weights},
          {"meta",
           {{"layer", layer},
            {"aggregation", aggregation},
            {"predicted_label", predicted_label},
            {"probability", probability}}}};
}

TokenAttribution TokenAttribution::from_json(const nlohmann::json& j) {
  TokenAttribution a;
  try {
    a.tokens = j.at("tokens").get<std::vector<std::string>>();
    a.weights = j.at("weights").get<std::vector<double>>();
    const auto& meta = j.at("meta");
    a.layer = meta.at("layer").get<std::size_t>();
    a.aggregation = meta.at("aggregation").get<std::string>();
    a.predicted_label = meta.at("predicted_label").get<int>();
    a.probability = meta.at("probability").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed attribution: ") + e.what());
  }
  if (a.tokens.size() != a.weights.size()) {
    throw ValidationError("attribution tokens and weights differ in length");
  }
  return a;
}

TokenAttribution cls_attention(const Model& model, std::string_view sentence) {
  const TokenSequence seq = encode(sentence, model.vocab, model.config.max_len);
  const std::size_t real = seq.real_length();
  if (real <= 2) {
    throw ValidationError("sentence reduces to zero real tokens");
  }
  ForwardOptions opts;
  opts.capture_attention = true;
  auto out = forward(model.params, model.config, std::span<const TokenSequence>(&seq, 1), opts);
  const AttentionMaps& maps = out.attention.front();
  const std::size_t layer = maps.n_layers - 1;

  TokenAttribution attr;
  attr.layer = layer;
  attr.predicted_label = predicted_labels(out.probs).front();
  attr.probability = positive_probability(out.probs, 0);
  double total = 0.0;
  for (std::size_t key = 1; key + 1 < real; ++key) {
    double w = 0.0;
    for (std::size_t h = 0; h < maps.n_heads; ++h) w += maps.at(layer, h, 0, key);
    w /= static_cast<double>(maps.n_heads);
    attr.tokens.push_back(seq.token_strings[key]);
    attr.weights.push_back(w);
    total += w;
  }
  if (!(total > 0.0)) throw NumericalError("attention mass on content tokens is zero");
  for (auto& w : attr.weights) w /= total;
  return attr;
}

const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::false_positive: return "false_positive";
    case ErrorCategory::false_negative: return "false_negative";
    case ErrorCategory::correct: break;
  }
  return "correct";
}

ErrorCategory categorize(int gold, int predicted) {
  if (gold == predicted) return ErrorCategory::correct;
  return predicted == 1 ? ErrorCategory::false_positive : ErrorCategory::false_negative;
}

nlohmann::json ErrorCase::to_json() const {
  return {{"id", id},
          {"text", text},
          {"gold", gold},
          {"predicted", {predicted[0], predicted[1]}},
          {"probability", {probability[0], probability[1]}},
          {"category", {to_string(category[0]), to_string(category[1])}}};
}

std::vector<ErrorCase> error_cases_from_probs(const LabeledCorpus& corpus,
                                              std::span<const double> prob_a,
                                              std::span<const double> prob_b) {
  if (prob_a.size() != corpus.size() || prob_b.size() != corpus.size()) {
    throw ValidationError("error_cases: one probability per sentence required");
  }
  std::vector<ErrorCase> cases;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus[i];
    ErrorCase c;
    c.id = s.id;
    c.text = s.text;
    c.gold = s.label;
    c.probability = {prob_a[i], prob_b[i]};
    // Argmax of (1 - p, p): ties go to class 0.
    c.predicted = {prob_a[i] > 0.5 ? 1 : 0, prob_b[i] > 0.5 ? 1 : 0};
    c.category = {categorize(s.label, c.predicted[0]), categorize(s.label, c.predicted[1])};
    const bool listed = c.predicted[0] != c.predicted[1] ||
                        c.category[0] != ErrorCategory::correct ||
                        c.category[1] != ErrorCategory::correct;
    if (listed) cases.push_back(std::move(c));
  }
  std::stable_sort(cases.begin(), cases.end(), [](const ErrorCase& x, const ErrorCase& y) {
    return std::abs(x.probability[0] - x.probability[1]) >
           std::abs(y.probability[0] - y.probability[1]);
  });
  return cases;
}

std::vector<ErrorCase> error_cases(const Model& a, const Model& b,
                                   const LabeledCorpus& corpus,
                                   const std::optional<FoldSelector>& split) {
  LabeledCorpus scope = corpus;
  if (split) {
    const SplitPlan plan = split->plan.aligned_to(corpus);
    auto idx = plan.test_indices(split->partition, split->fold);
    scope = corpus.subset(idx);
  }
  auto texts = scope.texts();
  const Matrix pa = predict_probs(a, texts);
  const Matrix pb = predict_probs(b, texts);
  std::vector<double> prob_a(scope.size()), prob_b(scope.size());
  for (std::size_t i = 0; i < scope.size(); ++i) {
    prob_a[i] = positive_probability(pa, static_cast<Eigen::Index>(i));
    prob_b[i] = positive_probability(pb, static_cast<Eigen::Index>(i));
  }
  return error_cases_from_probs(scope, prob_a, prob_b);
}

std::string heatmap_svg(const TokenAttribution& attr) {
  if (attr.tokens.size() != attr.weights.size() || attr.tokens.empty()) {
    throw ValidationError("heatmap: attribution must pair each token with a weight");
  }
  constexpr int kCellHeight = 36;
  constexpr int kCharWidth = 9;
  constexpr int kPadding = 12;
  const double max_w = *std::max_element(attr.weights.begin(), attr.weights.end());

  std::vector<int> widths;
  int total_width = 0;
  for (const auto& t : attr.tokens) {
    widths.push_back(static_cast<int>(t.size()) * kCharWidth + kPadding);
    total_width += widths.back();
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total_width
      << "\" height=\"" << kCellHeight << "\" font-family=\"monospace\" font-size=\"14\">\n";
  int x = 0;
  for (std::size_t i = 0; i < attr.tokens.size(); ++i) {
    const double opacity = max_w > 0.0 ? attr.weights[i] / max_w : 0.0;
    svg << "  <g class=\"cell\">"
        << "<title>" << xml_escape(attr.tokens[i]) << ": " << fixed(attr.weights[i], 3)
        << "</title>"
        << "<rect x=\"" << x << "\" y=\"0\" width=\"" << widths[i] << "\" height=\""
        << kCellHeight << "\" fill=\"#d62728\" fill-opacity=\"" << fixed(opacity, 4)
        << "\" stroke=\"#999999\"/>"
        << "<text x=\"" << x + widths[i] / 2 << "\" y=\"" << kCellHeight / 2 + 5
        << "\" text-anchor=\"middle\">" << xml_escape(attr.tokens[i]) << "</text>"
        << "</g>\n";
    x += widths[i];
  }
  svg << "</svg>\n";
  return svg.str();
}

void export_heatmap(const TokenAttribution& attr, const std::filesystem::path& path,
                    HeatmapFormat format) {
  std::string content = format == HeatmapFormat::json ? attr.to_json().dump(2) + "\n"
                                                      : heatmap_svg(attr);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write heatmap " + path.string());
  out << content;
  if (!out) throw IoError("failed writing heatmap " + path.string());
}

std::string render_terminal(const TokenAttribution& attr) {
  std::string out;
  for (std::size_t i = 0; i < attr.tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += attr.tokens[i] + ":" + fixed(attr.weights[i], 3);
  }
  return out;
}

}  // namespace biaslab
