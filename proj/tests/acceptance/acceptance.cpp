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

// Acceptance suite: one pass/fail line per criterion. Run without arguments
// for all criteria or with criterion numbers to select a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "biaslab/corpus.hpp"
#include "biaslab/encoder.hpp"
#include "biaslab/interpret.hpp"
#include "biaslab/metrics.hpp"
#include "biaslab/pipeline.hpp"
#include "biaslab/random.hpp"
#include "biaslab/stattests.hpp"
#include "biaslab/trainer.hpp"
#include "cli/app.hpp"
#include "reference_encoder.hpp"

namespace fs = std::filesystem;
using namespace biaslab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() /
                   ("biaslab_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "biaslab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

LabeledCorpus synthetic(std::size_t n, std::uint64_t seed, double noise) {
  SyntheticOptions o;
  o.n = n;
  o.seed = seed;
  o.noise_rate = noise;
  o.bias_lexicon = default_bias_lexicon();
  o.neutral_lexicon = default_neutral_lexicon();
  return generate_synthetic(o);
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  EncoderConfig c;
  c.d_model = 64;
  c.n_layers = 2;
  c.n_heads = 4;
  c.d_ff = 256;
  c.max_len = 16;
  c.dropout_rate = 0.1;
  const auto corpus = synthetic(4, 21, 0.0);
  const Vocabulary vocab = build_vocab(corpus, 1, 1000);
  c.vocab_size = vocab.size();

  // Parameters away from initialization so that every tensor carries a
  // non-trivial gradient.
  EncoderParams p = init_params(c, 5);
  Rng rng(77);
  p.for_each([&](const std::string& name, Matrix& m, bool) {
    const bool gain = name.find("gain") != std::string::npos;
    for (auto& x : m.reshaped()) x = (gain ? 1.0 : 0.0) + 0.1 * rng.normal();
  });
  std::vector<TokenSequence> batch;
  for (const auto& s : corpus.sentences()) batch.push_back(encode(s.text, vocab, c.max_len));
  const Matrix targets = one_hot(corpus.labels());
  const std::uint64_t dropout_seed = 99;

  const auto analytic = backward(p, c, batch, targets, dropout_seed);
  std::vector<std::pair<std::string, Matrix*>> tensors;
  std::vector<const Matrix*> grads;
  p.for_each([&](const std::string& n, Matrix& m, bool) { tensors.emplace_back(n, &m); });
  analytic.grads.for_each([&](const std::string&, const Matrix& m, bool) { grads.push_back(&m); });

  // Central differences of an extended-precision replay of the same
  // train-mode forward pass; double-precision loss evaluation would add
  // ~1e-11 of roundoff to every difference quotient.
  constexpr double h = 1e-5;
  double worst = 0.0;
  std::string worst_name;
  for (int s = 0; s < 25; ++s) {
    const std::size_t t = rng.below(tensors.size());
    Matrix& m = *tensors[t].second;
    const std::size_t k = rng.below(static_cast<std::uint64_t>(m.size()));
    const double orig = m.data()[k];
    m.data()[k] = orig + h;
    const auto up = testing::ref_loss(p, c, batch, targets, true, dropout_seed);
    m.data()[k] = orig - h;
    const auto down = testing::ref_loss(p, c, batch, targets, true, dropout_seed);
    m.data()[k] = orig;
    const double numeric = static_cast<double>((up - down) / (2.0L * h));
    const double a = grads[t]->data()[k];
    const double scale = std::max(std::abs(a), std::abs(numeric));
    const double rel = scale == 0.0 ? 0.0 : std::abs(a - numeric) / scale;
    if (rel >= worst) {
      worst = rel;
      worst_name = tensors[t].first;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs <= 10.0,
          "worst relative error " + fmt("%.2e", worst) + " (" + worst_name +
              ") <= 1e-6 over 25 coordinates, " + fmt("%.2f", secs) + " s <= 10 s"};
}

// ---------------------------------------------------------------------------
// 2. Normalization invariants

Outcome normalization_invariants() {
  Rng rng(2024);
  double worst_softmax = 0.0, worst_attention = 0.0;
  std::size_t padded_nonzero = 0, padded_checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    EncoderConfig c;
    c.vocab_size = 20 + rng.below(40);
    c.n_heads = 1 + rng.below(4);
    c.d_model = c.n_heads * (2 + rng.below(8));
    c.n_layers = 1 + rng.below(3);
    c.d_ff = 4 + rng.below(32);
    c.max_len = 24;
    c.n_classes = 2;
    EncoderParams p = init_params(c, rng.next());
    p.for_each([&](const std::string&, Matrix& m, bool) {
      for (auto& x : m.reshaped()) x += rng.normal();
    });
    const std::size_t len = 3 + rng.below(c.max_len - 2);
    const std::size_t rows = 1 + rng.below(6);
    std::vector<TokenSequence> batch(rows);
    for (auto& seq : batch) {
      const std::size_t real = 1 + rng.below(len);
      for (std::size_t t = 0; t < len; ++t) {
        seq.ids.push_back(t < real ? static_cast<TokenId>(rng.below(c.vocab_size))
                                   : Vocabulary::kPad);
        seq.mask.push_back(t < real ? 1 : 0);
      }
    }
    ForwardOptions opts;
    opts.capture_attention = true;
    const auto out = forward(p, c, batch, opts);
    for (Eigen::Index r = 0; r < out.probs.rows(); ++r) {
      worst_softmax = std::max(worst_softmax, std::abs(out.probs.row(r).sum() - 1.0));
    }
    for (std::size_t b = 0; b < rows; ++b) {
      const auto& maps = out.attention[b];
      const std::size_t real = static_cast<std::size_t>(
          std::count(batch[b].mask.begin(), batch[b].mask.end(), std::uint8_t{1}));
      for (std::size_t l = 0; l < maps.n_layers; ++l) {
        for (std::size_t h = 0; h < maps.n_heads; ++h) {
          for (std::size_t q = 0; q < maps.length; ++q) {
            double sum = 0.0;
            for (std::size_t k = 0; k < maps.length; ++k) {
              sum += maps.at(l, h, q, k);
              if (k >= real) {
                ++padded_checked;
                if (maps.at(l, h, q, k) != 0.0) ++padded_nonzero;
              }
            }
            worst_attention = std::max(worst_attention, std::abs(sum - 1.0));
          }
        }
      }
    }
  }
  const bool pass = worst_softmax <= 1e-9 && worst_attention <= 1e-9 && padded_nonzero == 0 &&
                    padded_checked > 0;
  return {pass, "max |softmax row sum - 1| " + fmt("%.1e", worst_softmax) +
                    ", max |attention row sum - 1| " + fmt("%.1e", worst_attention) +
                    " (<= 1e-9), nonzero padded keys " + std::to_string(padded_nonzero) +
                    " of " + std::to_string(padded_checked)};
}

// ---------------------------------------------------------------------------
// 3. Statistical oracles

Outcome statistical_oracles() {
  const auto t0 = Clock::now();
  const double c1 = chi2_sf(3.841, 1), c2 = chi2_sf(6.635, 1);
  const double t1 = t_sf_two_tailed(2.571, 5), t2 = t_sf_two_tailed(4.032, 5);
  const ContingencyTable table{0, 15, 5, 0};
  const double m_plain = mcnemar(table, false).chi2;
  const double m_corr = mcnemar(table, true).chi2;
  std::array<std::array<double, 2>, 5> d{};
  for (auto& pair : d) pair = {0.1, 0.2};
  const double t52 = five_by_two_ttest(d).t;
  const double secs = seconds_since(t0);
  const bool pass = std::abs(c1 - 0.05) <= 5e-4 && std::abs(c2 - 0.01) <= 5e-4 &&
                    std::abs(t1 - 0.05) <= 5e-4 && std::abs(t2 - 0.01) <= 5e-4 &&
                    m_plain == 5.0 && m_corr == 4.05 && std::abs(t52 - 1.414214) <= 1e-6 &&
                    std::abs(t52 - std::sqrt(2.0)) <= 1e-9 && secs <= 1.0;
  return {pass, "chi2_sf " + fmt("%.5f", c1) + "/" + fmt("%.5f", c2) + ", t_sf " +
                    fmt("%.5f", t1) + "/" + fmt("%.5f", t2) + ", McNemar " +
                    fmt("%.17g", m_plain) + "/" + fmt("%.17g", m_corr) + ", 5x2 t " +
                    fmt("%.9f", t52) + ", " + fmt("%.4f", secs) + " s <= 1 s"};
}

// ---------------------------------------------------------------------------
// 4. Oracle equivalence

double brute_force_macro_f1(const std::vector<int>& pred, const std::vector<int>& gold) {
  double total = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (pred[i] == cls && gold[i] == cls) tp += 1;
      if (pred[i] == cls && gold[i] != cls) fp += 1;
      if (pred[i] != cls && gold[i] == cls) fn += 1;
    }
    // F1 = 2TP / (2TP + FP + FN), 0 when the class never occurs nor is predicted.
    total += (tp + fp + fn) == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
  }
  return total / 2;
}

// Upper tail of the chi-squared(1) density by composite Simpson quadrature
// after substituting t = u^2: P(X > x) = 2 * int_{sqrt x}^inf phi(u) du.
double chi2_quadrature(double x) {
  const long double a = std::sqrt(static_cast<long double>(x));
  const long double b = a + 40.0L;
  const int n = 20000;
  const long double h = (b - a) / n;
  auto phi = [](long double u) {
    return std::exp(-u * u / 2) / std::sqrt(2 * 3.14159265358979323846264338327950288L);
  };
  long double s = phi(a) + phi(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * phi(a + i * h);
  return static_cast<double>(2 * s * h / 3);
}

Outcome oracle_equivalence() {
  Rng rng(404);
  double worst_f1 = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<int> pred(n), gold(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng.below(2));
      gold[i] = static_cast<int>(rng.below(2));
    }
    worst_f1 = std::max(worst_f1, std::abs(macro_f1(confusion(pred, gold)) -
                                           brute_force_macro_f1(pred, gold)));
  }
  double worst_chi2 = 0.0, worst_p = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    ContingencyTable t;
    t.n00 = rng.below(100);
    t.n11 = rng.below(100);
    t.n01 = rng.below(60);
    t.n10 = rng.below(60);
    if (t.n01 + t.n10 == 0) t.n01 = 1;
    const bool corr = trial % 2 == 1;
    const auto r = mcnemar(t, corr);
    const double b = static_cast<double>(t.n01), c = static_cast<double>(t.n10);
    const double num = std::max(std::abs(b - c) - (corr ? 1.0 : 0.0), 0.0);
    worst_chi2 = std::max(worst_chi2, std::abs(r.chi2 - num * num / (b + c)));
    worst_p = std::max(worst_p, std::abs(r.p_value - chi2_quadrature(r.chi2)));
  }
  const bool pass = worst_f1 <= 1e-12 && worst_chi2 == 0.0 && worst_p <= 1e-6;
  return {pass, "macro F1 max deviation " + fmt("%.1e", worst_f1) +
                    " (<= 1e-12, 1000 vectors), McNemar chi2 max deviation " +
                    fmt("%.1e", worst_chi2) + " (exact, 200 tables), p vs quadrature " +
                    fmt("%.1e", worst_p) + " (<= 1e-6)"};
}

// ---------------------------------------------------------------------------
// 5. Stratification

Outcome stratification() {
  Rng rng(5005);
  double worst = 0.0;
  std::size_t partition_failures = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 20 + rng.below(381);
    const double skew = 0.1 + 0.8 * rng.uniform();
    auto n_pos = static_cast<std::size_t>(std::llround(skew * static_cast<double>(n)));
    n_pos = std::clamp<std::size_t>(n_pos, 2, n - 2);
    std::vector<int> labels(n, 0);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
    rng.shuffle(std::span<int>(labels));
    std::vector<LabeledSentence> rows;
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back({"s" + std::to_string(i), "sentence " + std::to_string(i), labels[i], {}});
    }
    const LabeledCorpus corpus(std::move(rows));
    const std::size_t smallest = std::min(n_pos, n - n_pos);
    const int k = 2 + static_cast<int>(rng.below(std::min<std::size_t>(9, smallest - 1)));
    const auto plan = stratified_kfold(corpus, k, rng.next());

    std::vector<int> seen(n, 0);
    for (int f = 0; f < k; ++f) {
      const auto test = plan.test_indices(0, f);
      std::array<double, 2> count{0, 0};
      for (auto i : test) {
        ++seen[i];
        count[static_cast<std::size_t>(corpus[i].label)] += 1;
      }
      for (int cls = 0; cls < 2; ++cls) {
        const double ideal =
            static_cast<double>(corpus.label_count(cls)) / static_cast<double>(k);
        worst = std::max(worst, std::abs(count[static_cast<std::size_t>(cls)] - ideal));
      }
      const auto train = plan.train_indices(0, f);
      if (train.size() + test.size() != n) ++partition_failures;
    }
    if (std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; })) {
      ++partition_failures;
    }
  }
  return {worst <= 1.0 && partition_failures == 0,
          "max per-class deviation from ideal " + fmt("%.3f", worst) +
              " (<= 1) over 500 corpora, partition violations " +
              std::to_string(partition_failures)};
}

// ---------------------------------------------------------------------------
// 6. Overfit sanity

Outcome overfit_sanity() {
  const auto t0 = Clock::now();
  const auto corpus = synthetic(32, 6, 0.0);
  EncoderConfig ec;
  ec.max_len = 32;
  TrainConfig tc = TrainConfig::synthetic();
  tc.seed = 6;
  tc.max_epochs = 200;
  tc.patience = 200;  // the whole 200-epoch budget is available
  const auto first = train(corpus, corpus, ec, tc);
  const auto second = train(corpus, corpus, ec, tc);
  const double secs = seconds_since(t0);
  const bool deterministic =
      first.model.params.identical(second.model.params) &&
      first.history.to_json() == second.history.to_json();
  const bool reached = first.history.best_f1() == 1.0 && first.history.best_epoch <= 200;
  return {reached && deterministic && secs <= 60.0,
          "best validation macro F1 " + fmt("%.4f", first.history.best_f1()) + " at epoch " +
              std::to_string(first.history.best_epoch) + " (<= 200), repeat run " +
              (deterministic ? "bit-identical" : "DIFFERS") + ", " + fmt("%.1f", secs) +
              " s for two runs <= 60 s"};
}

// ---------------------------------------------------------------------------
// 7. End-to-end desk experiment

Outcome end_to_end() {
  const auto t0 = Clock::now();
  const auto dir = scratch_dir("end_to_end");
  const auto corpus = (dir / "corpus.csv").string();
  const auto plan = (dir / "plan.json").string();
  const auto det = (dir / "detector.ckpt").string();
  const auto base = (dir / "baseline.ckpt").string();
  std::vector<std::string> failures;
  auto must = [&](const CliRun& r, const std::string& what) {
    if (r.code != 0) failures.push_back(what + " exited " + std::to_string(r.code) + ": " + r.err);
    return r.code == 0;
  };
  must(cli({"generate", "--out", corpus, "--n", "2000", "--noise", "0.05", "--seed", "7"}),
       "generate");
  must(cli({"split", "--corpus", corpus, "--k", "5", "--seed", "7", "--out", plan}), "split");

  const auto eval_json = cli({"eval", "--corpus", corpus, "--plan", plan, "--seed", "7",
                              "--preset", "synthetic", "--name", "detector"});
  double mean_f1 = 0.0;
  std::size_t folds = 0;
  if (must(eval_json, "eval")) {
    const auto j = nlohmann::json::parse(eval_json.out);
    mean_f1 = j.at("mean").get<double>();
    folds = j.at("per_fold").size();
  }
  must(cli({"train", "--corpus", corpus, "--out", det, "--seed", "7"}), "train");
  must(cli({"baseline", "--corpus", corpus, "--out", base}), "baseline");
  const auto cmp = cli({"compare", "--corpus", corpus, "--plan", plan, "-a", det, "-b", base,
                        "--retrain", "--mcnemar", "--seed", "7", "--name-a", "detector",
                        "--name-b", "majority", "--format", "table", "--report",
                        (dir / "compare.json").string()});
  bool all_significant = false;
  double worst_p = 1.0;
  std::string table;
  if (must(cmp, "compare")) {
    table = cmp.out;
    const auto j = nlohmann::json::parse(read_bytes(dir / "compare.json"));
    all_significant = true;
    worst_p = 0.0;
    for (const auto& f : j.at("mcnemar").at("per_fold")) {
      if (!f.contains("p")) {
        all_significant = false;
        continue;
      }
      worst_p = std::max(worst_p, f.at("p").get<double>());
      all_significant = all_significant && f.at("p").get<double>() < 0.05;
    }
  }
  const auto eval_table = cli({"eval", "--corpus", corpus, "--plan", plan, "--seed", "7",
                               "--name", "detector", "--format", "table"});
  // Table layouts: "Model | Macro F1 (error)" rows as 0.xxxx (0.xxxx), and
  // "Fold | Chi-squared | p-value" rows closed by a Mean row.
  const std::regex f1_row(R"(detector\s+\|\s+0\.\d{4} \(0\.\d{4}\))");
  const std::regex fold_row(R"(\n[1-5]\s+\|\s+\d+\.\d{2}\s+\|\s+\d\.\d{2}e[-+]\d{2}\n)");
  const std::regex mean_row(R"(\nMean\s+\|\s+\d+\.\d{2}\s+\|\s+\d\.\d{2}e[-+]\d{2}\n)");
  const bool layout = eval_table.code == 0 &&
                      eval_table.out.rfind("Model", 0) == 0 &&
                      eval_table.out.find("| Macro F1 (error)") != std::string::npos &&
                      std::regex_search(eval_table.out, f1_row) &&
                      table.find("Fold | Chi-squared | p-value") != std::string::npos &&
                      std::regex_search(table, fold_row) && std::regex_search(table, mean_row);
  const double secs = seconds_since(t0);
  const bool pass = failures.empty() && folds == 5 && mean_f1 >= 0.90 && all_significant &&
                    layout && secs <= 600.0;
  std::string detail = "mean macro F1 " + fmt("%.4f", mean_f1) + " over " +
                       std::to_string(folds) + " folds (>= 0.90), max per-fold McNemar p " +
                       fmt("%.2e", worst_p) + " (< 0.05), table layout " +
                       (layout ? "ok" : "MISMATCH") + ", " + fmt("%.0f", secs) + " s <= 600 s";
  for (const auto& f : failures) detail += "; " + f;
  return {pass, detail};
}

// ---------------------------------------------------------------------------
// 8. Determinism and persistence

Outcome determinism() {
  const auto dir = scratch_dir("determinism");
  const auto corpus = (dir / "corpus.csv").string();
  const auto plan = (dir / "plan.json").string();
  const auto ckpt = (dir / "model.ckpt").string();
  const auto report = (dir / "report.json").string();
  cli({"generate", "--out", corpus, "--n", "300", "--seed", "8"});
  cli({"split", "--corpus", corpus, "--k", "3", "--seed", "8", "--out", plan});
  const std::vector<std::string> small{"--d-model", "16", "--heads", "2", "--layers", "1",
                                       "--d-ff", "32", "--epochs", "8", "--seed", "8"};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), small.begin(), small.end());
    return a;
  };

  const auto train1 = cli(with({"train", "--corpus", corpus, "--out", ckpt}));
  const std::string ckpt1 = read_bytes(ckpt);
  const auto train2 = cli(with({"train", "--corpus", corpus, "--out", ckpt}));
  const std::string ckpt2 = read_bytes(ckpt);
  const auto eval1 = cli(with({"eval", "--corpus", corpus, "--plan", plan, "--report", report}));
  const std::string report1 = read_bytes(report);
  const auto eval2 = cli(with({"eval", "--corpus", corpus, "--plan", plan, "--report", report}));
  const std::string report2 = read_bytes(report);

  const bool ran = train1.code == 0 && train2.code == 0 && eval1.code == 0 && eval2.code == 0;
  const bool ckpt_same = !ckpt1.empty() && ckpt1 == ckpt2;
  const bool train_report_same = train1.out == train2.out;
  const bool eval_same = !report1.empty() && report1 == report2 && eval1.out == eval2.out;

  bool round_trip = false;
  if (ran) {
    const Model loaded = load_checkpoint(ckpt);
    const auto resaved = dir / "resaved.ckpt";
    save_checkpoint(loaded, resaved);
    const Model again = load_checkpoint(resaved);
    round_trip = loaded.params.identical(again.params) && read_bytes(resaved) == ckpt2 &&
                 parse_checkpoint(ckpt1).params.identical(loaded.params);
  }
  const bool pass = ran && ckpt_same && train_report_same && eval_same && round_trip;
  return {pass, std::string("checkpoints ") + (ckpt_same ? "bit-identical" : "DIFFER") +
                    ", train reports " + (train_report_same ? "byte-identical" : "DIFFER") +
                    ", eval reports " + (eval_same ? "byte-identical" : "DIFFER") +
                    ", save/load round trip " + (round_trip ? "bit-exact" : "NOT exact")};
}

// ---------------------------------------------------------------------------
// 9. Interpretability property

Outcome interpretability() {
  const auto train_corpus = synthetic(2000, 9, 0.0);
  const auto [tr, va] = stratified_holdout(train_corpus, 0.1, 9);
  EncoderConfig ec;
  ec.max_len = 32;
  TrainConfig tc = TrainConfig::synthetic();
  tc.seed = 9;
  const auto model = train(train_corpus.subset(tr), train_corpus.subset(va), ec, tc).model;

  const std::set<std::string> bias(default_bias_lexicon().begin(), default_bias_lexicon().end());
  const std::set<std::string> neutral(default_neutral_lexicon().begin(),
                                      default_neutral_lexicon().end());
  const auto held_out = synthetic(1000, 90, 0.0);
  double bias_sum = 0.0, neutral_sum = 0.0;
  std::size_t bias_n = 0, neutral_n = 0, sentences = 0;
  for (const auto& s : held_out.sentences()) {
    if (s.label != 1) continue;
    const auto attr = cls_attention(model, s.text);
    if (attr.predicted_label != 1) continue;
    ++sentences;
    for (std::size_t i = 0; i < attr.tokens.size(); ++i) {
      if (bias.count(attr.tokens[i])) {
        bias_sum += attr.weights[i];
        ++bias_n;
      } else if (neutral.count(attr.tokens[i])) {
        neutral_sum += attr.weights[i];
        ++neutral_n;
      }
    }
  }
  const double bias_mean = bias_n ? bias_sum / static_cast<double>(bias_n) : 0.0;
  const double neutral_mean = neutral_n ? neutral_sum / static_cast<double>(neutral_n) : 0.0;
  return {sentences >= 200 && bias_mean > neutral_mean,
          "mean [CLS] attention on bias-lexicon tokens " + fmt("%.4f", bias_mean) +
              " > neutral tokens " + fmt("%.4f", neutral_mean) + " over " +
              std::to_string(sentences) + " correctly flagged biased sentences (>= 200)"};
}

// ---------------------------------------------------------------------------
// 10. Pipeline contract

Outcome pipeline_contract() {
  TypedSyntheticOptions o;
  o.n = 1500;
  o.seed = 10;
  o.type_lexicons = default_type_lexicons();
  o.neutral_lexicon = default_neutral_lexicon();
  o.unbiased_rate = 0.4;
  const auto corpus = generate_typed_synthetic(o);
  const auto [tr, va] = stratified_holdout(corpus, 0.1, 10);
  EncoderConfig ec;
  ec.max_len = 32;
  TrainConfig tc = TrainConfig::synthetic();
  tc.seed = 10;
  tc.patience = 10;
  const auto detector = train(corpus.subset(tr), corpus.subset(va), ec, tc).model;
  const auto types = train_type_classifier(corpus.subset(tr), corpus.subset(va),
                                           TypeClassifierConfig{}, ec, tc)
                         .model;

  TypedSyntheticOptions h = o;
  h.n = 500;
  h.seed = 1010;
  h.unbiased_rate = 0.0;
  h.multi_type_rate = 0.0;
  const auto held_out = generate_typed_synthetic(h);
  const auto neutral = synthetic(200, 1011, 0.0);
  std::vector<std::string> texts = held_out.texts();
  for (const auto& s : neutral.sentences()) texts.push_back(s.text);

  std::size_t gate_violations = 0, equivalence_violations = 0;
  for (double gate : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto batch = analyze_batch(detector, types, texts, gate);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto& a = batch[i];
      const bool skipped_ok = a.stage2_skipped == (a.bias_probability < gate) &&
                              a.is_biased == !a.stage2_skipped &&
                              a.types.empty() == a.stage2_skipped;
      if (!skipped_ok) ++gate_violations;
      if (!(analyze(detector, types, texts[i], gate) == a)) ++equivalence_violations;
    }
  }
  const auto results = analyze_batch(detector, types, held_out.texts(), kDefaultGate);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < held_out.size(); ++i) {
    const auto& a = results[i];
    if (a.is_biased && !a.types.empty() && a.types.front().first == held_out[i].type_labels[0]) {
      ++correct;
    }
  }
  const double rate = static_cast<double>(correct) / static_cast<double>(held_out.size());
  return {gate_violations == 0 && equivalence_violations == 0 && rate >= 0.8,
          "gating violations " + std::to_string(gate_violations) +
              ", batch/single mismatches " + std::to_string(equivalence_violations) +
              ", correct top type on " + fmt("%.1f", 100.0 * rate) + "% of " +
              std::to_string(held_out.size()) + " held-out single-type sentences (>= 80%)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"normalization invariants", normalization_invariants},
      {"statistical oracles", statistical_oracles},
      {"oracle equivalence", oracle_equivalence},
      {"stratification", stratification},
      {"overfit sanity", overfit_sanity},
      {"end-to-end desk experiment", end_to_end},
      {"determinism and persistence", determinism},
      {"interpretability property", interpretability},
      {"pipeline contract", pipeline_contract},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] criterion %d, %s: %s\n", outcome.pass ? "PASS" : "FAIL", number,
                criteria[i].first.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failed;
  }
  std::error_code ec;
  fs::remove_all(fs::temp_directory_path() /
                     ("biaslab_acceptance_" + std::to_string(::getpid())),
                 ec);
  return failed == 0 ? 0 : 1;
}
