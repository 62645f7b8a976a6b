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

#include "commands.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>

#include "biaslab/error.hpp"
#include "biaslab/metrics.hpp"
#include "biaslab/pipeline.hpp"
#include "biaslab/random.hpp"
#include "biaslab/stattests.hpp"
#include "report.hpp"

namespace biaslab::cli {

namespace {

constexpr std::uint64_t kHoldoutStream = 0x4f1d;
constexpr std::uint64_t kFoldStream = 0xf01d;

nlohmann::json header(const std::string& command) {
  return {{"command", command}, {"format_version", kReportVersion}};
}

LabeledCorpus load(const CorpusInput& in) { return load_corpus(in.path, in.schema); }

void add_corpus_inputs(nlohmann::json& inputs, const CorpusInput& in) {
  inputs["corpus"] = input_record(in.path);
  if (in.schema_path) inputs["schema"] = input_record(*in.schema_path);
}

nlohmann::json corpus_config(const CorpusInput& in) {
  return {{"path", in.path.string()}, {"schema", in.schema.to_json()}};
}

void require_detector(const Model& m, const fs::path& path) {
  if (m.config.head != HeadKind::softmax || m.config.n_classes != 2) {
    throw ValidationError("'" + path.string() + "' is not a binary detector checkpoint");
  }
}

std::string history_table(const TrainHistory& h) {
  std::ostringstream s;
  s << "Epoch | Train loss | Val macro F1\n";
  s << "------+------------+-------------\n";
  for (const auto& e : h.epochs) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%5zu | %10.4f | %.4f%s\n", e.epoch, e.train_loss, e.val_f1,
                  e.epoch == h.best_epoch ? " *" : "");
    s << buf;
  }
  s << "best epoch " << h.best_epoch << (h.stopped_early ? " (stopped early)" : "") << "\n";
  return s.str();
}

// Holdout for multi-label corpora: sentences are grouped by their first
// type label so every label appears on both sides where possible.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> type_holdout(
    const LabeledCorpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValidationError("holdout fraction must lie in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& t = corpus[i].type_labels;
    groups[t.empty() ? std::string() : t.front()].push_back(i);
  }
  std::vector<std::size_t> train, val;
  std::uint64_t g = 0;
  for (auto& [name, members] : groups) {
    Rng rng(derive_seed(seed, 600 + g++));
    rng.shuffle(std::span<std::size_t>(members));
    std::size_t n_val = 0;
    if (members.size() >= 2) {
      n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
      n_val = std::clamp<std::size_t>(n_val, 1, members.size() - 1);
    }
    val.insert(val.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {train, val};
}

std::string fold_name(const SplitPlan& plan, std::size_t partition, int fold) {
  if (plan.kind == SplitKind::k_fold) return std::to_string(fold + 1);
  return std::to_string(partition + 1) + "." + std::to_string(fold + 1);
}

struct FoldPredictions {
  std::vector<int> gold;
  std::vector<int> a;
  std::vector<int> b;
  double f1_a = 0.0;
  double f1_b = 0.0;
};

// Scores both models on one fold, retraining them on the fold's training
// part first when requested.
FoldPredictions predict_fold(const LabeledCorpus& corpus, const SplitPlan& plan,
                             std::size_t partition, int fold, const Model& a, const Model& b,
                             const CompareOptions& o, std::uint64_t seed) {
  const auto test = corpus.subset(plan.test_indices(partition, fold));
  const auto texts = test.texts();
  FoldPredictions fp;
  fp.gold = test.labels();
  if (o.retrain) {
    const auto train = corpus.subset(plan.train_indices(partition, fold));
    fp.a = predicted_labels(predict_probs(fit_fold_model(&a, train, o.model, seed).model, texts));
    fp.b = predicted_labels(predict_probs(fit_fold_model(&b, train, o.model, seed).model, texts));
  } else {
    fp.a = predicted_labels(predict_probs(a, texts));
    fp.b = predicted_labels(predict_probs(b, texts));
  }
  fp.f1_a = macro_f1(confusion(fp.a, fp.gold));
  fp.f1_b = macro_f1(confusion(fp.b, fp.gold));
  return fp;
}

}  // namespace

nlohmann::json ModelOptions::to_json() const {
  return {{"preset", preset},
          {"encoder", encoder.to_json()},
          {"train", train.to_json()},
          {"val_fraction", val_fraction}};
}

FoldModel fit_fold_model(const Model* templ, const LabeledCorpus& train,
                         const ModelOptions& options, std::uint64_t seed) {
  if (templ != nullptr && templ->info.kind == "majority_baseline") {
    return {majority_baseline(train.label_count(1), train.size()), std::nullopt};
  }
  if (templ != nullptr && templ->info.kind != "detector") {
    throw ValidationError("a '" + templ->info.kind +
                          "' checkpoint cannot serve as a detector template");
  }
  EncoderConfig ec = templ != nullptr ? templ->config : options.encoder;
  ec.head = HeadKind::softmax;
  ec.n_classes = 2;
  TrainConfig tc = options.train;
  tc.seed = seed;
  const auto [tr, va] =
      stratified_holdout(train, options.val_fraction, derive_seed(seed, kHoldoutStream));
  auto result = biaslab::train(train.subset(tr), train.subset(va), ec, tc);
  return {std::move(result.model), std::move(result.history)};
}

CorpusSchema detect_schema(const fs::path& path) {
  CorpusSchema schema;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (in && std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  if (line.empty()) return schema;
  std::vector<std::string> columns;
  try {
    if (format_from_extension(path) == FileFormat::jsonl) {
      const auto obj = nlohmann::json::parse(line);
      if (!obj.is_object()) return schema;
      for (const auto& [key, value] : obj.items()) columns.push_back(key);
    } else {
      const char delim = format_from_extension(path) == FileFormat::csv ? ',' : '\t';
      std::istringstream fields(line);
      std::string field;
      while (std::getline(fields, field, delim)) {
        const auto first = field.find_first_not_of(" \r\"");
        const auto last = field.find_last_not_of(" \r\"");
        columns.push_back(first == std::string::npos ? ""
                                                     : field.substr(first, last - first + 1));
      }
    }
  } catch (const std::exception&) {
    // Leave malformed files to the loader, which reports them precisely.
    return schema;
  }
  const auto has = [&](const char* name) {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
  };
  if (has("id")) schema.id_column = "id";
  if (has("types")) schema.types_column = "types";
  return schema;
}

std::vector<std::string> read_sentences(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::vector<std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '{') {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
      }
      if (!j.contains("text") || !j["text"].is_string()) {
        throw ValidationError("line " + std::to_string(line_no) + ": missing string field 'text'");
      }
      out.push_back(j["text"].get<std::string>());
    } else {
      out.push_back(line);
    }
  }
  return out;
}

Report cmd_generate(const GenerateOptions& o) {
  LabeledCorpus corpus;
  nlohmann::json config{{"n", o.n}, {"seed", o.seed}, {"typed", o.typed}};
  if (o.typed) {
    TypedSyntheticOptions t;
    t.n = o.n;
    t.seed = o.seed;
    t.type_lexicons = default_type_lexicons();
    t.neutral_lexicon = default_neutral_lexicon();
    t.multi_type_rate = o.multi_type_rate;
    t.unbiased_rate = o.unbiased_rate;
    corpus = generate_typed_synthetic(t);
    config["multi_type_rate"] = o.multi_type_rate;
    config["unbiased_rate"] = o.unbiased_rate;
  } else {
    SyntheticOptions s;
    s.n = o.n;
    s.seed = o.seed;
    s.bias_lexicon = default_bias_lexicon();
    s.neutral_lexicon = default_neutral_lexicon();
    s.noise_rate = o.noise_rate;
    corpus = generate_synthetic(s);
    config["noise_rate"] = o.noise_rate;
  }
  write_corpus(corpus, o.out);
  Report r;
  r.body = header("generate");
  r.body["config"] = config;
  r.body["seeds"] = {{"generator", o.seed}};
  r.body["outputs"] = {{"corpus", input_record(o.out)}};
  r.body["label_counts"] = corpus.label_counts();
  r.table = "wrote " + std::to_string(corpus.size()) + " sentences to " + o.out.string() + "\n";
  return r;
}

Report cmd_split(const SplitOptions& o) {
  const auto corpus = load(o.corpus);
  const SplitPlan plan = o.five_by_two ? five_by_two_splits(corpus, o.seed)
                                       : stratified_kfold(corpus, o.k, o.seed);
  plan.save(o.out);
  Report r;
  r.body = header("split");
  r.body["config"] = {{"corpus", corpus_config(o.corpus)},
                      {"kind", o.five_by_two ? "five_by_two" : "k_fold"},
                      {"k", plan.folds_per_partition()}};
  r.body["seeds"] = {{"split", o.seed}};
  r.body["inputs"] = nlohmann::json::object();
  add_corpus_inputs(r.body["inputs"], o.corpus);
  r.body["outputs"] = {{"plan", input_record(o.out)}};
  nlohmann::json sizes = nlohmann::json::array();
  for (std::size_t p = 0; p < plan.partition_count(); ++p) {
    for (int f = 0; f < plan.folds_per_partition(); ++f) {
      sizes.push_back(plan.test_indices(p, f).size());
    }
  }
  r.body["fold_sizes"] = sizes;
  r.table = "wrote " + std::to_string(sizes.size()) + "-fold plan to " + o.out.string() + "\n";
  return r;
}

Report cmd_train(const TrainOptions& o) {
  const auto corpus = load(o.corpus);
  TrainConfig tc = o.model.train;
  const std::uint64_t holdout_seed = derive_seed(tc.seed, kHoldoutStream);
  const auto [tr, va] = stratified_holdout(corpus, o.model.val_fraction, holdout_seed);
  auto result = train(corpus.subset(tr), corpus.subset(va), o.model.encoder, tc);
  save_checkpoint(result.model, o.out);

  Report r;
  r.body = header("train");
  r.body["config"] = {{"corpus", corpus_config(o.corpus)}, {"model", o.model.to_json()}};
  r.body["config"]["model"]["encoder"] = result.model.config.to_json();
  r.body["seeds"] = {{"train", tc.seed}, {"holdout", holdout_seed}};
  r.body["inputs"] = nlohmann::json::object();
  add_corpus_inputs(r.body["inputs"], o.corpus);
  r.body["outputs"] = {{"checkpoint", input_record(o.out)}};
  r.body["history"] = result.history.to_json();
  r.body["split_sizes"] = {{"train", tr.size()}, {"validation", va.size()}};
  r.table = history_table(result.history);
  return r;
}

Report cmd_train_types(const TrainTypesOptions& o) {
  const auto corpus = load(o.corpus);
  TypeClassifierConfig types;
  if (!o.labels.empty()) types.labels = o.labels;
  types.thresholds = o.thresholds;
  types.validate();
  TrainConfig tc = o.model.train;
  const std::uint64_t holdout_seed = derive_seed(tc.seed, kHoldoutStream);
  const auto [tr, va] = type_holdout(corpus, o.model.val_fraction, holdout_seed);
  auto result =
      train_type_classifier(corpus.subset(tr), corpus.subset(va), types, o.model.encoder, tc);
  save_checkpoint(result.model, o.out);

  Report r;
  r.body = header("train-types");
  r.body["config"] = {{"corpus", corpus_config(o.corpus)},
                      {"model", o.model.to_json()},
                      {"labels", types.labels},
                      {"thresholds", types.resolved_thresholds()}};
  r.body["config"]["model"]["encoder"] = result.model.config.to_json();
  r.body["seeds"] = {{"train", tc.seed}, {"holdout", holdout_seed}};
  r.body["inputs"] = nlohmann::json::object();
  add_corpus_inputs(r.body["inputs"], o.corpus);
  r.body["outputs"] = {{"checkpoint", input_record(o.out)}};
  r.body["history"] = result.history.to_json();
  r.table = history_table(result.history);
  return r;
}

Report cmd_baseline(const BaselineOptions& o) {
  const auto corpus = load(o.corpus);
  const Model m = majority_baseline(corpus.label_count(1), corpus.size());
  save_checkpoint(m, o.out);
  Report r;
  r.body = header("baseline");
  r.body["config"] = {{"corpus", corpus_config(o.corpus)}};
  r.body["seeds"] = nlohmann::json::object();
  r.body["inputs"] = nlohmann::json::object();
  add_corpus_inputs(r.body["inputs"], o.corpus);
  r.body["outputs"] = {{"checkpoint", input_record(o.out)}};
  r.body["label_counts"] = corpus.label_counts();
  r.table = "wrote majority baseline to " + o.out.string() + "\n";
  return r;
}

Report cmd_eval(const EvalOptions& o) {
  const auto corpus = load(o.corpus);
  Report r;
  r.body = header("eval");
  r.body["inputs"] = nlohmann::json::object();
  add_corpus_inputs(r.body["inputs"], o.corpus);

  SplitPlan plan;
  fs::path plan_path;
  if (o.plan) {
    plan = SplitPlan::load(*o.plan).aligned_to(corpus);
    plan_path = *o.plan;
    r.body["inputs"]["plan"] = input_record(*o.plan);
  } else {
    plan = stratified_kfold(corpus, o.k, o.split_seed);
    plan_path = o.plan_out ? *o.plan_out : fs::path(o.corpus.path).concat(".plan.json");
    plan.save(plan_path);
    r.body["outputs"] = {{"plan", input_record(plan_path)}};
  }

  std::optional<Model> templ;
  if (o.checkpoint) {
    templ = load_checkpoint(*o.checkpoint);
    require_detector(*templ, *o.checkpoint);
    r.body["inputs"]["checkpoint"] = input_record(*o.checkpoint);
  }

  std::vector<double> scores;
  nlohmann::json folds = nlohmann::json::array();
  nlohmann::json fold_seeds = nlohmann::json::array();
  std::size_t index = 0;
  for (std::size_t p = 0; p < plan.partition_count(); ++p) {
    for (int f = 0; f < plan.folds_per_partition(); ++f, ++index) {
      const std::uint64_t seed = derive_seed(o.model.train.seed, kFoldStream + index);
      const auto train_part = corpus.subset(plan.train_indices(p, f));
      const auto test = corpus.subset(plan.test_indices(p, f));
      const auto fm = fit_fold_model(templ ? &*templ : nullptr, train_part, o.model, seed);
      const auto pred = predicted_labels(predict_probs(fm.model, test.texts()));
      const double f1 = macro_f1(confusion(pred, test.labels()));
      scores.push_back(f1);
      nlohmann::json entry{{"fold", fold_name(plan, p, f)},
                           {"macro_f1", f1},
                           {"train_size", train_part.size()},
                           {"test_size", test.size()}};
      if (fm.history) {
        entry["best_epoch"] = fm.history->best_epoch;
        entry["epochs"] = fm.history->epochs.size();
      }
      folds.push_back(entry);
      fold_seeds.push_back(seed);
    }
  }
  const auto fs_scores = FoldScores::from(scores);

  nlohmann::json config{{"corpus", corpus_config(o.corpus)},
                        {"model", o.model.to_json()},
                        {"name", o.name},
                        {"retraining", "per_fold"}};
  if (templ) {
    config["model"]["encoder"] = templ->config.to_json();
    config["template_kind"] = templ->info.kind;
  }
  r.body["config"] = config;
  r.body["seeds"] = {{"split", plan.seed}, {"train", o.model.train.seed}, {"folds", fold_seeds}};
  const auto summary = fs_scores.to_json();
  r.body["per_fold"] = summary["per_fold"];
  r.body["mean"] = summary["mean"];
  r.body["stderr"] = summary["stderr"];
  r.body["folds"] = folds;
  r.body["split_plan_path"] = plan_path.string();
  r.table = f1_table({{o.name, fs_scores}});
  return r;
}

Report cmd_compare(const CompareOptions& o) {
  if (o.plan.empty()) {
    throw ValidationError("compare needs a shared split plan (--plan)");
  }
  if (!o.mcnemar && !o.five_two) {
    throw ValidationError("nothing to do: enable --mcnemar and/or --five-two");
  }
  const auto corpus = load(o.corpus);
  const SplitPlan plan = SplitPlan::load(o.plan).aligned_to(corpus);
  const Model a = load_checkpoint(o.a);
  const Model b = load_checkpoint(o.b);
  require_detector(a, o.a);
  require_detector(b, o.b);

  std::optional<SplitPlan> plan5;
  if (o.five_two) {
    if (plan.kind == SplitKind::five_by_two) {
      plan5 = plan;
    } else if (o.plan_5x2) {
      plan5 = SplitPlan::load(*o.plan_5x2).aligned_to(corpus);
      if (plan5->kind != SplitKind::five_by_two) {
        throw ValidationError("'" + o.plan_5x2->string() + "' is not a five_by_two plan");
      }
    } else {
      throw ValidationError("--five-two needs a five_by_two plan (--plan or --plan-5x2)");
    }
  }

  Report r;
  r.body = header("compare");
  r.body["inputs"] = nlohmann::json::object();
  add_corpus_inputs(r.body["inputs"], o.corpus);
  r.body["inputs"]["plan"] = input_record(o.plan);
  if (o.plan_5x2 && plan5 && plan.kind != SplitKind::five_by_two) {
    r.body["inputs"]["plan_5x2"] = input_record(*o.plan_5x2);
  }
  r.body["inputs"]["a"] = input_record(o.a);
  r.body["inputs"]["b"] = input_record(o.b);

  nlohmann::json config{{"corpus", corpus_config(o.corpus)},
                        {"a", {{"name", o.name_a}, {"kind", a.info.kind}}},
                        {"b", {{"name", o.name_b}, {"kind", b.info.kind}}},
                        {"mcnemar", o.mcnemar},
                        {"five_two", o.five_two},
                        {"correction", o.correction},
                        {"retrain", o.retrain},
                        {"fold_metric", "macro_f1"}};
  if (o.retrain) config["model"] = o.model.to_json();
  r.body["config"] = config;

  std::string table;
  std::vector<double> f1_a, f1_b;
  std::map<std::pair<std::size_t, int>, FoldPredictions> cache;
  nlohmann::json fold_seeds = nlohmann::json::array();

  if (o.mcnemar) {
    std::vector<McNemarRow> rows;
    nlohmann::json per_fold = nlohmann::json::array();
    std::vector<double> chi2, pv;
    std::size_t index = 0;
    for (std::size_t p = 0; p < plan.partition_count(); ++p) {
      for (int f = 0; f < plan.folds_per_partition(); ++f, ++index) {
        const std::uint64_t seed = derive_seed(o.model.train.seed, kFoldStream + index);
        fold_seeds.push_back(seed);
        auto fp = predict_fold(corpus, plan, p, f, a, b, o, seed);
        f1_a.push_back(fp.f1_a);
        f1_b.push_back(fp.f1_b);
        const auto t = build_contingency(fp.a, fp.b, fp.gold);
        McNemarRow row;
        row.fold = fold_name(plan, p, f);
        nlohmann::json entry{{"fold", row.fold}, {"n00", t.n00}, {"n01", t.n01},
                             {"n10", t.n10},     {"n11", t.n11}, {"f1_a", fp.f1_a},
                             {"f1_b", fp.f1_b}};
        try {
          row.result = mcnemar(t, o.correction);
          entry["chi2"] = row.result.chi2;
          entry["p"] = row.result.p_value;
          chi2.push_back(row.result.chi2);
          pv.push_back(row.result.p_value);
        } catch (const ValidationError& e) {
          row.defined = false;
          entry["error"] = e.what();
        }
        rows.push_back(row);
        per_fold.push_back(entry);
        if (plan5 && plan.kind == SplitKind::five_by_two) cache.emplace(std::pair{p, f}, std::move(fp));
      }
    }
    nlohmann::json m{{"per_fold", per_fold}, {"correction", o.correction}};
    if (chi2.empty()) {
      m["mean_chi2"] = nullptr;
      m["mean_p"] = nullptr;
      m["note"] = "identical predictions on every fold: McNemar's test is undefined";
    } else {
      m["mean_chi2"] = mean_of(chi2);
      m["mean_p"] = mean_of(pv);
    }
    r.body["mcnemar"] = m;
    const auto sa = plan.partition_count() * static_cast<std::size_t>(plan.folds_per_partition()) >= 2
                        ? std::optional(FoldScores::from(f1_a))
                        : std::nullopt;
    if (sa) {
      table += f1_table({{o.name_a, *sa}, {o.name_b, FoldScores::from(f1_b)}});
      table += "\n";
      r.body["macro_f1"] = {{"a", sa->to_json()}, {"b", FoldScores::from(f1_b).to_json()}};
    }
    table += std::string("McNemar's test, ") + o.name_a + " vs " + o.name_b +
             " (continuity correction " + (o.correction ? "on" : "off") + ")\n";
    table += mcnemar_table(rows);
  }

  if (plan5) {
    std::array<std::array<double, 2>, 5> diffs{};
    for (std::size_t p = 0; p < 5; ++p) {
      for (int f = 0; f < 2; ++f) {
        auto it = cache.find({p, f});
        FoldPredictions fp;
        if (it != cache.end()) {
          fp = it->second;
        } else {
          const std::uint64_t seed =
              derive_seed(o.model.train.seed, kFoldStream + 100 + 2 * p + static_cast<std::size_t>(f));
          fp = predict_fold(corpus, *plan5, p, f, a, b, o, seed);
        }
        diffs[p][static_cast<std::size_t>(f)] = fp.f1_a - fp.f1_b;
      }
    }
    const auto res = five_by_two_ttest(diffs);
    r.body["five_by_two"] = res.to_json();
    if (!table.empty()) table += "\n";
    table += five_two_line(res);
  }
  r.body["seeds"] = {{"split", plan.seed}, {"train", o.model.train.seed}, {"folds", fold_seeds}};
  if (plan5) r.body["seeds"]["split_5x2"] = plan5->seed;
  r.table = table;
  return r;
}

Report cmd_explain(const ExplainOptions& o) {
  const Model model = load_checkpoint(o.checkpoint);
  require_detector(model, o.checkpoint);
  std::vector<std::pair<std::string, std::string>> items;  // (file stem, text)
  if (o.sentence) {
    items.emplace_back("explain_0", *o.sentence);
  } else if (o.corpus) {
    const auto corpus = load(*o.corpus);
    for (std::size_t i = 0; i < corpus.size() && i < o.limit; ++i) {
      items.emplace_back("explain_" + std::to_string(i), corpus[i].text);
    }
  } else {
    throw ValidationError("explain needs --sentence or --corpus");
  }
  fs::create_directories(o.out_dir);

  Report r;
  r.body = header("explain");
  r.body["inputs"] = {{"checkpoint", input_record(o.checkpoint)}};
  if (o.corpus) add_corpus_inputs(r.body["inputs"], *o.corpus);
  r.body["config"] = {{"out_dir", o.out_dir.string()}, {"json", o.json}, {"svg", o.svg},
                      {"limit", o.limit}};
  r.body["seeds"] = nlohmann::json::object();
  nlohmann::json results = nlohmann::json::array();
  for (const auto& [stem, text] : items) {
    const auto attr = cls_attention(model, text);
    nlohmann::json files = nlohmann::json::array();
    if (o.json) {
      const auto path = o.out_dir / (stem + ".json");
      export_heatmap(attr, path, HeatmapFormat::json);
      files.push_back(path.string());
    }
    if (o.svg) {
      const auto path = o.out_dir / (stem + ".svg");
      export_heatmap(attr, path, HeatmapFormat::svg);
      files.push_back(path.string());
    }
    results.push_back({{"text", text}, {"attribution", attr.to_json()}, {"files", files}});
    r.table += render_terminal(attr) + "\n";
  }
  r.body["results"] = results;
  return r;
}

Report cmd_pipeline(const PipelineOptions& o) {
  const Model detector = load_checkpoint(o.detector);
  const Model types = load_checkpoint(o.types);
  const auto sentences = read_sentences(o.input);
  const auto analyses = analyze_batch(detector, types, sentences, o.gate);
  std::string lines;
  std::size_t biased = 0;
  for (const auto& a : analyses) {
    lines += a.to_json().dump() + "\n";
    biased += a.is_biased ? 1 : 0;
  }
  Report r;
  r.body = header("pipeline");
  r.body["inputs"] = {{"detector", input_record(o.detector)},
                      {"types", input_record(o.types)},
                      {"input", input_record(o.input)}};
  r.body["config"] = {{"gate", o.gate}};
  r.body["seeds"] = nlohmann::json::object();
  r.body["counts"] = {{"sentences", analyses.size()}, {"biased", biased}};
  if (o.out) {
    std::ofstream out(*o.out, std::ios::binary);
    if (!out) throw IoError("cannot write '" + o.out->string() + "'");
    out << lines;
    out.close();
    r.body["outputs"] = {{"analyses", input_record(*o.out)}};
  }
  r.table = lines;
  return r;
}

}  // namespace biaslab::cli
