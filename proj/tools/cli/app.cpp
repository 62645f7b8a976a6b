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

#include "app.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biaslab/error.hpp"
#include "commands.hpp"

namespace biaslab::cli {

namespace {

// Flag overrides layered on top of a training preset.
struct ModelFlags {
  std::string preset = "synthetic";
  std::optional<std::size_t> d_model, layers, heads, d_ff, max_len, batch_size, epochs,
      patience, min_freq, max_vocab;
  std::optional<double> dropout, lr, weight_decay;
  double val_fraction = 0.1;

  void add(CLI::App& app) {
    app.add_option("--preset", preset, "training preset")
        ->check(CLI::IsMember({"finetune", "synthetic"}))
        ->capture_default_str();
    app.add_option("--d-model", d_model, "hidden size");
    app.add_option("--layers", layers, "encoder layers");
    app.add_option("--heads", heads, "attention heads");
    app.add_option("--d-ff", d_ff, "feed-forward width");
    app.add_option("--max-len", max_len, "maximum sequence length");
    app.add_option("--dropout", dropout, "dropout rate");
    app.add_option("--lr", lr, "learning rate");
    app.add_option("--batch-size", batch_size, "mini-batch size");
    app.add_option("--epochs", epochs, "maximum epochs");
    app.add_option("--patience", patience, "early-stopping patience");
    app.add_option("--weight-decay", weight_decay, "decoupled weight decay");
    app.add_option("--min-freq", min_freq, "minimum token frequency");
    app.add_option("--max-vocab", max_vocab, "vocabulary cap including specials");
    app.add_option("--val-fraction", val_fraction, "validation holdout fraction")
        ->capture_default_str();
  }

  ModelOptions resolve(std::uint64_t seed) const {
    ModelOptions m;
    m.preset = preset;
    m.train = TrainConfig::preset(preset);
    if (d_model) m.encoder.d_model = *d_model;
    if (layers) m.encoder.n_layers = *layers;
    if (heads) m.encoder.n_heads = *heads;
    if (d_ff) m.encoder.d_ff = *d_ff;
    if (max_len) m.encoder.max_len = *max_len;
    if (dropout) m.encoder.dropout_rate = *dropout;
    if (lr) m.train.learning_rate = *lr;
    if (batch_size) m.train.batch_size = *batch_size;
    if (epochs) m.train.max_epochs = *epochs;
    if (patience) m.train.patience = *patience;
    if (weight_decay) m.train.weight_decay = *weight_decay;
    if (min_freq) m.train.min_freq = *min_freq;
    if (max_vocab) m.train.max_vocab = *max_vocab;
    m.train.seed = seed;
    m.val_fraction = val_fraction;
    m.train.validate();
    return m;
  }
};

struct CorpusFlags {
  std::string path;
  std::string schema;

  void add(CLI::App& app, bool required = true) {
    auto* opt = app.add_option("--corpus", path, "labeled corpus (csv, tsv or jsonl)");
    if (required) opt->required();
    app.add_option("--schema", schema, "schema JSON file or inline JSON object");
  }

  CorpusInput resolve() const {
    CorpusInput in;
    in.path = path;
    if (schema.empty()) {
      in.schema = detect_schema(in.path);
      return in;
    }
    nlohmann::json j;
    try {
      if (schema.front() == '{') {
        j = nlohmann::json::parse(schema);
      } else {
        std::ifstream f(schema);
        if (!f) throw IoError("cannot read schema '" + schema + "'");
        j = nlohmann::json::parse(f);
        in.schema_path = schema;
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("malformed schema: ") + e.what());
    }
    in.schema = CorpusSchema::from_json(j);
    return in;
  }
};

// Reads a flat key=value file into "--key=value" arguments.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") {
      throw ValidationError("config line " + std::to_string(line_no) + ": invalid key");
    }
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("BIASLAB_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto seed = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return seed;
  } catch (const std::exception&) {
    throw ValidationError(std::string("BIASLAB_SEED is not an unsigned integer: '") + v + "'");
  }
}

bool parse_switch(const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw ValidationError("expected on|off, got '" + v + "'");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  // Expand --config before CLI11 sees the arguments: file values go first so
  // that explicit flags, parsed later, take precedence.
  std::vector<std::string> args;

  try {
    std::vector<std::string> raw(argv + (argc > 0 ? 1 : 0), argv + argc);
    std::vector<std::string> from_file;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      std::string path;
      if (raw[i] == "--config" && i + 1 < raw.size()) {
        path = raw[++i];
      } else if (raw[i].rfind("--config=", 0) == 0) {
        path = raw[i].substr(9);
      } else {
        args.push_back(raw[i]);
        continue;
      }
      auto extra = config_arguments(path);
      from_file.insert(from_file.end(), extra.begin(), extra.end());
    }
    if (!from_file.empty()) {
      // Insert after the subcommand name (the first non-option argument).
      auto it = std::find_if(args.begin(), args.end(),
                             [](const std::string& a) { return a.empty() || a[0] != '-'; });
      if (it == args.end()) throw ValidationError("--config given without a subcommand");
      args.insert(it + 1, from_file.begin(), from_file.end());
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"Sentence-level media bias detection toolkit", "biaslab"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();

  std::string format = "json";
  std::string report_path;
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--format", format, "report format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  app.add_option("--report", report_path, "also write the JSON report to this file");
  app.add_option("--seed", seed_flag, "global seed (falls back to BIASLAB_SEED, then 0)");
  app.add_option("--config", "flat key=value file; explicit flags override it");

  auto seed = [&]() -> std::uint64_t {
    if (seed_flag) return *seed_flag;
    if (auto e = env_seed()) return *e;
    return 0;
  };

  std::function<Report()> action;

  // generate
  GenerateOptions gen;
  std::string gen_out;
  auto* g = app.add_subcommand("generate", "write a synthetic labeled corpus");
  g->add_option("--out", gen_out, "output corpus path (.csv, .tsv or .jsonl)")->required();
  g->add_option("--n", gen.n, "number of sentences")->capture_default_str();
  g->add_option("--noise", gen.noise_rate, "label-flip rate")->capture_default_str();
  g->add_flag("--typed", gen.typed, "generate bias-type annotated sentences");
  g->add_option("--multi-type-rate", gen.multi_type_rate, "share of two-type sentences");
  g->add_option("--unbiased-rate", gen.unbiased_rate, "share of unbiased sentences (typed)");
  g->callback([&] {
    action = [&] {
      gen.out = gen_out;
      gen.seed = seed();
      return cmd_generate(gen);
    };
  });

  // split
  SplitOptions split;
  CorpusFlags split_corpus;
  std::string split_out, split_kind = "k_fold";
  auto* s = app.add_subcommand("split", "write a stratified split plan");
  split_corpus.add(*s);
  s->add_option("--k", split.k, "folds")->capture_default_str();
  s->add_option("--kind", split_kind, "plan kind")
      ->check(CLI::IsMember({"k_fold", "five_by_two"}))
      ->capture_default_str();
  s->add_option("--out", split_out, "plan output path")->required();
  s->callback([&] {
    action = [&] {
      split.corpus = split_corpus.resolve();
      split.seed = seed();
      split.five_by_two = split_kind == "five_by_two";
      split.out = split_out;
      return cmd_split(split);
    };
  });

  // train
  CorpusFlags train_corpus;
  ModelFlags train_model;
  std::string train_out;
  auto* t = app.add_subcommand("train", "train a bias detector");
  train_corpus.add(*t);
  train_model.add(*t);
  t->add_option("--out,--checkpoint", train_out, "checkpoint output path")->required();
  t->callback([&] {
    action = [&] {
      TrainOptions o;
      o.corpus = train_corpus.resolve();
      o.model = train_model.resolve(seed());
      o.out = train_out;
      return cmd_train(o);
    };
  });

  // train-types
  CorpusFlags types_corpus;
  ModelFlags types_model;
  std::string types_out;
  std::vector<std::string> type_labels;
  std::vector<double> type_thresholds;
  auto* tt = app.add_subcommand("train-types", "train the multi-label bias-type classifier");
  types_corpus.add(*tt);
  types_model.add(*tt);
  tt->add_option("--labels", type_labels, "type labels (comma separated)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  tt->add_option("--thresholds", type_thresholds, "per-label thresholds (comma separated)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  tt->add_option("--out,--checkpoint", types_out, "checkpoint output path")->required();
  tt->callback([&] {
    action = [&] {
      TrainTypesOptions o;
      o.corpus = types_corpus.resolve();
      o.model = types_model.resolve(seed());
      o.labels = type_labels;
      o.thresholds = type_thresholds;
      o.out = types_out;
      return cmd_train_types(o);
    };
  });

  // baseline
  CorpusFlags base_corpus;
  std::string base_out;
  auto* bl = app.add_subcommand("baseline", "write a majority-class baseline checkpoint");
  base_corpus.add(*bl);
  bl->add_option("--out,--checkpoint", base_out, "checkpoint output path")->required();
  bl->callback([&] {
    action = [&] {
      BaselineOptions o;
      o.corpus = base_corpus.resolve();
      o.out = base_out;
      return cmd_baseline(o);
    };
  });

  // eval
  EvalOptions ev;
  CorpusFlags eval_corpus;
  ModelFlags eval_model;
  std::string eval_plan, eval_plan_out, eval_ckpt;
  std::optional<std::uint64_t> eval_split_seed;
  auto* e = app.add_subcommand("eval", "cross-validate with per-fold retraining");
  eval_corpus.add(*e);
  eval_model.add(*e);
  e->add_option("--plan", eval_plan, "existing split plan");
  e->add_option("--k", ev.k, "folds when no plan is given")->capture_default_str();
  e->add_option("--split-seed", eval_split_seed, "split seed (defaults to --seed)");
  e->add_option("--plan-out", eval_plan_out, "where to write a generated plan");
  e->add_option("--checkpoint", eval_ckpt, "checkpoint whose architecture is retrained");
  e->add_option("--name", ev.name, "model name in the table")->capture_default_str();
  e->callback([&] {
    action = [&] {
      ev.corpus = eval_corpus.resolve();
      ev.model = eval_model.resolve(seed());
      ev.split_seed = eval_split_seed.value_or(ev.model.train.seed);
      if (!eval_plan.empty()) ev.plan = eval_plan;
      if (!eval_plan_out.empty()) ev.plan_out = eval_plan_out;
      if (!eval_ckpt.empty()) ev.checkpoint = eval_ckpt;
      return cmd_eval(ev);
    };
  });

  // compare
  CompareOptions cmp;
  CorpusFlags cmp_corpus;
  ModelFlags cmp_model;
  std::string cmp_plan, cmp_plan5, cmp_a, cmp_b, correction = "on";
  bool want_mcnemar = false, want_five_two = false;
  auto* c = app.add_subcommand("compare", "paired significance tests between two models");
  cmp_corpus.add(*c);
  cmp_model.add(*c);
  c->add_option("--plan", cmp_plan, "shared split plan")->required();
  c->add_option("--plan-5x2", cmp_plan5, "five_by_two plan for the 5x2 test");
  c->add_option("-a", cmp_a, "checkpoint of model A")->required();
  c->add_option("-b", cmp_b, "checkpoint of model B")->required();
  c->add_option("--name-a", cmp.name_a, "name of model A")->capture_default_str();
  c->add_option("--name-b", cmp.name_b, "name of model B")->capture_default_str();
  c->add_flag("--mcnemar", want_mcnemar, "per-fold McNemar tests (default when no test is chosen)");
  c->add_flag("--five-two", want_five_two, "5x2 cv paired t-test on macro F1");
  c->add_option("--correction", correction, "continuity correction")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  c->add_flag("--retrain", cmp.retrain, "retrain both models on every fold's training part");
  c->callback([&] {
    action = [&] {
      cmp.corpus = cmp_corpus.resolve();
      cmp.model = cmp_model.resolve(seed());
      cmp.plan = cmp_plan;
      if (!cmp_plan5.empty()) cmp.plan_5x2 = cmp_plan5;
      cmp.a = cmp_a;
      cmp.b = cmp_b;
      cmp.mcnemar = want_mcnemar || !want_five_two;
      cmp.five_two = want_five_two;
      cmp.correction = parse_switch(correction);
      return cmd_compare(cmp);
    };
  });

  // explain
  ExplainOptions ex;
  CorpusFlags ex_corpus;
  std::string ex_ckpt, ex_sentence, ex_out = ".", ex_heatmap = "both";
  auto* x = app.add_subcommand("explain", "[CLS] attention heatmaps");
  ex_corpus.add(*x, false);
  x->add_option("--checkpoint", ex_ckpt, "detector checkpoint")->required();
  x->add_option("--sentence", ex_sentence, "single sentence to explain");
  x->add_option("--limit", ex.limit, "sentences taken from --corpus")->capture_default_str();
  x->add_option("--out-dir", ex_out, "heatmap directory")->capture_default_str();
  x->add_option("--heatmap", ex_heatmap, "heatmap files to write")
      ->check(CLI::IsMember({"json", "svg", "both"}))
      ->capture_default_str();
  x->callback([&] {
    action = [&] {
      ex.checkpoint = ex_ckpt;
      if (!ex_sentence.empty()) ex.sentence = ex_sentence;
      if (!ex_corpus.path.empty()) ex.corpus = ex_corpus.resolve();
      ex.out_dir = ex_out;
      ex.json = ex_heatmap != "svg";
      ex.svg = ex_heatmap != "json";
      return cmd_explain(ex);
    };
  });

  // pipeline
  PipelineOptions pl;
  std::string pl_det, pl_types, pl_input, pl_out;
  auto* p = app.add_subcommand("pipeline", "two-stage bias detection and typing");
  p->add_option("--detector", pl_det, "detector checkpoint")->required();
  p->add_option("--types", pl_types, "type classifier checkpoint")->required();
  p->add_option("--input", pl_input, "JSON lines with a text field, or plain text lines")
      ->required();
  p->add_option("--out", pl_out, "JSON-lines output (default: stdout)");
  p->add_option("--gate", pl.gate, "stage-1 probability gate")->capture_default_str();
  p->callback([&] {
    action = [&] {
      pl.detector = pl_det;
      pl.types = pl_types;
      pl.input = pl_input;
      if (!pl_out.empty()) pl.out = pl_out;
      return cmd_pipeline(pl);
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    const Report report = action();
    const std::string json = report.body.dump(2) + "\n";
    if (!report_path.empty()) {
      std::ofstream f(report_path, std::ios::binary);
      if (!f) throw IoError("cannot write report '" + report_path + "'");
      f << json;
    }
    const bool pipeline_stream = p->parsed() && pl_out.empty();
    if (pipeline_stream || (format == "table" && !report.table.empty())) {
      out << report.table;
    } else {
      out << json;
    }
    out.flush();
    return 0;
  } catch (const NumericalError& ex_) {
    err << "numerical error: " << ex_.what() << "\n";
    return 2;
  } catch (const Error& ex_) {
    err << "error: " << ex_.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& ex_) {
    err << "error: " << ex_.what() << "\n";
    return 1;
  } catch (const std::exception& ex_) {
    err << "internal error: " << ex_.what() << "\n";
    return 2;
  }
}

}  // namespace biaslab::cli
