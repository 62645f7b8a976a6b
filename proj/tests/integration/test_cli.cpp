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

#include <doctest.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biaslab/corpus.hpp"
#include "biaslab/interpret.hpp"
#include "cli/app.hpp"
#include "temp_dir.hpp"

using biaslab::testing::TempDir;
using biaslab::testing::read_file;
using biaslab::testing::write_file;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
  nlohmann::json json() const { return nlohmann::json::parse(out); }
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "biaslab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = biaslab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

const std::vector<std::string> kSmall{"--d-model", "8",  "--heads",  "2", "--layers", "1",
                                      "--d-ff",    "16", "--epochs", "3", "--seed",   "4"};

std::vector<std::string> with_small(std::vector<std::string> args) {
  args.insert(args.end(), kSmall.begin(), kSmall.end());
  return args;
}

}  // namespace

TEST_CASE("generate and split write reproducible artifacts with report headers") {
  TempDir dir;
  const auto corpus = (dir / "c.csv").string();
  const auto r = cli({"generate", "--out", corpus, "--n", "40", "--seed", "3"});
  REQUIRE(r.code == 0);
  const auto j = r.json();
  CHECK(j.at("command") == "generate");
  CHECK(j.at("format_version") == 1);
  CHECK(j.at("seeds").at("generator") == 3);
  CHECK(biaslab::load_corpus(corpus).size() == 40);

  const auto plan = (dir / "plan.json").string();
  REQUIRE(cli({"split", "--corpus", corpus, "--k", "4", "--seed", "2", "--out", plan}).code == 0);
  const auto loaded = biaslab::SplitPlan::load(plan);
  CHECK(loaded.k == 4);
  CHECK(loaded.seed == 2);
  const auto plan5 = (dir / "plan5.json").string();
  REQUIRE(cli({"split", "--corpus", corpus, "--kind", "five_by_two", "--seed", "2", "--out",
               plan5})
              .code == 0);
  CHECK(biaslab::SplitPlan::load(plan5).partition_count() == 5);
}

TEST_CASE("usage and validation errors exit with status 1") {
  TempDir dir;
  const auto corpus = (dir / "c.csv").string();
  REQUIRE(cli({"generate", "--out", corpus, "--n", "30", "--seed", "1"}).code == 0);
  CHECK(cli({"no-such-command"}).code == 1);
  CHECK(cli({"split", "--corpus", corpus, "--k", "1", "--out", (dir / "p.json").string()})
            .code == 1);

  const auto model = (dir / "m.ckpt").string();
  REQUIRE(cli({"baseline", "--corpus", corpus, "--out", model}).code == 0);
  const auto missing_plan = cli({"compare", "--corpus", corpus, "-a", model, "-b", model});
  CHECK(missing_plan.code == 1);
  CHECK(missing_plan.err.find("--plan") != std::string::npos);

  write_file(dir / "bad.json", "{\"kind\": \"k_fold\"");
  const auto bad = cli({"compare", "--corpus", corpus, "--plan", (dir / "bad.json").string(),
                        "-a", model, "-b", model});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("plan") != std::string::npos);

  CHECK(cli({"train", "--corpus", (dir / "absent.csv").string(), "--out", model}).code == 1);
}

TEST_CASE("identical models produce an explicit McNemar error per fold") {
  TempDir dir;
  const auto corpus = (dir / "c.csv").string();
  const auto plan = (dir / "plan.json").string();
  const auto model = (dir / "m.ckpt").string();
  REQUIRE(cli({"generate", "--out", corpus, "--n", "40", "--seed", "1"}).code == 0);
  REQUIRE(cli({"split", "--corpus", corpus, "--k", "2", "--seed", "1", "--out", plan}).code == 0);
  REQUIRE(cli({"baseline", "--corpus", corpus, "--out", model}).code == 0);
  const auto r = cli({"compare", "--corpus", corpus, "--plan", plan, "-a", model, "-b", model});
  REQUIRE(r.code == 0);
  const auto folds = r.json().at("mcnemar").at("per_fold");
  REQUIRE(folds.size() == 2);
  for (const auto& f : folds) {
    CHECK(f.at("error").get<std::string>().find("no discordant pairs") != std::string::npos);
    CHECK(f.at("n01") == 0);
    CHECK(f.at("n10") == 0);
  }
}

TEST_CASE("seed precedence: flag, then config file, then environment") {
  TempDir dir;
  const auto corpus = (dir / "c.csv").string();
  write_file(dir / "run.cfg", "# generator settings\nseed = 21\nn = 24\n");
  const auto cfg = (dir / "run.cfg").string();

  const auto from_file = cli({"generate", "--config", cfg, "--out", corpus});
  REQUIRE(from_file.code == 0);
  CHECK(from_file.json().at("seeds").at("generator") == 21);
  CHECK(biaslab::load_corpus(corpus).size() == 24);

  const auto overridden = cli({"generate", "--config", cfg, "--out", corpus, "--n", "30",
                               "--seed", "22"});
  REQUIRE(overridden.code == 0);
  CHECK(overridden.json().at("seeds").at("generator") == 22);
  CHECK(biaslab::load_corpus(corpus).size() == 30);

  ::setenv("BIASLAB_SEED", "77", 1);
  const auto from_env = cli({"generate", "--out", corpus, "--n", "10"});
  ::setenv("BIASLAB_SEED", "not-a-number", 1);
  const auto bad_env = cli({"generate", "--out", corpus, "--n", "10"});
  ::unsetenv("BIASLAB_SEED");
  const auto fallback = cli({"generate", "--out", corpus, "--n", "10"});
  REQUIRE(from_env.code == 0);
  CHECK(from_env.json().at("seeds").at("generator") == 77);
  CHECK(bad_env.code == 1);
  REQUIRE(fallback.code == 0);
  CHECK(fallback.json().at("seeds").at("generator") == 0);
}

TEST_CASE("divergent training exits with status 2") {
  TempDir dir;
  const auto corpus = (dir / "c.csv").string();
  REQUIRE(cli({"generate", "--out", corpus, "--n", "40", "--seed", "1"}).code == 0);
  const auto r = cli(with_small(
      {"train", "--corpus", corpus, "--out", (dir / "m.ckpt").string(), "--lr", "1e300"}));
  CHECK(r.code == 2);
  CHECK(r.err.find("numerical error") != std::string::npos);
}

TEST_CASE("explain and pipeline outputs") {
  TempDir dir;
  const auto corpus = (dir / "c.csv").string();
  const auto typed = (dir / "t.jsonl").string();
  const auto det = (dir / "det.ckpt").string();
  const auto types = (dir / "types.ckpt").string();
  REQUIRE(cli({"generate", "--out", corpus, "--n", "60", "--seed", "5"}).code == 0);
  REQUIRE(cli({"generate", "--typed", "--out", typed, "--n", "120", "--seed", "5"}).code == 0);
  REQUIRE(cli(with_small({"train", "--corpus", corpus, "--out", det})).code == 0);
  const auto tt = cli(with_small({"train-types", "--corpus", typed, "--out", types}));
  REQUIRE_MESSAGE(tt.code == 0, tt.err);

  const auto out_dir = dir / "heatmaps";
  const auto ex = cli({"explain", "--checkpoint", det, "--corpus", corpus, "--limit", "3",
                       "--heatmap", "both", "--out-dir", out_dir.string()});
  REQUIRE_MESSAGE(ex.code == 0, ex.err);
  for (int i = 0; i < 3; ++i) {
    const auto json = out_dir / ("explain_" + std::to_string(i) + ".json");
    const auto attr =
        biaslab::TokenAttribution::from_json(nlohmann::json::parse(read_file(json)));
    double sum = 0.0;
    for (double w : attr.weights) sum += w;
    CHECK(std::abs(sum - 1.0) < 1e-9);
    CHECK(read_file(out_dir / ("explain_" + std::to_string(i) + ".svg")).find("<svg") == 0);
  }

  write_file(dir / "in.txt", "the senator lied again\n\ncalm weather report today\n");
  const auto p = cli({"pipeline", "--detector", det, "--types", types, "--input",
                      (dir / "in.txt").string()});
  REQUIRE_MESSAGE(p.code == 0, p.err);
  std::istringstream lines(p.out);
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(lines, line)) {
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  }
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].at("text") == "the senator lied again");
  CHECK(rows[1].at("text") == "calm weather report today");
  for (const auto& r : rows) {
    CHECK(r.at("stage2_skipped") == !r.at("is_biased").get<bool>());
  }

  CHECK(cli({"pipeline", "--detector", types, "--types", types, "--input",
             (dir / "in.txt").string()})
            .code == 1);
}
