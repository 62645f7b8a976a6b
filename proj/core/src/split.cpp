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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "biaslab/corpus.hpp"
#include "biaslab/error.hpp"
#include "biaslab/random.hpp"

namespace biaslab {

namespace {

std::vector<std::string> ids_of(const LabeledCorpus& corpus) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) ids.push_back(s.id);
  return ids;
}

// Fold index per sentence for one stratified k-way partition.
std::vector<int> stratified_partition(const LabeledCorpus& corpus, int k,
                                      std::uint64_t seed) {
  std::vector<int> folds(corpus.size(), -1);
  std::size_t cursor = 0;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].label == cls) members.push_back(i);
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
    rng.shuffle(std::span<std::size_t>(members));
    for (auto i : members) {
      folds[i] = static_cast<int>(cursor % static_cast<std::size_t>(k));
      ++cursor;
    }
  }
  return folds;
}

const char* kind_name(SplitKind kind) {
  return kind == SplitKind::k_fold ? "k_fold" : "five_by_two";
}

}  // namespace

std::vector<std::size_t> SplitPlan::test_indices(std::size_t partition,
                                                 int fold) const {
  std::vector<std::size_t> out;
  const auto& p = partitions.at(partition);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SplitPlan::train_indices(std::size_t partition,
                                                  int fold) const {
  std::vector<std::size_t> out;
  const auto& p = partitions.at(partition);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != fold) out.push_back(i);
  }
  return out;
}

nlohmann::json SplitPlan::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_name(kind);
  j["seed"] = seed;
  auto partition_json = [&](const std::vector<int>& folds) {
    nlohmann::json a = nlohmann::json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) a[ids[i]] = folds[i];
    return a;
  };
  if (kind == SplitKind::k_fold) {
    j["k"] = k;
    j["assignments"] = partition_json(partitions.at(0));
  } else {
    j["assignments"] = nlohmann::json::array();
    for (const auto& p : partitions) j["assignments"].push_back(partition_json(p));
  }
  return j;
}

SplitPlan SplitPlan::from_json(const nlohmann::json& j) {
  SplitPlan plan;
  try {
    const auto kind = j.at("kind").get<std::string>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    std::vector<nlohmann::json> parts;
    if (kind == "k_fold") {
      plan.kind = SplitKind::k_fold;
      plan.k = j.at("k").get<int>();
      parts.push_back(j.at("assignments"));
    } else if (kind == "five_by_two") {
      plan.kind = SplitKind::five_by_two;
      plan.k = 2;
      for (const auto& p : j.at("assignments")) parts.push_back(p);
      if (parts.size() != 5) {
        throw ValidationError("five_by_two plan needs 5 replications");
      }
    } else {
      throw ValidationError("unknown split kind '" + kind + "'");
    }
    if (plan.k < 2) throw ValidationError("split plan k must be >= 2");
    for (const auto& p : parts) {
      if (!p.is_object()) throw ValidationError("assignments must be an object");
    }
    // Object keys come back sorted; use the first partition's order for ids.
    for (const auto& [id, fold] : parts.front().items()) plan.ids.push_back(id);
    for (const auto& p : parts) {
      if (p.size() != plan.ids.size()) {
        throw ValidationError("replications cover different id sets");
      }
      std::vector<int> folds;
      folds.reserve(plan.ids.size());
      for (const auto& id : plan.ids) {
        int f = p.at(id).get<int>();
        if (f < 0 || f >= plan.k) {
          throw ValidationError("fold index out of range for id '" + id + "'");
        }
        folds.push_back(f);
      }
      plan.partitions.push_back(std::move(folds));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed split plan: ") + e.what());
  }
  return plan;
}

void SplitPlan::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

SplitPlan SplitPlan::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing split plan: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("cannot parse split plan " + path.string() + ": " +
                          e.what());
  }
  return from_json(j);
}

SplitPlan SplitPlan::aligned_to(const LabeledCorpus& corpus) const {
  if (corpus.size() != ids.size()) {
    throw ValidationError("split plan covers " + std::to_string(ids.size()) +
                          " sentences, corpus has " +
                          std::to_string(corpus.size()));
  }
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < ids.size(); ++i) position.emplace(ids[i], i);
  SplitPlan out = *this;
  out.ids = ids_of(corpus);
  for (std::size_t p = 0; p < partitions.size(); ++p) {
    for (std::size_t i = 0; i < out.ids.size(); ++i) {
      auto it = position.find(out.ids[i]);
      if (it == position.end()) {
        throw ValidationError("sentence id '" + out.ids[i] +
                              "' not in split plan");
      }
      out.partitions[p][i] = partitions[p][it->second];
    }
  }
  return out;
}

SplitPlan stratified_kfold(const LabeledCorpus& corpus, int k,
                           std::uint64_t seed) {
  if (k < 2) throw ValidationError("k must be >= 2, got " + std::to_string(k));
  const std::size_t smallest =
      std::min(corpus.label_count(0), corpus.label_count(1));
  if (static_cast<std::size_t>(k) > smallest) {
    throw ValidationError("k = " + std::to_string(k) +
                          " exceeds the smallest class size " +
                          std::to_string(smallest));
  }
  SplitPlan plan;
  plan.kind = SplitKind::k_fold;
  plan.seed = seed;
  plan.k = k;
  plan.ids = ids_of(corpus);
  plan.partitions.push_back(stratified_partition(corpus, k, seed));
  return plan;
}

SplitPlan five_by_two_splits(const LabeledCorpus& corpus, std::uint64_t seed) {
  if (corpus.label_count(0) < 2 || corpus.label_count(1) < 2) {
    throw ValidationError("5x2 splits need at least 2 sentences per class");
  }
  SplitPlan plan;
  plan.kind = SplitKind::five_by_two;
  plan.seed = seed;
  plan.k = 2;
  plan.ids = ids_of(corpus);
  for (std::uint64_t r = 0; r < 5; ++r) {
    plan.partitions.push_back(
        stratified_partition(corpus, 2, derive_seed(seed, 1000 + r)));
  }
  return plan;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_holdout(const LabeledCorpus& corpus, double fraction,
                   std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValidationError("holdout fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> train, val;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].label == cls) members.push_back(i);
    }
    if (members.size() < 2) {
      throw ValidationError("holdout needs at least 2 sentences per class");
    }
    Rng rng(derive_seed(seed, 500 + static_cast<std::uint64_t>(cls)));
    rng.shuffle(std::span<std::size_t>(members));
    auto n_val = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(members.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, members.size() - 1);
    val.insert(val.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {train, val};
}

}  // namespace biaslab
