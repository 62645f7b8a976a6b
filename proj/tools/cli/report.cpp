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

#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "biaslab/error.hpp"
#include "biaslab/random.hpp"

namespace biaslab::cli {

namespace {

std::string render(const std::vector<std::vector<std::string>>& cells,
                   std::size_t footer_from) {
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  auto rule = [&] {
    std::string s;
    for (std::size_t c = 0; c < width.size(); ++c) {
      s += (c == 0 ? "" : "-+-") + std::string(width[c], '-');
    }
    return s + "\n";
  };
  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (r == 1 || (r == footer_from && r < cells.size())) out += rule();
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c > 0) out += " | ";
      out += cells[r][c];
      if (c + 1 < cells[r].size()) out += std::string(width[c] - cells[r][c].size(), ' ');
    }
    out += "\n";
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

nlohmann::json input_record(const std::filesystem::path& path) {
  return {{"path", path.string()}, {"fnv1a64", file_digest(path)}};
}

std::string format_score(double mean, double stderr_) {
  return fixed(mean, 4) + " (" + fixed(stderr_, 4) + ")";
}

std::string format_p(double p) {
  if (p == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", p);
  return buf;
}

std::string f1_table(const std::vector<std::pair<std::string, FoldScores>>& rows) {
  std::vector<std::vector<std::string>> cells{{"Model", "Macro F1 (error)"}};
  for (const auto& [name, s] : rows) cells.push_back({name, format_score(s.mean, s.stderr_)});
  return render(cells, cells.size());
}

std::string mcnemar_table(const std::vector<McNemarRow>& rows) {
  std::vector<std::vector<std::string>> cells{{"Fold", "Chi-squared", "p-value"}};
  std::vector<double> chi2, p;
  for (const auto& row : rows) {
    if (!row.defined) {
      cells.push_back({row.fold, "n/a", "n/a"});
      continue;
    }
    cells.push_back({row.fold, fixed(row.result.chi2, 2), format_p(row.result.p_value)});
    chi2.push_back(row.result.chi2);
    p.push_back(row.result.p_value);
  }
  const std::size_t footer = cells.size();
  if (chi2.empty()) {
    cells.push_back({"Mean", "n/a", "n/a"});
  } else {
    cells.push_back({"Mean", fixed(mean_of(chi2), 2), format_p(mean_of(p))});
  }
  return render(cells, footer);
}

std::string five_two_line(const FiveTwoResult& r) {
  std::ostringstream s;
  s << "5x2 cv paired t-test: t = ";
  if (std::isfinite(r.t)) {
    s << fixed(r.t, 2);
  } else {
    s << (r.t > 0 ? "inf" : "-inf");
  }
  s << ", p = " << format_p(r.p_value) << "\n";
  return s.str();
}

}  // namespace biaslab::cli
