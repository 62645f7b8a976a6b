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

#include "biaslab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "biaslab/error.hpp"
#include "csv.hpp"

namespace biaslab {

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_types(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(';', start);
    if (end == std::string_view::npos) end = s.size();
    std::string t = trim(s.substr(start, end - start));
    if (!t.empty()) out.push_back(std::move(t));
    start = end + 1;
  }
  return out;
}

// Raw fields of one input row before label mapping.
struct RawRow {
  std::optional<std::string> id;
  std::string text;
  std::string label;
  std::vector<std::string> types;
};

std::vector<RawRow> read_delimited(const std::string& content, char delimiter,
                                   const CorpusSchema& schema) {
  auto rows = csv::parse(content, delimiter);
  if (rows.size() < 2) throw ValidationError("no rows");
  const auto& header = rows.front();
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw ValidationError("missing column '" + name + "' in header");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t text_col = column(schema.text_column);
  const std::size_t label_col = column(schema.label_column);
  std::optional<std::size_t> id_col, types_col;
  if (schema.id_column) id_col = column(*schema.id_column);
  if (schema.types_column) types_col = column(*schema.types_column);

  std::vector<RawRow> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto field = [&](std::size_t c) -> std::string {
      if (c >= row.size()) {
        throw ValidationError("row " + std::to_string(r - 1) + ": expected " +
                              std::to_string(header.size()) + " fields, got " +
                              std::to_string(row.size()));
      }
      return row[c];
    };
    RawRow raw;
    raw.text = field(text_col);
    raw.label = trim(field(label_col));
    if (id_col) raw.id = field(*id_col);
    if (types_col) raw.types = split_types(field(*types_col));
    out.push_back(std::move(raw));
  }
  return out;
}

std::string scalar_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

std::vector<RawRow> read_jsonl(const std::string& content,
                               const CorpusSchema& schema) {
  std::vector<RawRow> out;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    const std::size_t r = out.size();
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("row " + std::to_string(r) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw ValidationError("row " + std::to_string(r) + ": not a JSON object");
    }
    auto get = [&](const std::string& key) -> const nlohmann::json& {
      auto it = obj.find(key);
      if (it == obj.end()) {
        throw ValidationError("row " + std::to_string(r) + ": missing field '" +
                              key + "'");
      }
      return *it;
    };
    RawRow raw;
    raw.text = scalar_to_string(get(schema.text_column));
    raw.label = trim(scalar_to_string(get(schema.label_column)));
    if (schema.id_column) raw.id = scalar_to_string(get(*schema.id_column));
    // An absent or null types field means no annotations, like a blank cell.
    auto types_it = schema.types_column ? obj.find(*schema.types_column) : obj.end();
    if (types_it != obj.end() && !types_it->is_null()) {
      const auto& t = *types_it;
      if (t.is_array()) {
        for (const auto& e : t) raw.types.push_back(scalar_to_string(e));
      } else {
        raw.types = split_types(scalar_to_string(t));
      }
    }
    out.push_back(std::move(raw));
  }
  if (out.empty()) throw ValidationError("no rows");
  return out;
}

}  // namespace

LabeledCorpus::LabeledCorpus(std::vector<LabeledSentence> sentences)
    : sentences_(std::move(sentences)) {
  std::unordered_set<std::string> seen;
  seen.reserve(sentences_.size());
  for (const auto& s : sentences_) {
    if (s.label != 0 && s.label != 1) {
      throw ValidationError("sentence '" + s.id + "': label must be 0 or 1");
    }
    if (is_blank(s.text)) {
      throw ValidationError("sentence '" + s.id + "': empty text");
    }
    if (!seen.insert(s.id).second) {
      throw ValidationError("duplicate sentence id '" + s.id + "'");
    }
    ++label_counts_[static_cast<std::size_t>(s.label)];
  }
}

std::vector<int> LabeledCorpus::labels() const {
  std::vector<int> out;
  out.reserve(sentences_.size());
  for (const auto& s : sentences_) out.push_back(s.label);
  return out;
}

std::vector<std::string> LabeledCorpus::texts() const {
  std::vector<std::string> out;
  out.reserve(sentences_.size());
  for (const auto& s : sentences_) out.push_back(s.text);
  return out;
}

LabeledCorpus LabeledCorpus::subset(std::span<const std::size_t> indices) const {
  std::vector<LabeledSentence> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(sentences_.at(i));
  return LabeledCorpus(std::move(out));
}

FileFormat parse_file_format(const std::string& name) {
  if (name == "csv") return FileFormat::csv;
  if (name == "tsv") return FileFormat::tsv;
  if (name == "jsonl" || name == "json") return FileFormat::jsonl;
  throw ValidationError("unknown file format '" + name + "'");
}

FileFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".csv") return FileFormat::csv;
  if (ext == ".tsv" || ext == ".tab") return FileFormat::tsv;
  if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") {
    return FileFormat::jsonl;
  }
  throw ValidationError("cannot infer file format from '" + path.string() +
                        "'; set the schema format explicitly");
}

CorpusSchema CorpusSchema::babe() {
  CorpusSchema s;
  s.text_column = "text";
  s.label_column = "label_bias";
  s.label_map = {{"Biased", 1}, {"Non-biased", 0}};
  return s;
}

CorpusSchema CorpusSchema::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("schema must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    static const std::set<std::string> known{"text", "label", "id", "types", "format", "labels"};
    if (!known.count(key)) throw ValidationError("unknown schema key '" + key + "'");
  }
  CorpusSchema s;
  try {
    if (j.contains("text")) s.text_column = j.at("text").get<std::string>();
    if (j.contains("label")) s.label_column = j.at("label").get<std::string>();
    if (j.contains("id")) s.id_column = j.at("id").get<std::string>();
    if (j.contains("types")) s.types_column = j.at("types").get<std::string>();
    if (j.contains("format")) {
      s.format = parse_file_format(j.at("format").get<std::string>());
    }
    if (j.contains("labels")) {
      s.label_map.clear();
      for (const auto& [key, value] : j.at("labels").items()) {
        int v = value.get<int>();
        if (v != 0 && v != 1) {
          throw ValidationError("label map value for '" + key + "' must be 0 or 1");
        }
        s.label_map[key] = v;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed schema: ") + e.what());
  }
  return s;
}

nlohmann::json CorpusSchema::to_json() const {
  nlohmann::json j;
  j["text"] = text_column;
  j["label"] = label_column;
  if (id_column) j["id"] = *id_column;
  if (types_column) j["types"] = *types_column;
  j["labels"] = label_map;
  if (format) {
    j["format"] = *format == FileFormat::csv   ? "csv"
                  : *format == FileFormat::tsv ? "tsv"
                                               : "jsonl";
  }
  return j;
}

LabeledCorpus load_corpus(const std::filesystem::path& path,
                          const CorpusSchema& schema) {
  if (!std::filesystem::exists(path)) {
    throw IoError("missing file: " + path.string());
  }
  const FileFormat format = schema.format ? *schema.format
                                          : format_from_extension(path);
  const std::string content = read_file(path);
  if (is_blank(content)) throw ValidationError("no rows");

  std::vector<RawRow> rows =
      format == FileFormat::jsonl
          ? read_jsonl(content, schema)
          : read_delimited(content, format == FileFormat::csv ? ',' : '\t',
                           schema);

  const std::string filename = path.filename().string();
  std::vector<LabeledSentence> sentences;
  sentences.reserve(rows.size());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& raw = rows[r];
    const std::string where = "row " + std::to_string(r);
    auto it = schema.label_map.find(raw.label);
    if (it == schema.label_map.end()) {
      throw ValidationError(where + ": unmapped label value '" + raw.label + "'");
    }
    if (is_blank(raw.text)) throw ValidationError(where + ": empty text field");
    LabeledSentence s;
    s.id = raw.id ? *raw.id : filename + ":" + std::to_string(r);
    if (!seen.insert(s.id).second) {
      throw ValidationError(where + ": duplicate id '" + s.id + "'");
    }
    s.text = std::move(raw.text);
    s.label = it->second;
    s.type_labels = std::move(raw.types);
    sentences.push_back(std::move(s));
  }
  return LabeledCorpus(std::move(sentences));
}

CorpusSchema round_trip_schema() {
  CorpusSchema s;
  s.id_column = "id";
  s.types_column = "types";
  return s;
}

void write_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path,
                  std::optional<FileFormat> format) {
  const FileFormat f = format ? *format : format_from_extension(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());

  auto join_types = [](const std::vector<std::string>& types) {
    std::string joined;
    for (std::size_t i = 0; i < types.size(); ++i) {
      if (i) joined += ';';
      joined += types[i];
    }
    return joined;
  };

  if (f == FileFormat::jsonl) {
    for (const auto& s : corpus.sentences()) {
      nlohmann::json j;
      j["id"] = s.id;
      j["text"] = s.text;
      j["label"] = s.label;
      j["types"] = s.type_labels;
      out << j.dump() << '\n';
    }
  } else {
    const char d = f == FileFormat::csv ? ',' : '\t';
    out << "id" << d << "text" << d << "label" << d << "types\n";
    for (const auto& s : corpus.sentences()) {
      out << csv::escape(s.id, d) << d << csv::escape(s.text, d) << d
          << s.label << d << csv::escape(join_types(s.type_labels), d) << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace biaslab
