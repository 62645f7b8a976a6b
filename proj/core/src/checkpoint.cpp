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

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "biaslab/encoder.hpp"
#include "biaslab/error.hpp"

namespace biaslab {

namespace {

constexpr std::string_view kFormatName = "biaslab-checkpoint";
constexpr std::string_view kSeparator{"\n\0", 2};

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return out;
  }
}

nlohmann::json info_to_json(const ModelInfo& info) {
  return {{"kind", info.kind}, {"labels", info.labels}, {"thresholds", info.thresholds}};
}

ModelInfo info_from_json(const nlohmann::json& j) {
  ModelInfo info;
  info.kind = j.at("kind").get<std::string>();
  info.labels = j.at("labels").get<std::vector<std::string>>();
  info.thresholds = j.value("thresholds", std::vector<double>{});
  return info;
}

}  // namespace

std::string serialize_checkpoint(const Model& model) {
  model.config.validate();
  model.params.check(model.config);
  if (model.vocab.size() != model.config.vocab_size) {
    throw ValidationError("vocabulary size does not match config.vocab_size");
  }
  if (model.info.labels.size() != model.config.n_classes) {
    throw ValidationError("model label list must name every head output");
  }

  nlohmann::json header;
  header["format"] = kFormatName;
  header["version"] = kCheckpointVersion;
  header["config"] = model.config.to_json();
  header["model"] = info_to_json(model.info);
  header["vocab"] = model.vocab.to_json();
  auto& manifest = header["tensors"] = nlohmann::json::array();
  model.params.for_each([&](const std::string& name, const Matrix& m, bool) {
    manifest.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}});
  });

  std::string out = header.dump();
  out.append(kSeparator);
  model.params.for_each([&](const std::string&, const Matrix& m, bool) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(m.data()[i]));
      char bytes[8];
      std::memcpy(bytes, &bits, 8);
      out.append(bytes, 8);
    }
  });
  return out;
}

Model parse_checkpoint(std::string_view bytes) {
  const auto sep = bytes.find(kSeparator);
  if (sep == std::string_view::npos) {
    throw ValidationError("malformed checkpoint header: separator not found");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, sep));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed checkpoint header: ") + e.what());
  }

  Model model;
  try {
    if (header.at("format").get<std::string>() != kFormatName) {
      throw ValidationError("malformed checkpoint header: not a biaslab checkpoint");
    }
    const int version = header.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ValidationError("unsupported checkpoint format version " +
                            std::to_string(version) + " (expected " +
                            std::to_string(kCheckpointVersion) + ")");
    }
    model.config = EncoderConfig::from_json(header.at("config"));
    model.info = info_from_json(header.at("model"));
    model.vocab = Vocabulary::from_json(header.at("vocab"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint header: ") + e.what());
  }
  if (model.vocab.size() != model.config.vocab_size) {
    throw ValidationError("checkpoint vocabulary size does not match its config");
  }
  if (model.info.labels.size() != model.config.n_classes) {
    throw ValidationError("checkpoint label list does not match the head size");
  }

  model.params = EncoderParams::zeros(model.config);
  const auto& manifest = header.at("tensors");
  std::size_t index = 0;
  std::size_t offset = sep + kSeparator.size();
  model.params.for_each([&](const std::string& name, Matrix& m, bool) {
    if (index >= manifest.size()) {
      throw ValidationError("checkpoint manifest is missing tensor '" + name + "'");
    }
    const auto& entry = manifest[index++];
    const auto entry_name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
    if (entry_name != name || shape.size() != 2 || shape[0] != m.rows() ||
        shape[1] != m.cols()) {
      throw ValidationError("checkpoint tensor '" + entry_name +
                            "' does not match expected '" + name + "' shape");
    }
    const std::size_t need = 8 * static_cast<std::size_t>(m.size());
    if (bytes.size() < offset + need) {
      throw ValidationError("checkpoint tensor '" + name + "' truncated: expected " +
                            std::to_string(need) + " bytes, found " +
                            std::to_string(bytes.size() - std::min(bytes.size(), offset)));
    }
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, bytes.data() + offset + 8 * static_cast<std::size_t>(i), 8);
      m.data()[i] = std::bit_cast<double>(to_little_endian(bits));
    }
    offset += need;
  });
  if (index != manifest.size()) {
    throw ValidationError("checkpoint manifest lists unexpected extra tensors");
  }
  if (offset != bytes.size()) {
    throw ValidationError("checkpoint has " + std::to_string(bytes.size() - offset) +
                          " trailing bytes after the last tensor");
  }
  model.params.check(model.config);
  return model;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace biaslab
