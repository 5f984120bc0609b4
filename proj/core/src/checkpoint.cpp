// Copyright 2026 The SortGen Authors.
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

#include "sortgen/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sortgen {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Applies "key=value;key=value" model signature fields onto `config`.
void apply_signature(std::string_view sig, EngineConfig& config) {
  std::string text(sig);
  for (char& ch : text) {
    if (ch == ';') ch = '\n';
  }
  ConfigFile file = ConfigFile::parse(text, "checkpoint model signature");
  auto need = [&](const char* key) {
    if (!file.has(key)) {
      throw FormatError(std::string("checkpoint: model signature lacks ") + key);
    }
    return file.get_size(key, 0);
  };
  config.d_emb = need("d_emb");
  config.d_user = need("d_user");
  config.d_position = need("d_position");
  config.d_score = need("d_score");
  config.d_model = need("d_model");
  config.n_layers = need("n_layers");
  config.n_heads = need("n_heads");
  config.head_hidden = need("head_hidden");
  config.max_count = need("max_count");
  config.l_o = need("l_o");
  config.head_mode = parse_head_mode(file.get_string("head_mode", "monotone"));
  if (config.l_s < config.l_o) config.l_s = config.l_o;
}

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string checkpoint_to_string(const SortModel& model) {
  std::string out;
  out += kCheckpointFormat;
  out += "\nconfig_hash " + hex64(config_hash(model.config()));
  out += "\nmodel " + model_signature(model.config());
  out += "\nparams " + std::to_string(model.params().num_tensors()) + "\n";
  char buf[32];
  for (const auto& [name, p] : model.params()) {
    out += "param " + name + " " + std::to_string(p.value.rank());
    for (std::size_t e : p.value.shape()) out += " " + std::to_string(e);
    out += "\n";
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", p.value[i]);
      if (i) out += ' ';
      out += buf;
    }
    out += "\n";
  }
  out += "end\n";
  return out;
}

void save_checkpoint(const std::string& path, const SortModel& model) {
  const std::string text = checkpoint_to_string(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write checkpoint: " + path);
  out << text;
  if (!out) throw FormatError("failed writing checkpoint: " + path);
}

SortModel checkpoint_from_string(std::string_view text,
                                 const std::optional<EngineConfig>& base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw FormatError("checkpoint: unexpected end of file, expected " +
                        std::string(what) + " at line " + std::to_string(line_no + 1));
    }
    ++line_no;
    return std::istringstream(line);
  };
  next("format header");
  if (line != kCheckpointFormat) {
    throw FormatError("checkpoint: unsupported format '" + line + "'");
  }
  std::string key, hash_text, signature;
  next("config_hash") >> key >> hash_text;
  if (key != "config_hash") throw FormatError("checkpoint: missing config_hash");
  {
    auto ss = next("model signature");
    ss >> key >> signature;
    if (key != "model") throw FormatError("checkpoint: missing model signature");
  }
  const std::uint64_t stored_hash = std::stoull(hash_text, nullptr, 16);
  if (fnv1a64(signature) != stored_hash) {
    throw FormatError("checkpoint: config hash does not match model signature");
  }
  if (base && config_hash(*base) != stored_hash) {
    throw ConfigError("checkpoint: config hash " + hash_text +
                      " does not match the supplied configuration (" +
                      hex64(config_hash(*base)) + ")");
  }
  EngineConfig config = base.value_or(EngineConfig{});
  apply_signature(signature, config);

  std::size_t count = 0;
  next("params") >> key >> count;
  if (key != "params") throw FormatError("checkpoint: missing params count");
  nn::ParamStore store;
  for (std::size_t k = 0; k < count; ++k) {
    std::string name;
    std::size_t rank = 0;
    auto header = next("param header");
    header >> key >> name >> rank;
    if (key != "param" || !header) {
      throw FormatError("checkpoint: bad param header at line " + std::to_string(line_no));
    }
    std::vector<std::size_t> shape(rank);
    for (auto& e : shape) header >> e;
    if (!header) {
      throw FormatError("checkpoint: bad shape at line " + std::to_string(line_no));
    }
    auto values_line = next("parameter values");
    std::vector<double> data(nn::shape_size(shape));
    for (double& v : data) {
      std::string tok;
      if (!(values_line >> tok)) {
        throw FormatError("checkpoint: too few values for " + name + " at line " +
                          std::to_string(line_no));
      }
      v = std::stod(tok);
    }
    std::string extra;
    if (values_line >> extra) {
      throw FormatError("checkpoint: too many values for " + name + " at line " +
                        std::to_string(line_no));
    }
    store.add(name, nn::Tensor(shape, std::move(data)));
  }
  next("end marker");
  if (line != "end") throw FormatError("checkpoint: missing end marker");
  return SortModel(std::move(config), std::move(store));
}

SortModel load_checkpoint(const std::string& path,
                          const std::optional<EngineConfig>& base) {
  return checkpoint_from_string(read_file(path), base);
}

std::uint64_t checkpoint_file_hash(const std::string& path) {
  return fnv1a64(read_file(path));
}

}  // namespace sortgen
