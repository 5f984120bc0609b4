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

#ifndef SORTGEN_APP_HPP_
#define SORTGEN_APP_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "sortgen/config.hpp"
#include "sortgen/model.hpp"
#include "sortgen/simulator.hpp"

namespace sortgen {

/// Flags shared by the command-line subcommands.
struct CommandOptions {
  std::string config_path;  // empty: built-in defaults
  std::optional<std::uint64_t> seed;
  std::string ckpt;
  std::string data;
  std::string out;
  int port = 8080;
};

/// Everything a command reads from the configuration file, with --seed
/// applied on top.
struct LoadedConfig {
  ConfigFile file;
  EngineConfig engine;
  SimulatorConfig sim;
};

LoadedConfig load_config(const CommandOptions& opts);

/// Loads a checkpoint; the non-model settings (queues, weights, lambda, ...)
/// come from the configuration file.
SortModel load_model(const CommandOptions& opts, const LoadedConfig& cfg);

// Each command writes its human-readable summary to `log` and returns a
// process exit status. Errors propagate as exceptions.
int cmd_simulate(const CommandOptions& opts, std::ostream& log);
int cmd_train(const CommandOptions& opts, std::ostream& log);
int cmd_rerank(const CommandOptions& opts, std::ostream& log);
int cmd_evaluate(const CommandOptions& opts, std::ostream& log);
int cmd_bench(const CommandOptions& opts, std::ostream& log);
int cmd_oracle(const CommandOptions& opts, std::ostream& log);

}  // namespace sortgen

#endif  // SORTGEN_APP_HPP_
