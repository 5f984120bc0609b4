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

#include "sortgen/app.hpp"

#include <filesystem>
#include <fstream>

#include "sortgen/checkpoint.hpp"
#include "sortgen/evaluation.hpp"
#include "sortgen/io.hpp"
#include "sortgen/service.hpp"
#include "sortgen/trainer.hpp"

namespace sortgen {
namespace {

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing --") + what);
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(std::string(what) + " file not found: " + path);
  }
}

std::vector<Item> catalog_for(const CommandOptions& opts, const LoadedConfig& cfg) {
  if (!opts.data.empty()) {
    require_file(opts.data, "data");
    Dataset data = read_dataset(opts.data);
    if (data.catalog.empty()) throw Error("dataset has no catalog: " + opts.data);
    return std::move(data.catalog);
  }
  validate_simulator_config(cfg.sim, cfg.engine);
  return sample_catalog(cfg.sim, cfg.engine.d_emb);
}

void emit(const CommandOptions& opts, const std::string& text, std::ostream& log) {
  if (!opts.out.empty()) {
    write_file(opts.out, text);
    log << "wrote " << opts.out << "\n";
  } else {
    log << text;
  }
}

}  // namespace

LoadedConfig load_config(const CommandOptions& opts) {
  LoadedConfig cfg;
  if (!opts.config_path.empty()) cfg.file = ConfigFile::load(opts.config_path);
  if (opts.seed) cfg.file.set("seed", std::to_string(*opts.seed));
  cfg.engine = engine_config_from(cfg.file);
  require_valid(cfg.engine);
  cfg.sim = simulator_config_from(cfg.file, cfg.engine.seed);
  if (opts.seed) cfg.sim.seed = *opts.seed;
  return cfg;
}

SortModel load_model(const CommandOptions& opts, const LoadedConfig& cfg) {
  require_file(opts.ckpt, "ckpt");
  return load_checkpoint(opts.ckpt, cfg.engine);
}

int cmd_simulate(const CommandOptions& opts, std::ostream& log) {
  const LoadedConfig cfg = load_config(opts);
  validate_simulator_config(cfg.sim, cfg.engine);
  const std::string out = opts.out.empty() ? "sortgen-data.jsonl" : opts.out;
  const Dataset data = simulate_dataset(cfg.engine, cfg.sim);
  write_dataset(data, out);
  std::size_t clicks = 0, pays = 0;
  for (const auto& s : data.samples) {
    for (auto c : s.labels.clicks) clicks += c;
    for (auto p : s.labels.pays) pays += p;
  }
  log << "sessions\t" << data.samples.size() << "\n"
      << "catalog_items\t" << data.catalog.size() << "\n"
      << "clicks\t" << clicks << "\n"
      << "pays\t" << pays << "\n"
      << "dataset\t" << out << "\n";
  if (!data.catalog.empty()) log << "catalog\t" << catalog_path(out) << "\n";
  return 0;
}

int cmd_train(const CommandOptions& opts, std::ostream& log) {
  const LoadedConfig cfg = load_config(opts);
  require_file(opts.data, "data");
  const Dataset data = read_dataset(opts.data);
  TrainConfig tc = train_config_from(cfg.file, cfg.engine);
  tc.checkpoint_path = opts.ckpt.empty() ? "sortgen.ckpt" : opts.ckpt;
  if (!opts.out.empty()) tc.metrics_path = opts.out;
  SortModel model = SortModel::initialize(cfg.engine, cfg.engine.seed);
  log << "loss_mode\t" << to_string(tc.loss_mode) << "\n"
      << "parameters\t" << model.params().num_scalars() << "\n";
  const TrainReport report = train(data, model, tc);
  log << "initial_eval_loss\t" << report.initial_eval_loss << "\n"
      << "initial_calib_gap\t" << report.initial_calib_gap << "\n"
      << metrics_header() << "\n";
  for (const auto& e : report.epochs) log << metrics_line(e) << "\n";
  log << "best_epoch\t" << report.best_epoch << "\n"
      << "best_eval_loss\t" << report.best_eval_loss << "\n"
      << "checkpoint\t" << tc.checkpoint_path << "\n"
      << "report_mode\t" << to_string(report.loss_mode) << "\n";
  return 0;
}

int cmd_rerank(const CommandOptions& opts, std::ostream& log) {
  const LoadedConfig cfg = load_config(opts);
  const SortModel model = load_model(opts, cfg);
  require_file(opts.data, "data");
  const RerankRequest req = parse_rerank_request(read_file(opts.data), model.config());
  emit(opts, rerank_response_to_string(rerank(model, req)) + "\n", log);
  return 0;
}

int cmd_evaluate(const CommandOptions& opts, std::ostream& log) {
  const LoadedConfig cfg = load_config(opts);
  const SortModel model = load_model(opts, cfg);
  const std::vector<Item> catalog = catalog_for(opts, cfg);
  const std::size_t n = cfg.file.get_size("eval.pools", 200);
  const std::uint64_t seed = cfg.file.get_u64("eval.seed", cfg.engine.seed);
  const std::vector<Pool> pools = evaluation_pools(catalog, model.config(), n, seed);
  const auto curves = evaluate_curves(pools, model, GroundTruthModel::from(cfg.sim),
                                      GenerationParams::from(model.config()));
  emit(opts, curves_table(curves), log);
  for (const auto& c : curves) {
    log << "final_combined\t" << c.method << "\t" << c.final_combined() << "\n";
  }
  return 0;
}

int cmd_bench(const CommandOptions& opts, std::ostream& log) {
  const LoadedConfig cfg = load_config(opts);
  const SortModel model = opts.ckpt.empty()
                              ? SortModel::initialize(cfg.engine, cfg.engine.seed)
                              : load_model(opts, cfg);
  const BenchConfig bc = bench_config_from(cfg.file, cfg.engine.seed);
  const std::vector<Item> catalog = catalog_for(opts, cfg);
  const std::vector<Pool> pools = evaluation_pools(
      catalog, model.config(), std::min<std::size_t>(bc.slates, 200), bc.seed);
  const BenchReport r = run_bench(model, pools, GenerationParams::from(model.config()), bc);
  emit(opts, bench_report_text(r), log);
  return r.mismatched_outputs == 0 ? 0 : 1;
}

int cmd_oracle(const CommandOptions& opts, std::ostream& log) {
  const LoadedConfig cfg = load_config(opts);
  const SortModel model = opts.ckpt.empty()
                              ? SortModel::initialize(cfg.engine, cfg.engine.seed)
                              : load_model(opts, cfg);
  const OracleStudyConfig oc = oracle_study_config_from(cfg.file, cfg.engine.seed);
  const std::vector<Item> catalog = catalog_for(opts, cfg);
  const OracleStudy s = oracle_study(model, catalog, oc);
  emit(opts, oracle_report(s, oc), log);
  const bool ok = s.greedy_above_optimum == 0 && s.mean_greedy_ratio > s.mean_random_ratio;
  if (!ok) log << "oracle study check failed\n";
  return ok ? 0 : 1;
}

}  // namespace sortgen
