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

#include "sortgen/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "sortgen/kernels.hpp"

namespace sortgen {
namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

double logit(double p) {
  const double q = std::clamp(p, 1e-6, 1.0 - 1e-6);
  return std::log(q / (1.0 - q));
}

double beta_draw(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

std::vector<double> unit_gaussian(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(d);
  for (;;) {
    for (double& x : v) x = normal(rng);
    if (dot(v, v) > 1e-12) return normalized(v);
  }
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

SimulatorConfig simulator_config_from(const ConfigFile& file, std::uint64_t seed) {
  SimulatorConfig s;
  s.n_items = file.get_size("sim.n_items", s.n_items);
  s.n_categories = file.get_size("sim.n_categories", s.n_categories);
  s.sessions = file.get_size("sim.sessions", s.sessions);
  s.rho = file.get_double("sim.rho", s.rho);
  s.kappa = file.get_double("sim.kappa", s.kappa);
  s.base_pay = file.get_double("sim.base_pay", s.base_pay);
  s.affinity_scale = file.get_double("sim.affinity_scale", s.affinity_scale);
  s.category_spread = file.get_double("sim.category_spread", s.category_spread);
  s.category_ctr_spread = file.get_double("sim.category_ctr_spread", s.category_ctr_spread);
  s.exposure_noise = file.get_double("sim.exposure_noise", s.exposure_noise);
  s.window = file.get_size("sim.window", s.window);
  s.seed = file.get_u64("sim.seed", seed);
  return s;
}

void validate_simulator_config(const SimulatorConfig& sim, const EngineConfig& engine) {
  if (sim.n_items < engine.l_s) {
    throw ConfigError("sim.n_items (" + std::to_string(sim.n_items) +
                      ") is smaller than l_s (" + std::to_string(engine.l_s) + ")");
  }
  if (sim.n_categories == 0) throw ConfigError("sim.n_categories must be positive");
  if (!(sim.rho > 0.0 && sim.rho <= 1.0)) throw ConfigError("sim.rho must be in (0, 1]");
  if (sim.base_pay < 0.0 || sim.base_pay > 1.0) {
    throw ConfigError("sim.base_pay must be in [0, 1]");
  }
  if (sim.window == 0) throw ConfigError("sim.window must be at least 1");
  if (sim.category_spread < 0.0 || sim.exposure_noise < 0.0) {
    throw ConfigError("sim spreads must be non-negative");
  }
}

GroundTruthModel GroundTruthModel::from(const SimulatorConfig& sim) {
  GroundTruthModel gt;
  gt.rho = sim.rho;
  gt.kappa = sim.kappa;
  gt.base_pay = sim.base_pay;
  gt.affinity_scale = sim.affinity_scale;
  gt.window = sim.window;
  return gt;
}

double GroundTruthModel::affinity(const UserContext& user, const Item& item) const {
  const std::size_t d = std::min(user.features.size(), item.embedding.size());
  double match = 0.0;
  for (std::size_t k = 0; k < d; ++k) match += user.features[k] * item.embedding[k];
  return nn::sigmoid(logit(item.prior_ctr) + affinity_scale * match);
}

double GroundTruthModel::click_probability(const UserContext& user,
                                           std::span<const Item* const> items,
                                           std::size_t t) const {
  if (t >= items.size()) throw ShapeError("click_probability: position out of range");
  double contrast = 0.0;
  if (t > 0) {
    const std::size_t first = t > window ? t - window : 0;
    contrast = -1.0;
    for (std::size_t k = first; k < t; ++k) {
      contrast = std::max(contrast, dot(items[t]->embedding, items[k]->embedding));
    }
  }
  const double p = affinity(user, *items[t]) * std::pow(rho, static_cast<double>(t)) *
                   (1.0 + kappa * (0.5 - contrast));
  return clamp01(p);
}

double GroundTruthModel::pay_given_click(const UserContext& user, const Item& item) const {
  return clamp01(base_pay * affinity(user, item));
}

double ValueCurves::combined(const ObjectiveWeights& w, std::size_t length) const {
  if (length == 0) return 0.0;
  if (length > click.size()) throw ShapeError("ValueCurves::combined: length out of range");
  return combine(w, click[length - 1], pay[length - 1], gmv[length - 1]);
}

ValueCurves ground_truth_curves(const GroundTruthModel& gt, const UserContext& user,
                                std::span<const Item* const> items) {
  ValueCurves c;
  double click = 0.0, pay = 0.0, gmv = 0.0;
  for (std::size_t t = 0; t < items.size(); ++t) {
    const double pc = gt.click_probability(user, items, t);
    const double pp = pc * gt.pay_given_click(user, *items[t]);
    click += pc;
    pay += pp;
    gmv += pp * items[t]->price;
    c.click.push_back(click);
    c.pay.push_back(pay);
    c.gmv.push_back(gmv);
  }
  return c;
}

ValueCurves ground_truth_curves(const GroundTruthModel& gt, const UserContext& user,
                                std::span<const Item> pool, const SubList& list) {
  std::vector<const Item*> items;
  items.reserve(list.size());
  for (std::size_t idx : list.items) {
    if (idx >= pool.size()) throw ShapeError("ground_truth_curves: pool index out of range");
    items.push_back(&pool[idx]);
  }
  return ground_truth_curves(gt, user, items);
}

std::vector<Item> sample_catalog(std::size_t n_items, std::size_t d_emb,
                                 std::size_t n_categories, std::uint64_t seed,
                                 double category_spread, double category_ctr_spread) {
  if (d_emb == 0) throw ConfigError("sample_catalog: d_emb must be positive");
  if (n_categories == 0) throw ConfigError("sample_catalog: n_categories must be positive");
  std::mt19937_64 rng(mix_seed(seed, 0xCA7A));
  std::vector<std::vector<double>> centers;
  for (std::size_t c = 0; c < n_categories; ++c) centers.push_back(unit_gaussian(rng, d_emb));
  std::vector<double> ctr_offset(n_categories, 0.0);
  {
    std::normal_distribution<double> offset(0.0, 1.0);
    for (double& o : ctr_offset) o = category_ctr_spread * offset(rng);
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  std::lognormal_distribution<double> price(3.0, 0.8);
  std::uniform_int_distribution<std::size_t> category(0, n_categories - 1);

  std::vector<Item> items;
  items.reserve(n_items);
  for (std::size_t n = 0; n < n_items; ++n) {
    Item it;
    it.id = static_cast<ItemId>(n + 1);
    it.category = static_cast<int>(category(rng));
    std::vector<double> e = centers[static_cast<std::size_t>(it.category)];
    for (;;) {
      std::vector<double> v = e;
      for (double& x : v) x += category_spread * normal(rng);
      if (dot(v, v) > 1e-12) {
        e = normalized(v);
        break;
      }
    }
    it.embedding = std::move(e);
    it.price = price(rng);
    it.prior_ctr = nn::sigmoid(logit(beta_draw(rng, 2.0, 18.0)) +
                               ctr_offset[static_cast<std::size_t>(it.category)]);
    it.prior_cvr = beta_draw(rng, 2.0, 38.0);
    items.push_back(std::move(it));
  }
  return items;
}

std::vector<Item> sample_catalog(const SimulatorConfig& sim, std::size_t d_emb) {
  return sample_catalog(sim.n_items, d_emb, sim.n_categories, sim.seed, sim.category_spread,
                        sim.category_ctr_spread);
}

UserContext sample_user(std::size_t d_user, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0x05E7));
  return UserContext{unit_gaussian(rng, d_user)};
}

LabelVector simulate_session(const UserContext& user, std::span<const Item> exposed,
                             const GroundTruthModel& gt, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0x5E55));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<const Item*> items;
  for (const Item& it : exposed) items.push_back(&it);
  LabelVector labels;
  for (std::size_t t = 0; t < items.size(); ++t) {
    const double pc = gt.click_probability(user, items, t);
    const bool click = uniform(rng) < pc;
    // Draw the pay coin unconditionally so the stream stays aligned.
    const bool pay = uniform(rng) < gt.pay_given_click(user, *items[t]);
    labels.clicks.push_back(click ? 1 : 0);
    labels.pays.push_back(click && pay ? 1 : 0);
  }
  return labels;
}

Pool sample_pool(std::span<const Item> catalog, std::size_t l_s, std::size_t d_user,
                 std::uint64_t seed) {
  if (catalog.size() < l_s) {
    throw ConfigError("sample_pool: catalog has fewer than l_s items");
  }
  Pool pool;
  pool.user = sample_user(d_user, seed);
  std::mt19937_64 rng(mix_seed(seed, 0x9001));
  std::vector<std::size_t> order(catalog.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t k = 0; k < l_s; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, order.size() - 1);
    std::swap(order[k], order[pick(rng)]);
    pool.candidates.push_back(catalog[order[k]]);
  }
  return pool;
}

std::vector<Item> exposure_list(const Pool& pool, std::size_t l_o, double noise,
                                std::uint64_t seed) {
  if (l_o > pool.candidates.size()) {
    throw ConfigError("exposure_list: l_o exceeds the pool size");
  }
  std::mt19937_64 rng(mix_seed(seed, 0xE7B0));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t k = 0; k < pool.candidates.size(); ++k) {
    const Item& it = pool.candidates[k];
    scored.emplace_back(std::log(std::max(it.prior_ctr, 1e-12)) + noise * normal(rng), k);
  }
  std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return pool.candidates[a.second].id < pool.candidates[b.second].id;
  });
  std::vector<Item> out;
  for (std::size_t k = 0; k < l_o; ++k) out.push_back(pool.candidates[scored[k].second]);
  return out;
}

Dataset simulate_dataset(const EngineConfig& engine, const SimulatorConfig& sim) {
  require_valid(engine);
  validate_simulator_config(sim, engine);
  Dataset data;
  data.catalog = sample_catalog(sim, engine.d_emb);
  const GroundTruthModel gt = GroundTruthModel::from(sim);
  data.samples.reserve(sim.sessions);
  for (std::size_t s = 0; s < sim.sessions; ++s) {
    const std::uint64_t session_seed = mix_seed(sim.seed, 1'000'000 + s);
    Pool pool = sample_pool(data.catalog, engine.l_s, engine.d_user, session_seed);
    ImpressionSample sample;
    sample.session_id = session_seed;
    sample.items = exposure_list(pool, engine.l_o, sim.exposure_noise, session_seed);
    sample.labels = simulate_session(pool.user, sample.items, gt, session_seed);
    sample.user = std::move(pool.user);
    data.samples.push_back(std::move(sample));
  }
  auto& snap = data.config_snapshot;
  snap["seed"] = std::to_string(sim.seed);
  snap["n_items"] = std::to_string(sim.n_items);
  snap["n_categories"] = std::to_string(sim.n_categories);
  snap["sessions"] = std::to_string(sim.sessions);
  snap["rho"] = fmt_double(sim.rho);
  snap["kappa"] = fmt_double(sim.kappa);
  snap["base_pay"] = fmt_double(sim.base_pay);
  snap["affinity_scale"] = fmt_double(sim.affinity_scale);
  snap["category_spread"] = fmt_double(sim.category_spread);
  snap["category_ctr_spread"] = fmt_double(sim.category_ctr_spread);
  snap["exposure_noise"] = fmt_double(sim.exposure_noise);
  snap["window"] = std::to_string(sim.window);
  snap["l_s"] = std::to_string(engine.l_s);
  snap["l_o"] = std::to_string(engine.l_o);
  snap["d_emb"] = std::to_string(engine.d_emb);
  snap["d_user"] = std::to_string(engine.d_user);
  return data;
}

std::vector<Pool> evaluation_pools(std::span<const Item> catalog,
                                   const EngineConfig& engine, std::size_t count,
                                   std::uint64_t seed) {
  std::vector<Pool> pools;
  pools.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    pools.push_back(sample_pool(catalog, engine.l_s, engine.d_user,
                                mix_seed(seed ^ 0xE7A1E7A1ull, 5'000'000 + k)));
  }
  return pools;
}

}  // namespace sortgen
