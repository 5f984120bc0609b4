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

#ifndef SORTGEN_SIMULATOR_HPP_
#define SORTGEN_SIMULATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sortgen/config.hpp"
#include "sortgen/listvalue.hpp"
#include "sortgen/types.hpp"

namespace sortgen {

struct SimulatorConfig {
  std::size_t n_items = 200;
  std::size_t n_categories = 8;
  std::size_t sessions = 20000;
  double rho = 0.9;             // position decay
  double kappa = 0.5;           // contrast with recently shown items
  double base_pay = 0.3;        // pay rate given click, times affinity
  double affinity_scale = 3.0;  // weight of user-item match in affinity
  double category_spread = 0.2;
  double category_ctr_spread = 0.0;  // std of a per-category logit offset on prior_ctr
  double exposure_noise = 1.0;  // log-score noise of the logging ranker
  std::size_t window = 5;       // contrast window
  std::uint64_t seed = 7;

  bool operator==(const SimulatorConfig&) const = default;
};

SimulatorConfig simulator_config_from(const ConfigFile& file, std::uint64_t seed);
/// Throws ConfigError when the simulator cannot supply pools of l_s items.
void validate_simulator_config(const SimulatorConfig& sim, const EngineConfig& engine);

/// Known behavior model used to label sessions and to score lists exactly.
///
/// click(t) = clamp(affinity * rho^(t-1) * (1 + kappa * (0.5 - s_t)))
/// pay(t)   = click(t) * clamp(base_pay * affinity)
///
/// where affinity = sigmoid(logit(prior_ctr) + affinity_scale * <u, e>) and
/// s_t is the largest similarity to the previous `window` items (0 at t=1).
struct GroundTruthModel {
  double rho = 0.9;
  double kappa = 0.5;
  double base_pay = 0.3;
  double affinity_scale = 3.0;
  std::size_t window = 5;

  static GroundTruthModel from(const SimulatorConfig& sim);

  double affinity(const UserContext& user, const Item& item) const;
  /// Click probability of items[t] (0-based) given the items before it.
  double click_probability(const UserContext& user, std::span<const Item* const> items,
                           std::size_t t) const;
  double pay_given_click(const UserContext& user, const Item& item) const;
};

/// Exact expected cumulative values of a list under the ground truth.
struct ValueCurves {
  std::vector<double> click;  // click[t] = E[clicks in first t+1 positions]
  std::vector<double> pay;
  std::vector<double> gmv;

  double combined(const ObjectiveWeights& w, std::size_t length) const;
};

ValueCurves ground_truth_curves(const GroundTruthModel& gt, const UserContext& user,
                                std::span<const Item* const> items);
ValueCurves ground_truth_curves(const GroundTruthModel& gt, const UserContext& user,
                                std::span<const Item> pool, const SubList& list);

struct ImpressionSample {
  std::uint64_t session_id = 0;
  UserContext user;
  std::vector<Item> items;
  LabelVector labels;

  bool operator==(const ImpressionSample&) const = default;
};

struct Dataset {
  std::vector<ImpressionSample> samples;
  std::vector<Item> catalog;
  std::map<std::string, std::string> config_snapshot;

  bool operator==(const Dataset&) const = default;
};

/// Items with category-clustered unit-norm embeddings, log-normal prices and
/// Beta-distributed prior CTR/CVR.
std::vector<Item> sample_catalog(std::size_t n_items, std::size_t d_emb,
                                 std::size_t n_categories, std::uint64_t seed,
                                 double category_spread = 0.2,
                                 double category_ctr_spread = 0.0);
std::vector<Item> sample_catalog(const SimulatorConfig& sim, std::size_t d_emb);

UserContext sample_user(std::size_t d_user, std::uint64_t seed);

/// Draws click/pay labels for an exposed list.
LabelVector simulate_session(const UserContext& user, std::span<const Item> exposed,
                             const GroundTruthModel& gt, std::uint64_t seed);

/// A re-ranking request drawn from the catalog: one user, l_s candidates.
struct Pool {
  UserContext user;
  std::vector<Item> candidates;
};

Pool sample_pool(std::span<const Item> catalog, std::size_t l_s, std::size_t d_user,
                 std::uint64_t seed);

/// The logging policy's exposure: top l_o of the pool by noisy log prior_ctr.
std::vector<Item> exposure_list(const Pool& pool, std::size_t l_o, double noise,
                                std::uint64_t seed);

/// Catalog plus `sim.sessions` labeled exposures.
Dataset simulate_dataset(const EngineConfig& engine, const SimulatorConfig& sim);

/// Evaluation pools from a stream disjoint from the training sessions.
std::vector<Pool> evaluation_pools(std::span<const Item> catalog,
                                   const EngineConfig& engine, std::size_t count,
                                   std::uint64_t seed);

/// Deterministic 64-bit mix used to derive per-session seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace sortgen

#endif  // SORTGEN_SIMULATOR_HPP_
