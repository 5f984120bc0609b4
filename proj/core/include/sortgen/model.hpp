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

#ifndef SORTGEN_MODEL_HPP_
#define SORTGEN_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sortgen/config.hpp"
#include "sortgen/listvalue.hpp"
#include "sortgen/params.hpp"
#include "sortgen/tape.hpp"
#include "sortgen/types.hpp"

namespace sortgen {

/// Per-block model inputs for a batch of equal-length lists. The position
/// block is a parameter and is attached inside the model.
struct ModelInput {
  std::size_t batch = 0;
  std::size_t length = 0;
  nn::Tensor item;   // [B, l, d_emb]
  nn::Tensor user;   // [B, d_user]
  nn::Tensor score;  // [B, l, 2] = (prior_ctr, prior_cvr)
};

/// Builds a ModelInput from item sequences (one per batch element) and the
/// matching users. Sequences must be non-empty, equal-length and no longer
/// than l_o.
ModelInput assemble_input(const std::vector<std::vector<const Item*>>& sequences,
                          const std::vector<const UserContext*>& users,
                          const EngineConfig& config);
ModelInput assemble_input(std::span<const Item> pool, const SubList& list,
                          const UserContext& user, const EngineConfig& config);

/// The concatenated [B, l, d_emb + d_position + d_user + d_score] input
/// matrix in block order item, position, user, score. The user vector is
/// repeated at every position.
nn::Tensor concat_input(const ModelInput& input, const nn::Tensor& position_table);

/// Maps one position's head outputs to survival probabilities. `position` is
/// 0-based, so thresholds i > position + 1 are forced to zero.
void survival_row(std::span<const double> logits, std::size_t position,
                  HeadMode mode, std::span<double> probs);

struct ForwardVars {
  nn::Var click_logits;  // [B, l, max_count]
  nn::Var pay_logits;
  nn::Var click_probs;   // [B, l, max_count], masked survival probabilities
  nn::Var pay_probs;
};

/// Scores of one list: survival matrices plus the raw head outputs.
struct ListScores {
  SurvivalMatrix click;
  SurvivalMatrix pay;
  std::vector<double> click_logits;  // [l * max_count]
  std::vector<double> pay_logits;
};

/// Cached per-layer keys/values and survival rows of a committed prefix.
struct PrefixState {
  std::size_t length = 0;
  std::vector<std::vector<double>> keys;    // per layer, [length * d_model]
  std::vector<std::vector<double>> values;  // per layer, [length * d_model]
  SurvivalMatrix click;
  SurvivalMatrix pay;
  std::vector<double> click_logits;
  std::vector<double> pay_logits;
};

/// Output for one candidate appended at position prefix.length.
struct StepResult {
  std::vector<double> click_logits;
  std::vector<double> pay_logits;
  std::vector<double> click_probs;
  std::vector<double> pay_probs;
  std::vector<std::vector<double>> keys;    // per layer, one row
  std::vector<std::vector<double>> values;
};

/// The sequence scorer: input projection, pre-norm causal transformer
/// blocks, final layer norm, and one MLP head per objective emitting
/// max_count threshold logits per position.
class SortModel {
 public:
  SortModel(EngineConfig config, nn::ParamStore params);

  /// Fresh model with init_params(config, seed).
  static SortModel initialize(const EngineConfig& config, std::uint64_t seed);

  /// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero, layer-norm
  /// gains one, position table ~ U(-0.1, 0.1).
  static nn::ParamStore init_params(const EngineConfig& config, std::uint64_t seed);

  /// Closed-form scalar parameter count for a configuration.
  static std::size_t parameter_count(const EngineConfig& config);

  const EngineConfig& config() const { return config_; }
  const nn::ParamStore& params() const { return params_; }
  nn::ParamStore& params() { return params_; }

  /// Records the forward pass on `tape`, which must read this model's
  /// parameters.
  ForwardVars forward(nn::Tape& tape, const ModelInput& input) const;

  /// Inference without a tape. Lists are scored one position at a time via
  /// the prefix cache, so scores of a prefix never depend on what follows.
  std::vector<ListScores> predict(const ModelInput& input) const;
  ListScores predict_one(std::span<const Item> pool, const SubList& list,
                         const UserContext& user) const;

  PrefixState start() const;
  StepResult step(const PrefixState& prefix, const UserContext& user,
                  const Item& item) const;
  void commit(PrefixState& prefix, const StepResult& step) const;

 private:
  void step_row(const PrefixState& prefix, std::span<const double> input_row,
                StepResult& out) const;

  EngineConfig config_;
  nn::ParamStore params_;
};

/// Scalar training loss on the tape, averaged over the batch. Ordered
/// regression sums every effective threshold term of both objectives per
/// list; pointwise uses the first threshold logit of each position as that
/// position's action logit.
nn::Var training_loss(nn::Tape& tape, const ForwardVars& out,
                      std::span<const LabelVector> labels, LossMode mode,
                      std::size_t max_count);

}  // namespace sortgen

#endif  // SORTGEN_MODEL_HPP_
