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

#ifndef SORTGEN_LISTVALUE_HPP_
#define SORTGEN_LISTVALUE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sortgen/config.hpp"
#include "sortgen/types.hpp"

namespace sortgen {

enum class Objective { kClick, kPay };

/// Survival probabilities for one list and one objective:
/// at(i, j) = P(actions among the first j items >= i), 1-based i and j.
/// Entries with i > j are zero.
class SurvivalMatrix {
 public:
  SurvivalMatrix() = default;
  SurvivalMatrix(std::size_t length, std::size_t max_count, Objective objective,
                 HeadMode mode = HeadMode::kMonotone);
  SurvivalMatrix(std::size_t length, std::size_t max_count,
                 std::vector<double> values, Objective objective,
                 HeadMode mode = HeadMode::kMonotone);

  std::size_t length() const { return length_; }
  std::size_t max_count() const { return max_count_; }
  Objective objective() const { return objective_; }
  HeadMode head_mode() const { return head_mode_; }

  double at(std::size_t i, std::size_t j) const;
  double& at(std::size_t i, std::size_t j);
  /// Row for prefix length j (1-based), max_count entries.
  std::span<const double> row(std::size_t j) const;
  std::span<double> row(std::size_t j);
  std::span<const double> values() const { return values_; }

  /// Appends a prefix-length row (the next j).
  void push_row(std::span<const double> row);

  bool operator==(const SurvivalMatrix&) const = default;

 private:
  std::size_t length_ = 0;
  std::size_t max_count_ = 0;
  std::vector<double> values_;
  Objective objective_ = Objective::kClick;
  HeadMode head_mode_ = HeadMode::kMonotone;
};

/// Per-position binary action indicators of one exposed list.
struct LabelVector {
  std::vector<std::uint8_t> clicks;
  std::vector<std::uint8_t> pays;

  std::size_t size() const { return clicks.size(); }
  /// counts[j-1] = number of actions among the first j positions.
  std::vector<int> cumulative_clicks() const;
  std::vector<int> cumulative_pays() const;
  bool operator==(const LabelVector&) const = default;
};

/// Throws when clicks/pays differ in length or contain non-binary values.
void validate_labels(const LabelVector& labels);

struct ListValue {
  double v_click = 0.0;
  double v_pay = 0.0;
  double v_gmv = 0.0;
  double combined = 0.0;
};

/// sum_i P(Y_j >= i) = E[Y_j]. j = 0 is the empty prefix (returns 0); in
/// literal head mode the column is first clamped to be non-increasing in i.
double expected_count(const SurvivalMatrix& s, std::size_t j);

/// E[Y_t] - E[Y_{t-1}]; sums over t = 1..l to E[Y_l] exactly.
double incremental_value(const SurvivalMatrix& s, std::size_t t);

/// incremental_value floored at zero.
double clamped_incremental_value(const SurvivalMatrix& s, std::size_t t);

/// Probability mass of exactly i actions in the length-j prefix,
/// P(Y_j >= i) - P(Y_j >= i+1), for i = 0..max_count.
std::vector<double> exact_count_mass(const SurvivalMatrix& s, std::size_t j);

/// Weighted list value of a scored list. The GMV value is the price-weighted
/// sum of (floored) pay increments.
ListValue list_value(const SurvivalMatrix& click, const SurvivalMatrix& pay,
                     std::span<const double> prices,
                     const ObjectiveWeights& weights);
ListValue list_value(const SurvivalMatrix& click, const SurvivalMatrix& pay,
                     const SubList& items, std::span<const Item> pool,
                     const ObjectiveWeights& weights);

double combine(const ObjectiveWeights& w, double v_click, double v_pay,
               double v_gmv);

inline constexpr double kProbClamp = 1e-7;

/// Ordered-regression loss of one list: for both objectives,
/// sum over prefixes j and thresholds i <= min(j, max_count) of the binary
/// cross-entropy of P(Y_j >= i) against [y_j >= i].
double ordered_regression_loss(const SurvivalMatrix& click,
                               const SurvivalMatrix& pay,
                               const LabelVector& labels);

/// Single-objective form on a raw [length x max_count] probability block.
/// When `grad` is non-empty, adds scale * dL/dp into it.
double ordered_regression_term(std::span<const double> probs,
                               std::size_t length, std::size_t max_count,
                               std::span<const int> cumulative_counts,
                               double scale = 1.0, std::span<double> grad = {});

/// Mean per-position binary cross-entropy of sigmoid(logit) against the
/// position's own action indicator, averaged over both objectives.
double pointwise_loss(std::span<const double> click_logits,
                      std::span<const double> pay_logits,
                      const LabelVector& labels);

/// Single-objective sum (not mean) over positions. When `grad` is non-empty,
/// adds scale * dL/dlogit into it.
double pointwise_term(std::span<const double> logits,
                      std::span<const std::uint8_t> actions, double scale = 1.0,
                      std::span<double> grad = {});

}  // namespace sortgen

#endif  // SORTGEN_LISTVALUE_HPP_
