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

#include "sortgen/listvalue.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sortgen/kernels.hpp"

namespace sortgen {

SurvivalMatrix::SurvivalMatrix(std::size_t length, std::size_t max_count,
                               Objective objective, HeadMode mode)
    : length_(length),
      max_count_(max_count),
      values_(length * max_count, 0.0),
      objective_(objective),
      head_mode_(mode) {}

SurvivalMatrix::SurvivalMatrix(std::size_t length, std::size_t max_count,
                               std::vector<double> values, Objective objective,
                               HeadMode mode)
    : length_(length),
      max_count_(max_count),
      values_(std::move(values)),
      objective_(objective),
      head_mode_(mode) {
  if (values_.size() != length_ * max_count_) {
    throw ShapeError("survival matrix: expected " +
                     std::to_string(length_ * max_count_) + " values, got " +
                     std::to_string(values_.size()));
  }
}

double SurvivalMatrix::at(std::size_t i, std::size_t j) const {
  if (i < 1 || i > max_count_ || j < 1 || j > length_) {
    throw ShapeError("survival matrix index (" + std::to_string(i) + ", " +
                     std::to_string(j) + ") out of range");
  }
  return values_[(j - 1) * max_count_ + (i - 1)];
}

double& SurvivalMatrix::at(std::size_t i, std::size_t j) {
  if (i < 1 || i > max_count_ || j < 1 || j > length_) {
    throw ShapeError("survival matrix index (" + std::to_string(i) + ", " +
                     std::to_string(j) + ") out of range");
  }
  return values_[(j - 1) * max_count_ + (i - 1)];
}

std::span<const double> SurvivalMatrix::row(std::size_t j) const {
  if (j < 1 || j > length_) throw ShapeError("survival matrix row out of range");
  return std::span<const double>(values_).subspan((j - 1) * max_count_, max_count_);
}

std::span<double> SurvivalMatrix::row(std::size_t j) {
  if (j < 1 || j > length_) throw ShapeError("survival matrix row out of range");
  return std::span<double>(values_).subspan((j - 1) * max_count_, max_count_);
}

void SurvivalMatrix::push_row(std::span<const double> row) {
  if (row.size() != max_count_) throw ShapeError("survival row width mismatch");
  values_.insert(values_.end(), row.begin(), row.end());
  ++length_;
}

namespace {

std::vector<int> cumulate(const std::vector<std::uint8_t>& actions) {
  std::vector<int> out(actions.size());
  int acc = 0;
  for (std::size_t t = 0; t < actions.size(); ++t) {
    acc += actions[t] ? 1 : 0;
    out[t] = acc;
  }
  return out;
}

}  // namespace

std::vector<int> LabelVector::cumulative_clicks() const { return cumulate(clicks); }
std::vector<int> LabelVector::cumulative_pays() const { return cumulate(pays); }

void validate_labels(const LabelVector& labels) {
  if (labels.clicks.size() != labels.pays.size()) {
    throw ShapeError("labels: clicks and pays differ in length");
  }
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels.clicks[t] > 1 || labels.pays[t] > 1) {
      throw ShapeError("labels: position " + std::to_string(t + 1) +
                       " is not binary");
    }
  }
}

double expected_count(const SurvivalMatrix& s, std::size_t j) {
  if (j > s.length()) {
    throw ShapeError("expected_count: prefix length " + std::to_string(j) +
                     " exceeds list length " + std::to_string(s.length()));
  }
  if (j == 0) return 0.0;
  auto row = s.row(j);
  double total = 0.0;
  if (s.head_mode() == HeadMode::kLiteral) {
    double running = 1.0;
    for (double p : row) {
      running = std::min(running, p);
      total += running;
    }
  } else {
    for (double p : row) total += p;
  }
  return total;
}

double incremental_value(const SurvivalMatrix& s, std::size_t t) {
  if (t < 1 || t > s.length()) {
    throw ShapeError("incremental_value: position " + std::to_string(t) +
                     " out of range");
  }
  return expected_count(s, t) - expected_count(s, t - 1);
}

double clamped_incremental_value(const SurvivalMatrix& s, std::size_t t) {
  return std::max(0.0, incremental_value(s, t));
}

std::vector<double> exact_count_mass(const SurvivalMatrix& s, std::size_t j) {
  auto row = s.row(j);
  std::vector<double> mass(s.max_count() + 1);
  double prev = 1.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    mass[i] = prev - row[i];
    prev = row[i];
  }
  mass[row.size()] = prev;
  return mass;
}

double combine(const ObjectiveWeights& w, double v_click, double v_pay,
               double v_gmv) {
  return w.alpha * v_click + w.beta * v_pay + w.gamma * v_gmv;
}

ListValue list_value(const SurvivalMatrix& click, const SurvivalMatrix& pay,
                     std::span<const double> prices,
                     const ObjectiveWeights& weights) {
  const std::size_t len = prices.size();
  if (click.length() < len || pay.length() < len) {
    throw ShapeError("list_value: survival matrices cover " +
                     std::to_string(std::min(click.length(), pay.length())) +
                     " positions, list has " + std::to_string(len));
  }
  ListValue v;
  v.v_click = expected_count(click, len);
  v.v_pay = expected_count(pay, len);
  for (std::size_t t = 1; t <= len; ++t) {
    v.v_gmv += prices[t - 1] * clamped_incremental_value(pay, t);
  }
  v.combined = combine(weights, v.v_click, v.v_pay, v.v_gmv);
  return v;
}

ListValue list_value(const SurvivalMatrix& click, const SurvivalMatrix& pay,
                     const SubList& items, std::span<const Item> pool,
                     const ObjectiveWeights& weights) {
  std::vector<double> prices;
  prices.reserve(items.size());
  for (std::size_t index : items.items) {
    if (index >= pool.size()) throw ShapeError("list_value: index out of pool");
    prices.push_back(pool[index].price);
  }
  return list_value(click, pay, prices, weights);
}

double ordered_regression_term(std::span<const double> probs,
                               std::size_t length, std::size_t max_count,
                               std::span<const int> cumulative_counts,
                               double scale, std::span<double> grad) {
  if (probs.size() < length * max_count || cumulative_counts.size() < length) {
    throw ShapeError("ordered_regression_loss: labels do not cover the list");
  }
  double loss = 0.0;
  for (std::size_t j = 1; j <= length; ++j) {
    const std::size_t top = std::min(j, max_count);
    const int y = cumulative_counts[j - 1];
    for (std::size_t i = 1; i <= top; ++i) {
      const std::size_t idx = (j - 1) * max_count + (i - 1);
      const double raw = probs[idx];
      if (!(raw >= 0.0 && raw <= 1.0)) {
        throw Error("ordered_regression_loss: probability " +
                    std::to_string(raw) + " outside [0,1] at (i=" +
                    std::to_string(i) + ", j=" + std::to_string(j) + ")");
      }
      const double p = std::clamp(raw, kProbClamp, 1.0 - kProbClamp);
      const bool reached = y >= static_cast<int>(i);
      loss += reached ? -std::log(p) : -std::log(1.0 - p);
      if (!grad.empty() && p == raw) {
        grad[idx] += scale * (reached ? -1.0 / p : 1.0 / (1.0 - p));
      }
    }
  }
  return loss * scale;
}

double ordered_regression_loss(const SurvivalMatrix& click,
                               const SurvivalMatrix& pay,
                               const LabelVector& labels) {
  validate_labels(labels);
  const std::size_t len = labels.size();
  if (click.length() != len || pay.length() != len) {
    throw ShapeError("ordered_regression_loss: length mismatch");
  }
  const auto yc = labels.cumulative_clicks();
  const auto yp = labels.cumulative_pays();
  return ordered_regression_term(click.values(), len, click.max_count(), yc) +
         ordered_regression_term(pay.values(), len, pay.max_count(), yp);
}

double pointwise_term(std::span<const double> logits,
                      std::span<const std::uint8_t> actions, double scale,
                      std::span<double> grad) {
  if (logits.size() != actions.size()) {
    throw ShapeError("pointwise_loss: length mismatch");
  }
  double loss = 0.0;
  for (std::size_t t = 0; t < logits.size(); ++t) {
    const double raw = nn::sigmoid(logits[t]);
    const double p = std::clamp(raw, kProbClamp, 1.0 - kProbClamp);
    const bool acted = actions[t] != 0;
    loss += acted ? -std::log(p) : -std::log(1.0 - p);
    if (!grad.empty() && p == raw) {
      grad[t] += scale * (p - (acted ? 1.0 : 0.0));
    }
  }
  return loss * scale;
}

double pointwise_loss(std::span<const double> click_logits,
                      std::span<const double> pay_logits,
                      const LabelVector& labels) {
  validate_labels(labels);
  if (click_logits.size() != labels.size() || pay_logits.size() != labels.size()) {
    throw ShapeError("pointwise_loss: length mismatch");
  }
  if (labels.size() == 0) return 0.0;
  const double scale = 1.0 / (2.0 * static_cast<double>(labels.size()));
  return pointwise_term(click_logits, labels.clicks, scale) +
         pointwise_term(pay_logits, labels.pays, scale);
}

}  // namespace sortgen
