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

#include "sortgen/params.hpp"

#include <cmath>

#include "sortgen/types.hpp"

namespace sortgen::nn {

Tensor& ParamStore::add(std::string name, Tensor value) {
  if (params_.count(name)) throw Error("duplicate parameter name: " + name);
  Tensor grad(value.shape());
  auto [it, _] = params_.emplace(std::move(name),
                                 Parameter{std::move(value), std::move(grad)});
  return it->second.value;
}

bool ParamStore::contains(std::string_view name) const {
  return params_.find(name) != params_.end();
}

const Parameter& ParamStore::find(std::string_view name) const {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw Error("unknown parameter: " + std::string(name));
  }
  return it->second;
}

const Tensor& ParamStore::value(std::string_view name) const {
  return find(name).value;
}
Tensor& ParamStore::value(std::string_view name) {
  return const_cast<Parameter&>(find(name)).value;
}
const Tensor& ParamStore::grad(std::string_view name) const {
  return find(name).grad;
}
Tensor& ParamStore::grad(std::string_view name) {
  return const_cast<Parameter&>(find(name)).grad;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) p.grad.fill(0.0);
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

double ParamStore::value_norm() const {
  double acc = 0.0;
  for (const auto& [name, p] : params_) acc += p.value.squared_norm();
  return std::sqrt(acc);
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (params_.size() != other.params_.size()) return false;
  auto a = params_.begin();
  auto b = other.params_.begin();
  for (; a != params_.end(); ++a, ++b) {
    if (a->first != b->first || !(a->second.value == b->second.value)) {
      return false;
    }
  }
  return true;
}

void AdamState::init(const ParamStore& params) {
  first_moment.clear();
  second_moment.clear();
  step = 0;
  for (const auto& [name, p] : params) {
    first_moment.emplace(name, Tensor(p.value.shape()));
    second_moment.emplace(name, Tensor(p.value.shape()));
  }
}

void adam_step(ParamStore& params, AdamState& state) {
  if (!state.initialized()) throw Error("adam_step: optimizer state not initialized");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (auto& [name, p] : params) {
    auto m_it = state.first_moment.find(name);
    auto v_it = state.second_moment.find(name);
    if (m_it == state.first_moment.end() || v_it == state.second_moment.end() ||
        m_it->second.shape() != p.value.shape()) {
      throw Error("adam_step: no moment state for parameter " + name);
    }
    auto m = m_it->second.data();
    auto v = v_it->second.data();
    auto w = p.value.data();
    auto g = p.grad.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
  params.zero_grad();
}

}  // namespace sortgen::nn
