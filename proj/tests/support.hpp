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

// Small builders shared by the unit and acceptance tests.

#ifndef SORTGEN_TESTS_SUPPORT_HPP_
#define SORTGEN_TESTS_SUPPORT_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <random>
#include <vector>

#include "sortgen/config.hpp"
#include "sortgen/model.hpp"
#include "sortgen/simulator.hpp"
#include "sortgen/types.hpp"

namespace sortgen::testing {

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(d);
  double s = 0.0;
  do {
    s = 0.0;
    for (double& x : v) {
      x = n(rng);
      s += x * x;
    }
  } while (s < 1e-12);
  return normalized(v);
}

inline Item make_item(ItemId id, std::vector<double> emb, double price, double ctr,
                      double cvr, int category = 0) {
  Item it;
  it.id = id;
  it.embedding = std::move(emb);
  it.price = price;
  it.prior_ctr = ctr;
  it.prior_cvr = cvr;
  it.category = category;
  return it;
}

/// Pool of n random items with ids first_id, first_id+1, ...
inline std::vector<Item> random_pool(std::mt19937_64& rng, std::size_t n, std::size_t d_emb,
                                     ItemId first_id = 1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Item> pool;
  for (std::size_t k = 0; k < n; ++k) {
    pool.push_back(make_item(first_id + static_cast<ItemId>(k), random_unit(rng, d_emb),
                             1.0 + 50.0 * u(rng), 0.02 + 0.3 * u(rng), 0.01 + 0.1 * u(rng),
                             static_cast<int>(k % 4)));
  }
  return pool;
}

inline UserContext random_user(std::mt19937_64& rng, std::size_t d_user) {
  return UserContext{random_unit(rng, d_user)};
}

/// A small shape that keeps gradient checks and sweeps fast.
inline EngineConfig small_config(std::size_t l_s = 12, std::size_t l_o = 5) {
  EngineConfig c;
  c.l_s = l_s;
  c.l_o = l_o;
  c.max_count = l_o;
  c.d_emb = 4;
  c.d_user = 3;
  c.d_position = 2;
  c.d_model = 8;
  c.n_layers = 2;
  c.n_heads = 2;
  c.head_hidden = 6;
  c.window_w = 3;
  c.template_pattern = {0, 1, 0, 2};
  return c;
}

/// Perturbs every parameter so that no bias or gain sits at its
/// initialization value; zero biases hide bugs in backward rules.
inline void jitter(nn::ParamStore& params, std::uint64_t seed, double scale = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& [name, p] : params) {
    for (double& x : p.value.data()) x += u(rng);
  }
}

inline LabelVector random_labels(std::mt19937_64& rng, std::size_t length) {
  std::bernoulli_distribution click(0.4), pay(0.5);
  LabelVector l;
  for (std::size_t t = 0; t < length; ++t) {
    const bool c = click(rng);
    l.clicks.push_back(c ? 1 : 0);
    l.pays.push_back(c && pay(rng) ? 1 : 0);
  }
  return l;
}

/// A fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sortgen-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace sortgen::testing

#endif  // SORTGEN_TESTS_SUPPORT_HPP_
