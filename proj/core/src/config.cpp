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

#include "sortgen/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sortgen {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_number(std::string_view text, std::string_view what) {
  text = trim(text);
  std::string buf(text);
  char* end = nullptr;
  double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    throw ConfigError(std::string(what) + ": not a number: '" + buf + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(std::string_view text, std::string_view what) {
  text = trim(text);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(what) + ": not a non-negative integer: '" +
                      std::string(text) + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(PartitionStrategy s) {
  return s == PartitionStrategy::kDfs ? "dfs" : "bfs";
}
std::string_view to_string(LossMode m) {
  return m == LossMode::kOrderedRegression ? "ordered_regression"
                                           : "pointwise";
}
std::string_view to_string(HeadMode m) {
  return m == HeadMode::kMonotone ? "monotone" : "literal";
}

PartitionStrategy parse_partition_strategy(std::string_view s) {
  if (s == "dfs" || s == "DFS") return PartitionStrategy::kDfs;
  if (s == "bfs" || s == "BFS") return PartitionStrategy::kBfs;
  throw ConfigError("partition_strategy: expected dfs|bfs, got '" +
                    std::string(s) + "'");
}
LossMode parse_loss_mode(std::string_view s) {
  if (s == "ordered_regression") return LossMode::kOrderedRegression;
  if (s == "pointwise") return LossMode::kPointwise;
  throw ConfigError("loss_mode: expected ordered_regression|pointwise, got '" +
                    std::string(s) + "'");
}
HeadMode parse_head_mode(std::string_view s) {
  if (s == "monotone") return HeadMode::kMonotone;
  if (s == "literal") return HeadMode::kLiteral;
  throw ConfigError("head_mode: expected monotone|literal, got '" +
                    std::string(s) + "'");
}

std::string_view to_string(ScoreTerm t) {
  switch (t) {
    case ScoreTerm::kCtr: return "ctr";
    case ScoreTerm::kCvr: return "cvr";
    case ScoreTerm::kCtrCvr: return "ctr_cvr";
    case ScoreTerm::kPrice: return "price";
    case ScoreTerm::kCtrCvrPrice: return "ctr_cvr_price";
  }
  return "?";
}

QueueSpec parse_queue_spec(std::string_view text, int priority) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("queue: expected 'name: expression', got '" +
                      std::string(text) + "'");
  }
  QueueSpec spec;
  spec.name = std::string(trim(text.substr(0, colon)));
  spec.priority = priority;
  if (spec.name.empty()) throw ConfigError("queue: empty name");

  std::string_view expr = text.substr(colon + 1);
  while (!trim(expr).empty()) {
    const auto plus = expr.find('+');
    std::string_view term = trim(expr.substr(0, plus));
    expr = plus == std::string_view::npos ? std::string_view{}
                                          : expr.substr(plus + 1);
    double coef = 1.0;
    if (const auto star = term.find('*'); star != std::string_view::npos) {
      coef = parse_number(term.substr(0, star), "queue " + spec.name);
      term = trim(term.substr(star + 1));
    }
    bool matched = false;
    for (std::size_t k = 0; k < kNumScoreTerms; ++k) {
      if (term == to_string(static_cast<ScoreTerm>(k))) {
        spec.coefficients[k] += coef;
        matched = true;
      }
    }
    if (!matched) {
      throw ConfigError("queue " + spec.name + ": unknown term '" +
                        std::string(term) + "'");
    }
  }
  return spec;
}

std::string format_queue_spec(const QueueSpec& spec) {
  std::string out = spec.name + ":";
  bool first = true;
  for (std::size_t k = 0; k < kNumScoreTerms; ++k) {
    if (spec.coefficients[k] == 0.0) continue;
    out += first ? " " : " + ";
    out += format_double(spec.coefficients[k]) + "*" +
           std::string(to_string(static_cast<ScoreTerm>(k)));
    first = false;
  }
  return out;
}

std::vector<QueueSpec> EngineConfig::default_queue_specs() {
  return {parse_queue_spec("click: ctr", 0),
          parse_queue_spec("pay: ctr_cvr", 1),
          parse_queue_spec("gmv: ctr_cvr_price", 2)};
}

std::optional<std::string> validate_config(const EngineConfig& c) {
  if (c.d_emb == 0 || c.d_user == 0 || c.d_position == 0 || c.d_model == 0) {
    return "dimension mismatch: embedding and hidden widths must be positive";
  }
  if (c.d_score != 2) {
    return "dimension mismatch: d_score must be 2 (prior_ctr, prior_cvr)";
  }
  if (c.n_layers == 0) return "n_layers must be positive";
  if (c.n_heads == 0) return "n_heads must be positive";
  if (c.head_hidden == 0) return "head_hidden must be positive";
  if (c.d_model % c.n_heads != 0) return "d_model not divisible by n_heads";
  if (c.l_o == 0) return "l_o must be positive";
  if (c.l_o > c.l_s) return "l_o exceeds l_s";
  if (c.max_count == 0) return "max_count must be positive";
  if (c.max_count > c.l_o) return "max_count exceeds l_o";
  if (c.window_w < 1) return "window_w must be at least 1";
  if (!(c.lambda_mmr >= 0.0 && c.lambda_mmr <= 1.0)) {
    return "lambda_mmr outside [0,1]";
  }
  if (c.queue_specs.empty()) return "queue_specs is empty";
  std::set<int> priorities;
  for (const auto& q : c.queue_specs) {
    if (std::all_of(q.coefficients.begin(), q.coefficients.end(),
                    [](double v) { return v == 0.0; })) {
      return "queue " + q.name + " has no nonzero coefficient";
    }
    if (!priorities.insert(q.priority).second) {
      return "duplicate queue priority " + std::to_string(q.priority);
    }
  }
  // q queues of capacity l_o each must be able to supply l_o picks.
  if (c.num_queues() * c.l_o < c.l_o) return "queues cannot cover l_o picks";
  if (c.template_pattern.empty()) return "template pattern is empty";
  for (int idx : c.template_pattern) {
    if (idx < 0) return "template pattern has a negative queue index";
  }
  if (!(c.weights.alpha >= 0 && c.weights.beta >= 0 && c.weights.gamma >= 0) ||
      !(c.weights.alpha + c.weights.beta + c.weights.gamma > 0)) {
    return "objective weights must be non-negative with a positive sum";
  }
  return std::nullopt;
}

void require_valid(const EngineConfig& config) {
  if (auto err = validate_config(config)) throw ConfigError(*err);
}

std::string model_signature(const EngineConfig& c) {
  std::ostringstream os;
  os << "d_emb=" << c.d_emb << ";d_user=" << c.d_user
     << ";d_position=" << c.d_position << ";d_score=" << c.d_score
     << ";d_model=" << c.d_model << ";n_layers=" << c.n_layers
     << ";n_heads=" << c.n_heads << ";head_hidden=" << c.head_hidden
     << ";max_count=" << c.max_count << ";l_o=" << c.l_o
     << ";head_mode=" << to_string(c.head_mode);
  return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const EngineConfig& config) {
  return fnv1a64(model_signature(config));
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

ConfigFile ConfigFile::parse(std::string_view text, std::string_view origin) {
  ConfigFile file;
  file.origin_ = std::string(origin);
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(file.origin_ + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    if (key.empty()) {
      throw ConfigError(file.origin_ + ":" + std::to_string(line_no) +
                        ": empty key");
    }
    file.entries_.emplace(std::move(key), std::string(trim(line.substr(eq + 1))));
  }
  return file;
}

bool ConfigFile::has(std::string_view key) const {
  return entries_.find(key) != entries_.end();
}

std::vector<std::string> ConfigFile::all(std::string_view key) const {
  std::vector<std::string> out;
  auto [lo, hi] = entries_.equal_range(key);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  if (lo != hi) consumed_.emplace(key);
  return out;
}

std::optional<std::string> ConfigFile::get(std::string_view key) const {
  auto [lo, hi] = entries_.equal_range(key);
  if (lo == hi) return std::nullopt;
  if (std::next(lo) != hi) {
    throw ConfigError(origin_ + ": key '" + std::string(key) +
                      "' given more than once");
  }
  consumed_.emplace(key);
  return lo->second;
}

std::size_t ConfigFile::get_size(std::string_view key,
                                 std::size_t fallback) const {
  auto v = get(key);
  return v ? static_cast<std::size_t>(parse_unsigned(*v, key)) : fallback;
}

double ConfigFile::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  return v ? parse_number(*v, key) : fallback;
}

std::uint64_t ConfigFile::get_u64(std::string_view key,
                                  std::uint64_t fallback) const {
  auto v = get(key);
  return v ? parse_unsigned(*v, key) : fallback;
}

std::string ConfigFile::get_string(std::string_view key,
                                   std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

void ConfigFile::set(std::string key, std::string value) {
  auto [lo, hi] = entries_.equal_range(key);
  entries_.erase(lo, hi);
  entries_.emplace(std::move(key), std::move(value));
}

std::vector<std::string> ConfigFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : entries_) {
    if (!consumed_.count(key) &&
        (out.empty() || out.back() != key)) {
      out.push_back(key);
    }
  }
  return out;
}

EngineConfig engine_config_from(const ConfigFile& f) {
  EngineConfig c;
  c.l_s = f.get_size("l_s", c.l_s);
  c.l_o = f.get_size("l_o", c.l_o);
  c.d_emb = f.get_size("d_emb", c.d_emb);
  c.d_user = f.get_size("d_user", c.d_user);
  c.d_position = f.get_size("d_position", c.d_position);
  c.d_score = f.get_size("d_score", c.d_score);
  c.d_model = f.get_size("d_model", c.d_model);
  c.n_layers = f.get_size("n_layers", c.n_layers);
  c.n_heads = f.get_size("n_heads", c.n_heads);
  c.head_hidden = f.get_size("head_hidden", c.head_hidden);
  // max_count follows l_o unless set explicitly.
  c.max_count = f.get_size("max_count", c.l_o);
  if (auto v = f.get("head_mode")) c.head_mode = parse_head_mode(*v);
  c.lambda_mmr = f.get_double("lambda_mmr", c.lambda_mmr);
  c.window_w = f.get_size("window_w", c.window_w);
  if (auto specs = f.all("queue"); !specs.empty()) {
    c.queue_specs.clear();
    int priority = 0;
    for (const auto& s : specs) c.queue_specs.push_back(parse_queue_spec(s, priority++));
  }
  if (auto v = f.get("partition_strategy")) {
    c.partition_strategy = parse_partition_strategy(*v);
  }
  if (auto v = f.get("loss_mode")) c.loss_mode = parse_loss_mode(*v);
  c.weights.alpha = f.get_double("alpha", c.weights.alpha);
  c.weights.beta = f.get_double("beta", c.weights.beta);
  c.weights.gamma = f.get_double("gamma", c.weights.gamma);
  if (auto v = f.get("template")) {
    c.template_pattern.clear();
    std::string_view rest = *v;
    while (!trim(rest).empty()) {
      const auto comma = rest.find(',');
      c.template_pattern.push_back(static_cast<int>(
          parse_unsigned(rest.substr(0, comma), "template")));
      rest = comma == std::string_view::npos ? std::string_view{}
                                             : rest.substr(comma + 1);
    }
  }
  c.seed = f.get_u64("seed", c.seed);
  return c;
}

std::string engine_config_to_text(const EngineConfig& c) {
  std::ostringstream os;
  os << "l_s = " << c.l_s << "\n"
     << "l_o = " << c.l_o << "\n"
     << "d_emb = " << c.d_emb << "\n"
     << "d_user = " << c.d_user << "\n"
     << "d_position = " << c.d_position << "\n"
     << "d_score = " << c.d_score << "\n"
     << "d_model = " << c.d_model << "\n"
     << "n_layers = " << c.n_layers << "\n"
     << "n_heads = " << c.n_heads << "\n"
     << "head_hidden = " << c.head_hidden << "\n"
     << "max_count = " << c.max_count << "\n"
     << "head_mode = " << to_string(c.head_mode) << "\n"
     << "lambda_mmr = " << format_double(c.lambda_mmr) << "\n"
     << "window_w = " << c.window_w << "\n";
  for (const auto& q : c.queue_specs) os << "queue = " << format_queue_spec(q) << "\n";
  os << "partition_strategy = " << to_string(c.partition_strategy) << "\n"
     << "loss_mode = " << to_string(c.loss_mode) << "\n"
     << "alpha = " << format_double(c.weights.alpha) << "\n"
     << "beta = " << format_double(c.weights.beta) << "\n"
     << "gamma = " << format_double(c.weights.gamma) << "\n"
     << "template = ";
  for (std::size_t i = 0; i < c.template_pattern.size(); ++i) {
    os << (i ? "," : "") << c.template_pattern[i];
  }
  os << "\nseed = " << c.seed << "\n";
  return os.str();
}

}  // namespace sortgen
