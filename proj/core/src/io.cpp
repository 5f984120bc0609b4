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

#include "sortgen/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace sortgen {
namespace detail {

void field_error(const std::string& path, const std::string& what) {
  throw FormatError(path + ": " + what);
}

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object");
  auto it = obj.find(key);
  const std::string child = path.empty() ? key : path + "." + key;
  if (it == obj.end()) field_error(child, "missing field");
  return *it;
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) field_error(path, "expected a number");
  return v.get<double>();
}

std::int64_t as_integer(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) field_error(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::vector<double> as_numbers(const Json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(as_number(v[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

std::vector<std::uint8_t> as_flags(const Json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array of 0/1 flags");
  std::vector<std::uint8_t> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string p = path + "[" + std::to_string(k) + "]";
    const std::int64_t x = as_integer(v[k], p);
    if (x != 0 && x != 1) field_error(p, "expected 0 or 1");
    out.push_back(static_cast<std::uint8_t>(x));
  }
  return out;
}

Json item_to_json(const Item& item) {
  Json j;
  j["id"] = item.id;
  j["emb"] = item.embedding;
  j["price"] = item.price;
  j["ctr"] = item.prior_ctr;
  j["cvr"] = item.prior_cvr;
  j["cat"] = item.category;
  return j;
}

Item item_from_json(const Json& v, const std::string& path) {
  Item it;
  it.id = as_integer(require(v, "id", path), path + ".id");
  it.embedding = as_numbers(require(v, "emb", path), path + ".emb");
  it.price = as_number(require(v, "price", path), path + ".price");
  it.prior_ctr = as_number(require(v, "ctr", path), path + ".ctr");
  it.prior_cvr = as_number(require(v, "cvr", path), path + ".cvr");
  it.category = static_cast<int>(as_integer(require(v, "cat", path), path + ".cat"));
  return it;
}

Json parse_document(std::string_view text, const std::string& where) {
  Json j = Json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) throw FormatError(where + ": malformed document");
  return j;
}

}  // namespace detail

namespace {

using detail::Json;

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

Json header(std::string_view kind, std::size_t count) {
  Json h;
  h["format"] = kDataFormat;
  h["kind"] = kind;
  h["count"] = count;
  return h;
}

// Checks the header line and returns the declared record count.
std::size_t check_header(const std::vector<std::string_view>& lines, std::string_view kind,
                         Json* out = nullptr) {
  const Json h = detail::parse_document(lines.front(), "line 1");
  try {
    const Json& f = detail::require(h, "format", "");
    if (!f.is_string() || f.get<std::string>() != kDataFormat) {
      detail::field_error("format", "unsupported format version");
    }
    const Json& k = detail::require(h, "kind", "");
    if (!k.is_string() || k.get<std::string>() != kind) {
      detail::field_error("kind", "expected \"" + std::string(kind) + "\"");
    }
    const std::int64_t n = detail::as_integer(detail::require(h, "count", ""), "count");
    if (n < 0) detail::field_error("count", "negative record count");
    if (out != nullptr) *out = h;
    return static_cast<std::size_t>(n);
  } catch (const FormatError& e) {
    throw FormatError(std::string("line 1: ") + e.what());
  }
}

void check_count(const std::vector<std::string_view>& lines, std::size_t declared) {
  if (lines.size() - 1 != declared) {
    throw FormatError("line " + std::to_string(lines.size() + 1) + ": expected " +
                      std::to_string(declared) + " records after the header, found " +
                      std::to_string(lines.size() - 1) + " (truncated file?)");
  }
}

}  // namespace

std::string catalog_path(const std::string& dataset_path) {
  const std::string suffix = ".jsonl";
  if (dataset_path.size() > suffix.size() &&
      dataset_path.compare(dataset_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return dataset_path.substr(0, dataset_path.size() - suffix.size()) + ".catalog.jsonl";
  }
  return dataset_path + ".catalog";
}

std::string catalog_to_string(std::span<const Item> catalog) {
  std::string out = header("catalog", catalog.size()).dump() + "\n";
  for (const Item& it : catalog) out += detail::item_to_json(it).dump() + "\n";
  return out;
}

std::vector<Item> catalog_from_string(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) return {};
  const std::size_t n = check_header(lines, "catalog");
  check_count(lines, n);
  std::vector<Item> items;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::string where = "line " + std::to_string(k + 1);
    try {
      items.push_back(detail::item_from_json(detail::parse_document(lines[k], where), ""));
    } catch (const FormatError& e) {
      const std::string msg = e.what();
      if (msg.rfind(where, 0) == 0) throw;
      throw FormatError(where + ": " + msg);
    }
  }
  return items;
}

std::string dataset_to_string(const Dataset& data) {
  Json h = header("impressions", data.samples.size());
  h["config"] = data.config_snapshot;
  h["catalog_items"] = data.catalog.size();
  std::string out = h.dump() + "\n";
  for (const ImpressionSample& s : data.samples) {
    Json j;
    j["session"] = s.session_id;
    j["user"] = s.user.features;
    Json items = Json::array();
    for (const Item& it : s.items) items.push_back(detail::item_to_json(it));
    j["items"] = std::move(items);
    j["clicks"] = s.labels.clicks;
    j["pays"] = s.labels.pays;
    out += j.dump() + "\n";
  }
  return out;
}

Dataset dataset_from_strings(std::string_view samples_text, std::string_view catalog_text) {
  Dataset data;
  const auto lines = split_lines(samples_text);
  if (lines.empty()) return data;
  Json h;
  const std::size_t n = check_header(lines, "impressions", &h);
  std::size_t catalog_items = 0;
  try {
    if (h.contains("config")) {
      const Json& cfg = h["config"];
      if (!cfg.is_object()) detail::field_error("config", "expected an object");
      for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (!it.value().is_string()) detail::field_error("config." + it.key(), "expected a string");
        data.config_snapshot[it.key()] = it.value().get<std::string>();
      }
    }
    if (h.contains("catalog_items")) {
      catalog_items = static_cast<std::size_t>(
          detail::as_integer(h["catalog_items"], "catalog_items"));
    }
  } catch (const FormatError& e) {
    throw FormatError(std::string("line 1: ") + e.what());
  }
  check_count(lines, n);

  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::string where = "line " + std::to_string(k + 1);
    try {
      const Json j = detail::parse_document(lines[k], where);
      ImpressionSample s;
      const Json& session = detail::require(j, "session", "");
      if (!session.is_number_unsigned() && !(session.is_number_integer() && session.get<std::int64_t>() >= 0)) {
        detail::field_error("session", "expected a non-negative integer");
      }
      s.session_id = session.get<std::uint64_t>();
      s.user.features = detail::as_numbers(detail::require(j, "user", ""), "user");
      const Json& items = detail::require(j, "items", "");
      if (!items.is_array()) detail::field_error("items", "expected an array");
      for (std::size_t m = 0; m < items.size(); ++m) {
        s.items.push_back(detail::item_from_json(items[m], "items[" + std::to_string(m) + "]"));
      }
      s.labels.clicks = detail::as_flags(detail::require(j, "clicks", ""), "clicks");
      s.labels.pays = detail::as_flags(detail::require(j, "pays", ""), "pays");
      if (s.labels.clicks.size() != s.items.size() || s.labels.pays.size() != s.items.size()) {
        detail::field_error("clicks", "label length differs from item count");
      }
      validate_labels(s.labels);
      data.samples.push_back(std::move(s));
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (msg.rfind(where, 0) == 0) throw;
      throw FormatError(where + ": " + msg);
    }
  }

  if (catalog_items > 0 || !catalog_text.empty()) {
    try {
      data.catalog = catalog_from_string(catalog_text);
    } catch (const FormatError& e) {
      throw FormatError(std::string("catalog ") + e.what());
    }
    if (data.catalog.size() != catalog_items) {
      throw FormatError("catalog holds " + std::to_string(data.catalog.size()) +
                        " items, header declares " + std::to_string(catalog_items));
    }
  }
  return data;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("cannot write " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot write " + path + ": " + ec.message());
}

void write_dataset(const Dataset& data, const std::string& path) {
  write_file(path, dataset_to_string(data));
  if (!data.catalog.empty()) write_file(catalog_path(path), catalog_to_string(data.catalog));
}

Dataset read_dataset(const std::string& path) {
  const std::string samples = read_file(path);
  std::string catalog;
  if (std::filesystem::exists(catalog_path(path))) catalog = read_file(catalog_path(path));
  try {
    return dataset_from_strings(samples, catalog);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_catalog(std::span<const Item> catalog, const std::string& path) {
  write_file(path, catalog_to_string(catalog));
}

std::vector<Item> read_catalog(const std::string& path) {
  try {
    return catalog_from_string(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string trace_record(const GenerationTrace& trace, std::string_view method) {
  Json j;
  j["method"] = method;
  j["ids"] = trace.ids;
  j["source_queues"] = trace.result.source_queues;
  Json steps = Json::array();
  for (const StepRecord& step : trace.steps) {
    Json s;
    s["chosen_queue"] = step.chosen_queue;
    Json cands = Json::array();
    for (const CandidateRecord& c : step.candidates) {
      cands.push_back({{"queue", c.queue},
                       {"id", c.id},
                       {"value", c.value.combined},
                       {"mmr", c.mmr}});
    }
    s["candidates"] = std::move(cands);
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  j["value"] = {{"click", trace.value.v_click},
                {"pay", trace.value.v_pay},
                {"gmv", trace.value.v_gmv},
                {"combined", trace.value.combined}};
  j["forward_invocations"] = trace.forward_invocations;
  j["simulated_overhead_ns"] = trace.simulated_overhead.count();
  j["wall_ns"] = trace.wall_ns;
  return j.dump();
}

}  // namespace sortgen
