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

#include "sortgen/service.hpp"

#include <chrono>
#include <set>

#include "json_util.hpp"
#include "sortgen/checkpoint.hpp"
#include "sortgen/io.hpp"
#include "sortgen/queues.hpp"

namespace sortgen {
namespace {

using detail::Json;

// Converts the FormatError raised by the JSON helpers ("path: what") into a
// RequestError that keeps the path separately.
[[noreturn]] void rethrow_as_request_error(const FormatError& e) {
  const std::string msg = e.what();
  const std::size_t colon = msg.find(": ");
  if (colon == std::string::npos) throw RequestError("<root>", msg);
  throw RequestError(msg.substr(0, colon), msg.substr(colon + 2));
}

Json value_json(const ListValue& v) {
  return {{"click", v.v_click}, {"pay", v.v_pay}, {"gmv", v.v_gmv}, {"combined", v.combined}};
}

ServiceReply json_reply(int status, Json body) {
  ServiceReply r;
  r.status = status;
  r.body = body.dump();
  return r;
}

ServiceReply error_reply(int status, std::string_view error, std::string_view field = {}) {
  Json j{{"error", error}};
  if (!field.empty()) j["field"] = field;
  return json_reply(status, std::move(j));
}

}  // namespace

RerankRequest parse_rerank_request(std::string_view body, const EngineConfig& config) {
  RerankRequest req;
  Json j = Json::parse(body.begin(), body.end(), nullptr, false);
  if (j.is_discarded()) throw RequestError("<root>", "malformed document");
  if (!j.is_object()) throw RequestError("<root>", "expected an object");
  try {
    if (j.contains("format")) {
      if (!j["format"].is_string() || j["format"].get<std::string>() != kDataFormat) {
        throw RequestError("format", "unsupported format version");
      }
    }
    req.user.features = detail::as_numbers(detail::require(j, "user", ""), "user");
    const Json& cands = detail::require(j, "candidates", "");
    if (!cands.is_array()) throw RequestError("candidates", "expected an array");
    for (std::size_t k = 0; k < cands.size(); ++k) {
      req.candidates.push_back(
          detail::item_from_json(cands[k], "candidates[" + std::to_string(k) + "]"));
    }
    if (j.contains("weights") && !j["weights"].is_null()) {
      const Json& w = j["weights"];
      ObjectiveWeights ow;
      ow.alpha = detail::as_number(detail::require(w, "alpha", "weights"), "weights.alpha");
      ow.beta = detail::as_number(detail::require(w, "beta", "weights"), "weights.beta");
      ow.gamma = detail::as_number(detail::require(w, "gamma", "weights"), "weights.gamma");
      req.weights = ow;
    }
    if (j.contains("lambda") && !j["lambda"].is_null()) {
      req.lambda = detail::as_number(j["lambda"], "lambda");
    }
  } catch (const RequestError&) {
    throw;
  } catch (const FormatError& e) {
    rethrow_as_request_error(e);
  }

  if (req.user.features.size() != config.d_user) {
    throw RequestError("user", "expected " + std::to_string(config.d_user) + " features");
  }
  std::set<ItemId> ids;
  for (std::size_t k = 0; k < req.candidates.size(); ++k) {
    const std::string path = "candidates[" + std::to_string(k) + "]";
    try {
      validate_item(req.candidates[k], config.d_emb);
    } catch (const Error& e) {
      throw RequestError(path, e.what());
    }
    if (!ids.insert(req.candidates[k].id).second) {
      throw RequestError(path + ".id", "duplicate item id");
    }
  }
  if (req.candidates.size() < config.l_o) {
    throw RequestError("candidates", "insufficient candidates");
  }
  if (req.weights) {
    try {
      validate_weights(*req.weights);
    } catch (const Error& e) {
      throw RequestError("weights", e.what());
    }
  }
  if (req.lambda && !(*req.lambda >= 0.0 && *req.lambda <= 1.0)) {
    throw RequestError("lambda", "must be in [0, 1]");
  }
  return req;
}

std::string rerank_request_to_string(const RerankRequest& req) {
  Json j;
  j["format"] = kDataFormat;
  j["user"] = req.user.features;
  Json cands = Json::array();
  for (const Item& it : req.candidates) cands.push_back(detail::item_to_json(it));
  j["candidates"] = std::move(cands);
  if (req.weights) {
    j["weights"] = {{"alpha", req.weights->alpha},
                    {"beta", req.weights->beta},
                    {"gamma", req.weights->gamma}};
  }
  if (req.lambda) j["lambda"] = *req.lambda;
  return j.dump();
}

std::string rerank_response_to_string(const RerankResponse& r, bool with_latency) {
  Json j;
  j["format"] = kDataFormat;
  j["ids"] = r.ids;
  j["source_queues"] = r.source_queues;
  j["value"] = value_json(r.value);
  if (with_latency) j["latency_ns"] = r.latency_ns;
  return j.dump();
}

RerankResponse parse_rerank_response(std::string_view body) {
  const Json j = detail::parse_document(body, "response");
  RerankResponse r;
  const Json& ids = detail::require(j, "ids", "");
  if (!ids.is_array()) detail::field_error("ids", "expected an array");
  for (std::size_t k = 0; k < ids.size(); ++k) {
    r.ids.push_back(detail::as_integer(ids[k], "ids[" + std::to_string(k) + "]"));
  }
  const Json& sq = detail::require(j, "source_queues", "");
  if (!sq.is_array()) detail::field_error("source_queues", "expected an array");
  for (std::size_t k = 0; k < sq.size(); ++k) {
    r.source_queues.push_back(static_cast<int>(
        detail::as_integer(sq[k], "source_queues[" + std::to_string(k) + "]")));
  }
  const Json& v = detail::require(j, "value", "");
  r.value.v_click = detail::as_number(detail::require(v, "click", "value"), "value.click");
  r.value.v_pay = detail::as_number(detail::require(v, "pay", "value"), "value.pay");
  r.value.v_gmv = detail::as_number(detail::require(v, "gmv", "value"), "value.gmv");
  r.value.combined =
      detail::as_number(detail::require(v, "combined", "value"), "value.combined");
  if (j.contains("latency_ns")) r.latency_ns = j["latency_ns"].get<std::uint64_t>();
  return r;
}

RerankResponse rerank(const SortModel& model, const RerankRequest& req) {
  const auto start = std::chrono::steady_clock::now();
  const EngineConfig& c = model.config();
  GenerationParams params = GenerationParams::from(c);
  if (req.weights) params.weights = *req.weights;
  if (req.lambda) params.lambda = *req.lambda;
  const std::span<const Item> pool = req.candidates;
  CandidateQueues q = build_queues(pool, c.queue_specs, c.partition_strategy, c.l_o);
  const GenerationTrace trace = generate(pool, req.user, std::move(q), model, params);
  RerankResponse r;
  r.ids = trace.ids;
  r.source_queues = trace.result.source_queues;
  r.value = trace.value;
  r.latency_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now() - start)
          .count());
  return r;
}

RerankService::~RerankService() {
  if (pending_.valid()) pending_.wait();
}

void RerankService::load_async(std::string path) {
  pending_ = std::async(std::launch::async, [this, path = std::move(path)] {
    try {
      SortModel model = load_checkpoint(path);
      install(std::move(model), hex64(checkpoint_file_hash(path)));
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(mu_);
      load_error_ = e.what();
      throw;
    }
  });
}

void RerankService::wait_loaded() {
  if (pending_.valid()) pending_.get();
}

void RerankService::install(SortModel model, std::string hash) {
  auto loaded = std::make_shared<const Loaded>(Loaded{std::move(model), std::move(hash)});
  std::lock_guard<std::mutex> lock(mu_);
  loaded_ = std::move(loaded);
}

bool RerankService::ready() const { return current() != nullptr; }

std::shared_ptr<const RerankService::Loaded> RerankService::current() const {
  std::lock_guard<std::mutex> lock(mu_);
  return loaded_;
}

ServiceReply RerankService::handle(std::string_view method, std::string_view route,
                                   std::string_view body) const {
  const auto loaded = current();
  if (route == "/healthz") {
    if (method != "GET") return error_reply(405, "method not allowed");
    if (!loaded) {
      std::lock_guard<std::mutex> lock(mu_);
      Json j{{"status", load_error_.empty() ? "loading" : "failed"}};
      if (!load_error_.empty()) j["error"] = load_error_;
      return json_reply(503, std::move(j));
    }
    return json_reply(200, {{"status", "ok"}, {"checkpoint", loaded->hash}});
  }
  if (route == "/rerank") {
    if (method != "POST") return error_reply(405, "method not allowed");
    if (!loaded) return error_reply(503, "checkpoint not loaded");
    try {
      const RerankRequest req = parse_rerank_request(body, loaded->model.config());
      return {200, rerank_response_to_string(rerank(loaded->model, req)), "application/json"};
    } catch (const RequestError& e) {
      const std::string msg = e.what();
      return error_reply(400, msg.substr(e.field().size() + 2), e.field());
    } catch (const Error& e) {
      return error_reply(422, e.what());
    }
  }
  return error_reply(404, "no such route");
}

}  // namespace sortgen
