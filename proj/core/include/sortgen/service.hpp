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

#ifndef SORTGEN_SERVICE_HPP_
#define SORTGEN_SERVICE_HPP_

#include <cstdint>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sortgen/generation.hpp"
#include "sortgen/model.hpp"
#include "sortgen/types.hpp"

namespace sortgen {

/// A malformed request. `field()` is the path of the offending field, such
/// as "candidates[2].emb".
class RequestError : public FormatError {
 public:
  RequestError(std::string field, const std::string& what)
      : FormatError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RerankRequest {
  UserContext user;
  std::vector<Item> candidates;
  std::optional<ObjectiveWeights> weights;
  std::optional<double> lambda;

  bool operator==(const RerankRequest&) const = default;
};

struct RerankResponse {
  std::vector<ItemId> ids;
  std::vector<int> source_queues;
  ListValue value;
  std::uint64_t latency_ns = 0;
};

/// Parses and validates a request against the model shape. Throws
/// RequestError.
RerankRequest parse_rerank_request(std::string_view body, const EngineConfig& config);
std::string rerank_request_to_string(const RerankRequest& request);

/// latency_ns is omitted when `with_latency` is false, which gives a
/// deterministic rendering of the response.
std::string rerank_response_to_string(const RerankResponse& response,
                                      bool with_latency = true);
RerankResponse parse_rerank_response(std::string_view body);

RerankResponse rerank(const SortModel& model, const RerankRequest& request);

struct ServiceReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Transport-independent request handling for the /rerank and /healthz
/// routes. Answers 503 until a model is installed.
class RerankService {
 public:
  RerankService() = default;
  RerankService(const RerankService&) = delete;
  RerankService& operator=(const RerankService&) = delete;
  ~RerankService();

  /// Loads the checkpoint on a background thread.
  void load_async(std::string checkpoint_path);
  /// Blocks until an asynchronous load finishes; rethrows its error.
  void wait_loaded();
  void install(SortModel model, std::string checkpoint_hash);
  bool ready() const;

  ServiceReply handle(std::string_view method, std::string_view route,
                      std::string_view body) const;

 private:
  struct Loaded {
    SortModel model;
    std::string hash;
  };
  std::shared_ptr<const Loaded> current() const;

  mutable std::mutex mu_;
  std::shared_ptr<const Loaded> loaded_;
  std::string load_error_;
  std::future<void> pending_;
};

}  // namespace sortgen

#endif  // SORTGEN_SERVICE_HPP_
