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

// Internal JSON helpers shared by the dataset and request codecs.

#ifndef SORTGEN_SRC_JSON_UTIL_HPP_
#define SORTGEN_SRC_JSON_UTIL_HPP_

#include <string>
#include <vector>

#include "json.hpp"
#include "sortgen/types.hpp"

namespace sortgen::detail {

using Json = nlohmann::json;

/// FormatError whose message starts with the field path.
[[noreturn]] void field_error(const std::string& path, const std::string& what);

const Json& require(const Json& obj, const std::string& key, const std::string& path);
double as_number(const Json& v, const std::string& path);
std::int64_t as_integer(const Json& v, const std::string& path);
std::vector<double> as_numbers(const Json& v, const std::string& path);
std::vector<std::uint8_t> as_flags(const Json& v, const std::string& path);

Json item_to_json(const Item& item);
Item item_from_json(const Json& v, const std::string& path);

Json parse_document(std::string_view text, const std::string& where);

}  // namespace sortgen::detail

#endif  // SORTGEN_SRC_JSON_UTIL_HPP_
