#pragma once

// Strict JSON field access shared by the config and file readers.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "roster/instances.hpp"

namespace roster::detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                           const std::string& context) {
  if (!obj.is_object()) throw ParseError(context + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(context + ": unknown field \"" + key + "\"");
    }
  }
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(context + ": missing field \"" + key + "\"");
  return *it;
}

inline std::int64_t as_int(const nlohmann::json& v, const std::string& context) {
  if (!v.is_number_integer()) throw ParseError(context + ": expected an integer");
  return v.get<std::int64_t>();
}

}  // namespace roster::detail
