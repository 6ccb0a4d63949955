#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "wugdef/error.hpp"

namespace wugdef::detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key,
                                     ErrorCode missing = ErrorCode::kMissingColumn) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw Error(missing, std::string("missing field '") + key + "'");
  }
  return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  ErrorCode missing = ErrorCode::kMissingColumn) {
  const auto& v = require(j, key, missing);
  if (!v.is_string()) throw Error(ErrorCode::kParse, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::kParse, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

inline nlohmann::json parse_json(const std::string& text, const std::string& where) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, where + ": " + e.what());
  }
}

}  // namespace wugdef::detail
