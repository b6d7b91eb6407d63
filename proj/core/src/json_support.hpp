#pragma once

// nlohmann/json glue shared by the .cpp files of the core library.

#include <set>
#include <string>

#include "hatsr/error.hpp"
#include "hatsr/nn/config.hpp"
#include "json.hpp"

namespace hatsr::detail {

using json = nlohmann::json;

/// Throws ConfigError naming the first key of `obj` not in `allowed`.
void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where);

template <typename V>
void read_key(const json& obj, const char* key, V& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<V>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

json model_config_to_json(const nn::ModelConfig& cfg);
nn::ModelConfig model_config_from_json(const json& j);

}  // namespace hatsr::detail
