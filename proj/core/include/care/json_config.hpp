/**
 * Copyright 2026 The CARE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "care/config_error.hpp"

namespace care {

// Strict reader over one JSON object: every key must be consumed before
// finish(), so misspelled keys surface as errors instead of silent defaults.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& object, std::string path)
      : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) {
      throw ConfigError(path_, "config section '" + display(path_) + "' must be a JSON object");
    }
  }

  bool has(const std::string& key) const { return object_.contains(key); }

  const nlohmann::json& raw(const std::string& key) {
    auto it = object_.find(key);
    if (it == object_.end()) {
      throw ConfigError(child(key), "missing required config key '" + child(key) + "'");
    }
    used_.insert(key);
    return *it;
  }

  template <typename T>
  T require(const std::string& key) {
    return convert<T>(raw(key), key);
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(raw(key), key);
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  /// Throws ConfigError naming the first key that was never read.
  void finish() const {
    for (auto it = object_.begin(); it != object_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw ConfigError(child(it.key()), "unknown config key '" + child(it.key()) + "'");
      }
    }
  }

 private:
  static std::string display(const std::string& path) { return path.empty() ? "<root>" : path; }

  template <typename T>
  T convert(const nlohmann::json& value, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!value.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!value.is_number_integer()) throw std::invalid_argument("expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!value.is_number()) throw std::invalid_argument("expected a number");
      }
      return value.get<T>();
    } catch (const std::exception& e) {
      throw ConfigError(child(key), "config key '" + child(key) + "': " + e.what());
    }
  }

  const nlohmann::json& object_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace care
