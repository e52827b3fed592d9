#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

namespace cmilab::cli {

using json = nlohmann::json;

/// Config document does not match the experiment schema (exit 3).
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// Typed, strict view of an experiment's "params" object. Every key must be
/// read by the experiment before finish() or the run is rejected.
class Params {
 public:
  Params(json obj, std::string where) : obj_(std::move(obj)), where_(std::move(where)) {
    if (!obj_.is_object()) throw SchemaError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  template <class T>
  T require(const std::string& key) {
    if (!obj_.contains(key)) throw SchemaError(where_ + ": missing required parameter '" + key + "'");
    return get_as<T>(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!obj_.contains(key)) return fallback;
    return get_as<T>(key);
  }

  /// A scalar or an array of scalars.
  template <class T>
  std::vector<T> list(const std::string& key, std::vector<T> fallback) {
    if (!obj_.contains(key)) return fallback;
    if (obj_.at(key).is_array()) return get_as<std::vector<T>>(key);
    return {get_as<T>(key)};
  }

  Params child(const std::string& key) {
    used_.insert(key);
    if (!obj_.contains(key)) throw SchemaError(where_ + ": missing required object '" + key + "'");
    return Params(obj_.at(key), where_ + "." + key);
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return obj_.at(key);
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!used_.count(it.key())) throw SchemaError(where_ + ": unknown parameter '" + it.key() + "'");
  }

  const std::string& where() const { return where_; }

 private:
  template <class T>
  T get_as(const std::string& key) {
    used_.insert(key);
    const json& v = obj_.at(key);
    try {
      if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw SchemaError(where_ + "." + key + ": expected an integer");
      } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned()) throw SchemaError(where_ + "." + key + ": expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw SchemaError(where_ + "." + key + ": expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw SchemaError(where_ + "." + key + ": expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw SchemaError(where_ + "." + key + ": expected a string");
      } else if constexpr (std::is_same_v<T, std::vector<int>>) {
        if (!v.is_array()) throw SchemaError(where_ + "." + key + ": expected an array");
        for (const auto& e : v)
          if (!e.is_number_integer()) throw SchemaError(where_ + "." + key + ": expected integers");
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) throw SchemaError(where_ + "." + key + ": expected an array");
        for (const auto& e : v)
          if (!e.is_number()) throw SchemaError(where_ + "." + key + ": expected numbers");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw SchemaError(where_ + "." + key + ": " + e.what());
    }
  }

  json obj_;
  std::string where_;
  std::set<std::string> used_;
};

}  // namespace cmilab::cli
