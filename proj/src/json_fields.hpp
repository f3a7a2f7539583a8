#pragma once

// Strict field access for the JSON documents we read (calibration, manifest,
// scenario). Every failure becomes a ParseError naming the field path.

#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>

#include "geopin/error.hpp"
#include "json.hpp"

namespace geopin::detail {

class JsonFields {
 public:
  JsonFields(const nlohmann::json& obj, std::string path, std::string source)
      : obj_(obj), path_(std::move(path)), source_(std::move(source)) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw Error(ErrorCode::ParseError, source_ + ": " + field + ": " + what);
  }

  std::string field_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, value] : obj_.items()) {
      bool known = false;
      for (auto k : keys) known = known || k == key;
      if (!known) fail(field_path(key), "unknown field");
    }
  }

  bool has(std::string_view key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

  const nlohmann::json& at(std::string_view key) const {
    if (!obj_.contains(key)) fail(field_path(key), "missing required field");
    return obj_.at(key);
  }

  double number(std::string_view key) const {
    const auto& v = at(key);
    if (!v.is_number()) fail(field_path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(field_path(key), "expected a finite number");
    return d;
  }

  double number_or(std::string_view key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  int integer(std::string_view key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) fail(field_path(key), "expected an integer");
    return v.get<int>();
  }

  std::string string(std::string_view key) const {
    const auto& v = at(key);
    if (!v.is_string()) fail(field_path(key), "expected a string");
    return v.get<std::string>();
  }

  std::string string_or(std::string_view key, std::string fallback) const {
    return has(key) ? string(key) : fallback;
  }

  bool boolean_or(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_boolean()) fail(field_path(key), "expected a boolean");
    return v.get<bool>();
  }

  JsonFields object(std::string_view key) const {
    return JsonFields(at(key), field_path(key), source_);
  }

  const nlohmann::json& array(std::string_view key) const {
    const auto& v = at(key);
    if (!v.is_array()) fail(field_path(key), "expected an array");
    return v;
  }

  const std::string& path() const { return path_; }
  const std::string& source() const { return source_; }

 private:
  const nlohmann::json& obj_;
  std::string path_;
  std::string source_;
};

}  // namespace geopin::detail
