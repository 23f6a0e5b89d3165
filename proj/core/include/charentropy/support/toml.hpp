#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "charentropy/support/numeric.hpp"

namespace charentropy {

// Minimal TOML subset sufficient for model config files:
// [table.subtable] headers, key = value with string/number/bool/array
// values (arrays may nest and span lines). Keys are exposed as full
// dotted paths, e.g. "model.flux.z1".
class TomlDoc {
 public:
  struct Value;
  using Array = std::vector<Value>;
  struct Value {
    std::variant<double, bool, std::string, Array> data;

    bool is_number() const { return std::holds_alternative<double>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_array() const { return std::holds_alternative<Array>(data); }
    double number() const;
    const std::string& string() const;
    bool boolean() const;
    const Array& array() const;
  };

  static TomlDoc parse(const std::string& text);
  static TomlDoc parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const Value& at(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;

  const std::map<std::string, Value>& values() const { return values_; }

 private:
  std::map<std::string, Value> values_;
};

}  // namespace charentropy
