#pragma once

// Minimal TOML subset: [section] headers, key = value lines, # comments,
// numbers, quoted strings, booleans and single-line arrays of numbers or
// strings. Keys are flattened to "section.key".

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pbq {

using ConfigValue = std::variant<bool, double, std::string, std::vector<double>, std::vector<std::string>>;

class ConfigTable {
 public:
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, ConfigValue v) { values_[key] = std::move(v); }
  const std::map<std::string, ConfigValue>& entries() const { return values_; }

  // Typed access; Config error on a type mismatch, fallback when absent.
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

 private:
  std::map<std::string, ConfigValue> values_;
};

// Config error with the line number on malformed input.
ConfigTable parse_config(std::string_view text);
ConfigTable load_config(const std::string& path);
// "section.key=value" with value in the same syntax as the file.
void apply_override(ConfigTable& table, const std::string& assignment);

}  // namespace pbq
