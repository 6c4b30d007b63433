#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Flat TOML-subset experiment configs: strings, numbers, booleans and
// homogeneous arrays; [table] headers flatten into dotted key prefixes.

namespace renc {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& field, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line) +
                           (field.empty() ? "" : ", key '" + field + "'") +
                           ": " + what),
        line(line),
        field(field) {}
  int line;
  std::string field;
};

struct ConfigValue {
  enum class Kind { Str, Num, Bool, NumList, StrList };
  Kind kind = Kind::Str;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<double> nums;
  std::vector<std::string> strs;
  int line = 0;
};

class Config {
 public:
  static Config from_string(const std::string& text);
  static Config from_file(const std::string& path);

  bool has(const std::string& key) const;

  // typed accessors; throw ConfigError on missing key or wrong type
  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& dflt) const;
  double get_num(const std::string& key) const;
  double get_num(const std::string& key, double dflt) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::vector<double> get_nums(const std::string& key) const;
  std::vector<long> get_ints(const std::string& key) const;
  std::vector<std::string> get_strs(const std::string& key) const;

  void set(const std::string& key, ConfigValue v);
  const std::vector<std::pair<std::string, ConfigValue>>& entries() const {
    return entries_;
  }

  // canonical flat serialization; reparses to an equivalent config
  std::string to_string() const;

 private:
  const ConfigValue& find(const std::string& key) const;
  std::vector<std::pair<std::string, ConfigValue>> entries_;
};

}  // namespace renc
