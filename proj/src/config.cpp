#include "renc/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace renc {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// strips a trailing comment, respecting double quotes
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

ConfigValue parse_scalar(const std::string& tok, int line,
                         const std::string& key) {
  ConfigValue v;
  v.line = line;
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
    v.kind = ConfigValue::Kind::Str;
    v.str = tok.substr(1, tok.size() - 2);
    return v;
  }
  if (tok == "true" || tok == "false") {
    v.kind = ConfigValue::Kind::Bool;
    v.boolean = (tok == "true");
    return v;
  }
  double num;
  if (parse_number(tok, num)) {
    v.kind = ConfigValue::Kind::Num;
    v.num = num;
    return v;
  }
  throw ConfigError(line, key, "unrecognized value '" + tok + "'");
}

ConfigValue parse_value(const std::string& raw, int line,
                        const std::string& key) {
  const std::string tok = trim(raw);
  if (tok.empty()) throw ConfigError(line, key, "missing value");
  if (tok.front() != '[') return parse_scalar(tok, line, key);
  if (tok.back() != ']') throw ConfigError(line, key, "unterminated array");

  ConfigValue v;
  v.line = line;
  const std::string body = trim(tok.substr(1, tok.size() - 2));
  if (body.empty()) throw ConfigError(line, key, "empty array");
  std::vector<std::string> items;
  std::string cur;
  bool in_str = false;
  for (char c : body) {
    if (c == '"') in_str = !in_str;
    if (c == ',' && !in_str) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  items.push_back(trim(cur));
  bool strings = !items[0].empty() && items[0].front() == '"';
  v.kind = strings ? ConfigValue::Kind::StrList : ConfigValue::Kind::NumList;
  for (const std::string& it : items) {
    ConfigValue e = parse_scalar(it, line, key);
    if (strings) {
      if (e.kind != ConfigValue::Kind::Str)
        throw ConfigError(line, key, "mixed array element types");
      v.strs.push_back(e.str);
    } else {
      if (e.kind != ConfigValue::Kind::Num)
        throw ConfigError(line, key, "mixed array element types");
      v.nums.push_back(e.num);
    }
  }
  return v;
}

const char* kind_name(ConfigValue::Kind k) {
  switch (k) {
    case ConfigValue::Kind::Str: return "string";
    case ConfigValue::Kind::Num: return "number";
    case ConfigValue::Kind::Bool: return "boolean";
    case ConfigValue::Kind::NumList: return "number array";
    case ConfigValue::Kind::StrList: return "string array";
  }
  return "?";
}

}  // namespace

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream is(text);
  std::string raw;
  std::string prefix;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError(line, "", "unterminated table header");
      prefix = trim(s.substr(1, s.size() - 2));
      if (prefix.empty()) throw ConfigError(line, "", "empty table name");
      prefix += '.';
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "", "expected 'key = value'");
    const std::string key = prefix + trim(s.substr(0, eq));
    if (key == prefix) throw ConfigError(line, "", "missing key");
    if (cfg.has(key)) throw ConfigError(line, key, "duplicate key");
    cfg.entries_.emplace_back(key, parse_value(s.substr(eq + 1), line, key));
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(0, "", "cannot open '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return from_string(os.str());
}

bool Config::has(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

const ConfigValue& Config::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw ConfigError(0, key, "missing required key");
}

std::string Config::get_str(const std::string& key) const {
  const ConfigValue& v = find(key);
  if (v.kind != ConfigValue::Kind::Str)
    throw ConfigError(v.line, key, std::string("expected string, got ") + kind_name(v.kind));
  return v.str;
}

std::string Config::get_str(const std::string& key, const std::string& dflt) const {
  return has(key) ? get_str(key) : dflt;
}

double Config::get_num(const std::string& key) const {
  const ConfigValue& v = find(key);
  if (v.kind != ConfigValue::Kind::Num)
    throw ConfigError(v.line, key, std::string("expected number, got ") + kind_name(v.kind));
  return v.num;
}

double Config::get_num(const std::string& key, double dflt) const {
  return has(key) ? get_num(key) : dflt;
}

long Config::get_int(const std::string& key) const {
  const double x = get_num(key);
  const long n = std::lround(x);
  if (std::abs(x - n) > 1e-9)
    throw ConfigError(find(key).line, key, "expected an integer");
  return n;
}

long Config::get_int(const std::string& key, long dflt) const {
  return has(key) ? get_int(key) : dflt;
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  if (!has(key)) return dflt;
  const ConfigValue& v = find(key);
  if (v.kind != ConfigValue::Kind::Bool)
    throw ConfigError(v.line, key, std::string("expected boolean, got ") + kind_name(v.kind));
  return v.boolean;
}

std::vector<double> Config::get_nums(const std::string& key) const {
  const ConfigValue& v = find(key);
  if (v.kind == ConfigValue::Kind::Num) return {v.num};
  if (v.kind != ConfigValue::Kind::NumList)
    throw ConfigError(v.line, key, std::string("expected number array, got ") + kind_name(v.kind));
  return v.nums;
}

std::vector<long> Config::get_ints(const std::string& key) const {
  const ConfigValue& v = find(key);
  std::vector<long> out;
  for (double x : get_nums(key)) {
    const long n = std::lround(x);
    if (std::abs(x - n) > 1e-9)
      throw ConfigError(v.line, key, "expected integer entries");
    out.push_back(n);
  }
  return out;
}

std::vector<std::string> Config::get_strs(const std::string& key) const {
  const ConfigValue& v = find(key);
  if (v.kind == ConfigValue::Kind::Str) return {v.str};
  if (v.kind != ConfigValue::Kind::StrList)
    throw ConfigError(v.line, key, std::string("expected string array, got ") + kind_name(v.kind));
  return v.strs;
}

void Config::set(const std::string& key, ConfigValue v) {
  for (auto& [k, old] : entries_)
    if (k == key) {
      old = std::move(v);
      return;
    }
  entries_.emplace_back(key, std::move(v));
}

std::string Config::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& [k, v] : entries_) {
    os << k << " = ";
    switch (v.kind) {
      case ConfigValue::Kind::Str:
        os << '"' << v.str << '"';
        break;
      case ConfigValue::Kind::Num:
        os << v.num;
        break;
      case ConfigValue::Kind::Bool:
        os << (v.boolean ? "true" : "false");
        break;
      case ConfigValue::Kind::NumList:
        os << '[';
        for (size_t i = 0; i < v.nums.size(); ++i)
          os << (i ? ", " : "") << v.nums[i];
        os << ']';
        break;
      case ConfigValue::Kind::StrList:
        os << '[';
        for (size_t i = 0; i < v.strs.size(); ++i)
          os << (i ? ", " : "") << '"' << v.strs[i] << '"';
        os << ']';
        break;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace renc
