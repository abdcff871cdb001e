#include "pbq/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pbq/error.hpp"

namespace pbq {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw Error(ErrorKind::Config, "line " + std::to_string(line) + ": " + what);
}

bool parse_number(std::string_view s, double& out) {
  std::string t(s);
  std::erase(t, '_');
  if (t.empty()) return false;
  if (t == "inf" || t == "+inf") {
    out = INFINITY;
    return true;
  }
  if (t == "-inf") {
    out = -INFINITY;
    return true;
  }
  const char* b = t.data();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, t.data() + t.size(), out);
  return ec == std::errc() && p == t.data() + t.size();
}

bool parse_string(std::string_view s, std::string& out) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') return false;
  out.clear();
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\' && i + 2 < s.size()) {
      const char c = s[++i];
      out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
    } else if (s[i] == '"') {
      return false;
    } else {
      out += s[i];
    }
  }
  return true;
}

std::vector<std::string_view> split_array(std::string_view body) {
  std::vector<std::string_view> items;
  bool quoted = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '"') quoted = !quoted;
    if (body[i] == ',' && !quoted) {
      items.push_back(trim(body.substr(start, i - start)));
      start = i + 1;
    }
  }
  const auto last = trim(body.substr(start));
  if (!last.empty()) items.push_back(last);
  return items;
}

ConfigValue parse_value(std::string_view s, int line) {
  s = trim(s);
  if (s == "true") return true;
  if (s == "false") return false;
  std::string str;
  if (parse_string(s, str)) return str;
  double d = 0.0;
  if (parse_number(s, d)) return d;
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
    const auto items = split_array(s.substr(1, s.size() - 2));
    if (items.empty()) return std::vector<double>{};
    if (items.front().front() == '"') {
      std::vector<std::string> out;
      for (auto it : items) {
        if (!parse_string(it, str)) fail(line, "mixed or malformed string array");
        out.push_back(str);
      }
      return out;
    }
    std::vector<double> out;
    for (auto it : items) {
      if (!parse_number(it, d)) fail(line, "malformed number '" + std::string(it) + "' in array");
      out.push_back(d);
    }
    return out;
  }
  fail(line, "cannot parse value '" + std::string(s) + "'");
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return true;
}

const char* type_name(const ConfigValue& v) {
  switch (v.index()) {
    case 0: return "boolean";
    case 1: return "number";
    case 2: return "string";
    case 3: return "number array";
    default: return "string array";
  }
}

template <class T>
const T& typed(const std::map<std::string, ConfigValue>& m, const std::string& key, const char* want) {
  const auto& v = m.at(key);
  if (const T* p = std::get_if<T>(&v); p) return *p;
  throw Error(ErrorKind::Config, "key '" + key + "' is a " + type_name(v) + ", expected " + want);
}

}  // namespace

double ConfigTable::number(const std::string& key, double fallback) const {
  return has(key) ? typed<double>(values_, key, "number") : fallback;
}

int ConfigTable::integer(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double d = typed<double>(values_, key, "integer");
  if (d != std::floor(d) || std::abs(d) > 1e9) throw Error(ErrorKind::Config, "key '" + key + "' must be an integer");
  return static_cast<int>(d);
}

bool ConfigTable::boolean(const std::string& key, bool fallback) const {
  return has(key) ? typed<bool>(values_, key, "boolean") : fallback;
}

std::string ConfigTable::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? typed<std::string>(values_, key, "string") : fallback;
}

std::vector<double> ConfigTable::numbers(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  if (const double* d = std::get_if<double>(&values_.at(key)); d) return {*d};
  return typed<std::vector<double>>(values_, key, "number array");
}

ConfigTable parse_config(std::string_view text) {
  ConfigTable t;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    ++line_no;
    const auto line = trim(strip_comment(text.substr(pos, end - pos)));
    pos = end + 1;
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(section)) fail(line_no, "bad section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (!valid_key(key)) fail(line_no, "bad key '" + std::string(key) + "'");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (t.has(full)) fail(line_no, "duplicate key '" + full + "'");
    t.set(full, parse_value(line.substr(eq + 1), line_no));
  }
  return t;
}

ConfigTable load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(ConfigTable& table, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error(ErrorKind::Config, "override '" + assignment + "' needs key=value");
  const auto key = trim(std::string_view(assignment).substr(0, eq));
  if (!valid_key(key)) throw Error(ErrorKind::Config, "bad override key '" + std::string(key) + "'");
  const auto raw = trim(std::string_view(assignment).substr(eq + 1));
  try {
    table.set(std::string(key), parse_value(raw, 0));
  } catch (const Error&) {
    // bare words on the command line are strings
    table.set(std::string(key), std::string(raw));
  }
}

}  // namespace pbq
