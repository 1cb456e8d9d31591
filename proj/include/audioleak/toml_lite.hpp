#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <audioleak/core.hpp>

// Small TOML subset, enough for the plan and scenario files: [table] and
// [[array-of-tables]] headers (dotted allowed), bare keys, basic strings,
// integers, floats, booleans, single-line arrays, # comments. No dates, no
// inline tables, no multi-line strings.

namespace audioleak::toml {

class Value {
 public:
  enum class Kind { Table, Array, String, Float, Integer, Boolean };

  Value() : kind_(Kind::Table) {}
  static Value string(std::string s) { return Value(Kind::String, std::move(s)); }
  static Value floating(double v) { Value x(Kind::Float); x.num_ = v; return x; }
  static Value integer(std::int64_t v) { Value x(Kind::Integer); x.int_ = v; return x; }
  static Value boolean(bool v) { Value x(Kind::Boolean); x.bool_ = v; return x; }
  static Value array() { return Value(Kind::Array); }

  Kind kind() const { return kind_; }
  bool is_table() const { return kind_ == Kind::Table; }
  bool is_array() const { return kind_ == Kind::Array; }

  const Value* find(const std::string& key) const {
    require(Kind::Table, "table");
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const Value& at(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw FormatError("missing key '" + key + "'");
    return *v;
  }

  const std::map<std::string, Value>& entries() const {
    require(Kind::Table, "table");
    return entries_;
  }

  const std::vector<Value>& items() const {
    require(Kind::Array, "array");
    return items_;
  }

  const std::string& as_string() const {
    require(Kind::String, "string");
    return str_;
  }

  bool as_bool() const {
    require(Kind::Boolean, "boolean");
    return bool_;
  }

  std::int64_t as_int() const {
    require(Kind::Integer, "integer");
    return int_;
  }

  double as_double() const {
    if (kind_ == Kind::Integer) return static_cast<double>(int_);
    require(Kind::Float, "number");
    return num_;
  }

  // lookup with defaults, for optional keys
  double number_or(const std::string& key, double dflt) const {
    const Value* v = find(key);
    return v ? v->as_double() : dflt;
  }
  std::int64_t int_or(const std::string& key, std::int64_t dflt) const {
    const Value* v = find(key);
    return v ? v->as_int() : dflt;
  }
  std::string string_or(const std::string& key, std::string dflt) const {
    const Value* v = find(key);
    return v ? v->as_string() : std::move(dflt);
  }
  bool bool_or(const std::string& key, bool dflt) const {
    const Value* v = find(key);
    return v ? v->as_bool() : dflt;
  }

  std::vector<std::string> string_list_or(const std::string& key) const {
    const Value* v = find(key);
    std::vector<std::string> out;
    if (!v) return out;
    for (const auto& item : v->items()) out.push_back(item.as_string());
    return out;
  }

 private:
  friend class Parser;
  explicit Value(Kind k, std::string s = {}) : kind_(k), str_(std::move(s)) {}

  void require(Kind k, const char* what) const {
    if (kind_ != k)
      throw FormatError(std::string("value is not a ") + what);
  }

  Kind kind_;
  std::map<std::string, Value> entries_;
  std::vector<Value> items_;
  std::string str_;
  double num_ = 0.0;
  std::int64_t int_ = 0;
  bool bool_ = false;
};

class Parser {
 public:
  static Value parse(std::istream& in) {
    Parser p;
    std::string line;
    while (std::getline(in, line)) {
      ++p.lineno_;
      p.consume_line(line);
    }
    return std::move(p.root_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError("toml line " + std::to_string(lineno_) + ": " + msg);
  }

  static bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  // strips comments and surrounding whitespace; '#' inside strings survives
  std::string strip(const std::string& line) const {
    std::string out;
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (in_string) {
        out += c;
        if (c == '\\' && i + 1 < line.size()) out += line[++i];
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '#') break;
      if (c == '"') in_string = true;
      out += c;
    }
    if (in_string) fail("unterminated string");
    auto b = out.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = out.find_last_not_of(" \t\r");
    return out.substr(b, e - b + 1);
  }

  std::vector<std::string> split_key_path(std::string_view text) const {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
      if (c == '.') {
        if (cur.empty()) fail("empty segment in table name");
        parts.push_back(cur);
        cur.clear();
      } else if (bare_key_char(c)) {
        cur += c;
      } else {
        fail(std::string("bad character '") + c + "' in table name");
      }
    }
    if (cur.empty()) fail("empty segment in table name");
    parts.push_back(cur);
    return parts;
  }

  Value* descend(const std::vector<std::string>& path, std::size_t upto) {
    Value* node = &root_;
    for (std::size_t i = 0; i < upto; ++i) {
      if (!node->is_table()) fail("'" + path[i] + "' is not a table");
      Value& child = node->entries_[path[i]];
      if (child.is_array()) {
        if (child.items_.empty()) fail("'" + path[i] + "' is an empty array");
        node = &child.items_.back();  // continue inside the latest element
      } else {
        node = &child;
      }
    }
    return node;
  }

  void consume_line(const std::string& raw) {
    std::string line = strip(raw);
    if (line.empty()) return;

    if (line.size() >= 4 && line.rfind("[[", 0) == 0 && line.ends_with("]]")) {
      auto path = split_key_path(std::string_view(line).substr(2, line.size() - 4));
      Value* parent = descend(path, path.size() - 1);
      if (!parent->is_table()) fail("array-of-tables under a non-table");
      Value& arr = parent->entries_[path.back()];
      if (arr.is_table() && arr.entries_.empty()) arr = Value::array();
      if (!arr.is_array()) fail("'" + path.back() + "' already has another type");
      arr.items_.emplace_back();
      current_ = &arr.items_.back();
      return;
    }
    if (line.front() == '[' && line.back() == ']') {
      auto path = split_key_path(std::string_view(line).substr(1, line.size() - 2));
      current_ = descend(path, path.size());
      if (!current_->is_table()) fail("'" + path.back() + "' is not a table");
      return;
    }

    auto eq = find_unquoted(line, '=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    for (char c : key)
      if (!bare_key_char(c)) fail("bad character in key '" + key + "'");
    if (val.empty()) fail("missing value for '" + key + "'");
    if (!current_->is_table()) fail("assignment outside a table");
    if (current_->entries_.count(key)) fail("duplicate key '" + key + "'");
    current_->entries_[key] = parse_value(val);
  }

  static std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  static std::size_t find_unquoted(const std::string& s, char needle) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (in_string) {
        if (s[i] == '\\') ++i;
        else if (s[i] == '"') in_string = false;
      } else if (s[i] == '"') {
        in_string = true;
      } else if (s[i] == needle) {
        return i;
      }
    }
    return std::string::npos;
  }

  Value parse_value(const std::string& text) const {
    if (text.front() == '"') return Value::string(parse_string(text));
    if (text.front() == '[') return parse_array(text);
    if (text == "true") return Value::boolean(true);
    if (text == "false") return Value::boolean(false);
    return parse_number(text);
  }

  std::string parse_string(const std::string& text) const {
    if (text.size() < 2 || text.back() != '"') fail("malformed string");
    std::string out;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      char c = text[i];
      if (c != '\\') {
        if (c == '"') fail("unexpected quote inside string");
        out += c;
        continue;
      }
      ++i;  // line-level quote balancing already rules out a dangling escape
      switch (text[i]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail("unsupported escape in string");
      }
    }
    return out;
  }

  Value parse_array(const std::string& text) const {
    if (text.back() != ']') fail("malformed array");
    Value arr = Value::array();
    std::string body = text.substr(1, text.size() - 2);
    std::string item;
    bool in_string = false;
    int depth = 0;
    auto flush = [&] {
      std::string t = trim(item);
      item.clear();
      if (!t.empty()) arr.items_.push_back(parse_value(t));
      else if (depth == 0 && !arr.items_.empty()) fail("empty array element");
    };
    for (std::size_t i = 0; i < body.size(); ++i) {
      char c = body[i];
      if (in_string) {
        item += c;
        if (c == '\\' && i + 1 < body.size()) item += body[++i];
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') { in_string = true; item += c; continue; }
      if (c == '[') { ++depth; item += c; continue; }
      if (c == ']') { --depth; item += c; continue; }
      if (c == ',' && depth == 0) { flush(); continue; }
      item += c;
    }
    if (!trim(item).empty()) arr.items_.push_back(parse_value(trim(item)));
    return arr;
  }

  Value parse_number(const std::string& text) const {
    const bool is_float = text.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        double v = std::stod(text, &used);
        if (used != text.size()) fail("trailing characters after number");
        return Value::floating(v);
      }
      std::int64_t v = std::stoll(text, &used);
      if (used != text.size()) fail("trailing characters after number");
      return Value::integer(v);
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception&) {
      fail("cannot parse value '" + text + "'");
    }
  }

  Value root_;
  Value* current_ = &root_;
  int lineno_ = 0;
};

inline Value parse(std::istream& in) { return Parser::parse(in); }

inline Value parse(const std::string& text) {
  std::istringstream in(text);
  return Parser::parse(in);
}

inline Value parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open toml file: " + path);
  return Parser::parse(in);
}

}  // namespace audioleak::toml
