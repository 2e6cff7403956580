#pragma once
// Minimal TOML reader covering the subset experiment configs use:
// comments, [table] and [[array-of-tables]] headers, dotted keys, basic
// and literal strings, integers (with underscores), floats, booleans, and
// arrays that may span lines. Parse errors carry the line number.
//
// Out of scope: dates, inline tables, and multi-line strings; those fail
// with a clear message rather than misparse.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace srp {

class TomlValue {
 public:
  using Array = std::vector<TomlValue>;
  using Table = std::map<std::string, TomlValue>;

  TomlValue() : v_(Table{}) {}
  explicit TomlValue(std::string s) : v_(std::move(s)) {}
  explicit TomlValue(std::int64_t i) : v_(i) {}
  explicit TomlValue(double d) : v_(d) {}
  explicit TomlValue(bool b) : v_(b) {}
  explicit TomlValue(Array a) : v_(std::move(a)) {}
  explicit TomlValue(Table t) : v_(std::move(t)) {}

  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_float() const { return std::holds_alternative<double>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_array() const { return std::holds_alternative<Array>(v_); }
  bool is_table() const { return std::holds_alternative<Table>(v_); }

  const std::string& as_string() const { return get<std::string>("string"); }
  std::int64_t as_int() const { return get<std::int64_t>("integer"); }
  bool as_bool() const { return get<bool>("boolean"); }
  // Numeric contexts accept integers where a float is expected.
  double as_double() const {
    if (is_int()) return static_cast<double>(std::get<std::int64_t>(v_));
    return get<double>("number");
  }
  const Array& as_array() const { return get<Array>("array"); }
  const Table& as_table() const { return get<Table>("table"); }
  Array& as_array() { return std::get<Array>(v_); }
  Table& as_table() { return std::get<Table>(v_); }

  bool contains(const std::string& key) const {
    return is_table() && as_table().count(key) > 0;
  }
  const TomlValue& at(const std::string& key) const {
    const auto& t = as_table();
    const auto it = t.find(key);
    if (it == t.end()) throw std::out_of_range("missing config key: " + key);
    return it->second;
  }

 private:
  template <class T>
  const T& get(const char* what) const {
    if (!std::holds_alternative<T>(v_))
      throw std::runtime_error(std::string("config value is not a ") + what);
    return std::get<T>(v_);
  }

  std::variant<std::string, std::int64_t, double, bool, Array, Table> v_;
};

namespace toml_detail {

class Parser {
 public:
  Parser(std::string text, std::string origin)
      : text_(std::move(text)), origin_(std::move(origin)) {}

  TomlValue run() {
    TomlValue root;
    TomlValue* current = &root;
    skip_void();
    while (!eof()) {
      if (peek() == '[') {
        current = header(root);
      } else {
        key_value(*current);
      }
      skip_void();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error(origin_ + ":" + std::to_string(line_) + ": " + msg);
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char take() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  // Whitespace and comments within a line.
  void skip_blank() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }
  // Everything insignificant between statements, newlines included.
  void skip_void() {
    for (;;) {
      skip_blank();
      if (!eof() && peek() == '\n') {
        take();
        continue;
      }
      if (!eof() && peek() == '\r') {
        ++pos_;
        continue;
      }
      return;
    }
  }
  void end_of_statement() {
    skip_blank();
    if (eof()) return;
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing content");
    take();
  }

  static bool bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string key_part() {
    skip_blank();
    if (eof()) fail("expected a key");
    if (peek() == '"' || peek() == '\'') return string_value();
    std::string k;
    while (!eof() && bare_char(peek())) k.push_back(take());
    if (k.empty()) fail("expected a key");
    return k;
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> parts{key_part()};
    skip_blank();
    while (!eof() && peek() == '.') {
      take();
      parts.push_back(key_part());
      skip_blank();
    }
    return parts;
  }

  TomlValue& descend(TomlValue& table, const std::vector<std::string>& parts, std::size_t n) {
    TomlValue* node = &table;
    for (std::size_t i = 0; i < n; ++i) {
      auto& t = node->as_table();
      auto [it, inserted] = t.try_emplace(parts[i], TomlValue::Table{});
      TomlValue& next = it->second;
      if (next.is_array()) {
        // Dotted path through an array-of-tables targets its latest entry.
        if (next.as_array().empty() || !next.as_array().back().is_table())
          fail("key '" + parts[i] + "' is not a table");
        node = &next.as_array().back();
      } else {
        if (!next.is_table()) fail("key '" + parts[i] + "' is not a table");
        node = &next;
      }
    }
    return *node;
  }

  TomlValue* header(TomlValue& root) {
    take();  // '['
    const bool array_header = !eof() && peek() == '[';
    if (array_header) take();
    const std::vector<std::string> parts = dotted_key();
    if (eof() || peek() != ']') fail("unterminated table header");
    take();
    if (array_header) {
      if (eof() || peek() != ']') fail("unterminated array-of-tables header");
      take();
    }

    TomlValue& parent = descend(root, parts, parts.size() - 1);
    auto& t = parent.as_table();
    const std::string& name = parts.back();
    std::string path;
    for (const auto& part : parts) path += "." + part;
    TomlValue* target = nullptr;
    if (array_header) {
      auto [it, inserted] = t.try_emplace(name, TomlValue::Array{});
      if (!it->second.is_array()) fail("key '" + name + "' is not an array of tables");
      it->second.as_array().push_back(TomlValue(TomlValue::Table{}));
      target = &it->second.as_array().back();
    } else {
      if (!seen_headers_.insert(path).second) fail("table '" + path.substr(1) + "' defined twice");
      auto [it, inserted] = t.try_emplace(name, TomlValue::Table{});
      if (!it->second.is_table()) fail("table header redefines key '" + name + "'");
      target = &it->second;
    }
    end_of_statement();  // after the checks so errors cite the header's own line
    return target;
  }

  void key_value(TomlValue& table) {
    const std::vector<std::string> parts = dotted_key();
    skip_blank();
    if (eof() || peek() != '=') fail("expected '=' after key");
    take();
    TomlValue value = parse_value();

    TomlValue& owner = descend(table, parts, parts.size() - 1);
    auto [it, inserted] = owner.as_table().try_emplace(parts.back(), std::move(value));
    if (!inserted) fail("duplicate key '" + parts.back() + "'");
    end_of_statement();  // after the checks so errors cite the statement's own line
  }

  TomlValue parse_value() {
    skip_blank();
    if (eof()) fail("expected a value");
    const char c = peek();
    if (c == '"' || c == '\'') return TomlValue(string_value());
    if (c == '[') return array_value();
    if (c == '{') fail("inline tables are not supported");
    if (c == 't' || c == 'f') return bool_value();
    return number_value();
  }

  std::string string_value() {
    const char quote = take();
    std::string s;
    while (!eof() && peek() != quote) {
      char c = take();
      if (c == '\n') fail("newline inside string");
      if (quote == '"' && c == '\\') {
        if (eof()) fail("dangling escape");
        const char e = take();
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case 'r': c = '\r'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      s.push_back(c);
    }
    if (eof()) fail("unterminated string");
    take();  // closing quote
    return s;
  }

  TomlValue bool_value() {
    if (text_.compare(pos_, 4, "true") == 0 && boundary(pos_ + 4)) {
      pos_ += 4;
      return TomlValue(true);
    }
    if (text_.compare(pos_, 5, "false") == 0 && boundary(pos_ + 5)) {
      pos_ += 5;
      return TomlValue(false);
    }
    fail("expected a boolean");
  }
  bool boundary(std::size_t p) const { return p >= text_.size() || !bare_char(text_[p]); }

  TomlValue number_value() {
    std::string raw;
    while (!eof() && (bare_char(peek()) || peek() == '+' || peek() == '.')) {
      const char c = take();
      if (c != '_') raw.push_back(c);  // 1_000_000 style separators
    }
    if (raw.empty()) fail("expected a value");
    const bool floaty = raw.find_first_of(".eE") != std::string::npos &&
                        raw.find_first_of("0123456789") != std::string::npos;
    try {
      std::size_t used = 0;
      if (!floaty) {
        const std::int64_t i = std::stoll(raw, &used);
        if (used == raw.size()) return TomlValue(i);
      }
      const double d = std::stod(raw, &used);
      if (used != raw.size()) fail("malformed number '" + raw + "'");
      return TomlValue(d);
    } catch (const std::logic_error&) {
      fail("malformed number '" + raw + "'");
    }
  }

  TomlValue array_value() {
    take();  // '['
    TomlValue::Array items;
    for (;;) {
      skip_void();
      if (eof()) fail("unterminated array");
      if (peek() == ']') {
        take();
        break;
      }
      items.push_back(parse_value());
      skip_void();
      if (eof()) fail("unterminated array");
      if (peek() == ',') {
        take();
        continue;
      }
      if (peek() != ']') fail("expected ',' or ']' in array");
    }
    return TomlValue(std::move(items));
  }

  std::string text_;
  std::string origin_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> seen_headers_;
};

}  // namespace toml_detail

inline TomlValue parse_toml(const std::string& text, const std::string& origin = "<string>") {
  return toml_detail::Parser(text, origin).run();
}

inline TomlValue parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return toml_detail::Parser(ss.str(), path).run();
}

}  // namespace srp
