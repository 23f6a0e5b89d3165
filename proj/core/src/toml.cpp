#include "charentropy/support/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace charentropy {

double TomlDoc::Value::number() const {
  if (!is_number()) throw InputError("TOML value is not a number");
  return std::get<double>(data);
}
const std::string& TomlDoc::Value::string() const {
  if (!is_string()) throw InputError("TOML value is not a string");
  return std::get<std::string>(data);
}
bool TomlDoc::Value::boolean() const {
  if (!is_bool()) throw InputError("TOML value is not a boolean");
  return std::get<bool>(data);
}
const TomlDoc::Array& TomlDoc::Value::array() const {
  if (!is_array()) throw InputError("TOML value is not an array");
  return std::get<Array>(data);
}

namespace {

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;

  bool done() const { return pos >= s.size(); }
  char peek() const { return done() ? '\0' : s[pos]; }

  void skip_ws_and_comments(bool cross_lines) {
    for (;;) {
      while (!done() && (s[pos] == ' ' || s[pos] == '\t' ||
                         (cross_lines && (s[pos] == '\n' || s[pos] == '\r'))))
        ++pos;
      if (!done() && s[pos] == '#') {
        while (!done() && s[pos] != '\n') ++pos;
        continue;
      }
      return;
    }
  }

  TomlDoc::Value parse_value() {
    skip_ws_and_comments(true);
    if (done()) throw InputError("TOML: value expected");
    const char c = peek();
    if (c == '[') {
      ++pos;
      TomlDoc::Array arr;
      skip_ws_and_comments(true);
      if (peek() == ']') {
        ++pos;
        return TomlDoc::Value{arr};
      }
      for (;;) {
        arr.push_back(parse_value());
        skip_ws_and_comments(true);
        if (peek() == ',') {
          ++pos;
          skip_ws_and_comments(true);
          if (peek() == ']') {  // trailing comma
            ++pos;
            break;
          }
          continue;
        }
        if (peek() == ']') {
          ++pos;
          break;
        }
        throw InputError("TOML: ',' or ']' expected in array");
      }
      return TomlDoc::Value{arr};
    }
    if (c == '"' || c == '\'') {
      const char quote = c;
      ++pos;
      std::string out;
      while (!done() && s[pos] != quote) {
        if (s[pos] == '\\' && quote == '"' && pos + 1 < s.size()) {
          ++pos;
          switch (s[pos]) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            default: out += s[pos];
          }
          ++pos;
          continue;
        }
        out += s[pos++];
      }
      if (done()) throw InputError("TOML: unterminated string");
      ++pos;
      return TomlDoc::Value{out};
    }
    // bare token: number or boolean
    std::size_t b = pos;
    while (!done() && s[pos] != ',' && s[pos] != ']' && s[pos] != '\n' &&
           s[pos] != '\r' && s[pos] != '#' && s[pos] != ' ' && s[pos] != '\t')
      ++pos;
    std::string tok = s.substr(b, pos - b);
    if (tok == "true") return TomlDoc::Value{true};
    if (tok == "false") return TomlDoc::Value{false};
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw InputError("TOML: bad number '" + tok + "'");
      return TomlDoc::Value{v};
    } catch (const std::invalid_argument&) {
      throw InputError("TOML: cannot parse value '" + tok + "'");
    }
  }
};

}  // namespace

TomlDoc TomlDoc::parse(const std::string& text) {
  TomlDoc doc;
  Cursor cur{text};
  std::string prefix;
  while (true) {
    cur.skip_ws_and_comments(true);
    if (cur.done()) break;
    if (cur.peek() == '[') {
      ++cur.pos;
      std::size_t b = cur.pos;
      while (!cur.done() && cur.s[cur.pos] != ']') ++cur.pos;
      if (cur.done()) throw InputError("TOML: unterminated table header");
      prefix = cur.s.substr(b, cur.pos - b);
      ++cur.pos;
      continue;
    }
    // key = value
    std::size_t b = cur.pos;
    while (!cur.done() && cur.s[cur.pos] != '=' && cur.s[cur.pos] != '\n') ++cur.pos;
    if (cur.done() || cur.s[cur.pos] != '=')
      throw InputError("TOML: '=' expected after key");
    std::string key = cur.s.substr(b, cur.pos - b);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    ++cur.pos;
    Value v = cur.parse_value();
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    doc.values_[full] = std::move(v);
  }
  return doc;
}

TomlDoc TomlDoc::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const TomlDoc::Value& TomlDoc::at(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InputError("TOML: missing key '" + key + "'");
  return it->second;
}

double TomlDoc::number_or(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second.number();
}

std::string TomlDoc::string_or(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second.string();
}

}  // namespace charentropy
