#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace entropy_engine::detail {

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    throw InputError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

std::string where(const std::string& ctx, const std::string& key) {
  return ctx.empty() ? key : ctx + "." + key;
}

const json& require(const json& obj, const std::string& key, const std::string& ctx) {
  if (!obj.is_object()) throw InputError(ctx + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(where(ctx, key) + ": missing");
  return *it;
}

std::string get_string(const json& obj, const std::string& key, const std::string& ctx) {
  const auto& v = require(obj, key, ctx);
  if (!v.is_string()) throw InputError(where(ctx, key) + ": expected a string");
  return v.get<std::string>();
}

double get_number(const json& v, const std::string& ctx) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    try {
      return to_double(parse_rational(s));
    } catch (const InputError&) {
    }
  }
  throw InputError(ctx + ": expected a number");
}

double get_number(const json& obj, const std::string& key, const std::string& ctx, double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return get_number(obj.at(key), where(ctx, key));
}

Rational get_rational(const json& v, const std::string& ctx) {
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (!v.is_string()) throw InputError(ctx + ": expected an exact rational string \"p/q\"");
  try {
    return parse_rational(v.get<std::string>());
  } catch (const InputError& e) {
    throw InputError(ctx + ": " + e.what());
  }
}

std::vector<Rational> get_rationals(const json& v, const std::string& ctx) {
  if (!v.is_array()) throw InputError(ctx + ": expected an array");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_rational(v[i], ctx + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> get_numbers(const json& v, const std::string& ctx) {
  if (!v.is_array()) throw InputError(ctx + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], ctx + "[" + std::to_string(i) + "]"));
  return out;
}

json extended(double x) {
  if (std::isinf(x)) return x > 0 ? json("inf") : json("-inf");
  return json(x);
}

}  // namespace entropy_engine::detail
