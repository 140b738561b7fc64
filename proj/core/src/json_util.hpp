#pragma once

// Private helpers around nlohmann::json; not installed.

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "entropy_engine/errors.hpp"
#include "entropy_engine/rational.hpp"

namespace entropy_engine::detail {

using json = nlohmann::json;

/// Parses text, mapping parse errors to InputError "source:line:col: ...".
json parse_json(const std::string& text, const std::string& source);

/// Reads and parses a file.
json load_json_file(const std::string& path);

std::string where(const std::string& ctx, const std::string& key);

const json& require(const json& obj, const std::string& key, const std::string& ctx);
std::string get_string(const json& obj, const std::string& key, const std::string& ctx);
double get_number(const json& v, const std::string& ctx);
double get_number(const json& obj, const std::string& key, const std::string& ctx, double fallback);
Rational get_rational(const json& v, const std::string& ctx);
std::vector<Rational> get_rationals(const json& v, const std::string& ctx);
std::vector<double> get_numbers(const json& v, const std::string& ctx);

/// +inf -> "inf", -inf -> "-inf", finite -> number.
json extended(double x);

}  // namespace entropy_engine::detail
