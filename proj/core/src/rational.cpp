#include "entropy_engine/rational.hpp"

#include <charconv>
#include <vector>

namespace entropy_engine {

namespace {

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw InputError("malformed rational '" + std::string(whole) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto t = trim(text);
  const auto slash = t.find('/');
  if (slash == std::string_view::npos) {
    return Rational(parse_int(t, text));
  }
  const auto num = parse_int(trim(t.substr(0, slash)), text);
  const auto den = parse_int(trim(t.substr(slash + 1)), text);
  if (den == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
  return Rational(num, den);
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::vector<Rational> dyadic_grid(std::int64_t denominator, std::int64_t max_numerator) {
  if (denominator <= 0 || max_numerator <= 0) {
    throw InputError("dyadic grid needs a positive denominator and range");
  }
  std::vector<Rational> grid;
  grid.reserve(static_cast<std::size_t>(max_numerator));
  for (std::int64_t k = 1; k <= max_numerator; ++k) grid.emplace_back(k, denominator);
  return grid;
}

}  // namespace entropy_engine
