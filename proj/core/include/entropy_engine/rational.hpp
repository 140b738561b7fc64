#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

#include "entropy_engine/errors.hpp"

// boost::rational<long> == int recurses forever under C++20 rewritten
// comparison candidates (boost 1.74). Exact non-template overloads win
// overload resolution and are found by ADL from any namespace.
namespace boost {
inline bool operator==(const rational<std::int64_t>& a, int b) { return a == rational<std::int64_t>(b); }
inline bool operator==(int a, const rational<std::int64_t>& b) { return rational<std::int64_t>(a) == b; }
inline bool operator!=(const rational<std::int64_t>& a, int b) { return !(a == b); }
inline bool operator!=(int a, const rational<std::int64_t>& b) { return !(a == b); }
}  // namespace boost

namespace entropy_engine {

/// Exact scale factor. All lambdas in compound states live on finite dyadic
/// grids, so 64-bit numerators and denominators never come close to overflow.
using Rational = boost::rational<std::int64_t>;

/// Parses "p/q", "p" or "-p/q". Throws InputError on malformed text or a
/// zero denominator. Floats ("0.5") are rejected: the wire format is exact.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" (or "p" when q == 1).
std::string to_string(const Rational& r);

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

/// Dyadic grid {k / denominator : k = 1 .. max_numerator}.
std::vector<Rational> dyadic_grid(std::int64_t denominator, std::int64_t max_numerator);

}  // namespace entropy_engine
