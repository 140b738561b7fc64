#pragma once

// Shared fixtures: hand-rolled generators and brute-force oracles that do
// not go through the engine's own algorithms.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "entropy_engine/calibration.hpp"
#include "entropy_engine/entropy.hpp"
#include "entropy_engine/relation.hpp"
#include "entropy_engine/state.hpp"

namespace test_support {

namespace ee = entropy_engine;

inline ee::CompoundState unit(const std::string& space, const std::string& state,
                              ee::Rational lambda = ee::Rational(1)) {
  return ee::CompoundState::single(space, state, lambda);
}

inline ee::Rational half() { return ee::Rational(1, 2); }

using Fact = std::pair<ee::CompoundState, ee::CompoundState>;

/// One or two spaces with at most `max_states` states in total, a few
/// random facts between unit states, and sometimes a fact with a split side.
struct RandomRelation {
  std::vector<ee::StateSpaceDecl> spaces;
  std::vector<Fact> facts;
};

inline RandomRelation random_relation(std::uint64_t seed, std::size_t max_states = 6) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  RandomRelation r;
  const std::size_t total = uniform(2, max_states);
  const bool two = total >= 4 && uniform(0, 1) == 1;
  const std::size_t first = two ? total / 2 : total;
  ee::StateSpaceDecl a{"A", {ee::Rational(1)}, {}};
  ee::StateSpaceDecl b{"B", {ee::Rational(1)}, {}};
  for (std::size_t i = 0; i < first; ++i) a.states.push_back("a" + std::to_string(i));
  for (std::size_t i = first; i < total; ++i) b.states.push_back("b" + std::to_string(i - first));
  r.spaces.push_back(a);
  if (two) r.spaces.push_back(b);

  std::vector<std::pair<std::string, std::string>> all;
  for (const auto& s : r.spaces)
    for (const auto& st : s.states) all.emplace_back(s.id, st);
  const std::size_t nfacts = uniform(1, 5);
  for (std::size_t k = 0; k < nfacts; ++k) {
    const auto& x = all[uniform(0, all.size() - 1)];
    const auto& y = all[uniform(0, all.size() - 1)];
    if (uniform(0, 3) == 0) {
      const auto& z = all[uniform(0, all.size() - 1)];
      r.facts.emplace_back(unit(x.first, x.second, half()) + unit(z.first, z.second, half()), unit(y.first, y.second));
    } else {
      r.facts.emplace_back(unit(x.first, x.second), unit(y.first, y.second));
    }
  }
  return r;
}

/// Weighted sum of a per-state entropy over the parts.
inline double weighted(const ee::CompoundState& s, const std::map<std::string, double>& sigma) {
  double t = 0.0;
  for (const auto& p : s.parts()) t += ee::to_double(p.lambda) * sigma.at(p.space + ":" + p.state);
  return t;
}

/// Dyadic entropy instance: states with values k/4, facts taken from the
/// entropy ordering so every fact respects it.
struct EntropyInstance {
  std::vector<ee::StateSpaceDecl> spaces;
  std::map<std::string, double> sigma;  // "space:state" -> value
  std::vector<Fact> facts;
};

inline EntropyInstance random_entropy_instance(std::uint64_t seed, std::size_t states = 4) {
  std::mt19937_64 rng(seed);
  EntropyInstance e;
  ee::StateSpaceDecl d{"G", {}, {}};
  for (std::size_t i = 0; i < states; ++i) {
    const auto id = "s" + std::to_string(i);
    d.states.push_back(id);
    e.sigma["G:" + id] = double(std::uniform_int_distribution<int>(0, 8)(rng)) / 4.0;
  }
  e.spaces.push_back(d);
  for (const auto& x : d.states)
    for (const auto& y : d.states) {
      if (x != y && e.sigma["G:" + x] <= e.sigma["G:" + y] && std::uniform_int_distribution<int>(0, 2)(rng) == 0)
        e.facts.emplace_back(unit("G", x), unit("G", y));
    }
  return e;
}

/// Cheapest walk with at most `max_edges` edges, enumerated explicitly and
/// summed left to right from the source. The empty walk counts for from == to.
inline double brute_force_chain(const ee::Matrix& d, std::size_t from, std::size_t to, std::size_t max_edges) {
  const double inf = std::numeric_limits<double>::infinity();
  double best = from == to ? 0.0 : inf;
  std::function<void(std::size_t, double, std::size_t)> walk = [&](std::size_t at, double cost, std::size_t used) {
    if (used == max_edges) return;
    for (std::size_t v = 0; v < d.size(); ++v) {
      if (d[at][v] == inf) continue;
      const double c = cost + d[at][v];
      if (v == to && c < best) best = c;
      walk(v, c, used + 1);
    }
  };
  walk(from, 0.0, 0);
  return best;
}

/// Random D matrix on n nodes: each off-diagonal entry finite with
/// probability 1/2 and drawn from quarter integers in [-2, 6]; diagonal
/// entries are <= 0 as reflexive facts force.
inline ee::Matrix random_d_matrix(std::mt19937_64& rng, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  ee::Matrix d(n, std::vector<double>(n, inf));
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> q(-8, 24);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) d[i][j] = -double(std::uniform_int_distribution<int>(0, 1)(rng)) / 4.0;
      else if (coin(rng)) d[i][j] = double(q(rng)) / 4.0;
    }
  return d;
}

/// Universal dyadic entropy over several spaces sharing one element: the
/// facts are every pair of unit states ordered by the entropy, so the
/// relation satisfies the comparison hypothesis across all spaces.
struct UniversalInstance {
  std::vector<ee::StateSpaceDecl> spaces;
  std::vector<Fact> facts;
  std::map<std::string, double> sigma;  // "space:state" -> value
};

inline UniversalInstance random_universal_instance(std::uint64_t seed, std::size_t spaces, std::size_t states) {
  std::mt19937_64 rng(seed);
  UniversalInstance u;
  std::uniform_int_distribution<int> val(0, 12);
  for (std::size_t s = 0; s < spaces; ++s) {
    ee::StateSpaceDecl d{"S" + std::to_string(s), {ee::Rational(1)}, {}};
    for (std::size_t i = 0; i < states; ++i) {
      const auto id = "x" + std::to_string(i);
      d.states.push_back(id);
      u.sigma[d.id + ":" + id] = double(val(rng)) / 4.0;
    }
    u.spaces.push_back(d);
  }
  for (const auto& a : u.spaces)
    for (const auto& b : u.spaces)
      for (const auto& x : a.states)
        for (const auto& y : b.states) {
          if (u.sigma[a.id + ":" + x] <= u.sigma[b.id + ":" + y]) u.facts.emplace_back(unit(a.id, x), unit(b.id, y));
        }
  return u;
}

/// Per-space table holding the instance's entropy values.
inline std::map<std::string, ee::EntropyTable> sigma_tables(const UniversalInstance& u) {
  std::map<std::string, ee::EntropyTable> out;
  for (const auto& d : u.spaces) {
    std::map<std::string, double> v;
    for (const auto& s : d.states) v[s] = u.sigma.at(d.id + ":" + s);
    out[d.id] = ee::make_table(d.id, d.states, v);
  }
  return out;
}

}  // namespace test_support
