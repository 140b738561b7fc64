#include "entropy_engine/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace entropy_engine {

double EntropyTable::value(const std::string& state) const {
  auto it = values.find(state);
  if (it == values.end()) {
    throw InputError("entropy table of '" + space + "' has no state '" + state + "'");
  }
  return it->second;
}

EntropyTable make_table(const std::string& space, const std::vector<std::string>& states,
                        const std::map<std::string, double>& values, double resolution) {
  EntropyTable t;
  t.space = space;
  t.states = states;
  for (const auto& s : states) {
    auto it = values.find(s);
    if (it == values.end()) throw InputError("no entropy value for '" + space + ":" + s + "'");
    t.values[s] = it->second;
  }
  if (resolution > 0) {
    // Only used as a tolerance; keep an exact dyadic upper bound.
    std::int64_t den = 1;
    while (den < (std::int64_t{1} << 40) && 1.0 / static_cast<double>(den) > resolution) den *= 2;
    t.lambda_resolution = Rational(1, den);
  }
  return t;
}

bool reference_mix_precedes(const AccessibilityQuery& rel, const std::string& space,
                            const std::string& x0, const std::string& x1, const Rational& mu,
                            const std::string& x, const Rational& t) {
  const auto [lhs, rhs] = normalize_comparison({{t - mu, space, x0}, {mu, space, x1}}, {{t, space, x}});
  return rel.accessible(lhs, rhs);
}

namespace {

bool mix_representable(const AccessibilityQuery& rel, const std::string& space,
                       const std::string& x0, const std::string& x1, const Rational& mu,
                       const std::string& x, const Rational& t) {
  const auto [lhs, rhs] = normalize_comparison({{t - mu, space, x0}, {mu, space, x1}}, {{t, space, x}});
  return !lhs.empty() && !rhs.empty() && rel.representable(lhs) && rel.representable(rhs);
}

bool mix_follows(const AccessibilityQuery& rel, const std::string& space, const std::string& x0,
                 const std::string& x1, const Rational& mu, const std::string& x,
                 const Rational& t) {
  const auto [lhs, rhs] = normalize_comparison({{t - mu, space, x0}, {mu, space, x1}}, {{t, space, x}});
  return rel.accessible(rhs, lhs);
}

/// Mixing ratios a finite grid can express for unit total scale.
std::vector<Rational> grid_candidates(const std::vector<Rational>& grid) {
  const std::set<Rational> g(grid.begin(), grid.end());
  std::set<Rational> c{Rational(0), Rational(1)};
  for (const auto& l : grid) {
    if (l < 1 && g.count(1 - l)) c.insert(l);
    if (l > 1 && g.count(l - 1)) c.insert(l);
    if (g.count(1 + l)) c.insert(-l);
  }
  return {c.begin(), c.end()};
}

Rational max_gap(const std::vector<Rational>& sorted) {
  Rational gap(0);
  for (std::size_t i = 1; i < sorted.size(); ++i) gap = std::max(gap, sorted[i] - sorted[i - 1]);
  return gap;
}

[[noreturn]] void throw_incomparable(const std::string& space, const std::string& x0,
                                     const std::string& x1, const Rational& mu,
                                     const std::string& x, const Rational& t) {
  auto [lhs, rhs] = normalize_comparison({{t - mu, space, x0}, {mu, space, x1}}, {{t, space, x}});
  throw ComparabilityFailure("comparison fails in the two-fold scaled product: " + to_string(lhs) +
                                 " vs " + to_string(rhs),
                             lhs, rhs);
}

Rational search_finite(const AccessibilityQuery& rel, const std::string& space,
                       const std::string& x0, const std::string& x1, const std::string& x,
                       const Rational& t, const std::vector<Rational>& candidates) {
  std::optional<Rational> best;
  for (const auto& lambda : candidates) {
    const Rational mu = t * lambda;
    if (!mix_representable(rel, space, x0, x1, mu, x, t)) continue;
    if (reference_mix_precedes(rel, space, x0, x1, mu, x, t)) {
      best = lambda;
    } else if (!mix_follows(rel, space, x0, x1, mu, x, t)) {
      throw_incomparable(space, x0, x1, mu, x, t);
    }
  }
  if (!best) {
    throw QueryError("state '" + x + "' lies below every representable reference mixture");
  }
  return t * *best;
}

Rational search_lattice(const AccessibilityQuery& rel, const std::string& space,
                        const std::string& x0, const std::string& x1, const std::string& x,
                        const Rational& t, const Rational& resolution) {
  constexpr std::int64_t kLimit = std::int64_t{1} << 40;
  auto pred = [&](std::int64_t k) {
    return reference_mix_precedes(rel, space, x0, x1, t * resolution * k, x, t);
  };
  std::int64_t lo = 0;  // pred(lo) true
  std::int64_t hi = 0;  // pred(hi) false
  if (pred(0)) {
    std::int64_t step = 1;
    while (pred(lo + step)) {
      lo += step;
      step *= 2;
      if (step > kLimit) throw NumericError("entropy search unbounded above for '" + x + "'");
    }
    hi = lo + step;
  } else {
    std::int64_t step = 1;
    while (!pred(hi - step)) {
      hi -= step;
      step *= 2;
      if (step > kLimit) throw NumericError("entropy search unbounded below for '" + x + "'");
    }
    lo = hi - step;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (pred(mid) ? lo : hi) = mid;
  }
  const Rational above = t * resolution * hi;
  if (!mix_follows(rel, space, x0, x1, above, x, t)) throw_incomparable(space, x0, x1, above, x, t);
  return t * resolution * lo;
}

Rational search(const AccessibilityQuery& rel, const std::string& space, const std::string& x0,
                const std::string& x1, const std::string& x, const Rational& t,
                const EntropyOptions& options) {
  if (auto grid = rel.scale_grid()) {
    return search_finite(rel, space, x0, x1, x, t, grid_candidates(*grid));
  }
  if (options.resolution <= 0) throw InputError("entropy resolution must be positive");
  return search_lattice(rel, space, x0, x1, x, t, options.resolution);
}

}  // namespace

EntropyTable construct_entropy(const AccessibilityQuery& rel, const std::string& space,
                               const std::string& x0, const std::string& x1,
                               const EntropyOptions& options) {
  const auto& cat = rel.catalog();
  cat.state_index(space, x0);
  cat.state_index(space, x1);

  EntropyTable table;
  table.space = space;
  table.states = cat.space(space).states;
  table.ref_low = x0;
  table.ref_high = x1;

  const auto a0 = CompoundState::single(space, x0);
  const auto a1 = CompoundState::single(space, x1);
  const bool strict = rel.accessible(a0, a1) && !rel.accessible(a1, a0);
  if (!strict) {
    if (!options.allow_constant) {
      throw InputError("no reference pair: " + x0 + " does not strictly precede " + x1);
    }
    table.constant = true;
    for (const auto& s : table.states) {
      table.values[s] = 0.0;
      table.exact[s] = Rational(0);
    }
    return table;
  }

  if (auto grid = rel.scale_grid()) {
    table.lambda_resolution = max_gap(grid_candidates(*grid));
  } else {
    table.lambda_resolution = options.resolution;
  }
  for (const auto& s : table.states) {
    const Rational v = search(rel, space, x0, x1, s, Rational(1), options);
    table.exact[s] = v;
    table.values[s] = to_double(v);
  }
  return table;
}

Rational scaled_entropy(const AccessibilityQuery& rel, const EntropyTable& table,
                        const std::string& state, const Rational& t,
                        const EntropyOptions& options) {
  if (t <= 0) throw InputError("scale must be positive");
  return search(rel, table.space, table.ref_low, table.ref_high, state, t, options);
}

ExtensivityReport check_extensivity(const AccessibilityQuery& rel, const EntropyTable& table,
                                    const std::vector<Rational>& scales,
                                    const EntropyOptions& options) {
  ExtensivityReport r;
  for (const auto& t : scales) {
    for (const auto& s : table.states) {
      auto it = table.exact.find(s);
      if (it == table.exact.end()) throw InputError("extensivity needs an exact table");
      Rational scaled;
      try {
        scaled = scaled_entropy(rel, table, s, t, options);
      } catch (const QueryError&) {
        continue;  // no representable mixture for this scaled copy
      }
      ++r.checked;
      if (scaled != t * it->second) {
        ++r.violations;
        if (!r.witness) {
          r.witness = "S(" + to_string(t) + "*" + s + ") = " + to_string(scaled) + " but " +
                      to_string(t) + "*S = " + to_string(t * it->second);
        }
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

const char* to_string(PrincipleCheck::Kind k) {
  switch (k) {
    case PrincipleCheck::Kind::monotone: return "monotone";
    case PrincipleCheck::Kind::equivalence: return "equivalence";
    case PrincipleCheck::Kind::strict: return "strict";
  }
  return "?";
}

double compound_entropy(const CompoundState& s, const std::map<std::string, EntropyTable>& tables,
                        const std::map<std::string, double>& multipliers) {
  double total = 0.0;
  for (const auto& p : s.parts()) {
    auto t = tables.find(p.space);
    if (t == tables.end()) throw InputError("no entropy table for space '" + p.space + "'");
    auto m = multipliers.find(p.space);
    const double a = m == multipliers.end() ? 1.0 : m->second;
    total += to_double(p.lambda) * a * t->second.value(p.state);
  }
  return total;
}

namespace {

double side_tolerance(const CompoundState& s, const std::map<std::string, EntropyTable>& tables,
                      const std::map<std::string, double>& multipliers) {
  double tol = 0.0;
  for (const auto& p : s.parts()) {
    const auto& t = tables.at(p.space);
    auto m = multipliers.find(p.space);
    const double a = m == multipliers.end() ? 1.0 : m->second;
    const double res = std::max(to_double(t.lambda_resolution), 1e-9);
    tol += to_double(p.lambda) * std::abs(a) * res;
  }
  return tol;
}

bool scales_match(const CompoundState& a, const CompoundState& b) {
  std::map<std::string, Rational> totals;
  for (const auto& p : a.parts()) totals[p.space] += p.lambda;
  for (const auto& p : b.parts()) totals[p.space] -= p.lambda;
  return std::all_of(totals.begin(), totals.end(), [](const auto& kv) { return kv.second == 0; });
}

}  // namespace

PrincipleReport verify_entropy_principle(const AccessibilityQuery& rel,
                                         const std::map<std::string, EntropyTable>& tables,
                                         const std::map<std::string, double>& multipliers,
                                         const std::vector<std::pair<CompoundState, CompoundState>>& pairs) {
  PrincipleReport report;
  for (const auto& sp : rel.catalog().spaces()) {
    if (!tables.count(sp.id)) throw InputError("no entropy table for space '" + sp.id + "'");
  }
  std::set<std::pair<CompoundState, CompoundState>> seen_equivalences;
  for (const auto& [a, b] : pairs) {
    if (!scales_match(a, b)) {
      ++report.skipped;
      continue;
    }
    if (!rel.accessible(a, b)) continue;
    PrincipleCheck c;
    c.lhs = a;
    c.rhs = b;
    c.entropy_lhs = compound_entropy(a, tables, multipliers);
    c.entropy_rhs = compound_entropy(b, tables, multipliers);
    c.tolerance = std::max(side_tolerance(a, tables, multipliers),
                           side_tolerance(b, tables, multipliers));
    if (rel.accessible(b, a)) {
      auto key = std::minmax(a, b);
      if (!seen_equivalences.insert({key.first, key.second}).second) continue;
      c.kind = PrincipleCheck::Kind::equivalence;
      c.margin = c.tolerance - std::abs(c.entropy_lhs - c.entropy_rhs);
      c.ok = c.margin >= 0.0;
    } else {
      c.kind = PrincipleCheck::Kind::strict;
      c.margin = c.entropy_rhs + c.tolerance - c.entropy_lhs;
      c.ok = c.margin > 0.0;
    }
    if (!c.ok) ++report.violations;
    report.checks.push_back(std::move(c));
  }
  return report;
}

PrincipleReport verify_entropy_principle(const AccessibilityRelation& rel,
                                         const std::map<std::string, EntropyTable>& tables,
                                         const std::map<std::string, double>& multipliers) {
  return verify_entropy_principle(static_cast<const AccessibilityQuery&>(rel), tables, multipliers,
                                  rel.facts());
}

AffineFit fit_affine(const EntropyTable& source, const EntropyTable& target) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : source.states) {
    auto t = target.values.find(s);
    if (t == target.values.end()) continue;
    pts.emplace_back(source.value(s), t->second);
  }
  AffineFit fit;
  fit.points = pts.size();
  if (pts.empty()) throw InputError("tables share no states");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  const double spread = std::max(1.0, std::abs(mx));
  if (source.constant || sxx <= 1e-24 * spread * spread * static_cast<double>(pts.size())) {
    fit.degenerate = true;
    return fit;
  }
  fit.a = sxy / sxx;
  fit.b = my - fit.a * mx;
  for (const auto& [x, y] : pts) {
    fit.max_residual = std::max(fit.max_residual, std::abs(y - (fit.a * x + fit.b)));
  }
  return fit;
}

// ---------------------------------------------------------------------------

Calibrators find_calibrators(const AccessibilityQuery& rel, const std::string& space1,
                             const std::string& space2) {
  const auto& cat = rel.catalog();
  const auto& s1 = cat.space(space1).states;
  const auto& s2 = cat.space(space2).states;

  auto strict_pairs = [&](const std::string& space, const std::vector<std::string>& states) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& a : states) {
      for (const auto& b : states) {
        const auto xa = CompoundState::single(space, a);
        const auto xb = CompoundState::single(space, b);
        if (rel.accessible(xa, xb) && !rel.accessible(xb, xa)) out.emplace_back(a, b);
      }
    }
    return out;
  };
  const auto p1 = strict_pairs(space1, s1);
  const auto p2 = space1 == space2 ? p1 : strict_pairs(space2, s2);

  for (const auto& [x0, x1] : p1) {
    for (const auto& [y0, y1] : p2) {
      const auto lhs = CompoundState::single(space1, x0) + CompoundState::single(space2, y1);
      const auto rhs = CompoundState::single(space1, x1) + CompoundState::single(space2, y0);
      if (!rel.representable(lhs) || !rel.representable(rhs)) continue;
      if (rel.accessible(lhs, rhs) && rel.accessible(rhs, lhs)) return {x0, x1, y0, y1};
    }
  }
  throw QueryError("no calibrators between '" + space1 + "' and '" + space2 +
                   "' in the generated universe");
}

CalibrationResult calibrate_multiplicative(const std::vector<EntropyTable>& tables,
                                           const std::vector<CalibrationLink>& links) {
  if (tables.empty()) throw InputError("no entropy tables to calibrate");
  std::map<std::string, const EntropyTable*> by_space;
  for (const auto& t : tables) by_space[t.space] = &t;
  auto table = [&](const std::string& id) -> const EntropyTable& {
    auto it = by_space.find(id);
    if (it == by_space.end()) throw InputError("calibration link references unknown table '" + id + "'");
    return *it->second;
  };
  auto gaps = [&](const CalibrationLink& l) {
    const double d1 = table(l.space1).value(l.calibrators.x1) - table(l.space1).value(l.calibrators.x0);
    const double d2 = table(l.space2).value(l.calibrators.y1) - table(l.space2).value(l.calibrators.y0);
    if (d1 == 0.0 || d2 == 0.0) {
      throw NumericError("degenerate calibrator between '" + l.space1 + "' and '" + l.space2 + "'");
    }
    return std::make_pair(d1, d2);
  };

  CalibrationResult result;
  result.a[tables.front().space] = 1.0;
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& l : links) {
      const bool known1 = result.a.count(l.space1) != 0;
      const bool known2 = result.a.count(l.space2) != 0;
      if (known1 == known2) continue;
      const auto [d1, d2] = gaps(l);
      if (known1) {
        result.a[l.space2] = result.a[l.space1] * d1 / d2;
      } else {
        result.a[l.space1] = result.a[l.space2] * d2 / d1;
      }
      progress = true;
    }
  }
  for (const auto& t : tables) {
    auto it = result.a.find(t.space);
    if (it == result.a.end()) throw InputError("no calibration path to '" + t.space + "'");
    if (!(it->second > 0.0)) {
      throw NumericError("calibrated multiplier for '" + t.space + "' is not positive");
    }
  }
  for (const auto& l : links) {
    const auto& c = l.calibrators;
    const double a1 = result.a.at(l.space1);
    const double a2 = result.a.at(l.space2);
    const double lhs = a1 * table(l.space1).value(c.x0) + a2 * table(l.space2).value(c.y1);
    const double rhs = a1 * table(l.space1).value(c.x1) + a2 * table(l.space2).value(c.y0);
    result.residual = std::max(result.residual, std::abs(lhs - rhs));
  }
  return result;
}

}  // namespace entropy_engine
