#include "entropy_engine/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace entropy_engine {

ThermalJoin make_join(SimpleSystemModel left, SimpleSystemModel right) {
  if (!left.entropy || !right.entropy) throw InputError("thermal join needs entropy oracles on both sides");
  return ThermalJoin{std::move(left), std::move(right)};
}

Interval admissible_split(const ThermalJoin& join, double U) {
  const auto& a = join.left.domain.u;
  const auto& b = join.right.domain.u;
  return Interval{std::max(a.lo, U - b.hi), std::min(a.hi, U - b.lo)};
}

namespace {

constexpr double kGolden = 0.6180339887498949;

double du_entropy(const SimpleSystemModel& m, const StatePoint& x, double fd_scale) {
  const double h = fd_scale * std::max(std::abs(x.U), 1e-300);
  StatePoint lo = x;
  StatePoint hi = x;
  lo.U -= h;
  hi.U += h;
  if (!m.domain.contains(lo) || !m.domain.contains(hi)) {
    throw NumericError(m.name + ": temperature stencil leaves the domain at U=" + std::to_string(x.U));
  }
  return ((*m.entropy)(hi) - (*m.entropy)(lo)) / (2 * h);
}

struct SplitProblem {
  const ThermalJoin& join;
  double U;
  const std::vector<double>& v1;
  const std::vector<double>& v2;
  const SplitOptions& o;

  StatePoint p1(double u1) const { return StatePoint{u1, v1}; }
  StatePoint p2(double u1) const { return StatePoint{U - u1, v2}; }
  double f(double u1) const { return (*join.left.entropy)(p1(u1)) + (*join.right.entropy)(p2(u1)); }
  /// d/dU_1 of the total entropy.
  double g(double u1) const {
    return du_entropy(join.left, p1(u1), o.fd_scale) - du_entropy(join.right, p2(u1), o.fd_scale);
  }
};

double refine(const SplitProblem& p, double lo, double hi) {
  const double width = p.o.tolerance * std::abs(p.U);
  // Golden section down to a coarse bracket.
  double a = lo;
  double b = hi;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = p.f(c);
  double fd = p.f(d);
  const double coarse = std::max(width, 1e-4 * (hi - lo));
  while (b - a > coarse) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = p.f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = p.f(d);
    }
  }
  // Bisection on the sign of the derivative when the bracket straddles a root.
  double ga = 0.0;
  double gb = 0.0;
  try {
    ga = p.g(a);
    gb = p.g(b);
  } catch (const NumericError&) {
    ga = gb = 0.0;
  }
  if (ga > 0 && gb < 0) {
    while (b - a > width) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      (p.g(m) > 0 ? a : b) = m;
    }
    return 0.5 * (a + b);
  }
  while (b - a > width) {
    const double c2 = b - kGolden * (b - a);
    const double d2 = a + kGolden * (b - a);
    if (c2 <= a || d2 >= b) break;
    if (p.f(c2) >= p.f(d2)) {
      b = d2;
    } else {
      a = c2;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

SplitResult thermal_split(const ThermalJoin& join, double U, const std::vector<double>& v1,
                          const std::vector<double>& v2, const SplitOptions& options) {
  if (!join.left.entropy || !join.right.entropy) throw InputError("thermal join needs entropy oracles");
  if (!join.left.domain.contains_work(v1) || !join.right.domain.contains_work(v2)) {
    throw NumericError("work coordinates outside the factor domains");
  }
  const Interval range = admissible_split(join, U);
  if (!(range.lo < range.hi)) {
    throw NumericError("total energy " + std::to_string(U) + " is outside the joint domain");
  }
  SplitProblem p{join, U, v1, v2, options};
  const std::size_t m = std::max<std::size_t>(options.scan_points, 3);
  std::vector<double> xs(m + 2);
  std::vector<double> fs(m + 2, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < m + 2; ++k) {
    xs[k] = range.lo + (range.hi - range.lo) * static_cast<double>(k) / static_cast<double>(m + 1);
  }
  for (std::size_t k = 1; k <= m; ++k) fs[k] = p.f(xs[k]);

  std::vector<double> found;
  for (std::size_t k = 1; k <= m; ++k) {
    if (fs[k] >= fs[k - 1] && fs[k] >= fs[k + 1] && (fs[k] > fs[k - 1] || fs[k] > fs[k + 1] || m == 1)) {
      found.push_back(refine(p, xs[k - 1] + (k == 1 ? 1e-12 * (xs[1] - xs[0]) : 0.0),
                             xs[k + 1] - (k == m ? 1e-12 * (xs[m + 1] - xs[m]) : 0.0)));
    }
  }
  if (found.empty()) throw NumericError("no interior maximiser of the total entropy");

  double best = -std::numeric_limits<double>::infinity();
  for (double u1 : found) best = std::max(best, p.f(u1));
  const double tie = options.tie * std::max(1.0, std::abs(best));
  SplitResult r;
  for (double u1 : found) {
    if (p.f(u1) < best - tie) continue;
    const bool dup = std::any_of(r.maximizers.begin(), r.maximizers.end(), [&](const auto& mx) {
      return std::abs(mx.first.U - u1) <= 1e-6 * std::abs(U);
    });
    if (dup) continue;
    r.maximizers.emplace_back(p.p1(u1), p.p2(u1));
  }
  const double edge = 1e-6 * (range.hi - range.lo);
  for (const auto& mx : r.maximizers) {
    if (mx.first.U - range.lo <= edge || range.hi - mx.first.U <= edge) {
      throw NumericError("the entropy maximiser sits on the boundary of the admissible split");
    }
  }
  r.degenerate = r.maximizers.size() > 1;
  r.x1 = r.maximizers.front().first;
  r.x2 = r.maximizers.front().second;
  r.entropy = p.f(r.x1.U);
  return r;
}

TemperatureValue temperature(const SimpleSystemModel& model, const StatePoint& x, double fd_scale) {
  if (!model.entropy) throw InputError(model.name + ": temperature needs an entropy oracle");
  model.require_inside(x);
  const double d = du_entropy(model, x, fd_scale);
  TemperatureValue t;
  t.step = fd_scale * std::abs(x.U);
  t.T = 1.0 / d;
  if (!(t.T > 0) || !std::isfinite(t.T)) {
    throw NumericError(model.name + ": non-positive temperature at U=" + std::to_string(x.U));
  }
  return t;
}

bool in_thermal_equilibrium(const SimpleSystemModel& m1, const StatePoint& x1,
                            const SimpleSystemModel& m2, const StatePoint& x2, double tolerance) {
  const double t1 = temperature(m1, x1).T;
  const double t2 = temperature(m2, x2).T;
  return std::abs(t1 - t2) <= tolerance * std::max(t1, t2);
}

EnergyFlowReport check_energy_flow(const SimpleSystemModel& m1, const StatePoint& x1,
                                   const SimpleSystemModel& m2, const StatePoint& x2,
                                   const SplitOptions& options) {
  EnergyFlowReport r;
  r.t1 = temperature(m1, x1).T;
  r.t2 = temperature(m2, x2).T;
  const ThermalJoin join = make_join(m1, m2);
  const double U = x1.U + x2.U;
  const auto split = thermal_split(join, U, x1.V, x2.V, options);
  r.du1 = split.x1.U - x1.U;
  r.entropy_gain = split.entropy - (m1.sigma(x1) + m2.sigma(x2));
  if (std::abs(r.t1 - r.t2) <= kEquilibriumTolerance * std::max(r.t1, r.t2)) {
    r.ok = std::abs(r.du1) <= 1e-8 * std::abs(U);
  } else if (r.t1 > r.t2) {
    r.ok = r.du1 < 0;
  } else {
    r.ok = r.du1 > 0;
  }
  return r;
}

ZerothLawReport check_zeroth_law(const std::vector<SimpleSystemModel>& models,
                                 const std::vector<std::array<ThermalState, 3>>& triples,
                                 double tolerance) {
  ZerothLawReport r;
  auto model = [&](std::size_t i) -> const SimpleSystemModel& {
    if (i >= models.size()) throw InputError("zeroth-law triple references an unknown model");
    return models[i];
  };
  for (const auto& t : triples) {
    ++r.triples;
    const auto& [a, b, c] = t;
    const bool ab = in_thermal_equilibrium(model(a.model), a.x, model(b.model), b.x, tolerance);
    const bool bc = in_thermal_equilibrium(model(b.model), b.x, model(c.model), c.x, tolerance);
    if (!ab || !bc) {
      ++r.non_equilibrium;
      continue;
    }
    ++r.premises;
    if (!in_thermal_equilibrium(model(a.model), a.x, model(c.model), c.x, tolerance)) {
      ++r.violations;
      if (!r.witness) {
        r.witness = "triple " + std::to_string(r.triples - 1) + ": X ~T Y and Y ~T Z but not X ~T Z";
      }
    }
  }
  return r;
}

std::optional<StatePoint> isotherm_point(const SimpleSystemModel& model, double T,
                                         const std::vector<double>& v, double fd_scale) {
  if (!(T > 0)) throw InputError("temperature must be positive");
  if (!model.domain.contains_work(v)) throw InputError(model.name + ": work coordinates outside the domain");
  const auto& iv = model.domain.u;
  // Stay clear of the edges so the stencil fits.
  const double margin = 4 * fd_scale * std::max(std::abs(iv.lo), std::abs(iv.hi)) + 1e-9 * (iv.hi - iv.lo);
  const double lo = iv.lo + margin;
  const double hi = iv.hi - margin;
  if (!(lo < hi)) return std::nullopt;
  auto f = [&](double u) { return temperature(model, StatePoint{u, v}, fd_scale).T - T; };
  constexpr int kScan = 256;
  double a = lo;
  double fa = f(a);
  if (fa == 0.0) return StatePoint{a, v};
  for (int k = 1; k <= kScan; ++k) {
    const double b = lo + (hi - lo) * k / kScan;
    const double fb = f(b);
    if (fb == 0.0) return StatePoint{b, v};
    if ((fa < 0) != (fb < 0)) {
      // The difference quotient is noisy near the root; keep the evaluated
      // point whose temperature is closest, since callers re-evaluate it.
      double x = a;
      double y = b;
      double best = std::abs(fa) <= std::abs(fb) ? a : b;
      double best_f = std::min(std::abs(fa), std::abs(fb));
      for (int it = 0; it < 200 && y - x > 1e-15 * std::max(std::abs(x), std::abs(y)); ++it) {
        const double mid = 0.5 * (x + y);
        if (mid <= x || mid >= y) break;
        const double fm = f(mid);
        if (std::abs(fm) < best_f) {
          best = mid;
          best_f = std::abs(fm);
        }
        ((fm < 0) == (fa < 0) ? x : y) = mid;
      }
      return StatePoint{best, v};
    }
    a = b;
    fa = fb;
  }
  return std::nullopt;
}

std::vector<StatePoint> isotherm(const SimpleSystemModel& model, double T,
                                 const std::vector<std::vector<double>>& probes) {
  std::vector<StatePoint> out;
  for (const auto& v : probes) {
    if (auto p = isotherm_point(model, T, v)) out.push_back(*p);
  }
  return out;
}

TransversalityReport check_transversality(const SimpleSystemModel& model, const StatePoint& x,
                                          double T, const std::vector<std::vector<double>>& probes,
                                          const IntegratorOptions& options) {
  model.require_inside(x);
  TransversalityReport r;
  r.T = T;
  for (const auto& z : isotherm(model, T, probes)) {
    ++r.probes;
    const bool xz = forward_sector_contains(model, x, z, options);
    const bool zx = forward_sector_contains(model, z, x, options);
    if (zx && !xz && !r.below) r.below = z;
    if (xz && !zx && !r.above) r.above = z;
    if (r.below && r.above) break;
  }
  r.found = r.below && r.above;
  return r;
}

void write_isotherm_csv(std::ostream& out, const SimpleSystemModel& model,
                        const std::vector<StatePoint>& samples) {
  out << "U";
  for (std::size_t i = 0; i < model.n; ++i) out << ",V" << (i + 1);
  out << ",T\n";
  const auto old = out.precision(17);
  for (const auto& p : samples) {
    out << p.U;
    for (double c : p.V) out << "," << c;
    out << "," << temperature(model, p).T << "\n";
  }
  out.precision(old);
}

}  // namespace entropy_engine
