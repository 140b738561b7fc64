#include "entropy_engine/simple_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace entropy_engine {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string point_text(const StatePoint& x) {
  std::string s = "(U=" + std::to_string(x.U);
  for (std::size_t i = 0; i < x.V.size(); ++i) s += ", V" + std::to_string(i + 1) + "=" + std::to_string(x.V[i]);
  return s + ")";
}

double inf_norm(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void check_box(const Domain& d) {
  if (!(d.u.lo < d.u.hi)) throw InputError("empty energy interval");
  for (const auto& iv : d.v) {
    if (!(iv.lo < iv.hi)) throw InputError("empty work-coordinate interval");
  }
}

}  // namespace

bool Domain::contains(const StatePoint& x) const { return u.contains(x.U) && contains_work(x.V); }

bool Domain::contains_work(const std::vector<double>& c) const {
  if (c.size() != v.size()) return false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!v[i].contains(c[i])) return false;
  }
  return true;
}

void SimpleSystemModel::require_inside(const StatePoint& x) const {
  if (x.V.size() != n) {
    throw InputError(name + ": expected " + std::to_string(n) + " work coordinates");
  }
  if (!domain.contains(x)) throw NumericError(name + ": " + point_text(x) + " is not inside the open domain");
}

double SimpleSystemModel::sigma(const StatePoint& x) const {
  if (!entropy) throw InputError(name + ": model has no entropy oracle");
  require_inside(x);
  return (*entropy)(x);
}

SimpleSystemModel ideal_gas(Rational moles, Domain domain) {
  if (moles <= 0) throw InputError("mole number must be positive");
  if (domain.v.size() != 1) throw InputError("ideal gas has one work coordinate");
  check_box(domain);
  if (domain.u.lo < 0 || domain.v[0].lo < 0) throw InputError("ideal gas needs U > 0 and V > 0");
  const double n = to_double(moles);
  SimpleSystemModel m;
  m.name = "ideal_gas";
  m.n = 1;
  m.domain = domain;
  m.moles = moles;
  m.pressure = [](const StatePoint& x) { return std::vector<double>{2.0 * x.U / (3.0 * x.V[0])}; };
  m.entropy = [n](const StatePoint& x) { return n * std::log(x.V[0] * std::pow(x.U, 1.5)); };
  const double vlo = domain.v[0].lo;
  if (vlo > 0) m.lipschitz_bound = 2.0 / (3.0 * vlo) + 2.0 * domain.u.hi / (3.0 * vlo * vlo);
  return m;
}

SimpleSystemModel van_der_waals(Rational moles, double a, double b, Domain domain) {
  if (moles <= 0) throw InputError("mole number must be positive");
  if (a < 0 || b < 0) throw InputError("van der Waals constants must be non-negative");
  if (domain.v.size() != 1) throw InputError("van der Waals gas has one work coordinate");
  check_box(domain);
  const double n = to_double(moles);
  const double c = a * n * n;
  const double nb = n * b;
  if (domain.v[0].lo < nb) throw InputError("van der Waals domain needs V > n b");
  if (domain.u.lo + c / domain.v[0].hi < 0) throw InputError("van der Waals domain needs U + a n^2/V > 0");
  SimpleSystemModel m;
  m.name = "van_der_waals";
  m.n = 1;
  m.domain = domain;
  m.moles = moles;
  m.pressure = [c, nb](const StatePoint& x) {
    const double v = x.V[0];
    return std::vector<double>{(2.0 / 3.0) * (x.U + c / v) / (v - nb) - c / (v * v)};
  };
  m.entropy = [n, c, nb](const StatePoint& x) {
    const double v = x.V[0];
    return n * std::log(v - nb) + 1.5 * n * std::log(x.U + c / v);
  };
  const double vlo = domain.v[0].lo;
  if (vlo > nb) {
    const double gap = vlo - nb;
    const double pu = (2.0 / 3.0) / gap;
    const double pv = (2.0 / 3.0) * (c / (vlo * vlo) / gap + (std::abs(domain.u.hi) + c / vlo) / (gap * gap)) +
                      2.0 * c / (vlo * vlo * vlo);
    m.lipschitz_bound = pu + pv;
  }
  return m;
}

SimpleSystemModel crossing_model() {
  SimpleSystemModel m;
  m.name = "crossing";
  m.n = 1;
  m.domain = Domain{{0.0, 3.0}, {{0.0, 3.0}}};
  m.pressure = [](const StatePoint& x) { return std::vector<double>{-std::sqrt(std::abs(x.U - 1.0))}; };
  return m;
}

namespace {

struct Bilinear {
  std::vector<double> u, v;
  std::vector<std::vector<double>> f;

  double operator()(double uu, double vv) const {
    auto cell = [](const std::vector<double>& g, double x) {
      auto it = std::upper_bound(g.begin(), g.end(), x);
      std::size_t i = it == g.begin() ? 0 : static_cast<std::size_t>(it - g.begin()) - 1;
      return std::min(i, g.size() - 2);
    };
    const std::size_t i = cell(u, uu);
    const std::size_t j = cell(v, vv);
    const double s = (uu - u[i]) / (u[i + 1] - u[i]);
    const double t = (vv - v[j]) / (v[j + 1] - v[j]);
    return (1 - s) * (1 - t) * f[i][j] + s * (1 - t) * f[i + 1][j] + (1 - s) * t * f[i][j + 1] +
           s * t * f[i + 1][j + 1];
  }
};

void check_table(const std::vector<double>& u, const std::vector<double>& v,
                 const std::vector<std::vector<double>>& f, const std::string& what) {
  if (f.size() != u.size()) throw InputError(what + " grid has the wrong number of U rows");
  for (const auto& row : f) {
    if (row.size() != v.size()) throw InputError(what + " grid has the wrong number of V columns");
    for (double x : row) {
      if (!std::isfinite(x)) throw InputError(what + " grid has a non-finite entry");
    }
  }
}

}  // namespace

SimpleSystemModel tabulated_model(std::string name, std::vector<double> u_grid,
                                  std::vector<double> v_grid,
                                  std::vector<std::vector<double>> pressure,
                                  std::optional<std::vector<std::vector<double>>> entropy) {
  auto increasing = [](const std::vector<double>& g) {
    return g.size() >= 2 && std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end();
  };
  if (!increasing(u_grid) || !increasing(v_grid)) {
    throw InputError("tabulated grids need at least two strictly increasing points");
  }
  check_table(u_grid, v_grid, pressure, "pressure");
  if (entropy) check_table(u_grid, v_grid, *entropy, "entropy");

  double pu = 0.0;
  double pv = 0.0;
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    for (std::size_t j = 0; j < v_grid.size(); ++j) {
      if (i + 1 < u_grid.size()) {
        pu = std::max(pu, std::abs(pressure[i + 1][j] - pressure[i][j]) / (u_grid[i + 1] - u_grid[i]));
      }
      if (j + 1 < v_grid.size()) {
        pv = std::max(pv, std::abs(pressure[i][j + 1] - pressure[i][j]) / (v_grid[j + 1] - v_grid[j]));
      }
    }
  }

  SimpleSystemModel m;
  m.name = std::move(name);
  m.n = 1;
  m.domain = Domain{{u_grid.front(), u_grid.back()}, {{v_grid.front(), v_grid.back()}}};
  m.lipschitz_bound = (pu + pv) * (1.0 + 1e-9);
  Bilinear p{u_grid, v_grid, std::move(pressure)};
  m.pressure = [p](const StatePoint& x) { return std::vector<double>{p(x.U, x.V[0])}; };
  if (entropy) {
    Bilinear s{u_grid, v_grid, std::move(*entropy)};
    m.entropy = [s](const StatePoint& x) { return s(x.U, x.V[0]); };
  }
  return m;
}

SimpleSystemModel scaled_copy(const SimpleSystemModel& model, Rational lambda) {
  if (lambda <= 0) throw InputError("scale must be positive");
  const double l = to_double(lambda);
  SimpleSystemModel m = model;
  m.name = to_string(lambda) + "*" + model.name;
  m.moles = model.moles * lambda;
  m.domain.u = {model.domain.u.lo * l, model.domain.u.hi * l};
  for (auto& iv : m.domain.v) iv = {iv.lo * l, iv.hi * l};
  auto shrink = [l](const StatePoint& x) {
    StatePoint y{x.U / l, x.V};
    for (auto& c : y.V) c /= l;
    return y;
  };
  auto p = model.pressure;
  m.pressure = [p, shrink](const StatePoint& x) { return p(shrink(x)); };
  if (model.entropy) {
    auto s = *model.entropy;
    m.entropy = [s, shrink, l](const StatePoint& x) { return l * s(shrink(x)); };
  }
  if (model.lipschitz_bound) m.lipschitz_bound = *model.lipschitz_bound / l;
  return m;
}

// ---------------------------------------------------------------------------
// Adiabat integration.

namespace {

struct Trace {
  std::vector<double> waypoint_u;
  std::vector<StatePoint> samples;
  int exit_dir = 0;
};

/// dU/ds along direction d (unit vector in V space).
double slope(const SimpleSystemModel& m, double u, const std::vector<double>& v,
             const std::vector<double>& d) {
  const auto p = m.pressure(StatePoint{u, v});
  if (p.size() != m.n) throw NumericError(m.name + ": pressure has the wrong dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i])) throw NumericError(m.name + ": pressure is not finite at U=" + std::to_string(u));
    s -= p[i] * d[i];
  }
  return s;
}

int outside(const Interval& iv, double u) {
  if (u >= iv.hi) return 1;
  if (u <= iv.lo) return -1;
  return 0;
}

Trace run(const SimpleSystemModel& m, const StatePoint& x,
          const std::vector<std::vector<double>>& path, double h, bool keep) {
  Trace t;
  double u = x.U;
  t.waypoint_u.push_back(u);
  if (keep) t.samples.push_back(x);
  std::vector<double> v = x.V;
  std::vector<double> stage(m.n);
  for (std::size_t w = 1; w < path.size(); ++w) {
    const auto& a = path[w - 1];
    const auto& b = path[w];
    const double len = euclid(a, b);
    if (len == 0.0) {
      t.waypoint_u.push_back(u);
      continue;
    }
    std::vector<double> d(m.n);
    for (std::size_t i = 0; i < m.n; ++i) d[i] = (b[i] - a[i]) / len;
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(len / h - 1e-9)));
    const double dh = len / static_cast<double>(steps);
    auto at = [&](double s) {
      for (std::size_t i = 0; i < m.n; ++i) stage[i] = a[i] + s * d[i];
      return stage;
    };
    for (std::size_t k = 0; k < steps; ++k) {
      const double s0 = dh * static_cast<double>(k);
      auto eval = [&](double s, double uu) {
        if (int o = outside(m.domain.u, uu)) {
          t.exit_dir = o;
          return std::numeric_limits<double>::quiet_NaN();
        }
        return slope(m, uu, at(s), d);
      };
      const double k1 = eval(s0, u);
      if (t.exit_dir) return t;
      const double k2 = eval(s0 + dh / 2, u + dh / 2 * k1);
      if (t.exit_dir) return t;
      const double k3 = eval(s0 + dh / 2, u + dh / 2 * k2);
      if (t.exit_dir) return t;
      const double k4 = eval(s0 + dh, u + dh * k3);
      if (t.exit_dir) return t;
      u += dh / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (int o = outside(m.domain.u, u)) {
        t.exit_dir = o;
        return t;
      }
      if (keep) t.samples.push_back(StatePoint{u, k + 1 == steps ? b : at(s0 + dh)});
    }
    t.waypoint_u.push_back(u);
  }
  return t;
}

std::vector<std::vector<double>> checked_path(const SimpleSystemModel& m, const StatePoint& x,
                                              std::vector<std::vector<double>> path) {
  m.require_inside(x);
  if (path.empty()) path.push_back(x.V);
  if (path.front().size() != m.n || inf_norm(path.front(), x.V) > 1e-12 * (1.0 + inf_norm(x.V, std::vector<double>(m.n, 0.0)))) {
    throw InputError(m.name + ": the path must start at the state's work coordinates");
  }
  path.front() = x.V;
  for (const auto& w : path) {
    if (!m.domain.contains_work(w)) throw InputError(m.name + ": path exits the domain");
  }
  return path;
}

/// Richardson-checked trace; returns the coarse run with its error bound.
Trace trace(const SimpleSystemModel& m, const StatePoint& x,
            const std::vector<std::vector<double>>& path, const IntegratorOptions& o, bool keep,
            double* step_used, double* error) {
  if (!(o.step > 0) || !(o.tolerance > 0)) throw InputError("integrator step and tolerance must be positive");
  double length = 0.0;
  for (std::size_t w = 1; w < path.size(); ++w) length += euclid(path[w - 1], path[w]);
  double h = o.step;
  while (true) {
    Trace coarse = run(m, x, path, h, keep);
    if (length == 0.0) {
      if (step_used) *step_used = h;
      if (error) *error = 0.0;
      return coarse;
    }
    Trace fine = run(m, x, path, h / 2, false);
    double err = 0.0;
    bool agree = coarse.exit_dir == fine.exit_dir && coarse.waypoint_u.size() == fine.waypoint_u.size();
    if (agree) {
      for (std::size_t i = 0; i < coarse.waypoint_u.size(); ++i) {
        const double scale = std::max(1.0, std::abs(fine.waypoint_u[i]));
        err = std::max(err, std::abs(coarse.waypoint_u[i] - fine.waypoint_u[i]) / 15.0 / scale);
      }
    }
    if (agree && err <= o.tolerance * std::max(length, 1e-12)) {
      if (step_used) *step_used = h;
      if (error) *error = err;
      return coarse;
    }
    h /= 2;
    if (h < o.min_step) {
      throw NumericError(m.name + ": step rejected below the minimum step near " + point_text(x));
    }
  }
}

}  // namespace

AdiabatSurface integrate_adiabat(const SimpleSystemModel& model, const StatePoint& x,
                                 const std::vector<std::vector<double>>& path,
                                 const IntegratorOptions& options) {
  const auto p = checked_path(model, x, path);
  AdiabatSurface s;
  s.base = x;
  s.tolerance = options.tolerance;
  Trace t = trace(model, x, p, options, true, &s.step, &s.error_estimate);
  if (t.exit_dir) {
    throw AdiabatExit(model.name + ": adiabat through " + point_text(x) + " leaves the domain through the " +
                          (t.exit_dir > 0 ? "upper" : "lower") + " energy bound",
                      t.exit_dir, t.waypoint_u.size());
  }
  s.samples = std::move(t.samples);
  s.waypoint_u = std::move(t.waypoint_u);
  return s;
}

double adiabat_height(const SimpleSystemModel& model, const StatePoint& x,
                      const std::vector<double>& v, const IntegratorOptions& options) {
  const auto p = checked_path(model, x, {x.V, v});
  Trace t = trace(model, x, p, options, false, nullptr, nullptr);
  if (t.exit_dir) return t.exit_dir > 0 ? kInf : -kInf;
  return t.waypoint_u.back();
}

bool forward_sector_contains(const SimpleSystemModel& model, const StatePoint& x,
                             const StatePoint& y, const IntegratorOptions& options) {
  model.require_inside(x);
  model.require_inside(y);
  if (x.V == y.V) return y.U >= x.U;
  const double h = adiabat_height(model, x, y.V, options);
  if (std::isinf(h)) return h < 0;
  const double slack = 10.0 * options.tolerance * std::max(1.0, euclid(x.V, y.V)) * std::max(1.0, std::abs(h));
  return y.U >= h - slack;
}

const char* to_string(Nesting n) {
  switch (n) {
    case Nesting::equal_sectors: return "equal_sectors";
    case Nesting::x_inside_y: return "X_inside_Y";
    case Nesting::y_inside_x: return "Y_inside_X";
    case Nesting::crossing: return "crossing";
  }
  return "?";
}

namespace {

/// Heights of the adiabat through x at every probe (1-D sweep in both
/// directions; probes must be sorted).
std::vector<double> sweep_heights(const SimpleSystemModel& m, const StatePoint& x,
                                  const std::vector<double>& probes, const IntegratorOptions& o) {
  std::vector<double> out(probes.size(), 0.0);
  const double v0 = x.V[0];
  auto side = [&](bool up) {
    std::vector<std::vector<double>> path{{v0}};
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const std::size_t k = up ? i : probes.size() - 1 - i;
      if (up ? probes[k] > v0 : probes[k] < v0) {
        path.push_back({probes[k]});
        idx.push_back(k);
      } else if (probes[k] == v0) {
        out[k] = x.U;
      }
    }
    if (idx.empty()) return;
    Trace t = trace(m, x, path, o, false, nullptr, nullptr);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (j + 1 < t.waypoint_u.size()) {
        out[idx[j]] = t.waypoint_u[j + 1];
      } else {
        out[idx[j]] = t.exit_dir > 0 ? kInf : -kInf;
      }
    }
  };
  side(true);
  side(false);
  return out;
}

}  // namespace

NestingResult check_nesting(const SimpleSystemModel& model, const StatePoint& x,
                            const StatePoint& y, const std::vector<std::vector<double>>& probes,
                            const NestingOptions& options) {
  if (probes.empty()) throw InputError("nesting needs a non-empty probe grid");
  model.require_inside(x);
  model.require_inside(y);
  std::vector<std::vector<double>> pts = probes;
  pts.push_back(x.V);
  pts.push_back(y.V);
  for (const auto& p : pts) {
    if (!model.domain.contains_work(p)) throw InputError(model.name + ": probe outside the domain");
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::vector<double> hx;
  std::vector<double> hy;
  if (model.n == 1) {
    std::vector<double> flat;
    for (const auto& p : pts) flat.push_back(p[0]);
    hx = sweep_heights(model, x, flat, options.integrator);
    hy = sweep_heights(model, y, flat, options.integrator);
  } else {
    for (const auto& p : pts) {
      hx.push_back(adiabat_height(model, x, p, options.integrator));
      hy.push_back(adiabat_height(model, y, p, options.integrator));
    }
  }

  NestingResult r;
  int first_sign = 2;  // unset
  bool mixed = false;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double a = hx[i];
    const double b = hy[i];
    int sign = 0;
    if (std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0)) continue;  // no domain point separates them
    ++r.probes_used;
    if (std::isinf(a) || std::isinf(b)) {
      sign = a > b ? 1 : -1;
    } else {
      const double gap = a - b;
      r.max_gap = std::max(r.max_gap, std::abs(gap));
      const double scale = std::max({1.0, std::abs(a), std::abs(b)});
      if (std::abs(gap) > options.tolerance * scale) sign = gap > 0 ? 1 : -1;
    }
    if (first_sign == 2) {
      first_sign = sign;
    } else if (sign != first_sign && !mixed) {
      mixed = true;
      r.witness = pts[i];
    }
  }
  if (mixed) {
    r.kind = Nesting::crossing;
  } else if (first_sign == 1) {
    r.kind = Nesting::x_inside_y;
  } else if (first_sign == -1) {
    r.kind = Nesting::y_inside_x;
  } else {
    r.kind = Nesting::equal_sectors;
  }
  return r;
}

ConvexityReport check_convexity(const SimpleSystemModel& model, const StatePoint& x,
                                const StatePoint& y, const std::vector<double>& t_grid) {
  const double sx = model.sigma(x);
  const double sy = model.sigma(y);
  ConvexityReport r;
  for (double t : t_grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw InputError("convex weights must lie in [0, 1]");
    StatePoint z{t * x.U + (1 - t) * y.U, x.V};
    for (std::size_t i = 0; i < z.V.size(); ++i) z.V[i] = t * x.V[i] + (1 - t) * y.V[i];
    ConvexityEntry e;
    e.t = t;
    e.mixed = t * sx + (1 - t) * sy;
    e.combined = model.sigma(z);
    e.ok = e.mixed <= e.combined + 1e-12 * std::max({1.0, std::abs(e.mixed), std::abs(e.combined)});
    if (!e.ok) ++r.violations;
    r.entries.push_back(e);
  }
  return r;
}

CaratheodoryReport check_caratheodory(const SimpleSystemModel& model, const StatePoint& x,
                                      double radius, std::size_t samples, std::uint64_t seed,
                                      const IntegratorOptions& options) {
  model.require_inside(x);
  if (!(radius > 0)) throw InputError("radius must be positive");
  if (!model.domain.u.contains(x.U - radius) || !model.domain.u.contains(x.U + radius)) {
    throw InputError(model.name + ": neighbourhood radius exceeds the domain");
  }
  for (std::size_t i = 0; i < model.n; ++i) {
    if (!model.domain.v[i].contains(x.V[i] - radius) || !model.domain.v[i].contains(x.V[i] + radius)) {
      throw InputError(model.name + ": neighbourhood radius exceeds the domain");
    }
  }
  CaratheodoryReport r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto probe = [&](const StatePoint& z) {
    ++r.samples;
    if (!forward_sector_contains(model, x, z, options)) {
      ++r.unreachable;
      if (!r.unreachable_witness) r.unreachable_witness = z;
    }
  };
  probe(StatePoint{x.U - radius / 2, x.V});
  while (r.samples < std::max<std::size_t>(samples, 1)) {
    StatePoint z = x;
    double norm = 0.0;
    const double du = unit(rng);
    norm += du * du;
    std::vector<double> dv(model.n);
    for (auto& c : dv) {
      c = unit(rng);
      norm += c * c;
    }
    if (norm > 1.0 || norm == 0.0) continue;
    z.U += radius * du;
    for (std::size_t i = 0; i < model.n; ++i) z.V[i] += radius * dv[i];
    probe(z);
  }
  const StatePoint up{x.U + radius / 2, x.V};
  if (forward_sector_contains(model, x, up, options) && !forward_sector_contains(model, up, x, options)) {
    r.strict_successor = up;
  }
  r.ok = r.unreachable > 0 && r.strict_successor.has_value();
  return r;
}

PressureCheck pressure_at(const SimpleSystemModel& model, const StatePoint& x, double fd_scale) {
  model.require_inside(x);
  PressureCheck r;
  r.pressure = model.pressure(x);
  if (!model.entropy) return r;
  auto step = [fd_scale](double c) { return fd_scale * (c != 0.0 ? std::abs(c) : 1.0); };
  auto shifted = [&](int coord, double delta) {
    StatePoint z = x;
    if (coord < 0) {
      z.U += delta;
    } else {
      z.V[static_cast<std::size_t>(coord)] += delta;
    }
    if (!model.domain.contains(z)) {
      throw NumericError(model.name + ": finite-difference stencil leaves the domain at " + point_text(x));
    }
    return (*model.entropy)(z);
  };
  const double hu = step(x.U);
  const double su = (shifted(-1, hu) - shifted(-1, -hu)) / (2 * hu);
  double worst = 0.0;
  for (std::size_t i = 0; i < model.n; ++i) {
    const double hv = step(x.V[i]);
    const int c = static_cast<int>(i);
    const double sv = (shifted(c, hv) - shifted(c, -hv)) / (2 * hv);
    worst = std::max(worst, std::abs(r.pressure[i] - sv / su) / std::max(1.0, std::abs(r.pressure[i])));
  }
  r.residual = worst;
  return r;
}

StatePoint sample_point(const Domain& d, std::mt19937_64& rng) {
  auto draw = [&rng](const Interval& iv) {
    const double margin = 1e-3 * (iv.hi - iv.lo);
    std::uniform_real_distribution<double> u(iv.lo + margin, iv.hi - margin);
    return u(rng);
  };
  StatePoint p;
  p.U = draw(d.u);
  for (const auto& iv : d.v) p.V.push_back(draw(iv));
  return p;
}

SampleReport check_lipschitz(const SimpleSystemModel& model, std::size_t samples,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  SampleReport r;
  while (r.samples < samples) {
    const StatePoint a = sample_point(model.domain, rng);
    StatePoint b = a;
    b.U += 1e-3 * (model.domain.u.hi - model.domain.u.lo) * unit(rng);
    for (std::size_t i = 0; i < model.n; ++i) {
      b.V[i] += 1e-3 * (model.domain.v[i].hi - model.domain.v[i].lo) * unit(rng);
    }
    if (!model.domain.contains(b)) continue;
    const double dist = std::max(std::abs(a.U - b.U), inf_norm(a.V, b.V));
    if (dist == 0.0) continue;
    ++r.samples;
    const double q = inf_norm(model.pressure(a), model.pressure(b)) / dist;
    r.worst = std::max(r.worst, q);
    if (model.lipschitz_bound && q > *model.lipschitz_bound) ++r.violations;
  }
  return r;
}

SampleReport check_domain_convexity(const SimpleSystemModel& model, std::size_t samples,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SampleReport r;
  for (; r.samples < samples; ++r.samples) {
    const StatePoint a = sample_point(model.domain, rng);
    const StatePoint b = sample_point(model.domain, rng);
    StatePoint mid{(a.U + b.U) / 2, a.V};
    for (std::size_t i = 0; i < mid.V.size(); ++i) mid.V[i] = (a.V[i] + b.V[i]) / 2;
    if (!model.domain.contains(mid)) ++r.violations;
  }
  return r;
}

void write_adiabat_csv(std::ostream& out, const AdiabatSurface& surface) {
  out << "U";
  for (std::size_t i = 0; i < surface.base.V.size(); ++i) out << ",V" << (i + 1);
  out << "\n";
  const auto old = out.precision(17);
  for (const auto& p : surface.samples) {
    out << p.U;
    for (double c : p.V) out << "," << c;
    out << "\n";
  }
  out.precision(old);
}

}  // namespace entropy_engine
