#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "entropy_engine/errors.hpp"
#include "entropy_engine/rational.hpp"

namespace entropy_engine {

/// (U, V_1 .. V_n).
struct StatePoint {
  double U = 0.0;
  std::vector<double> V;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x > lo && x < hi; }
};

/// Open box in (U, V). Boxes are convex, so only openness is enforced.
struct Domain {
  Interval u;
  std::vector<Interval> v;

  bool contains(const StatePoint& x) const;
  bool contains_work(const std::vector<double>& v_coords) const;
};

/// A simple system: open convex domain, pressure field and an optional
/// entropy oracle.
struct SimpleSystemModel {
  using Pressure = std::function<std::vector<double>(const StatePoint&)>;
  using Entropy = std::function<double(const StatePoint&)>;

  std::string name;
  std::size_t n = 1;
  Domain domain;
  Pressure pressure;
  std::optional<Entropy> entropy;
  Rational moles{1};
  /// Declared bound for sampled difference quotients of the pressure;
  /// nullopt for models that make no claim.
  std::optional<double> lipschitz_bound;

  /// Throws NumericError when the point is not strictly inside the domain.
  void require_inside(const StatePoint& x) const;
  double sigma(const StatePoint& x) const;
};

/// P = 2U/(3V), sigma = n ln(V U^(3/2)).
SimpleSystemModel ideal_gas(Rational moles, Domain domain);
/// S = n ln(V - nb) + 3/2 n ln(U + a n^2 / V).
SimpleSystemModel van_der_waals(Rational moles, double a, double b, Domain domain);
/// P = -sqrt(|U - 1|) on (0,3) x (0,3); adiabats through U = 1 are not unique.
SimpleSystemModel crossing_model();
/// Bilinear interpolation of pressure (and entropy, when given) on a
/// rectangular (U, V) grid, indexed [iU][iV]. n = 1.
SimpleSystemModel tabulated_model(std::string name, std::vector<double> u_grid,
                                  std::vector<double> v_grid,
                                  std::vector<std::vector<double>> pressure,
                                  std::optional<std::vector<std::vector<double>>> entropy = {});
/// P_l(U, V) = P(U/l, V/l), S_l(U, V) = l S(U/l, V/l).
SimpleSystemModel scaled_copy(const SimpleSystemModel& model, Rational lambda);

struct IntegratorOptions {
  double step = 1e-3;
  /// Richardson error bound per unit path length.
  double tolerance = 1e-8;
  double min_step = 1e-7;
};

struct AdiabatSurface {
  StatePoint base;
  std::vector<StatePoint> samples;
  /// U at each waypoint of the path, first entry = base.U.
  std::vector<double> waypoint_u;
  double step = 0.0;
  double tolerance = 0.0;
  double error_estimate = 0.0;
};

/// U(V) along the piecewise linear path with dU/dV_j = -P_j, fixed-step
/// RK4, step halved until the Richardson estimate meets the tolerance.
/// The first waypoint must equal X.V; an empty path is treated as {X.V}.
AdiabatSurface integrate_adiabat(const SimpleSystemModel& model, const StatePoint& x,
                                 const std::vector<std::vector<double>>& path,
                                 const IntegratorOptions& options = {});

/// Raised when the adiabat leaves the energy range before the path ends.
class AdiabatExit : public NumericError {
 public:
  AdiabatExit(const std::string& what, int dir, std::size_t reached)
      : NumericError(what), direction(dir), waypoints_reached(reached) {}
  /// +1 through the upper energy bound, -1 through the lower one.
  int direction;
  std::size_t waypoints_reached;
};

/// Height of the adiabat through X at work coordinates v: +inf when it
/// leaves through the top of the domain first, -inf through the bottom.
double adiabat_height(const SimpleSystemModel& model, const StatePoint& x,
                      const std::vector<double>& v, const IntegratorOptions& options = {});

/// Y lies on or above the adiabat through X at V_Y.
bool forward_sector_contains(const SimpleSystemModel& model, const StatePoint& x,
                             const StatePoint& y, const IntegratorOptions& options = {});

enum class Nesting { equal_sectors, x_inside_y, y_inside_x, crossing };
const char* to_string(Nesting n);

struct NestingOptions {
  IntegratorOptions integrator{1e-2, 1e-6, 1e-7};
  /// Relative height difference below which two adiabats coincide.
  double tolerance = 1e-7;
};

struct NestingResult {
  Nesting kind = Nesting::equal_sectors;
  std::size_t probes_used = 0;
  /// Largest |h_X - h_Y| seen and, for crossings, a probe where the
  /// ordering changes.
  double max_gap = 0.0;
  std::optional<std::vector<double>> witness;
};

/// Compares the adiabats through X and Y on the probe work coordinates (plus
/// V_X and V_Y). x_inside_y means A_X is strictly inside A_Y.
NestingResult check_nesting(const SimpleSystemModel& model, const StatePoint& x,
                            const StatePoint& y, const std::vector<std::vector<double>>& probes,
                            const NestingOptions& options = {});

struct ConvexityEntry {
  double t = 0.0;
  double mixed = 0.0;     // t S(X) + (1 - t) S(Y)
  double combined = 0.0;  // S(tX + (1 - t)Y)
  bool ok = true;
};

struct ConvexityReport {
  std::vector<ConvexityEntry> entries;
  std::size_t violations = 0;
};

ConvexityReport check_convexity(const SimpleSystemModel& model, const StatePoint& x,
                                const StatePoint& y, const std::vector<double>& t_grid);

struct CaratheodoryReport {
  std::size_t samples = 0;
  std::size_t unreachable = 0;
  std::optional<StatePoint> unreachable_witness;
  /// A state strictly above X at the same work coordinates.
  std::optional<StatePoint> strict_successor;
  bool ok = false;
};

/// Samples the ball of the given radius around X (the first probe is
/// straight below X). Throws InputError when the ball leaves the domain.
CaratheodoryReport check_caratheodory(const SimpleSystemModel& model, const StatePoint& x,
                                      double radius, std::size_t samples, std::uint64_t seed,
                                      const IntegratorOptions& options = {});

struct PressureCheck {
  std::vector<double> pressure;
  /// max_i |P_i - (dS/dV_i)/(dS/dU)| / max(1, |P_i|) when an oracle exists.
  std::optional<double> residual;
};

PressureCheck pressure_at(const SimpleSystemModel& model, const StatePoint& x,
                          double fd_scale = 1e-5);

struct SampleReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst = 0.0;
};

/// Largest sampled difference quotient of the pressure vs the declared bound.
SampleReport check_lipschitz(const SimpleSystemModel& model, std::size_t samples,
                             std::uint64_t seed);
/// Midpoints of sampled domain pairs stay inside the domain.
SampleReport check_domain_convexity(const SimpleSystemModel& model, std::size_t samples,
                                    std::uint64_t seed);

/// Uniform point strictly inside the domain.
StatePoint sample_point(const Domain& d, std::mt19937_64& rng);

/// "U,V1,...,Vn" rows.
void write_adiabat_csv(std::ostream& out, const AdiabatSurface& surface);

}  // namespace entropy_engine
