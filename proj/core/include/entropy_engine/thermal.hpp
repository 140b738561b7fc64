#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entropy_engine/simple_system.hpp"

namespace entropy_engine {

/// Two simple systems coupled so that only the total energy is shared.
/// Both need entropy oracles.
struct ThermalJoin {
  SimpleSystemModel left;
  SimpleSystemModel right;
};

ThermalJoin make_join(SimpleSystemModel left, SimpleSystemModel right);

/// Open interval of admissible U_1 for total energy U.
Interval admissible_split(const ThermalJoin& join, double U);

struct SplitOptions {
  /// Width of the final bracket relative to U.
  double tolerance = 1e-10;
  /// Coarse scan points used to locate local maxima.
  std::size_t scan_points = 64;
  /// Per-side finite-difference step relative to U_i.
  double fd_scale = 1e-6;
  /// Relative entropy difference under which two maxima tie.
  double tie = 1e-12;
};

struct SplitResult {
  StatePoint x1;
  StatePoint x2;
  double entropy = 0.0;
  /// Every maximiser found; more than one means a degenerate split.
  std::vector<std::pair<StatePoint, StatePoint>> maximizers;
  bool degenerate = false;
};

/// Energy partition maximising S_1 + S_2. Throws NumericError when U is
/// outside the joint range or the best split sits on the boundary.
SplitResult thermal_split(const ThermalJoin& join, double U, const std::vector<double>& v1,
                          const std::vector<double>& v2, const SplitOptions& options = {});

struct TemperatureValue {
  double T = 0.0;
  double step = 0.0;
};

/// 1 / (dS/dU) by central differences with h = fd_scale * |U|.
TemperatureValue temperature(const SimpleSystemModel& model, const StatePoint& x,
                             double fd_scale = 1e-6);

constexpr double kEquilibriumTolerance = 1e-9;

/// |T_1 - T_2| <= tol * max(T_1, T_2).
bool in_thermal_equilibrium(const SimpleSystemModel& m1, const StatePoint& x1,
                            const SimpleSystemModel& m2, const StatePoint& x2,
                            double tolerance = kEquilibriumTolerance);

struct EnergyFlowReport {
  double t1 = 0.0;
  double t2 = 0.0;
  /// Final minus initial energy of the first system.
  double du1 = 0.0;
  double entropy_gain = 0.0;
  bool ok = true;
};

EnergyFlowReport check_energy_flow(const SimpleSystemModel& m1, const StatePoint& x1,
                                   const SimpleSystemModel& m2, const StatePoint& x2,
                                   const SplitOptions& options = {});

struct ThermalState {
  std::size_t model = 0;
  StatePoint x;
};

struct ZerothLawReport {
  std::size_t triples = 0;
  /// Triples with X ~T Y and Y ~T Z.
  std::size_t premises = 0;
  std::size_t non_equilibrium = 0;
  std::size_t violations = 0;
  std::optional<std::string> witness;
};

ZerothLawReport check_zeroth_law(const std::vector<SimpleSystemModel>& models,
                                 const std::vector<std::array<ThermalState, 3>>& triples,
                                 double tolerance = kEquilibriumTolerance);

/// State with work coordinates v at temperature T (solves T(U, v) = T by
/// bracketing and bisection); nullopt when T is out of the model's range.
std::optional<StatePoint> isotherm_point(const SimpleSystemModel& model, double T,
                                         const std::vector<double>& v, double fd_scale = 1e-6);

/// isotherm_point at every probe, skipping the ones out of range.
std::vector<StatePoint> isotherm(const SimpleSystemModel& model, double T,
                                 const std::vector<std::vector<double>>& probes);

struct TransversalityReport {
  double T = 0.0;
  std::size_t probes = 0;
  /// Z0 << X << Z1 on the same isotherm.
  std::optional<StatePoint> below;
  std::optional<StatePoint> above;
  bool found = false;
};

TransversalityReport check_transversality(const SimpleSystemModel& model, const StatePoint& x,
                                          double T, const std::vector<std::vector<double>>& probes,
                                          const IntegratorOptions& options = {});

/// "U,V1,...,Vn,T" rows.
void write_isotherm_csv(std::ostream& out, const SimpleSystemModel& model,
                        const std::vector<StatePoint>& samples);

}  // namespace entropy_engine
