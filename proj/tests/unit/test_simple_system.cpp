#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "entropy_engine/simple_system.hpp"

namespace ee = entropy_engine;

namespace {

ee::Domain box(double ulo, double uhi, double vlo, double vhi) { return ee::Domain{{ulo, uhi}, {{vlo, vhi}}}; }

ee::SimpleSystemModel gas() { return ee::ideal_gas(ee::Rational(1), box(0.5, 30, 0.5, 30)); }

ee::StatePoint pt(double u, double v) { return ee::StatePoint{u, {v}}; }

std::vector<std::vector<double>> probes(double lo, double hi, int n) {
  std::vector<std::vector<double>> out;
  for (int i = 0; i < n; ++i) out.push_back({lo + (hi - lo) * (i + 0.5) / n});
  return out;
}

}  // namespace

// --- adiabat integration ---------------------------------------------------------

TEST(Adiabat, ZeroLengthPath) {
  const auto m = gas();
  const auto s = ee::integrate_adiabat(m, pt(3, 2), {});
  ASSERT_EQ(s.samples.size(), 1u);
  EXPECT_EQ(s.samples[0].U, 3.0);
  EXPECT_EQ(s.samples[0].V, std::vector<double>{2.0});
}

TEST(Adiabat, IdealGasInvariant) {
  const auto m = gas();
  ee::IntegratorOptions o;
  o.step = 1e-3;
  const auto s = ee::integrate_adiabat(m, pt(3, 1), {{1.0}, {2.0}}, o);
  ASSERT_GT(s.samples.size(), 2u);
  const double c0 = 3.0;
  for (const auto& p : s.samples) EXPECT_LE(std::abs(p.U * std::pow(p.V[0], 2.0 / 3.0) - c0) / c0, 1e-6);
  EXPECT_NEAR(s.waypoint_u.back(), 3.0 * std::pow(0.5, 2.0 / 3.0), 1e-6);
}

TEST(Adiabat, ForwardBackwardReturns) {
  const auto m = gas();
  ee::IntegratorOptions o;
  o.step = 1e-3;
  const auto s = ee::integrate_adiabat(m, pt(3, 1), {{1.0}, {2.0}, {1.0}}, o);
  EXPECT_LE(std::abs(s.waypoint_u.back() - 3.0), 10 * o.tolerance);
}

TEST(Adiabat, FirstWaypointMustMatch) {
  EXPECT_THROW(ee::integrate_adiabat(gas(), pt(3, 1), {{2.0}, {3.0}}), ee::EngineError);
}

TEST(Adiabat, LeavingTheDomain) {
  // Compression heats the gas past the top of the energy range.
  EXPECT_THROW(ee::integrate_adiabat(gas(), pt(20, 10), {{10.0}, {0.6}}), ee::AdiabatExit);
}

TEST(Adiabat, Reciprocity) {
  const auto m = gas();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(2, 10), v(1, 5);
  ee::IntegratorOptions o;
  for (int k = 0; k < 20; ++k) {
    const auto x = pt(u(rng), v(rng));
    const double v2 = v(rng);
    const auto fw = ee::integrate_adiabat(m, x, {x.V, {v2}}, o);
    const auto y = pt(fw.waypoint_u.back(), v2);
    const auto bw = ee::integrate_adiabat(m, y, {y.V, x.V}, o);
    EXPECT_LE(std::abs(bw.waypoint_u.back() - x.U), 10 * o.tolerance * std::max(1.0, x.U));
  }
}

TEST(Adiabat, CsvRows) {
  const auto s = ee::integrate_adiabat(gas(), pt(3, 1), {{1.0}, {1.01}});
  std::ostringstream out;
  ee::write_adiabat_csv(out, s);
  EXPECT_EQ(out.str().rfind("U,V1\n", 0), 0u);
}

// --- forward sectors ---------------------------------------------------------------

TEST(ForwardSector, Reflexive) {
  EXPECT_TRUE(ee::forward_sector_contains(gas(), pt(3, 2), pt(3, 2)));
}

TEST(ForwardSector, EnergyAtFixedVolume) {
  const auto m = gas();
  EXPECT_TRUE(ee::forward_sector_contains(m, pt(3, 2), pt(4, 2)));
  EXPECT_FALSE(ee::forward_sector_contains(m, pt(3, 2), pt(2, 2)));
}

TEST(ForwardSector, FreeExpansionIsIrreversible) {
  const auto m = gas();
  const auto x = pt(3, 1), y = pt(3, 2);
  EXPECT_TRUE(ee::forward_sector_contains(m, x, y));
  EXPECT_FALSE(ee::forward_sector_contains(m, y, x));
}

TEST(ForwardSector, AgreesWithOracle) {
  const auto m = gas();
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const auto x = ee::sample_point(m.domain, rng);
    const auto y = ee::sample_point(m.domain, rng);
    const double gap = m.sigma(y) - m.sigma(x);
    if (std::abs(gap) < 1e-6) continue;
    try {
      EXPECT_EQ(ee::forward_sector_contains(m, x, y), gap > 0);
    } catch (const ee::NumericError&) {
      // adiabat left the box before reaching V_Y
    }
  }
}

// --- nesting ------------------------------------------------------------------------

TEST(Nesting, SameAdiabat) {
  const auto m = gas();
  const auto x = pt(3, 1);
  const auto y = pt(3 * std::pow(0.5, 2.0 / 3.0), 2);
  const auto r = ee::check_nesting(m, x, y, probes(1, 3, 8));
  EXPECT_EQ(r.kind, ee::Nesting::equal_sectors);
}

TEST(Nesting, HigherEntropySectorInside) {
  const auto m = gas();
  const auto r = ee::check_nesting(m, pt(3, 1), pt(5, 1), probes(0.8, 3, 8));
  EXPECT_EQ(r.kind, ee::Nesting::y_inside_x);
  const auto back = ee::check_nesting(m, pt(5, 1), pt(3, 1), probes(0.8, 3, 8));
  EXPECT_EQ(back.kind, ee::Nesting::x_inside_y);
}

TEST(Nesting, EmptyProbeGrid) {
  EXPECT_THROW(ee::check_nesting(gas(), pt(3, 1), pt(5, 1), {}), ee::InputError);
}

TEST(Nesting, CrossingModelCrosses) {
  // U = 1 is itself an adiabat; the one through (0.9, 0.5) reaches it at
  // finite V, so the two sectors are neither equal nor nested.
  const auto m = ee::crossing_model();
  const auto r = ee::check_nesting(m, pt(0.9, 0.5), pt(1.0, 1.5), probes(0.1, 2.9, 16));
  EXPECT_EQ(r.kind, ee::Nesting::crossing);
  EXPECT_TRUE(r.witness);
}

TEST(Nesting, VanDerWaalsNeverCrosses) {
  const auto m = ee::van_der_waals(ee::Rational(1), 0.1, 0.05, box(1, 30, 0.5, 30));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const auto x = ee::sample_point(m.domain, rng);
    const auto y = ee::sample_point(m.domain, rng);
    try {
      EXPECT_NE(ee::check_nesting(m, x, y, probes(1, 20, 8)).kind, ee::Nesting::crossing);
    } catch (const ee::NumericError&) {
    }
  }
}

// --- convexity -----------------------------------------------------------------------

TEST(Convexity, EndpointsAndMidpoint) {
  const auto m = gas();
  const auto r = ee::check_convexity(m, pt(2, 1), pt(10, 8), {0.0, 0.5, 1.0});
  ASSERT_EQ(r.entries.size(), 3u);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_NEAR(r.entries[0].mixed, r.entries[0].combined, 1e-12);
  EXPECT_NEAR(r.entries[2].mixed, r.entries[2].combined, 1e-12);
  EXPECT_GT(r.entries[1].combined, r.entries[1].mixed);
}

TEST(Convexity, NonConcaveOracle) {
  auto m = gas();
  m.entropy = [](const ee::StatePoint& x) { return x.U * x.U + x.V[0]; };
  const auto r = ee::check_convexity(m, pt(2, 1), pt(10, 8), {0.5});
  EXPECT_EQ(r.violations, 1u);
}

// --- Caratheodory ----------------------------------------------------------------------

TEST(Caratheodory, IdealGasFindsUnreachable) {
  const auto r = ee::check_caratheodory(gas(), pt(5, 5), 0.5, 32, 1);
  EXPECT_TRUE(r.ok);
  EXPECT_GT(r.unreachable, 0u);
  ASSERT_TRUE(r.unreachable_witness);
  ASSERT_TRUE(r.strict_successor);
  EXPECT_GT(r.strict_successor->U, 5.0);
}

TEST(Caratheodory, RadiusLeavesDomain) {
  EXPECT_THROW(ee::check_caratheodory(gas(), pt(5, 5), 10, 8, 1), ee::InputError);
}

// --- pressure ------------------------------------------------------------------------------

TEST(Pressure, IdealGasValue) {
  const auto p = ee::pressure_at(gas(), pt(1.5, 1));
  ASSERT_EQ(p.pressure.size(), 1u);
  EXPECT_DOUBLE_EQ(p.pressure[0], 1.0);
  ASSERT_TRUE(p.residual);
  EXPECT_LE(*p.residual, 1e-6);
}

TEST(Pressure, TangentPlaneAtInteriorPoints) {
  const auto m = ee::van_der_waals(ee::Rational(2), 0.3, 0.1, box(1, 30, 1, 30));
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    const auto r = ee::pressure_at(m, ee::sample_point(ee::Domain{{2, 28}, {{2, 28}}}, rng));
    ASSERT_TRUE(r.residual);
    EXPECT_LE(*r.residual, 1e-6);
  }
}

TEST(Pressure, BoundaryPointRejected) {
  EXPECT_THROW(ee::pressure_at(gas(), pt(0.5, 1)), ee::NumericError);
  EXPECT_THROW(ee::pressure_at(gas(), pt(2, 30)), ee::NumericError);
}

// --- sampled model checks -------------------------------------------------------------------

TEST(ModelChecks, DomainConvexAndLipschitz) {
  const auto m = gas();
  EXPECT_EQ(ee::check_domain_convexity(m, 200, 1).violations, 0u);
  ASSERT_TRUE(m.lipschitz_bound);
  const auto l = ee::check_lipschitz(m, 200, 1);
  EXPECT_EQ(l.samples, 200u);
  EXPECT_EQ(l.violations, 0u);
}

TEST(ModelChecks, ScaledCopy) {
  const auto m = gas();
  const auto two = ee::scaled_copy(m, ee::Rational(2));
  const auto x = pt(3, 2);
  const auto x2 = pt(6, 4);
  EXPECT_NEAR(two.sigma(x2), 2 * m.sigma(x), 1e-12);
  EXPECT_NEAR(two.pressure(x2)[0], m.pressure(x)[0], 1e-12);
}

TEST(ModelChecks, TabulatedMatchesGridValues) {
  const auto m = ee::tabulated_model("tab", {1, 2, 3}, {1, 2}, {{1, 0.5}, {2, 1}, {3, 1.5}});
  EXPECT_NEAR(m.pressure(pt(2, 1))[0], 2.0, 1e-12);
  EXPECT_NEAR(m.pressure(pt(1.5, 1.5))[0], 0.5 * (1.0 + 0.5 + 2.0 + 1.0) / 2.0, 1e-12);
}
