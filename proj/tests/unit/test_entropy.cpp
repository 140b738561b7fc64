#include <gtest/gtest.h>

#include <cmath>

#include "entropy_engine/entropy.hpp"
#include "support.hpp"

namespace ee = entropy_engine;
using test_support::half;
using test_support::unit;

namespace {

// a < b < c with the half-half mixture of a and c equivalent to b.
ee::AccessibilityRelation mixing_chain(std::vector<ee::Rational> grid = {half(), ee::Rational(1)}) {
  const ee::StateSpaceDecl g{"G", {}, {"a", "b", "c"}};
  const auto mix = unit("G", "a", half()) + unit("G", "c", half());
  auto raw = ee::build_relation({g},
                                {{unit("G", "a"), unit("G", "b")},
                                 {unit("G", "b"), unit("G", "c")},
                                 {mix, unit("G", "b")},
                                 {unit("G", "b"), mix}},
                                std::move(grid));
  ee::ClosureOptions o;
  o.max_parts = 3;
  return ee::close(raw, o);
}

struct GasGrid {
  ee::StateSpaceDecl decl{"gas", {}, {}};
  std::map<std::string, double> sigma;
};

GasGrid gas_grid(int n) {
  GasGrid g;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      const auto id = "u" + std::to_string(i) + "_v" + std::to_string(j);
      g.decl.states.push_back(id);
      g.sigma[id] = std::log(double(j) * std::pow(double(i), 1.5));
    }
  return g;
}

ee::OracleRelation oracle_relation(const GasGrid& g) {
  return ee::OracleRelation(ee::SpaceCatalog({g.decl}),
                            {{"gas", [sigma = g.sigma](const std::string& s) { return sigma.at(s); }}});
}

}  // namespace

TEST(ConstructEntropy, ReferencePointsAreZeroAndOne) {
  const auto rel = mixing_chain();
  const auto t = ee::construct_entropy(rel, "G", "a", "c");
  EXPECT_EQ(t.value("a"), 0.0);
  EXPECT_EQ(t.value("c"), 1.0);
  EXPECT_EQ(t.value("b"), 0.5);
  EXPECT_EQ(t.exact.at("b"), half());
}

TEST(ConstructEntropy, NoStrictReferencePair) {
  const auto rel = mixing_chain();
  EXPECT_THROW(ee::construct_entropy(rel, "G", "c", "a"), ee::InputError);
  EXPECT_THROW(ee::construct_entropy(rel, "G", "a", "a"), ee::InputError);
  ee::EntropyOptions o;
  o.allow_constant = true;
  const auto t = ee::construct_entropy(rel, "G", "a", "a", o);
  EXPECT_TRUE(t.constant);
}

TEST(ConstructEntropy, IncomparableProductReported) {
  // Unit chain only: the two-fold mixtures the construction needs are
  // undecided by the relation.
  const ee::StateSpaceDecl g{"G", {}, {"a", "b", "c"}};
  auto raw = ee::build_relation({g}, {{unit("G", "a"), unit("G", "b")}, {unit("G", "b"), unit("G", "c")}},
                                {half(), ee::Rational(1)});
  ee::ClosureOptions o;
  o.max_parts = 3;
  const auto rel = ee::close(raw, o);
  EXPECT_THROW(ee::construct_entropy(rel, "G", "a", "c"), ee::ComparabilityFailure);
}

TEST(ConstructEntropy, OracleGridWithinResolution) {
  const auto g = gas_grid(8);
  const auto rel = oracle_relation(g);
  const std::string lo = "u1_v1", hi = "u8_v8";
  const auto t = ee::construct_entropy(rel, "gas", lo, hi);
  const double s0 = g.sigma.at(lo), s1 = g.sigma.at(hi);
  for (const auto& s : g.decl.states) {
    const double expect = (g.sigma.at(s) - s0) / (s1 - s0);
    EXPECT_NEAR(t.value(s), expect, 1.0 / 128) << s;
  }
}

TEST(ConstructEntropy, ReferenceChangeIsAffine) {
  const auto g = gas_grid(6);
  const auto rel = oracle_relation(g);
  const auto t1 = ee::construct_entropy(rel, "gas", "u1_v1", "u6_v6");
  const auto t2 = ee::construct_entropy(rel, "gas", "u2_v1", "u5_v3");
  const auto fit = ee::fit_affine(t1, t2);
  EXPECT_GT(fit.a, 0.0);
  EXPECT_LE(fit.max_residual, 2.0 / 128);
}

TEST(ConstructEntropy, ExtensivityOnGrid) {
  // S(b / 2) = 1/4 needs quarter scales on the grid.
  const auto rel = mixing_chain({ee::Rational(1, 4), half(), ee::Rational(1)});
  const auto t = ee::construct_entropy(rel, "G", "a", "c");
  const auto r = ee::check_extensivity(rel, t, {half()});
  EXPECT_GT(r.checked, 0u);
  EXPECT_EQ(r.violations, 0u) << r.witness.value_or("");
  EXPECT_EQ(ee::scaled_entropy(rel, t, "b", half()), ee::Rational(1, 4));
}

TEST(ConstructEntropy, MonotoneEncoding) {
  const auto rel = mixing_chain();
  const auto t = ee::construct_entropy(rel, "G", "a", "c");
  const auto& states = rel.catalog().space("G").states;
  for (const auto& x : states)
    for (const auto& y : states) {
      const auto o = ee::classify(rel, unit("G", x), unit("G", y));
      if (o == ee::Order::strictly_precedes) EXPECT_LT(t.value(x), t.value(y));
      if (o == ee::Order::equivalent) EXPECT_EQ(t.value(x), t.value(y));
    }
}

TEST(ReferenceMix, NegativeCoefficientsMoveAcross) {
  const auto rel = mixing_chain();
  // mu = 1/2: (1/2 a, 1/2 c) < b holds; mu = 1 is c < b, which fails.
  EXPECT_TRUE(ee::reference_mix_precedes(rel, "G", "a", "c", half(), "b"));
  EXPECT_FALSE(ee::reference_mix_precedes(rel, "G", "a", "c", ee::Rational(1), "b"));
  EXPECT_TRUE(ee::reference_mix_precedes(rel, "G", "a", "c", ee::Rational(0), "a"));
}

// --- entropy principle ---------------------------------------------------------

TEST(Principle, SingleOrderedFactPasses) {
  auto raw = ee::build_relation({{"G", {}, {"X", "Y"}}}, {{unit("G", "X"), unit("G", "Y")}}, {ee::Rational(1)});
  const auto rel = ee::close(raw);
  const auto t = ee::make_table("G", {"X", "Y"}, {{"X", 0.0}, {"Y", 1.0}}, 1.0 / 128);
  const auto r = ee::verify_entropy_principle(rel, {{"G", t}}, {});
  EXPECT_EQ(r.violations, 0u);
  EXPECT_FALSE(r.checks.empty());
}

TEST(Principle, EquivalentPairWithDifferentEntropy) {
  auto raw = ee::build_relation({{"G", {}, {"X", "Y"}}},
                                {{unit("G", "X"), unit("G", "Y")}, {unit("G", "Y"), unit("G", "X")}}, {ee::Rational(1)});
  const auto rel = ee::close(raw);
  const auto t = ee::make_table("G", {"X", "Y"}, {{"X", 0.0}, {"Y", 0.5}}, 1.0 / 128);
  const auto r = ee::verify_entropy_principle(rel, {{"G", t}}, {});
  EXPECT_GT(r.violations, 0u);
  bool equivalence_failed = false;
  for (const auto& c : r.checks)
    if (!c.ok && c.kind == ee::PrincipleCheck::Kind::equivalence) equivalence_failed = true;
  EXPECT_TRUE(equivalence_failed);
}

TEST(Principle, OracleRelationAllPairs) {
  const auto g = gas_grid(5);
  const auto rel = oracle_relation(g);
  const auto t = ee::construct_entropy(rel, "gas", "u1_v1", "u5_v5");
  std::vector<std::pair<ee::CompoundState, ee::CompoundState>> pairs;
  for (const auto& x : g.decl.states)
    for (const auto& y : g.decl.states)
      if (rel.accessible(unit("gas", x), unit("gas", y))) pairs.emplace_back(unit("gas", x), unit("gas", y));
  const auto r = ee::verify_entropy_principle(rel, {{"gas", t}}, {}, pairs);
  EXPECT_EQ(r.checks.size(), pairs.size());
  EXPECT_EQ(r.violations, 0u);
}

TEST(Principle, CrossSpaceFactSkipped) {
  auto raw = ee::build_relation({{"A", {ee::Rational(1)}, {"x"}}, {"B", {ee::Rational(1)}, {"y"}}},
                                {{unit("A", "x"), unit("B", "y")}}, {ee::Rational(1)});
  const auto rel = ee::close(raw);
  const auto ta = ee::make_table("A", {"x"}, {{"x", 0.0}});
  const auto tb = ee::make_table("B", {"y"}, {{"y", 0.0}});
  const auto r = ee::verify_entropy_principle(rel, {{"A", ta}, {"B", tb}}, {});
  EXPECT_GE(r.skipped, 1u);
  EXPECT_EQ(r.violations, 0u);
}

// --- affine fits -----------------------------------------------------------------

TEST(FitAffine, Identity) {
  const auto t = ee::make_table("G", {"a", "b", "c"}, {{"a", 0.0}, {"b", 0.3}, {"c", 1.0}});
  const auto f = ee::fit_affine(t, t);
  EXPECT_NEAR(f.a, 1.0, 1e-12);
  EXPECT_NEAR(f.b, 0.0, 1e-12);
  EXPECT_NEAR(f.max_residual, 0.0, 1e-12);
}

TEST(FitAffine, TwentyNineTimes) {
  const auto t = ee::make_table("G", {"a", "b", "c"}, {{"a", 0.0}, {"b", 0.3}, {"c", 1.0}});
  const auto u = ee::make_table("G", {"a", "b", "c"}, {{"a", 0.0}, {"b", 29 * 0.3}, {"c", 29.0}});
  const auto f = ee::fit_affine(t, u);
  EXPECT_NEAR(f.a, 29.0, 1e-12);
  EXPECT_NEAR(f.b, 0.0, 1e-12);
  EXPECT_NEAR(f.max_residual, 0.0, 1e-12);
}

TEST(FitAffine, ConstantSourceIsDegenerate) {
  const auto t = ee::make_table("G", {"a", "b"}, {{"a", 2.0}, {"b", 2.0}});
  EXPECT_TRUE(ee::fit_affine(t, t).degenerate);
}

// --- calibrators and multiplicative constants --------------------------------------

TEST(Calibrators, SymmetricCopies) {
  const ee::StateSpaceDecl a{"A", {ee::Rational(1)}, {"x0", "x1", "x2"}};
  const ee::StateSpaceDecl b{"B", {ee::Rational(1)}, {"x0", "x1", "x2"}};
  std::map<std::string, double> s{{"x0", 0.0}, {"x1", 1.0}, {"x2", 3.0}};
  auto f = [s](const std::string& k) { return s.at(k); };
  ee::OracleRelation rel(ee::SpaceCatalog({a, b}), {{"A", f}, {"B", f}});
  const auto c = ee::find_calibrators(rel, "A", "B");
  EXPECT_EQ(c.x0, "x0");
  EXPECT_EQ(c.x1, "x1");
  EXPECT_EQ(c.y0, "x0");
  EXPECT_EQ(c.y1, "x1");
}

TEST(Calibrators, DifferentMoleNumbers) {
  // Second space carries twice the entropy per state; a matching level
  // difference needs a different pair.
  const ee::StateSpaceDecl a{"A", {ee::Rational(1)}, {"p", "q", "r"}};
  const ee::StateSpaceDecl b{"B", {ee::Rational(1)}, {"p", "q", "r"}};
  std::map<std::string, double> s1{{"p", 0.0}, {"q", 1.0}, {"r", 2.0}};
  std::map<std::string, double> s2{{"p", 0.0}, {"q", 2.0}, {"r", 4.0}};
  ee::OracleRelation rel(ee::SpaceCatalog({a, b}),
                         {{"A", [s1](const std::string& k) { return s1.at(k); }},
                          {"B", [s2](const std::string& k) { return s2.at(k); }}});
  const auto c = ee::find_calibrators(rel, "A", "B");
  EXPECT_DOUBLE_EQ(s1.at(c.x1) - s1.at(c.x0), s2.at(c.y1) - s2.at(c.y0));
}

TEST(Calibrators, NoneWithoutCrossFacts) {
  auto raw = ee::build_relation({{"A", {ee::Rational(1)}, {"x0", "x1"}}, {"B", {ee::Rational(1)}, {"y0", "y1"}}},
                                {{unit("A", "x0"), unit("A", "x1")}, {unit("B", "y0"), unit("B", "y1")}},
                                {ee::Rational(1)});
  ee::ClosureOptions o;
  o.max_parts = 2;
  const auto rel = ee::close(raw, o);
  EXPECT_THROW(ee::find_calibrators(rel, "A", "B"), ee::QueryError);
}

TEST(CalibrateMultiplicative, IdenticalTables) {
  const auto t1 = ee::make_table("A", {"x0", "x1"}, {{"x0", 0.0}, {"x1", 1.0}});
  const auto t2 = ee::make_table("B", {"x0", "x1"}, {{"x0", 0.0}, {"x1", 1.0}});
  const auto r = ee::calibrate_multiplicative({t1, t2}, {{"A", "B", {"x0", "x1", "x0", "x1"}}});
  EXPECT_DOUBLE_EQ(r.a.at("A"), 1.0);
  EXPECT_DOUBLE_EQ(r.a.at("B"), 1.0);
  EXPECT_NEAR(r.residual, 0.0, 1e-12);
}

TEST(CalibrateMultiplicative, PrescaledByThree) {
  const auto t1 = ee::make_table("A", {"x0", "x1"}, {{"x0", 0.0}, {"x1", 1.0}});
  const auto t2 = ee::make_table("B", {"x0", "x1"}, {{"x0", 0.0}, {"x1", 3.0}});
  const auto r = ee::calibrate_multiplicative({t1, t2}, {{"A", "B", {"x0", "x1", "x0", "x1"}}});
  EXPECT_NEAR(r.a.at("B"), 1.0 / 3.0, 1e-15);
}

TEST(CalibrateMultiplicative, DegenerateCalibrator) {
  const auto t1 = ee::make_table("A", {"x0", "x1"}, {{"x0", 0.0}, {"x1", 0.0}});
  const auto t2 = ee::make_table("B", {"x0", "x1"}, {{"x0", 0.0}, {"x1", 1.0}});
  EXPECT_THROW(ee::calibrate_multiplicative({t1, t2}, {{"A", "B", {"x0", "x1", "x0", "x1"}}}), ee::NumericError);
}

TEST(CalibrateMultiplicative, TwoGasOracle) {
  // Ideal gases with 1 and 2 moles on the same grid: the constructed tables
  // calibrate back to the oracle's unit ratio.
  const auto g = gas_grid(5);
  ee::StateSpaceDecl a = g.decl, b = g.decl;
  a.id = "one";
  b.id = "two";
  a.composition = b.composition = {ee::Rational(1)};
  auto s1 = g.sigma;
  std::map<std::string, double> s2;
  for (const auto& [k, v] : s1) s2[k] = 2.0 * v;
  ee::OracleRelation rel(ee::SpaceCatalog({a, b}),
                         {{"one", [s1](const std::string& k) { return s1.at(k); }},
                          {"two", [s2](const std::string& k) { return s2.at(k); }}});
  const auto t1 = ee::construct_entropy(rel, "one", "u1_v1", "u5_v5");
  const auto t2 = ee::construct_entropy(rel, "two", "u1_v1", "u5_v5");
  const auto c = ee::find_calibrators(rel, "one", "two");
  const auto r = ee::calibrate_multiplicative({t1, t2}, {{"one", "two", c}});
  // Both tables are normalised over the same states, so the oracle unit of
  // the second space is twice that of the first.
  EXPECT_NEAR(r.a.at("two"), 2.0, 2.0 * 2.0 / 128);
}
