#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "entropy_engine/calibration.hpp"
#include "entropy_engine/entropy.hpp"
#include "entropy_engine/relation.hpp"
#include "entropy_engine/simple_system.hpp"

namespace ee = entropy_engine;

namespace {

// Chain x0 < x1 < ... on one space.
ee::AccessibilityRelation chain_relation(int states) {
  ee::StateSpaceDecl d{"G", {}, {}};
  for (int i = 0; i < states; ++i) d.states.push_back("x" + std::to_string(i));
  std::vector<std::pair<ee::CompoundState, ee::CompoundState>> facts;
  for (int i = 0; i + 1 < states; ++i)
    facts.emplace_back(ee::CompoundState::single("G", d.states[i]), ee::CompoundState::single("G", d.states[i + 1]));
  return ee::build_relation({d}, facts, {ee::Rational(1, 2), ee::Rational(1)});
}

void BM_Close(benchmark::State& state) {
  const auto raw = chain_relation(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto closed = ee::close(raw);
    benchmark::DoNotOptimize(closed.fact_count());
  }
}
BENCHMARK(BM_Close)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_OracleEntropy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ee::StateSpaceDecl d{"gas", {}, {}};
  std::map<std::string, double> sigma;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto id = "u" + std::to_string(i) + "_v" + std::to_string(j);
      d.states.push_back(id);
      const double U = 1.0 + i, V = 1.0 + j;
      sigma[id] = std::log(V * std::pow(U, 1.5));
    }
  ee::OracleRelation rel(ee::SpaceCatalog({d}), {{"gas", [&](const std::string& s) { return sigma.at(s); }}});
  for (auto _ : state) {
    auto t = ee::construct_entropy(rel, "gas", d.states.front(), d.states.back());
    benchmark::DoNotOptimize(t.values.size());
  }
}
BENCHMARK(BM_OracleEntropy)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Adiabat(benchmark::State& state) {
  const auto gas = ee::ideal_gas(ee::Rational(1), ee::Domain{{0.01, 100.0}, {{0.1, 10.0}}});
  ee::IntegratorOptions opt;
  opt.step = 1e-3;
  for (auto _ : state) {
    auto s = ee::integrate_adiabat(gas, {1.0, {1.0}}, {{1.0}, {2.0}}, opt);
    benchmark::DoNotOptimize(s.waypoint_u.back());
  }
}
BENCHMARK(BM_Adiabat)->Unit(benchmark::kMillisecond);

void BM_ChainE(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> w(-1.0, 5.0);
  ee::Matrix d(n, std::vector<double>(n));
  for (auto& row : d)
    for (auto& x : row) x = w(rng);
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (auto _ : state) {
    auto v = ee::compute_E(d, 0, n - 1, 4);
    benchmark::DoNotOptimize(v.value);
  }
}
BENCHMARK(BM_ChainE)->Arg(5)->Arg(20)->Arg(80);

}  // namespace

BENCHMARK_MAIN();
