#include "entropy_engine/axioms.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace entropy_engine {

namespace {

std::string pair_text(const CompoundState& a, const CompoundState& b) {
  return to_string(a) + "  <  " + to_string(b);
}

/// sum[x][z] = index of (X, Z) in the universe or -1.
std::vector<std::vector<long>> composition_table(const Universe& u, std::size_t max_parts) {
  const std::size_t n = u.size();
  std::vector<std::vector<long>> sum(n, std::vector<long>(n, -1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (u.at(i).size() + u.at(j).size() > max_parts) continue;
      if (auto k = u.find(u.at(i) + u.at(j))) {
        sum[i][j] = static_cast<long>(*k);
        sum[j][i] = static_cast<long>(*k);
      }
    }
  }
  return sum;
}

std::size_t largest_part_count(const Universe& u) {
  std::size_t m = 0;
  for (const auto& s : u.states()) m = std::max(m, s.size());
  return m;
}

}  // namespace

AxiomReport scan_reflexivity(const AccessibilityRelation& rel) {
  AxiomReport r;
  r.axiom = "A1";
  const auto& u = rel.universe();
  for (std::size_t i = 0; i < u.size(); ++i) {
    ++r.instances_checked;
    if (!rel.holds(i, i)) {
      r.holds = false;
      r.witness = "missing " + pair_text(u.at(i), u.at(i));
      return r;
    }
  }
  return r;
}

AxiomReport scan_transitivity(const AccessibilityRelation& rel) {
  AxiomReport r;
  r.axiom = "A2";
  const auto& u = rel.universe();
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!rel.holds(i, j)) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (!rel.holds(j, k)) continue;
        ++r.instances_checked;
        if (!rel.holds(i, k)) {
          r.holds = false;
          r.witness = pair_text(u.at(i), u.at(j)) + " and " + pair_text(u.at(j), u.at(k)) +
                      " but not " + pair_text(u.at(i), u.at(k));
          return r;
        }
      }
    }
  }
  return r;
}

AxiomReport scan_consistency(const AccessibilityRelation& rel) {
  AxiomReport r;
  r.axiom = "A3";
  const auto& u = rel.universe();
  const auto sum = composition_table(u, largest_part_count(u));
  std::vector<std::pair<std::size_t, std::size_t>> facts;
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (rel.holds(i, j)) facts.emplace_back(i, j);
    }
  }
  for (const auto& [x, xp] : facts) {
    for (const auto& [y, yp] : facts) {
      const long lhs = sum[x][y];
      const long rhs = sum[xp][yp];
      if (lhs < 0 || rhs < 0) continue;
      ++r.instances_checked;
      if (!rel.holds(static_cast<std::size_t>(lhs), static_cast<std::size_t>(rhs))) {
        r.holds = false;
        r.witness = pair_text(u.at(x), u.at(xp)) + " and " + pair_text(u.at(y), u.at(yp)) +
                    " but not the composed fact";
        return r;
      }
    }
  }
  return r;
}

AxiomReport scan_scaling_invariance(const AccessibilityRelation& rel) {
  AxiomReport r;
  r.axiom = "A4";
  const auto& u = rel.universe();
  const auto& grid = rel.lambda_grid();
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (!rel.holds(i, j)) continue;
      const auto& x = u.at(i);
      const auto& y = u.at(j);
      for (const auto& g : grid) {
        const Rational factor = g / x.parts().front().lambda;
        const auto sx = u.find(x.scaled(factor));
        const auto sy = u.find(y.scaled(factor));
        if (!sx || !sy) continue;
        ++r.instances_checked;
        if (!rel.holds(*sx, *sy)) {
          r.holds = false;
          r.witness = pair_text(x, y) + " but not its scaling by " + to_string(factor);
          return r;
        }
      }
    }
  }
  return r;
}

AxiomReport scan_splitting(const AccessibilityRelation& rel) {
  AxiomReport r;
  r.axiom = "A5";
  const auto& u = rel.universe();
  const auto& grid = rel.lambda_grid();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& x = u.at(i);
    const Rational first = x.parts().front().lambda;
    for (const auto& g : grid) {
      const Rational lambda = g / first;
      if (lambda >= 1) continue;
      const auto split = u.find(x.scaled(1 - lambda) + x.scaled(lambda));
      if (!split) continue;
      ++r.instances_checked;
      if (!rel.holds(i, *split) || !rel.holds(*split, i)) {
        r.holds = false;
        r.witness = to_string(x) + " is not equivalent to " + to_string(u.at(*split));
        return r;
      }
    }
  }
  return r;
}

std::vector<AxiomReport> scan_axioms(const AccessibilityRelation& rel) {
  return {scan_reflexivity(rel), scan_transitivity(rel), scan_consistency(rel),
          scan_scaling_invariance(rel), scan_splitting(rel)};
}

CancellationResult check_cancellation(const AccessibilityRelation& rel) {
  CancellationResult r;
  const auto& u = rel.universe();
  const std::size_t n = u.size();
  const auto sum = composition_table(u, largest_part_count(u));
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t x = 0; x < n; ++x) {
      const long xz = sum[x][z];
      if (xz < 0) continue;
      for (std::size_t y = 0; y < n; ++y) {
        const long yz = sum[y][z];
        if (yz < 0) continue;
        ++r.triples_checked;
        if (rel.holds(static_cast<std::size_t>(xz), static_cast<std::size_t>(yz)) &&
            !rel.holds(x, y)) {
          r.holds = false;
          r.witness = CancellationWitness{u.at(x), u.at(y), u.at(z)};
          return r;
        }
      }
    }
  }
  return r;
}

std::vector<StabilityResult> check_stability(const AccessibilityRelation& rel,
                                             const std::vector<EpsilonFamily>& families) {
  std::vector<StabilityResult> out;
  for (const auto& fam : families) {
    StabilityResult r;
    r.name = fam.name;
    bool all = true;
    for (const auto& eps : fam.epsilons) {
      if (eps <= 0) throw InputError("epsilon family '" + fam.name + "' has a non-positive eps");
      const auto lhs = fam.x + fam.z0.scaled(eps);
      const auto rhs = fam.y + fam.z1.scaled(eps);
      if (!rel.representable(lhs) || !rel.representable(rhs)) continue;
      ++r.epsilons_checked;
      if (!rel.holds(lhs, rhs)) all = false;
    }
    r.premise_holds = all && r.epsilons_checked > 0;
    r.limit_present = rel.holds(fam.x, fam.y);
    r.flagged = r.premise_holds && !r.limit_present;
    out.push_back(std::move(r));
  }
  return out;
}

ComparisonResult check_comparison_hypothesis(const AccessibilityQuery& rel,
                                             const std::vector<std::vector<CompoundState>>& groups) {
  ComparisonResult r;
  for (const auto& g : groups) {
    for (const auto& s : g) r.parts_bound = std::max(r.parts_bound, s.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = i + 1; j < g.size(); ++j) {
        ++r.pairs_checked;
        if (!rel.accessible(g[i], g[j]) && !rel.accessible(g[j], g[i])) {
          r.holds = false;
          r.witness = std::make_pair(g[i], g[j]);
          return r;
        }
      }
    }
  }
  return r;
}

ComparisonResult check_comparison_hypothesis(const AccessibilityRelation& rel,
                                             const std::vector<std::string>& space_ids,
                                             bool products) {
  const std::set<std::string> wanted(space_ids.begin(), space_ids.end());
  for (const auto& id : wanted) rel.catalog().space_index(id);

  std::vector<std::vector<CompoundState>> groups;
  for (const auto& id : space_ids) {
    std::vector<CompoundState> g;
    for (const auto& st : rel.catalog().space(id).states) g.push_back(CompoundState::single(id, st));
    groups.push_back(std::move(g));
  }
  if (products) {
    std::map<std::vector<std::pair<std::string, Rational>>, std::vector<CompoundState>> by_space;
    for (const auto& s : rel.universe().states()) {
      bool inside = true;
      std::vector<std::pair<std::string, Rational>> signature;
      for (const auto& p : s.parts()) {
        if (!wanted.count(p.space)) inside = false;
        signature.emplace_back(p.space, p.lambda);
      }
      if (!inside) continue;
      if (s.size() == 1 && s.parts().front().lambda == 1) continue;
      std::sort(signature.begin(), signature.end());
      by_space[signature].push_back(s);
    }
    for (auto& [sig, g] : by_space) groups.push_back(std::move(g));
  }
  auto r = check_comparison_hypothesis(static_cast<const AccessibilityQuery&>(rel), groups);
  if (products) r.parts_bound = std::max(r.parts_bound, rel.max_parts());
  return r;
}

}  // namespace entropy_engine
