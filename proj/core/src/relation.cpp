#include "entropy_engine/relation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

namespace entropy_engine {

const char* to_string(Order o) {
  switch (o) {
    case Order::equivalent: return "equivalent";
    case Order::strictly_precedes: return "strictly_precedes";
    case Order::strictly_follows: return "strictly_follows";
    case Order::incomparable: return "incomparable";
  }
  return "?";
}

Order classify(const AccessibilityQuery& rel, const CompoundState& x, const CompoundState& y) {
  const auto& cat = rel.catalog();
  if (cat.composition(x) != cat.composition(y)) return Order::incomparable;
  const bool forward = rel.accessible(x, y);
  const bool backward = rel.accessible(y, x);
  if (forward && backward) return Order::equivalent;
  if (forward) return Order::strictly_precedes;
  if (backward) return Order::strictly_follows;
  return Order::incomparable;
}

std::vector<std::vector<std::string>> adiabats(const AccessibilityQuery& rel,
                                               const std::string& space_id) {
  const auto& states = rel.catalog().space(space_id).states;
  std::vector<bool> assigned(states.size(), false);
  std::vector<std::vector<std::string>> classes;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (assigned[i]) continue;
    const auto xi = CompoundState::single(space_id, states[i]);
    std::vector<std::string> cls{states[i]};
    assigned[i] = true;
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      if (assigned[j]) continue;
      const auto xj = CompoundState::single(space_id, states[j]);
      if (rel.accessible(xi, xj) && rel.accessible(xj, xi)) {
        cls.push_back(states[j]);
        assigned[j] = true;
      }
    }
    classes.push_back(std::move(cls));
  }
  return classes;
}

// ---------------------------------------------------------------------------

BitMatrix::BitMatrix(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0) {}

bool BitMatrix::set(std::size_t i, std::size_t j) {
  auto& w = bits_[i * words_ + j / 64];
  const std::uint64_t mask = std::uint64_t{1} << (j % 64);
  if (w & mask) return false;
  w |= mask;
  return true;
}

bool BitMatrix::or_row_into(std::size_t k, std::size_t i) {
  bool changed = false;
  const auto* src = &bits_[k * words_];
  auto* dst = &bits_[i * words_];
  for (std::size_t w = 0; w < words_; ++w) {
    const auto merged = dst[w] | src[w];
    if (merged != dst[w]) {
      dst[w] = merged;
      changed = true;
    }
  }
  return changed;
}

std::size_t BitMatrix::count() const {
  std::size_t total = 0;
  for (auto w : bits_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

Universe::Universe(std::vector<CompoundState> states) : states_(std::move(states)) {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (!index_.emplace(states_[i], i).second) {
      throw InputError("duplicate universe state " + to_string(states_[i]));
    }
  }
}

std::optional<std::size_t> Universe::find(const CompoundState& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

namespace {

bool on_grid(const std::vector<Rational>& sorted_grid, const Rational& r) {
  return std::binary_search(sorted_grid.begin(), sorted_grid.end(), r);
}

std::vector<Rational> normalize_grid(std::vector<Rational> grid) {
  for (const auto& g : grid) {
    if (g <= 0) throw InputError("lambda grid entry " + to_string(g) + " is not positive");
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (!on_grid(grid, Rational(1))) throw InputError("lambda grid must contain 1");
  return grid;
}

void check_on_grid(const std::vector<Rational>& grid, const CompoundState& s) {
  for (const auto& p : s.parts()) {
    if (!on_grid(grid, p.lambda)) {
      throw InputError("lambda " + to_string(p.lambda) + " in " + to_string(s) +
                       " is not on the lambda grid");
    }
  }
}

}  // namespace

std::vector<CompoundState> enumerate_universe(const SpaceCatalog& catalog,
                                              const std::vector<Rational>& grid,
                                              std::size_t max_parts, std::size_t budget) {
  if (max_parts < 1) throw InputError("max_parts must be at least 1");
  std::vector<Part> atoms;
  for (const auto& sp : catalog.spaces()) {
    for (const auto& st : sp.states) {
      for (const auto& g : grid) atoms.push_back(Part{sp.id, st, g});
    }
  }
  std::sort(atoms.begin(), atoms.end());

  std::vector<CompoundState> out;
  std::vector<std::size_t> idx;
  // Multisets as nondecreasing index sequences keep parts canonical.
  for (std::size_t k = 1; k <= max_parts && !atoms.empty(); ++k) {
    idx.assign(k, 0);
    while (true) {
      std::vector<Part> parts;
      parts.reserve(k);
      for (auto i : idx) parts.push_back(atoms[i]);
      out.emplace_back(std::move(parts));
      if (out.size() > budget) {
        throw BudgetExceeded("universe exceeds " + std::to_string(budget) +
                             " compound states; shrink the lambda grid or max_parts");
      }
      std::size_t pos = k;
      while (pos > 0 && idx[pos - 1] == atoms.size() - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t q = pos; q < k; ++q) idx[q] = idx[pos - 1];
    }
  }
  return out;
}

AccessibilityRelation build_relation(std::vector<StateSpaceDecl> spaces,
                                     const std::vector<std::pair<CompoundState, CompoundState>>& facts,
                                     std::vector<Rational> lambda_grid) {
  AccessibilityRelation rel;
  rel.grid_ = normalize_grid(std::move(lambda_grid));
  rel.catalog_ = SpaceCatalog(std::move(spaces));

  std::set<CompoundState> states;
  for (const auto& sp : rel.catalog_.spaces()) {
    for (const auto& st : sp.states) states.insert(CompoundState::single(sp.id, st));
  }
  for (const auto& [x, y] : facts) {
    for (const auto* s : {&x, &y}) {
      if (s->empty()) throw InputError("empty compound state in fact");
      rel.catalog_.validate(*s);
      check_on_grid(rel.grid_, *s);
      states.insert(*s);
    }
    if (rel.catalog_.composition(x) != rel.catalog_.composition(y)) {
      throw InputError("fact " + to_string(x) + " < " + to_string(y) +
                       " changes the amount of some element");
    }
  }
  std::size_t max_parts = 1;
  for (const auto& s : states) max_parts = std::max(max_parts, s.size());
  rel.universe_ = Universe(std::vector<CompoundState>(states.begin(), states.end()));
  rel.facts_ = BitMatrix(rel.universe_.size());
  for (std::size_t i = 0; i < rel.universe_.size(); ++i) rel.facts_.set(i, i);
  for (const auto& [x, y] : facts) rel.facts_.set(*rel.universe_.find(x), *rel.universe_.find(y));
  rel.max_parts_ = max_parts;
  return rel;
}

bool AccessibilityRelation::representable(const CompoundState& s) const {
  return universe_.find(s).has_value();
}

bool AccessibilityRelation::holds(const CompoundState& x, const CompoundState& y) const {
  auto i = universe_.find(x);
  auto j = universe_.find(y);
  return i && j && facts_.test(*i, *j);
}

bool AccessibilityRelation::accessible(const CompoundState& x, const CompoundState& y) const {
  if (!closed_) throw QueryError("accessibility query on an unclosed relation");
  auto i = universe_.find(x);
  auto j = universe_.find(y);
  if (!i) throw QueryError(to_string(x) + " is outside the generated universe");
  if (!j) throw QueryError(to_string(y) + " is outside the generated universe");
  return facts_.test(*i, *j);
}

std::vector<std::pair<CompoundState, CompoundState>> AccessibilityRelation::facts() const {
  std::vector<std::pair<CompoundState, CompoundState>> out;
  for (std::size_t i = 0; i < universe_.size(); ++i) {
    for (std::size_t j = 0; j < universe_.size(); ++j) {
      if (facts_.test(i, j)) out.emplace_back(universe_.at(i), universe_.at(j));
    }
  }
  return out;
}

void AccessibilityRelation::add_raw_fact(const CompoundState& x, const CompoundState& y) {
  auto i = universe_.find(x);
  auto j = universe_.find(y);
  if (!i || !j) throw QueryError("raw fact outside the universe");
  facts_.set(*i, *j);
  closed_ = false;
}

// ---------------------------------------------------------------------------

namespace {

/// Precomputed structure of the universe used by the fixpoint loop.
struct ClosureTables {
  std::vector<std::size_t> composition_class;
  std::vector<std::vector<std::size_t>> classes;
  /// Ordered decompositions Z = (X, Y), both non-empty.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> decompositions;
  /// (factor, index of factor * state), factor != 1.
  std::vector<std::vector<std::pair<Rational, std::size_t>>> scalings;
  /// Single-part splits X ~ X' (symmetric).
  std::vector<std::pair<std::size_t, std::size_t>> splits;
  /// Per shared part Z: every (X + Z, X) present in the universe.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> by_shared;
};

ClosureTables build_tables(const SpaceCatalog& catalog, const std::vector<Rational>& grid,
                           const Universe& u) {
  ClosureTables t;
  const std::size_t n = u.size();
  t.composition_class.resize(n);
  std::map<std::vector<Rational>, std::size_t> class_ids;
  for (std::size_t i = 0; i < n; ++i) {
    auto comp = catalog.composition(u.at(i));
    auto [it, fresh] = class_ids.emplace(std::move(comp), t.classes.size());
    if (fresh) t.classes.emplace_back();
    t.composition_class[i] = it->second;
    t.classes[it->second].push_back(i);
  }

  t.decompositions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& parts = u.at(i).parts();
    const std::size_t k = parts.size();
    if (k < 2) continue;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::uint32_t mask = 1; mask + 1 < (1U << k); ++mask) {
      std::vector<Part> a;
      std::vector<Part> b;
      for (std::size_t p = 0; p < k; ++p) ((mask >> p) & 1U ? a : b).push_back(parts[p]);
      auto ia = u.find(CompoundState(std::move(a)));
      auto ib = u.find(CompoundState(std::move(b)));
      if (ia && ib) seen.emplace(*ia, *ib);
    }
    t.decompositions[i].assign(seen.begin(), seen.end());
  }
  t.by_shared.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [x, z] : t.decompositions[i]) t.by_shared[z].emplace_back(i, x);

  t.scalings.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = u.at(i);
    const Rational first = s.parts().front().lambda;
    for (const auto& g : grid) {
      const Rational factor = g / first;
      if (factor == 1) continue;
      bool ok = true;
      for (const auto& p : s.parts()) {
        if (!on_grid(grid, p.lambda * factor)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      if (auto j = u.find(s.scaled(factor))) t.scalings[i].emplace_back(factor, *j);
    }
    std::sort(t.scalings[i].begin(), t.scalings[i].end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& parts = u.at(i).parts();
    for (std::size_t p = 0; p < parts.size(); ++p) {
      for (const auto& a : grid) {
        const Rational b = parts[p].lambda - a;
        if (b <= 0 || b < a || !on_grid(grid, b)) continue;
        std::vector<Part> split;
        for (std::size_t q = 0; q < parts.size(); ++q) {
          if (q != p) split.push_back(parts[q]);
        }
        split.push_back(Part{parts[p].space, parts[p].state, a});
        split.push_back(Part{parts[p].space, parts[p].state, b});
        if (auto j = u.find(CompoundState(std::move(split)))) t.splits.emplace_back(i, *j);
      }
    }
  }
  return t;
}

const std::size_t* find_scaling(const std::vector<std::pair<Rational, std::size_t>>& v,
                                const Rational& factor) {
  auto it = std::lower_bound(v.begin(), v.end(), factor,
                             [](const auto& e, const Rational& f) { return e.first < f; });
  if (it == v.end() || it->first != factor) return nullptr;
  return &it->second;
}

bool transitive_pass(BitMatrix& m) {
  bool changed = false;
  const std::size_t n = m.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i != k && m.test(i, k)) changed |= m.or_row_into(k, i);
    }
  }
  return changed;
}

bool consistency_pass(BitMatrix& m, const ClosureTables& t) {
  bool changed = false;
  for (const auto& cls : t.classes) {
    for (auto z : cls) {
      if (t.decompositions[z].empty()) continue;
      for (auto zp : cls) {
        if (m.test(z, zp) || t.decompositions[zp].empty()) continue;
        bool found = false;
        for (const auto& [x, y] : t.decompositions[z]) {
          for (const auto& [xp, yp] : t.decompositions[zp]) {
            if (m.test(x, xp) && m.test(y, yp)) {
              found = true;
              break;
            }
          }
          if (found) break;
        }
        if (found) changed |= m.set(z, zp);
      }
    }
  }
  return changed;
}

bool scaling_pass(BitMatrix& m, const ClosureTables& t) {
  bool changed = false;
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (t.scalings[i].empty()) continue;
    for (auto j : t.classes[t.composition_class[i]]) {
      if (!m.test(i, j)) continue;
      for (const auto& [factor, si] : t.scalings[i]) {
        if (const auto* sj = find_scaling(t.scalings[j], factor)) changed |= m.set(si, *sj);
      }
    }
  }
  return changed;
}

// (X, Z) < (Y, Z) gives X < Y. Follows from the axioms only through
// stability, which the closure cannot apply, so it is a rule of its own.
bool cancellation_pass(BitMatrix& m, const ClosureTables& t) {
  bool changed = false;
  for (const auto& group : t.by_shared) {
    for (const auto& [w, x] : group)
      for (const auto& [wp, y] : group)
        if (m.test(w, wp)) changed |= m.set(x, y);
  }
  return changed;
}

}  // namespace

AccessibilityRelation close(const AccessibilityRelation& rel, const ClosureOptions& options) {
  AccessibilityRelation out;
  out.catalog_ = rel.catalog_;
  out.grid_ = rel.grid_;
  out.max_parts_ = options.max_parts;
  out.universe_ = Universe(
      enumerate_universe(rel.catalog_, rel.grid_, options.max_parts, options.universe_budget));
  const std::size_t n = out.universe_.size();
  out.facts_ = BitMatrix(n);

  for (std::size_t i = 0; i < rel.universe_.size(); ++i) {
    for (std::size_t j = 0; j < rel.universe_.size(); ++j) {
      if (!rel.facts_.test(i, j)) continue;
      auto a = out.universe_.find(rel.universe_.at(i));
      auto b = out.universe_.find(rel.universe_.at(j));
      if (!a || !b) {
        throw InputError("fact " + to_string(rel.universe_.at(i)) + " < " +
                         to_string(rel.universe_.at(j)) + " does not fit max_parts=" +
                         std::to_string(options.max_parts));
      }
      out.facts_.set(*a, *b);
    }
  }

  const auto tables = build_tables(out.catalog_, out.grid_, out.universe_);
  for (std::size_t i = 0; i < n; ++i) out.facts_.set(i, i);
  for (const auto& [a, b] : tables.splits) {
    out.facts_.set(a, b);
    out.facts_.set(b, a);
  }

  auto check_budget = [&] {
    if (out.facts_.count() > options.fact_budget) {
      throw BudgetExceeded("closure exceeds the fact budget of " +
                           std::to_string(options.fact_budget));
    }
  };
  check_budget();
  bool changed = true;
  while (changed) {
    changed = false;
    changed |= transitive_pass(out.facts_);
    changed |= consistency_pass(out.facts_, tables);
    changed |= scaling_pass(out.facts_, tables);
    changed |= cancellation_pass(out.facts_, tables);
    check_budget();
  }
  out.closed_ = true;
  return out;
}

// ---------------------------------------------------------------------------

OracleRelation::OracleRelation(SpaceCatalog catalog, std::map<std::string, Oracle> oracles,
                               double tolerance)
    : catalog_(std::move(catalog)), oracles_(std::move(oracles)), tolerance_(tolerance) {
  for (const auto& sp : catalog_.spaces()) {
    if (!oracles_.count(sp.id)) throw InputError("no entropy oracle for space '" + sp.id + "'");
  }
}

double OracleRelation::entropy(const CompoundState& s) const {
  double total = 0.0;
  for (const auto& p : s.parts()) total += to_double(p.lambda) * oracles_.at(p.space)(p.state);
  return total;
}

bool OracleRelation::representable(const CompoundState& s) const {
  for (const auto& p : s.parts()) {
    if (p.lambda <= 0 || !catalog_.has_state(p.space, p.state)) return false;
  }
  return !s.empty();
}

bool OracleRelation::accessible(const CompoundState& x, const CompoundState& y) const {
  catalog_.validate(x);
  catalog_.validate(y);
  if (catalog_.composition(x) != catalog_.composition(y)) return false;
  const double sx = entropy(x);
  const double sy = entropy(y);
  const double scale = std::max({1.0, std::abs(sx), std::abs(sy)});
  return sx <= sy + tolerance_ * scale;
}

}  // namespace entropy_engine
