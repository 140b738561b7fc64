#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entropy_engine/rational.hpp"
#include "entropy_engine/state.hpp"

namespace entropy_engine {

/// Read-only view of an adiabatic accessibility preorder. Implemented by
/// the finite closed relation and by the entropy-oracle relation.
class AccessibilityQuery {
 public:
  virtual ~AccessibilityQuery() = default;

  virtual const SpaceCatalog& catalog() const = 0;

  /// X < Y.
  virtual bool accessible(const CompoundState& x, const CompoundState& y) const = 0;

  /// Whether the state can be asked about at all. Finite relations only
  /// answer inside their generated universe.
  virtual bool representable(const CompoundState& s) const = 0;

  /// Finite set of admissible scales, or nullopt when every positive
  /// rational scale is admissible.
  virtual std::optional<std::vector<Rational>> scale_grid() const = 0;
};

/// Relation between two states.
enum class Order { equivalent, strictly_precedes, strictly_follows, incomparable };

const char* to_string(Order o);

/// Compositions must agree before anything else is asked.
Order classify(const AccessibilityQuery& rel, const CompoundState& x, const CompoundState& y);

/// Partition of the unscaled states of `space_id` into adiabats. Classes are
/// listed in order of their least member; each class keeps declared order,
/// so the first entry is the canonical representative.
std::vector<std::vector<std::string>> adiabats(const AccessibilityQuery& rel,
                                               const std::string& space_id);

/// Row-major square bit matrix, one row per universe state.
class BitMatrix {
 public:
  BitMatrix() = default;
  explicit BitMatrix(std::size_t n);

  std::size_t size() const { return n_; }
  bool test(std::size_t i, std::size_t j) const {
    return (bits_[i * words_ + j / 64] >> (j % 64)) & 1U;
  }
  /// Returns true when the bit was newly set.
  bool set(std::size_t i, std::size_t j);
  /// row(i) |= row(k); returns true on any change.
  bool or_row_into(std::size_t k, std::size_t i);
  std::size_t count() const;

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Indexed set of compound states.
class Universe {
 public:
  Universe() = default;
  explicit Universe(std::vector<CompoundState> states);

  std::size_t size() const { return states_.size(); }
  const CompoundState& at(std::size_t i) const { return states_[i]; }
  const std::vector<CompoundState>& states() const { return states_; }
  std::optional<std::size_t> find(const CompoundState& s) const;

 private:
  std::vector<CompoundState> states_;
  std::map<CompoundState, std::size_t> index_;
};

struct ClosureOptions {
  std::size_t max_parts = 3;
  std::size_t fact_budget = 1'000'000;
  std::size_t universe_budget = 20'000;
};

/// Finite adiabatic accessibility relation over compound states built from
/// declared spaces, scaled by lambdas from a finite grid.
class AccessibilityRelation final : public AccessibilityQuery {
 public:
  const SpaceCatalog& catalog() const override { return catalog_; }
  const std::vector<Rational>& lambda_grid() const { return grid_; }
  bool is_closed() const { return closed_; }
  /// Bound on parts per compound state; meaningful once closed.
  std::size_t max_parts() const { return max_parts_; }
  const Universe& universe() const { return universe_; }

  /// Requires a closed relation; throws QueryError otherwise or when a
  /// state lies outside the universe.
  bool accessible(const CompoundState& x, const CompoundState& y) const override;
  bool representable(const CompoundState& s) const override;
  std::optional<std::vector<Rational>> scale_grid() const override { return grid_; }

  /// Raw membership, no closure requirement. False outside the universe.
  bool holds(const CompoundState& x, const CompoundState& y) const;
  bool holds(std::size_t i, std::size_t j) const { return facts_.test(i, j); }

  std::size_t fact_count() const { return facts_.count(); }
  std::vector<std::pair<CompoundState, CompoundState>> facts() const;

  /// Adds a fact without closing; used to build deliberately broken
  /// relations for checker tests. Clears the closed flag.
  void add_raw_fact(const CompoundState& x, const CompoundState& y);

  friend AccessibilityRelation build_relation(std::vector<StateSpaceDecl> spaces,
                                              const std::vector<std::pair<CompoundState, CompoundState>>& facts,
                                              std::vector<Rational> lambda_grid);
  friend AccessibilityRelation close(const AccessibilityRelation& rel, const ClosureOptions& options);

 private:
  SpaceCatalog catalog_;
  std::vector<Rational> grid_;
  Universe universe_;
  BitMatrix facts_;
  bool closed_ = false;
  std::size_t max_parts_ = 0;
};

/// Unclosed relation holding exactly the given facts plus reflexive pairs
/// for every declared unit state and every state mentioned in a fact.
/// Throws InputError for unknown ids, non-positive lambdas, lambdas off the
/// grid, a grid without 1, or a fact whose sides differ in composition.
AccessibilityRelation build_relation(std::vector<StateSpaceDecl> spaces,
                                     const std::vector<std::pair<CompoundState, CompoundState>>& facts,
                                     std::vector<Rational> lambda_grid);

/// Smallest superset closed under reflexivity, transitivity, consistency,
/// scaling, splitting/recombination and cancellation over the universe of compound states
/// with at most `max_parts` parts and grid scales. Throws BudgetExceeded.
AccessibilityRelation close(const AccessibilityRelation& rel, const ClosureOptions& options = {});

/// Every compound state with 1..max_parts parts drawn from (grid lambda,
/// space, state), ordered by part count then lexicographically.
std::vector<CompoundState> enumerate_universe(const SpaceCatalog& catalog,
                                              const std::vector<Rational>& grid,
                                              std::size_t max_parts, std::size_t budget);

/// Relation induced by a per-space entropy oracle:
/// X < Y iff compositions agree and sum(lambda * sigma) on the left is at
/// most the same sum on the right (up to a relative tolerance).
class OracleRelation final : public AccessibilityQuery {
 public:
  using Oracle = std::function<double(const std::string& state)>;

  OracleRelation(SpaceCatalog catalog, std::map<std::string, Oracle> oracles,
                 double tolerance = 1e-12);

  const SpaceCatalog& catalog() const override { return catalog_; }
  bool accessible(const CompoundState& x, const CompoundState& y) const override;
  bool representable(const CompoundState& s) const override;
  std::optional<std::vector<Rational>> scale_grid() const override { return std::nullopt; }

  /// sum(lambda * sigma) over parts.
  double entropy(const CompoundState& s) const;

 private:
  SpaceCatalog catalog_;
  std::map<std::string, Oracle> oracles_;
  double tolerance_;
};

}  // namespace entropy_engine
