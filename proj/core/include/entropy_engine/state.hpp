#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entropy_engine/rational.hpp"

namespace entropy_engine {

/// A declared state space: an identifier, the amount of each conserved
/// element tag it carries, and a finite ordered list of state ids.
struct StateSpaceDecl {
  std::string id;
  std::vector<Rational> composition;
  std::vector<std::string> states;
};

/// One scaled component of a compound state: lambda * (space, state).
struct Part {
  std::string space;
  std::string state;
  Rational lambda{1};

  friend bool operator==(const Part&, const Part&) = default;
  friend std::strong_ordering operator<=>(const Part& a, const Part& b);
};

/// Finite multiset of scaled states, kept in canonical order
/// (space, state, lambda) so equal multisets compare equal.
class CompoundState {
 public:
  CompoundState() = default;
  explicit CompoundState(std::vector<Part> parts);

  static CompoundState single(std::string space, std::string state, Rational lambda = Rational(1));

  const std::vector<Part>& parts() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  bool empty() const { return parts_.empty(); }

  /// Multiset union, i.e. the composed state (X, Y).
  CompoundState operator+(const CompoundState& other) const;

  /// Every lambda multiplied by `factor` (> 0).
  CompoundState scaled(const Rational& factor) const;

  /// Sum of lambdas over parts that belong to `space`.
  Rational total_scale(const std::string& space) const;

  friend bool operator==(const CompoundState&, const CompoundState&) = default;
  friend auto operator<=>(const CompoundState& a, const CompoundState& b) {
    return a.parts_ <=> b.parts_;
  }

 private:
  std::vector<Part> parts_;
};

/// "G:x", "1/2*G:x + G:y".
std::string to_string(const CompoundState& s);

/// A term of a formal combination with a possibly zero or negative
/// coefficient, e.g. the (1 - lambda) X0 term of the entropy construction.
struct SignedTerm {
  Rational coefficient;
  std::string space;
  std::string state;
};

/// Rewrites a signed comparison "lhs < rhs" into a comparison of genuine
/// compound states: zero terms vanish ((X, 0Y) = X) and negative terms move
/// to the other side ((X, -Y) < Z means X < (Y, Z)).
std::pair<CompoundState, CompoundState> normalize_comparison(const std::vector<SignedTerm>& lhs,
                                                             const std::vector<SignedTerm>& rhs);

/// Lookup structure over a list of declared spaces.
class SpaceCatalog {
 public:
  SpaceCatalog() = default;
  /// Validates unique ids, unique states per space and a common composition
  /// length. When every composition is empty each space gets its own
  /// implicit element tag, so distinct spaces are never comparable.
  explicit SpaceCatalog(std::vector<StateSpaceDecl> spaces);

  const std::vector<StateSpaceDecl>& spaces() const { return spaces_; }
  const StateSpaceDecl& space(const std::string& id) const;
  bool has_space(const std::string& id) const;
  bool has_state(const std::string& space, const std::string& state) const;
  std::size_t element_count() const { return element_count_; }

  /// Position of the space in declaration order.
  std::size_t space_index(const std::string& id) const;
  /// Position of the state inside its space's declared order.
  std::size_t state_index(const std::string& space, const std::string& state) const;

  /// Throws InputError when a part references an unknown space or state
  /// or carries a non-positive lambda.
  void validate(const CompoundState& s) const;

  /// Sum over parts of lambda * composition(space).
  std::vector<Rational> composition(const CompoundState& s) const;

 private:
  std::vector<StateSpaceDecl> spaces_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::map<std::string, std::size_t>> state_index_;
  std::size_t element_count_ = 0;
};

}  // namespace entropy_engine
