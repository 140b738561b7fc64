#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entropy_engine/relation.hpp"

namespace entropy_engine {

/// Outcome of one universally quantified axiom scan over a finite relation.
struct AxiomReport {
  std::string axiom;  // "A1" .. "A5", "cancellation"
  bool holds = true;
  std::size_t instances_checked = 0;
  std::optional<std::string> witness;
};

// Direct scanners. They read raw fact membership and share no code with the
// closure engine, so they also work on hand-built (unclosed) relations.
AxiomReport scan_reflexivity(const AccessibilityRelation& rel);
AxiomReport scan_transitivity(const AccessibilityRelation& rel);
AxiomReport scan_consistency(const AccessibilityRelation& rel);
AxiomReport scan_scaling_invariance(const AccessibilityRelation& rel);
AxiomReport scan_splitting(const AccessibilityRelation& rel);

/// A1..A5 in order.
std::vector<AxiomReport> scan_axioms(const AccessibilityRelation& rel);

struct CancellationWitness {
  CompoundState x, y, z;
};

struct CancellationResult {
  bool holds = true;
  std::size_t triples_checked = 0;
  std::optional<CancellationWitness> witness;
};

/// (X, Z) < (Y, Z) implies X < Y for every triple whose compounds lie in
/// the universe.
CancellationResult check_cancellation(const AccessibilityRelation& rel);

/// Stability surrogate: a family (X, eps Z0) < (Y, eps Z1) over a list of
/// shrinking eps.
struct EpsilonFamily {
  std::string name;
  CompoundState x, y, z0, z1;
  std::vector<Rational> epsilons;
};

struct StabilityResult {
  std::string name;
  /// Number of eps whose compounds were representable.
  std::size_t epsilons_checked = 0;
  /// Every representable premise held.
  bool premise_holds = false;
  bool limit_present = false;
  /// premise_holds && !limit_present
  bool flagged = false;
};

std::vector<StabilityResult> check_stability(const AccessibilityRelation& rel,
                                             const std::vector<EpsilonFamily>& families);

struct ComparisonResult {
  bool holds = true;
  std::size_t pairs_checked = 0;
  /// Largest part count that was scanned; the verified bound.
  std::size_t parts_bound = 1;
  std::optional<std::pair<CompoundState, CompoundState>> witness;
};

/// Scans every pair inside every group; a group is one (scaled product)
/// state space. Returns the first incomparable pair.
ComparisonResult check_comparison_hypothesis(const AccessibilityQuery& rel,
                                             const std::vector<std::vector<CompoundState>>& groups);

/// Groups for the listed spaces: the unscaled states of each space and,
/// when `products` is set, every scaled product of those spaces present in
/// the universe (grouped by their multiset of (space, lambda)).
ComparisonResult check_comparison_hypothesis(const AccessibilityRelation& rel,
                                             const std::vector<std::string>& space_ids,
                                             bool products);

}  // namespace entropy_engine
