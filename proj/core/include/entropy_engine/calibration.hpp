#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "entropy_engine/entropy.hpp"
#include "entropy_engine/rational.hpp"
#include "entropy_engine/relation.hpp"

namespace entropy_engine {

using BigRational = boost::multiprecision::cpp_rational;

BigRational to_big(const Rational& r);
/// Exact value of a finite double.
BigRational to_big(double x);

struct CompositeComponent {
  Rational lambda{1};
  std::string space;
};

/// A state space with a (calibrated) entropy table. Composite nodes list
/// their components; their states are the component states joined by '|'
/// and their entropy is the weighted sum of the component entropies.
struct SpaceNode {
  std::string id;
  std::vector<Rational> composition;
  std::vector<std::string> states;
  std::map<std::string, double> entropy;
  std::vector<CompositeComponent> components;

  bool composite() const { return !components.empty(); }
};

struct GraphEndpoint {
  std::string space;
  std::string state;
};

struct GraphFact {
  GraphEndpoint from;
  GraphEndpoint to;
};

class StateSpaceGraph {
 public:
  StateSpaceGraph() = default;
  /// Derives composite states and entropies, validates ids and rejects
  /// facts between spaces of different composition.
  StateSpaceGraph(std::vector<SpaceNode> nodes, std::vector<GraphFact> facts,
                  std::vector<std::string> catalysts);

  const std::vector<SpaceNode>& nodes() const { return nodes_; }
  const std::vector<GraphFact>& facts() const { return facts_; }
  const std::vector<std::string>& catalysts() const { return catalysts_; }
  const SpaceNode& node(const std::string& id) const;
  std::size_t index(const std::string& id) const;
  bool has(const std::string& id) const { return index_.count(id) != 0; }
  std::size_t size() const { return nodes_.size(); }
  double entropy(const GraphEndpoint& e) const;
  /// Composite node whose components are exactly {(1, a), (1, b)}.
  std::optional<std::size_t> product(const std::string& a, const std::string& b) const;

 private:
  std::vector<SpaceNode> nodes_;
  std::vector<GraphFact> facts_;
  std::vector<std::string> catalysts_;
  std::map<std::string, std::size_t> index_;
};

/// Graph over the spaces of a closed relation: one node per space with the
/// given tables (times the multipliers) and one fact per accessible pair of
/// unscaled states.
StateSpaceGraph graph_from_relation(const AccessibilityRelation& rel,
                                    const std::map<std::string, EntropyTable>& tables,
                                    const std::map<std::string, double>& multipliers = {});

/// Square matrix of extended reals (+inf: no process, -inf: unbounded below).
using Matrix = std::vector<std::vector<double>>;

/// min over facts X < Y of S(Y) - S(X); reflexive pairs give D(G, G) <= 0.
double compute_D(const StateSpaceGraph& g, const std::string& from, const std::string& to);
Matrix compute_D(const StateSpaceGraph& g);

struct ChainValue {
  double value = 0.0;
  /// Unchanged for chain bounds k, k+1 and k+2.
  bool stable = true;
  /// A negative cycle lies on some chain between the two spaces.
  bool unbounded_below = false;
};

/// Cheapest chain with at most max_chain D-edges (the empty chain gives
/// E(G, G) <= 0).
ChainValue compute_E(const Matrix& d, std::size_t from, std::size_t to, std::size_t max_chain);

struct ChainMatrices {
  Matrix D, E, F;
  std::vector<std::vector<bool>> stable;
  std::vector<std::vector<bool>> unbounded;
  std::size_t max_chain = 0;
};

/// E over all pairs, then F(G, G') = min(E(G, G'), E(G x C, G' x C)) over
/// the catalysts C whose products are present.
ChainMatrices compute_chains(const StateSpaceGraph& g, std::size_t max_chain);
double compute_F(const StateSpaceGraph& g, const ChainMatrices& m, const std::string& from,
                 const std::string& to);

struct SinkReport {
  bool ok = true;
  std::vector<std::string> violations;
  /// -F(G', G) <= F(G, G') checked on this many finite pairs.
  std::size_t pairs_checked = 0;
};

SinkReport check_no_sinks(const StateSpaceGraph& g, const ChainMatrices& m);

struct AdditiveConstants {
  bool feasible = true;
  std::map<std::string, BigRational> exact;
  std::map<std::string, double> B;
  std::map<std::string, std::size_t> component;
  /// One space per free constant (per component and element): the spaces
  /// set to 0 during back substitution because nothing bounded them.
  std::vector<std::string> free;
  /// On infeasibility: the constraints whose positive combination gives
  /// 0 <= negative, as "from->to" edges, ordered as a cycle when possible.
  std::vector<std::string> certificate;
};

/// Finds B with -F(G', G) <= B(G) - B(G') <= F(G, G') for every finite F,
/// composite B being the weighted sum of its components. Exact rational
/// Fourier-Motzkin elimination; per component the lexicographically first
/// space is the gauge.
AdditiveConstants solve_additive_constants(const StateSpaceGraph& g, const ChainMatrices& m);

/// Largest B(G) - B(G') - F(G, G') over finite F (<= 0 when all hold).
double constraint_violation(const StateSpaceGraph& g, const ChainMatrices& m,
                            const std::map<std::string, double>& B);

struct ChainCriterionReport {
  std::size_t checked = 0;
  std::size_t mismatches = 0;
  std::optional<std::string> witness;
};

/// X < Y iff S(X) + F(G, G') <= S(Y) over every pair of unscaled states of
/// the simple spaces, compared against the relation.
ChainCriterionReport verify_chain_criterion(const StateSpaceGraph& g, const ChainMatrices& m,
                               const AccessibilityQuery& rel);

struct GapReport {
  bool gap = false;
  double width = 0.0;
};

/// Width F(G, G') + F(G', G); both values must be finite.
GapReport detect_gap(const StateSpaceGraph& g, const ChainMatrices& m, const std::string& a,
                     const std::string& b);

}  // namespace entropy_engine
