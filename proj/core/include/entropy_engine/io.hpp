#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "entropy_engine/axioms.hpp"
#include "entropy_engine/calibration.hpp"
#include "entropy_engine/entropy.hpp"
#include "entropy_engine/relation.hpp"
#include "entropy_engine/simple_system.hpp"

namespace entropy_engine {

/// Contents of a relation file:
///   {"spaces": [{"id", "composition": ["p/q"..], "states": [..]}],
///    "facts": [[compound, compound]], "lambda_grid": ["1/2", "1"],
///    "epsilon_families": [{"name", "x", "y", "z0", "z1", "epsilons"}]}
/// with compound = [{"lambda": "p/q", "space", "state"}].
struct RelationSpec {
  std::vector<StateSpaceDecl> spaces;
  std::vector<std::pair<CompoundState, CompoundState>> facts;
  std::vector<Rational> lambda_grid;
  std::vector<EpsilonFamily> epsilon_families;
  /// Optional "max_parts" / "fact_budget" keys.
  ClosureOptions closure;
};

RelationSpec parse_relation_spec(const std::string& text, const std::string& source = "<input>");
RelationSpec load_relation_spec(const std::string& path);
AccessibilityRelation build_relation(const RelationSpec& spec);

/// {"type": "ideal_gas" | "van_der_waals" | "crossing" | "tabulated", ...}.
SimpleSystemModel parse_model(const std::string& text, const std::string& source = "<input>");

struct GraphSpec {
  StateSpaceGraph graph;
  std::size_t max_chain = 4;
};

/// {"nodes": [...], "facts": [...], "catalysts": [...], "max_chain": 4}.
/// Relative "entropy_table" paths resolve against base_dir.
GraphSpec parse_graph(const std::string& text, const std::string& source = "<input>",
                      const std::string& base_dir = ".");
GraphSpec load_graph(const std::string& path);

/// Entropy CSV with header space,state,S,resolution.
void write_entropy_csv(std::ostream& out, const EntropyTable& table);
/// Rows of `space` from such a CSV.
std::map<std::string, double> read_entropy_csv(std::istream& in, const std::string& space);

/// Square matrix with row/column labels; infinite entries as "inf"/"-inf".
void write_matrix_csv(std::ostream& out, const std::vector<std::string>& labels, const Matrix& m);

/// Shortest text that reads back to the same double.
std::string format_double(double x);

}  // namespace entropy_engine
