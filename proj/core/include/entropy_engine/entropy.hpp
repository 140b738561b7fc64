#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entropy_engine/axioms.hpp"
#include "entropy_engine/relation.hpp"

namespace entropy_engine {

/// Entropy values on one state space, gauged so S(ref_low) = 0 and
/// S(ref_high) = 1 when built by the reference construction.
struct EntropyTable {
  std::string space;
  std::vector<std::string> states;  // declared order
  std::map<std::string, double> values;
  /// Exact values when the table came out of the lambda search.
  std::map<std::string, Rational> exact;
  std::string ref_low;
  std::string ref_high;
  Rational lambda_resolution{0};
  /// No strictly ordered reference pair existed and the caller allowed it.
  bool constant = false;

  double value(const std::string& state) const;
};

/// Real-valued table, e.g. an oracle tabulated on the declared states.
EntropyTable make_table(const std::string& space, const std::vector<std::string>& states,
                        const std::map<std::string, double>& values, double resolution = 0.0);

struct EntropyOptions {
  /// Lattice spacing used when the relation admits every rational scale.
  /// 1/128 is grid mode; 2^-20 is the bisection tolerance of oracle mode.
  Rational resolution{1, 128};
  bool allow_constant = false;
};

/// Raised when a comparison the construction depends on is undecided by
/// the relation; carries the incomparable pair.
class ComparabilityFailure : public EngineError {
 public:
  ComparabilityFailure(const std::string& what, CompoundState a, CompoundState b)
      : EngineError(what), first(std::move(a)), second(std::move(b)) {}
  CompoundState first, second;
};

/// Whether ((t - mu) X0, mu X1) < t X after moving negative terms across.
bool reference_mix_precedes(const AccessibilityQuery& rel, const std::string& space,
                            const std::string& x0, const std::string& x1, const Rational& mu,
                            const std::string& x, const Rational& t = Rational(1));

/// Largest lambda with ((1 - lambda) X0, lambda X1) < X for every state of
/// the space. On finite relations lambda ranges over the combinations the
/// grid can represent; otherwise over resolution * Z (galloping search).
/// Throws InputError when X0 < X1 is not strict (unless allow_constant) and
/// ComparabilityFailure when a needed two-fold product pair is incomparable.
EntropyTable construct_entropy(const AccessibilityQuery& rel, const std::string& space,
                               const std::string& x0, const std::string& x1,
                               const EntropyOptions& options = {});

/// Same search for the scaled copy t X; extensivity asks for t * S(X).
Rational scaled_entropy(const AccessibilityQuery& rel, const EntropyTable& table,
                        const std::string& state, const Rational& t,
                        const EntropyOptions& options = {});

struct ExtensivityReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::optional<std::string> witness;
};

ExtensivityReport check_extensivity(const AccessibilityQuery& rel, const EntropyTable& table,
                                    const std::vector<Rational>& scales,
                                    const EntropyOptions& options = {});

struct PrincipleCheck {
  enum class Kind { monotone, equivalence, strict };
  Kind kind = Kind::monotone;
  CompoundState lhs, rhs;
  double entropy_lhs = 0.0;
  double entropy_rhs = 0.0;
  /// Non-negative when the inequality holds.
  double margin = 0.0;
  double tolerance = 0.0;
  bool ok = true;
};

const char* to_string(PrincipleCheck::Kind k);

struct PrincipleReport {
  std::vector<PrincipleCheck> checks;
  std::size_t violations = 0;
  /// Facts whose per-space total scales differ (cross-space processes).
  std::size_t skipped = 0;
};

/// Weighted entropy sums of every accessible pair with matching per-space
/// total scales must be ordered; equivalent pairs must agree and strict
/// pairs must increase, all at table resolution.
PrincipleReport verify_entropy_principle(const AccessibilityQuery& rel,
                                         const std::map<std::string, EntropyTable>& tables,
                                         const std::map<std::string, double>& multipliers,
                                         const std::vector<std::pair<CompoundState, CompoundState>>& pairs);

/// Every fact of a closed relation.
PrincipleReport verify_entropy_principle(const AccessibilityRelation& rel,
                                         const std::map<std::string, EntropyTable>& tables,
                                         const std::map<std::string, double>& multipliers);

/// Weighted sum of table values over the parts.
double compound_entropy(const CompoundState& s, const std::map<std::string, EntropyTable>& tables,
                        const std::map<std::string, double>& multipliers);

struct AffineFit {
  double a = 1.0;
  double b = 0.0;
  double max_residual = 0.0;
  std::size_t points = 0;
  /// The source table is constant; no fit was attempted.
  bool degenerate = false;
};

/// Least squares target ~ a * source + b over the common states.
AffineFit fit_affine(const EntropyTable& source, const EntropyTable& target);

struct Calibrators {
  std::string x0, x1;  // first space
  std::string y0, y1;  // second space
};

/// First quadruple (declared order) with X0 << X1, Y0 << Y1 and
/// (X0, Y1) ~ (X1, Y0). Throws QueryError when the universe has none.
Calibrators find_calibrators(const AccessibilityQuery& rel, const std::string& space1,
                             const std::string& space2);

struct CalibrationLink {
  std::string space1;
  std::string space2;
  Calibrators calibrators;
};

struct CalibrationResult {
  std::map<std::string, double> a;
  /// Largest |S1(X0) + S2(Y1) - S1(X1) - S2(Y0)| after scaling.
  double residual = 0.0;
};

/// The first table is the gauge (a = 1); every other space must be reachable
/// through links. Throws NumericError on a degenerate calibrator.
CalibrationResult calibrate_multiplicative(const std::vector<EntropyTable>& tables,
                                           const std::vector<CalibrationLink>& links);

}  // namespace entropy_engine
