#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entropy_engine/io.hpp"
#include "entropy_engine/simple_system.hpp"
#include "entropy_engine/thermal.hpp"

namespace entropy_engine {

/// Stages in their canonical (dependency) order.
enum class Stage {
  close,
  check_axioms,
  check_ch,
  construct_entropy,
  verify_principle,
  simple_system_suite,
  thermal_suite,
  calibration_suite,
};

const char* to_string(Stage s);
/// nullopt for unknown names.
std::optional<Stage> parse_stage(const std::string& name);

/// Every tolerance a stage uses. Each one maps to a key of the
/// "tolerances" object of a pipeline file.
struct PipelineTolerances {
  Rational entropy_resolution{1, 128};  // "entropy_resolution"
  double oracle_relative = 1e-12;       // "oracle_relative"
  /// Max residual of the affine fit against the oracle; 2 * resolution
  /// when unset.
  std::optional<double> oracle_fit;     // "oracle_fit"
  double integrator_step = 1e-2;        // "integrator_step"
  double integrator_tolerance = 1e-6;   // "integrator_tolerance"
  double nesting = 1e-7;                // "nesting"
  double split = 1e-10;                 // "split"
  double equilibrium = kEquilibriumTolerance;  // "equilibrium"
  double constraints = 1e-9;            // "constraints"
};

/// Entropy oracle tabulated on named states of one simple system.
struct OracleSpec {
  std::string space;
  SimpleSystemModel model;
  std::vector<std::string> states;
  std::vector<StatePoint> points;
};

struct AdiabatRequest {
  std::size_t model = 0;
  StatePoint start;
  std::vector<std::vector<double>> path;
};

struct SimpleSuiteSpec {
  std::vector<SimpleSystemModel> models;
  std::size_t samples = 200;
  std::size_t nesting_pairs = 50;
  std::size_t probes = 8;
  std::vector<AdiabatRequest> adiabats;
};

struct SplitRequest {
  std::size_t left = 0;
  std::size_t right = 1;
  double U = 0.0;
  std::vector<double> v1, v2;
};

struct IsothermRequest {
  std::size_t model = 0;
  double T = 0.0;
  std::vector<std::vector<double>> probes;
};

struct ThermalSuiteSpec {
  std::vector<SimpleSystemModel> models;
  std::vector<SplitRequest> splits;
  std::size_t flow_pairs = 20;
  std::size_t zeroth_triples = 20;
  std::vector<IsothermRequest> isotherms;
};

struct PipelineSpec {
  std::vector<Stage> stages;
  std::uint64_t seed = 0;
  PipelineTolerances tolerances;
  std::optional<RelationSpec> relation;
  std::optional<OracleSpec> oracle;
  /// Reference pair per space; the first minimal and first maximal state
  /// otherwise.
  std::map<std::string, std::pair<std::string, std::string>> references;
  bool allow_constant = false;
  std::optional<SimpleSuiteSpec> simple_system;
  std::optional<ThermalSuiteSpec> thermal;
  std::optional<GraphSpec> graph;
};

/// Relative input paths ("relation", "graph") resolve against base_dir.
PipelineSpec parse_pipeline_spec(const std::string& text, const std::string& source = "<input>",
                                 const std::string& base_dir = ".");
PipelineSpec load_pipeline_spec(const std::string& path);

/// Throws InputError for duplicates, out-of-order stages, unmet stage
/// dependencies and missing input sections.
void validate_stages(const PipelineSpec& spec);

/// In-memory output: file name -> contents. "report.json" is always present.
struct ReportBundle {
  std::map<std::string, std::string> files;
  std::size_t violations = 0;

  int exit_code() const { return violations == 0 ? 0 : 1; }
};

inline constexpr int kReportSchemaVersion = 1;

ReportBundle run_pipeline(const PipelineSpec& spec);

/// Writes every file into a fresh sibling directory and renames it onto
/// `dir`, replacing previous contents. Throws InputError when the location
/// is unwritable.
void write_bundle(const ReportBundle& bundle, const std::string& dir);

/// Parses a relation, model, graph or pipeline file and lints it.
/// Returns a one-line summary; throws InputError.
std::string validate_file(const std::string& path);

}  // namespace entropy_engine
