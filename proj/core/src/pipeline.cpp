#include "entropy_engine/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>

#include "entropy_engine/axioms.hpp"
#include "entropy_engine/calibration.hpp"
#include "entropy_engine/entropy.hpp"
#include "entropy_engine/relation.hpp"
#include "loaders.hpp"

namespace entropy_engine {

namespace {

using detail::json;
namespace fs = std::filesystem;

constexpr std::pair<Stage, const char*> kStageNames[] = {
    {Stage::close, "close"},
    {Stage::check_axioms, "check_axioms"},
    {Stage::check_ch, "check_ch"},
    {Stage::construct_entropy, "construct_entropy"},
    {Stage::verify_principle, "verify_principle"},
    {Stage::simple_system_suite, "simple_system_suite"},
    {Stage::thermal_suite, "thermal_suite"},
    {Stage::calibration_suite, "calibration_suite"},
};

std::size_t get_count(const json& obj, const std::string& key, const std::string& ctx, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) throw InputError(detail::where(ctx, key) + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

std::size_t get_index(const json& obj, const std::string& key, const std::string& ctx, std::size_t bound) {
  const auto i = get_count(obj, key, ctx, 0);
  if (i >= bound) throw InputError(detail::where(ctx, key) + ": model index out of range");
  return i;
}

std::vector<std::vector<double>> get_path(const json& v, const std::string& ctx) {
  if (!v.is_array()) throw InputError(ctx + ": expected a list of work coordinates");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto c = ctx + "[" + std::to_string(i) + "]";
    out.push_back(v[i].is_array() ? detail::get_numbers(v[i], c) : std::vector<double>{detail::get_number(v[i], c)});
  }
  return out;
}

std::vector<SimpleSystemModel> get_models(const json& obj, const std::string& ctx) {
  const auto& ms = detail::require(obj, "models", ctx);
  if (!ms.is_array() || ms.empty()) throw InputError(detail::where(ctx, "models") + ": expected a non-empty array");
  std::vector<SimpleSystemModel> out;
  for (std::size_t i = 0; i < ms.size(); ++i)
    out.push_back(detail::model_from_json(ms[i], detail::where(ctx, "models") + "[" + std::to_string(i) + "]"));
  return out;
}

const json& resolve(const json& v, const std::string& base_dir, json& storage, std::string& source) {
  if (!v.is_string()) return v;
  auto p = fs::path(v.get<std::string>());
  if (p.is_relative()) p = fs::path(base_dir) / p;
  source = p.string();
  storage = detail::load_json_file(source);
  return storage;
}

std::vector<double> linspace(const json& v, const std::string& ctx) {
  const auto xs = detail::get_numbers(v, ctx);
  if (xs.size() != 3 || xs[2] < 1 || xs[2] != std::floor(xs[2])) throw InputError(ctx + ": expected [lo, hi, count]");
  const auto n = static_cast<std::size_t>(xs[2]);
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(n == 1 ? xs[0] : xs[0] + (xs[1] - xs[0]) * double(i) / double(n - 1));
  return out;
}

OracleSpec oracle_from_json(const json& v, const std::string& ctx) {
  OracleSpec o;
  o.space = v.contains("space") ? detail::get_string(v, "space", ctx) : "gas";
  o.model = detail::model_from_json(detail::require(v, "model", ctx), detail::where(ctx, "model"));
  if (!o.model.entropy) throw InputError(detail::where(ctx, "model") + ": oracle model needs an entropy");
  if (v.contains("grid")) {
    if (o.model.n != 1) throw InputError(detail::where(ctx, "grid") + ": grid needs one work coordinate");
    const auto& g = v.at("grid");
    const auto us = linspace(detail::require(g, "U", detail::where(ctx, "grid")), detail::where(ctx, "grid.U"));
    const auto vs = linspace(detail::require(g, "V", detail::where(ctx, "grid")), detail::where(ctx, "grid.V"));
    for (std::size_t i = 0; i < us.size(); ++i)
      for (std::size_t j = 0; j < vs.size(); ++j) {
        o.states.push_back("u" + std::to_string(i) + "_v" + std::to_string(j));
        o.points.push_back(StatePoint{us[i], {vs[j]}});
      }
  } else {
    const auto& st = detail::require(v, "states", ctx);
    if (!st.is_array()) throw InputError(detail::where(ctx, "states") + ": expected an array");
    for (std::size_t i = 0; i < st.size(); ++i) {
      const auto c = detail::where(ctx, "states") + "[" + std::to_string(i) + "]";
      o.states.push_back(detail::get_string(st[i], "id", c));
      o.points.push_back(detail::point_from_json(st[i], c));
    }
  }
  if (o.states.empty()) throw InputError(ctx + ": oracle has no states");
  for (std::size_t i = 0; i < o.points.size(); ++i) {
    if (!o.model.domain.contains(o.points[i]))
      throw InputError(ctx + ": state '" + o.states[i] + "' lies outside the model domain");
  }
  return o;
}

PipelineTolerances tolerances_from_json(const json& v, const std::string& ctx) {
  static const char* const known[] = {"entropy_resolution", "oracle_relative", "oracle_fit", "integrator_step",
                                      "integrator_tolerance", "nesting", "split", "equilibrium", "constraints"};
  if (!v.is_object()) throw InputError(ctx + ": expected an object");
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }) == std::end(known))
      throw InputError(detail::where(ctx, it.key()) + ": unknown tolerance");
  }
  PipelineTolerances t;
  if (v.contains("entropy_resolution")) {
    t.entropy_resolution = detail::get_rational(v.at("entropy_resolution"), detail::where(ctx, "entropy_resolution"));
    if (t.entropy_resolution <= 0) throw InputError(detail::where(ctx, "entropy_resolution") + ": must be positive");
  }
  t.oracle_relative = detail::get_number(v, "oracle_relative", ctx, t.oracle_relative);
  if (v.contains("oracle_fit")) t.oracle_fit = detail::get_number(v.at("oracle_fit"), detail::where(ctx, "oracle_fit"));
  t.integrator_step = detail::get_number(v, "integrator_step", ctx, t.integrator_step);
  t.integrator_tolerance = detail::get_number(v, "integrator_tolerance", ctx, t.integrator_tolerance);
  t.nesting = detail::get_number(v, "nesting", ctx, t.nesting);
  t.split = detail::get_number(v, "split", ctx, t.split);
  t.equilibrium = detail::get_number(v, "equilibrium", ctx, t.equilibrium);
  t.constraints = detail::get_number(v, "constraints", ctx, t.constraints);
  return t;
}

PipelineSpec pipeline_from_json(const json& v, const std::string& ctx, const std::string& base_dir) {
  if (!v.is_object()) throw InputError(ctx + ": expected an object");
  PipelineSpec spec;
  const auto& stages = detail::require(v, "stages", ctx);
  if (!stages.is_array()) throw InputError(detail::where(ctx, "stages") + ": expected an array");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto c = detail::where(ctx, "stages") + "[" + std::to_string(i) + "]";
    if (!stages[i].is_string()) throw InputError(c + ": expected a stage name");
    auto s = parse_stage(stages[i].get<std::string>());
    if (!s) throw InputError(c + ": unknown stage '" + stages[i].get<std::string>() + "'");
    spec.stages.push_back(*s);
  }
  if (v.contains("seed")) {
    if (!v.at("seed").is_number_unsigned()) throw InputError(detail::where(ctx, "seed") + ": expected a non-negative integer");
    spec.seed = v.at("seed").get<std::uint64_t>();
  }
  if (v.contains("tolerances")) spec.tolerances = tolerances_from_json(v.at("tolerances"), detail::where(ctx, "tolerances"));
  json storage;
  if (v.contains("relation")) {
    std::string source = detail::where(ctx, "relation");
    const auto& r = resolve(v.at("relation"), base_dir, storage, source);
    spec.relation = detail::relation_from_json(r, source);
  }
  if (v.contains("oracle")) spec.oracle = oracle_from_json(v.at("oracle"), detail::where(ctx, "oracle"));
  if (spec.relation && spec.oracle) throw InputError(ctx + ": give either a relation or an oracle, not both");
  if (v.contains("entropy")) {
    const auto& e = v.at("entropy");
    const auto ec = detail::where(ctx, "entropy");
    if (e.contains("references")) {
      const auto& refs = e.at("references");
      if (!refs.is_object()) throw InputError(detail::where(ec, "references") + ": expected {space: [x0, x1]}");
      for (auto it = refs.begin(); it != refs.end(); ++it) {
        const auto c = detail::where(detail::where(ec, "references"), it.key());
        if (!it.value().is_array() || it.value().size() != 2 || !it.value()[0].is_string() || !it.value()[1].is_string())
          throw InputError(c + ": expected [x0, x1]");
        spec.references[it.key()] = {it.value()[0].get<std::string>(), it.value()[1].get<std::string>()};
      }
    }
    if (e.contains("allow_constant")) {
      if (!e.at("allow_constant").is_boolean()) throw InputError(detail::where(ec, "allow_constant") + ": expected a boolean");
      spec.allow_constant = e.at("allow_constant").get<bool>();
    }
  }
  if (v.contains("simple_system")) {
    const auto& s = v.at("simple_system");
    const auto c = detail::where(ctx, "simple_system");
    SimpleSuiteSpec suite;
    suite.models = get_models(s, c);
    suite.samples = get_count(s, "samples", c, suite.samples);
    suite.nesting_pairs = get_count(s, "nesting_pairs", c, suite.nesting_pairs);
    suite.probes = get_count(s, "probes", c, suite.probes);
    if (s.contains("adiabats")) {
      const auto& as = s.at("adiabats");
      if (!as.is_array()) throw InputError(detail::where(c, "adiabats") + ": expected an array");
      for (std::size_t i = 0; i < as.size(); ++i) {
        const auto ac = detail::where(c, "adiabats") + "[" + std::to_string(i) + "]";
        AdiabatRequest a;
        a.model = get_index(as[i], "model", ac, suite.models.size());
        a.start = detail::point_from_json(detail::require(as[i], "start", ac), detail::where(ac, "start"));
        a.path = get_path(detail::require(as[i], "path", ac), detail::where(ac, "path"));
        suite.adiabats.push_back(std::move(a));
      }
    }
    spec.simple_system = std::move(suite);
  }
  if (v.contains("thermal")) {
    const auto& t = v.at("thermal");
    const auto c = detail::where(ctx, "thermal");
    ThermalSuiteSpec suite;
    suite.models = get_models(t, c);
    for (std::size_t i = 0; i < suite.models.size(); ++i) {
      if (!suite.models[i].entropy) throw InputError(c + ".models[" + std::to_string(i) + "]: thermal models need an entropy");
    }
    suite.flow_pairs = get_count(t, "flow_pairs", c, suite.flow_pairs);
    suite.zeroth_triples = get_count(t, "zeroth_triples", c, suite.zeroth_triples);
    if (t.contains("splits")) {
      const auto& ss = t.at("splits");
      if (!ss.is_array()) throw InputError(detail::where(c, "splits") + ": expected an array");
      for (std::size_t i = 0; i < ss.size(); ++i) {
        const auto sc = detail::where(c, "splits") + "[" + std::to_string(i) + "]";
        SplitRequest r;
        r.left = get_index(ss[i], "left", sc, suite.models.size());
        r.right = get_index(ss[i], "right", sc, suite.models.size());
        r.U = detail::get_number(detail::require(ss[i], "U", sc), detail::where(sc, "U"));
        r.v1 = detail::get_numbers(detail::require(ss[i], "v1", sc), detail::where(sc, "v1"));
        r.v2 = detail::get_numbers(detail::require(ss[i], "v2", sc), detail::where(sc, "v2"));
        suite.splits.push_back(std::move(r));
      }
    }
    if (t.contains("isotherms")) {
      const auto& is = t.at("isotherms");
      if (!is.is_array()) throw InputError(detail::where(c, "isotherms") + ": expected an array");
      for (std::size_t i = 0; i < is.size(); ++i) {
        const auto ic = detail::where(c, "isotherms") + "[" + std::to_string(i) + "]";
        IsothermRequest r;
        r.model = get_index(is[i], "model", ic, suite.models.size());
        r.T = detail::get_number(detail::require(is[i], "T", ic), detail::where(ic, "T"));
        r.probes = get_path(detail::require(is[i], "probes", ic), detail::where(ic, "probes"));
        suite.isotherms.push_back(std::move(r));
      }
    }
    spec.thermal = std::move(suite);
  }
  if (v.contains("graph")) {
    std::string source = detail::where(ctx, "graph");
    std::string dir = base_dir;
    if (v.at("graph").is_string()) {
      auto p = fs::path(v.at("graph").get<std::string>());
      if (p.is_relative()) p = fs::path(base_dir) / p;
      dir = p.parent_path().empty() ? "." : p.parent_path().string();
    }
    const auto& g = resolve(v.at("graph"), base_dir, storage, source);
    spec.graph = detail::graph_from_json(g, source, dir);
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Running.

struct Context {
  const PipelineSpec& spec;
  std::optional<AccessibilityRelation> raw;
  std::optional<AccessibilityRelation> closed;
  std::unique_ptr<OracleRelation> oracle;
  std::map<std::string, EntropyTable> tables;
  std::map<std::string, double> multipliers;
  ReportBundle bundle;
};

const AccessibilityQuery* query(const Context& c) {
  if (c.closed) return &*c.closed;
  if (c.oracle) return c.oracle.get();
  return nullptr;
}

json point_json(const StatePoint& p) { return json{{"U", detail::extended(p.U)}, {"V", p.V}}; }

std::string point_text(const StatePoint& p) {
  std::string s = "(" + format_double(p.U);
  for (double v : p.V) s += ", " + format_double(v);
  return s + ")";
}

std::uint64_t stage_seed(std::uint64_t seed, std::size_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (std::uint64_t(words[0]) << 32) | words[1];
}

EntropyOptions entropy_options(const Context& c) {
  EntropyOptions o;
  o.resolution = c.spec.tolerances.entropy_resolution;
  o.allow_constant = c.spec.allow_constant;
  return o;
}

void run_close(Context& c, json& out, std::vector<std::string>& violations) {
  out["facts_in"] = c.raw->fact_count();
  try {
    c.closed = close(*c.raw, c.spec.relation->closure);
  } catch (const BudgetExceeded& e) {
    violations.push_back(std::string("closure budget exceeded: ") + e.what());
    return;
  }
  out["facts_closed"] = c.closed->fact_count();
  out["universe"] = c.closed->universe().size();
  out["max_parts"] = c.closed->max_parts();
}

void run_axioms(Context& c, json& out, std::vector<std::string>& violations) {
  const AccessibilityRelation& rel = c.closed ? *c.closed : *c.raw;
  out["closed"] = rel.is_closed();
  json axioms = json::array();
  for (const auto& r : scan_axioms(rel)) {
    json a{{"axiom", r.axiom}, {"holds", r.holds}, {"instances_checked", r.instances_checked}};
    if (r.witness) a["witness"] = *r.witness;
    if (!r.holds) violations.push_back(r.axiom + ": " + r.witness.value_or("violated"));
    axioms.push_back(std::move(a));
  }
  out["axioms"] = std::move(axioms);
  const auto canc = check_cancellation(rel);
  json cj{{"holds", canc.holds}, {"triples_checked", canc.triples_checked}};
  if (canc.witness) {
    const auto& w = *canc.witness;
    cj["witness"] = json{{"x", to_string(w.x)}, {"y", to_string(w.y)}, {"z", to_string(w.z)}};
    violations.push_back("cancellation: (" + to_string(w.x) + ", " + to_string(w.z) + ") < (" + to_string(w.y) + ", " +
                         to_string(w.z) + ") but not " + to_string(w.x) + " < " + to_string(w.y));
  }
  out["cancellation"] = std::move(cj);
  json fams = json::array();
  for (const auto& s : check_stability(rel, c.spec.relation->epsilon_families)) {
    fams.push_back(json{{"name", s.name}, {"epsilons_checked", s.epsilons_checked}, {"premise_holds", s.premise_holds},
                        {"limit_present", s.limit_present}, {"flagged", s.flagged}});
    if (s.flagged) violations.push_back("stability: family '" + s.name + "' holds for every eps but not in the limit");
  }
  out["stability"] = std::move(fams);
}

void run_ch(Context& c, json& out, std::vector<std::string>& violations) {
  ComparisonResult r;
  if (c.closed) {
    std::vector<std::string> ids;
    for (const auto& s : c.closed->catalog().spaces()) ids.push_back(s.id);
    r = check_comparison_hypothesis(*c.closed, ids, true);
  } else {
    std::vector<CompoundState> group;
    for (const auto& s : c.spec.oracle->states) group.push_back(CompoundState::single(c.spec.oracle->space, s));
    r = check_comparison_hypothesis(*c.oracle, {group});
  }
  out["holds"] = r.holds;
  out["pairs_checked"] = r.pairs_checked;
  out["parts_bound"] = r.parts_bound;
  if (r.witness) {
    out["witness"] = json::array({to_string(r.witness->first), to_string(r.witness->second)});
    violations.push_back("comparison: " + to_string(r.witness->first) + " and " + to_string(r.witness->second) +
                         " are incomparable");
  }
}

std::pair<std::string, std::string> default_references(const AccessibilityQuery& q, const StateSpaceDecl& d) {
  auto extreme = [&](Order strict_side) {
    for (const auto& x : d.states) {
      bool dominated = false;
      for (const auto& y : d.states) {
        if (classify(q, CompoundState::single(d.id, y), CompoundState::single(d.id, x)) == strict_side) {
          dominated = true;
          break;
        }
      }
      if (!dominated) return x;
    }
    return d.states.front();
  };
  return {extreme(Order::strictly_precedes), extreme(Order::strictly_follows)};
}

void run_entropy(Context& c, json& out, std::vector<std::string>& violations) {
  const AccessibilityQuery& q = *query(c);
  const auto options = entropy_options(c);
  json spaces = json::object();
  for (const auto& d : q.catalog().spaces()) {
    auto refs = default_references(q, d);
    if (auto it = c.spec.references.find(d.id); it != c.spec.references.end()) refs = it->second;
    json sj{{"ref_low", refs.first}, {"ref_high", refs.second}};
    try {
      auto table = construct_entropy(q, d.id, refs.first, refs.second, options);
      sj["lambda_resolution"] = to_string(table.lambda_resolution);
      sj["constant"] = table.constant;
      std::ostringstream csv;
      write_entropy_csv(csv, table);
      const auto file = "entropy_" + d.id + ".csv";
      c.bundle.files[file] = csv.str();
      sj["table"] = file;
      c.tables[d.id] = std::move(table);
    } catch (const ComparabilityFailure& e) {
      sj["error"] = e.what();
      sj["incomparable"] = json::array({to_string(e.first), to_string(e.second)});
      violations.push_back(d.id + ": " + e.what());
    } catch (const InputError& e) {
      sj["error"] = e.what();
      violations.push_back(d.id + ": " + e.what());
    }
    spaces[d.id] = std::move(sj);
  }
  if (c.oracle && c.tables.count(c.spec.oracle->space)) {
    const auto& o = *c.spec.oracle;
    std::map<std::string, double> truth;
    for (std::size_t i = 0; i < o.states.size(); ++i) truth[o.states[i]] = o.model.sigma(o.points[i]);
    const auto fit = fit_affine(make_table(o.space, o.states, truth), c.tables.at(o.space));
    const double bound = c.spec.tolerances.oracle_fit.value_or(2.0 * to_double(c.spec.tolerances.entropy_resolution));
    spaces[o.space]["oracle_fit"] =
        json{{"a", fit.a}, {"b", fit.b}, {"max_residual", fit.max_residual}, {"bound", bound}, {"points", fit.points}};
    if (fit.degenerate || !(fit.a > 0) || !(fit.max_residual <= bound)) {
      violations.push_back(o.space + ": affine fit to the oracle has slope " + format_double(fit.a) + " and residual " +
                           format_double(fit.max_residual) + " (bound " + format_double(bound) + ")");
    }
  }
  // Multiplicative calibration across spaces sharing elements.
  if (c.tables.size() > 1) {
    std::vector<EntropyTable> tables;
    std::vector<CalibrationLink> links;
    for (const auto& [id, t] : c.tables) tables.push_back(t);
    for (std::size_t i = 0; i < tables.size(); ++i)
      for (std::size_t j = i + 1; j < tables.size(); ++j) {
        try {
          links.push_back({tables[i].space, tables[j].space, find_calibrators(q, tables[i].space, tables[j].space)});
        } catch (const QueryError&) {
        }
      }
    json mj = json::object();
    // Calibrate each linked group separately; unlinked spaces keep a = 1.
    std::map<std::string, std::string> root;
    for (const auto& t : tables) root[t.space] = t.space;
    std::function<std::string(const std::string&)> find = [&](const std::string& s) {
      return root[s] == s ? s : root[s] = find(root[s]);
    };
    for (const auto& l : links) root[find(l.space1)] = find(l.space2);
    std::map<std::string, std::vector<EntropyTable>> groups;
    for (const auto& t : tables) groups[find(t.space)].push_back(t);
    for (const auto& [r, group] : groups) {
      std::vector<CalibrationLink> gl;
      for (const auto& l : links)
        if (find(l.space1) == r) gl.push_back(l);
      if (group.size() == 1) {
        c.multipliers[group.front().space] = 1.0;
        continue;
      }
      try {
        const auto res = calibrate_multiplicative(group, gl);
        for (const auto& [s, a] : res.a) c.multipliers[s] = a;
      } catch (const NumericError& e) {
        violations.push_back(std::string("calibration: ") + e.what());
      }
    }
    for (const auto& [s, a] : c.multipliers) mj[s] = a;
    out["multipliers"] = std::move(mj);
  }
  out["spaces"] = std::move(spaces);
}

void run_principle(Context& c, json& out, std::vector<std::string>& violations) {
  PrincipleReport r;
  if (c.closed) {
    r = verify_entropy_principle(*c.closed, c.tables, c.multipliers);
  } else {
    const auto& o = *c.spec.oracle;
    std::vector<std::pair<CompoundState, CompoundState>> pairs;
    for (const auto& a : o.states)
      for (const auto& b : o.states) pairs.emplace_back(CompoundState::single(o.space, a), CompoundState::single(o.space, b));
    const auto seed = stage_seed(c.spec.seed, 4);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, o.states.size() - 1);
    const Rational half(1, 2);
    const std::size_t mixed = 200;
    for (std::size_t k = 0; k < mixed; ++k) {
      auto two = [&] {
        return CompoundState::single(o.space, o.states[pick(rng)], half) +
               CompoundState::single(o.space, o.states[pick(rng)], half);
      };
      auto x = two();
      auto y = two();
      pairs.emplace_back(std::move(x), std::move(y));
    }
    out["seed"] = seed;
    out["mixed_pairs"] = mixed;
    r = verify_entropy_principle(*c.oracle, c.tables, c.multipliers, pairs);
  }
  out["checks"] = r.checks.size();
  out["violations"] = r.violations;
  out["skipped"] = r.skipped;
  std::size_t reported = 0;
  for (const auto& ch : r.checks) {
    if (ch.ok || reported >= 10) continue;
    ++reported;
    violations.push_back(std::string(to_string(ch.kind)) + ": " + to_string(ch.lhs) + " -> " + to_string(ch.rhs) +
                         " has S " + format_double(ch.entropy_lhs) + " -> " + format_double(ch.entropy_rhs));
  }
  if (r.violations > reported) violations.push_back(std::to_string(r.violations - reported) + " more principle violations");
}

void run_simple(Context& c, json& out, std::vector<std::string>& violations) {
  const auto& suite = *c.spec.simple_system;
  const auto& tol = c.spec.tolerances;
  NestingOptions nopt;
  nopt.integrator.step = tol.integrator_step;
  nopt.integrator.tolerance = tol.integrator_tolerance;
  nopt.tolerance = tol.nesting;
  json models = json::array();
  for (std::size_t i = 0; i < suite.models.size(); ++i) {
    const auto& m = suite.models[i];
    const auto seed = stage_seed(c.spec.seed, 100 + i);
    json mj{{"name", m.name}, {"seed", seed}};
    const auto conv = check_domain_convexity(m, suite.samples, seed);
    mj["domain_convexity"] = json{{"samples", conv.samples}, {"violations", conv.violations}};
    if (conv.violations) violations.push_back(m.name + ": domain is not convex");
    if (m.lipschitz_bound) {
      const auto lip = check_lipschitz(m, suite.samples, seed);
      mj["lipschitz"] = json{{"samples", lip.samples}, {"violations", lip.violations}, {"worst", lip.worst},
                             {"bound", *m.lipschitz_bound}};
      if (lip.violations)
        violations.push_back(m.name + ": pressure difference quotient " + format_double(lip.worst) +
                             " exceeds the declared bound");
    }
    std::mt19937_64 rng(seed);
    std::map<std::string, std::size_t> kinds;
    for (const char* k : {"equal_sectors", "X_inside_Y", "Y_inside_X", "crossing"}) kinds[k] = 0;
    std::size_t failures = 0;
    std::optional<json> crossing;
    for (std::size_t k = 0; k < suite.nesting_pairs; ++k) {
      const auto x = sample_point(m.domain, rng);
      const auto y = sample_point(m.domain, rng);
      std::vector<std::vector<double>> probes;
      for (std::size_t p = 0; p < suite.probes; ++p) probes.push_back(sample_point(m.domain, rng).V);
      try {
        const auto r = check_nesting(m, x, y, probes, nopt);
        ++kinds[to_string(r.kind)];
        if (r.kind == Nesting::crossing && !crossing) {
          crossing = json{{"x", point_json(x)}, {"y", point_json(y)}, {"max_gap", r.max_gap}};
          if (r.witness) (*crossing)["probe"] = *r.witness;
        }
      } catch (const NumericError& e) {
        if (++failures == 1) violations.push_back(m.name + ": nesting check failed: " + e.what());
      }
    }
    mj["nesting"] = json{{"pairs", suite.nesting_pairs}, {"kinds", kinds}, {"failures", failures}};
    if (crossing) mj["nesting"]["crossing_witness"] = *crossing;
    if (m.lipschitz_bound && kinds["crossing"])
      violations.push_back(m.name + ": " + std::to_string(kinds["crossing"]) + " crossing sectors in a Lipschitz model");
    models.push_back(std::move(mj));
  }
  out["models"] = std::move(models);
  json adiabats = json::array();
  IntegratorOptions iopt;
  iopt.step = tol.integrator_step;
  iopt.tolerance = tol.integrator_tolerance;
  for (std::size_t k = 0; k < suite.adiabats.size(); ++k) {
    const auto& a = suite.adiabats[k];
    const auto& m = suite.models[a.model];
    json aj{{"model", m.name}, {"start", point_json(a.start)}};
    try {
      const auto surface = integrate_adiabat(m, a.start, a.path, iopt);
      std::ostringstream csv;
      write_adiabat_csv(csv, surface);
      const auto file = "adiabat_" + std::to_string(k) + ".csv";
      c.bundle.files[file] = csv.str();
      aj["samples"] = file;
      aj["waypoint_u"] = surface.waypoint_u;
      aj["error_estimate"] = surface.error_estimate;
    } catch (const AdiabatExit& e) {
      aj["error"] = e.what();
      violations.push_back(m.name + ": adiabat " + std::to_string(k) + " leaves the domain after " +
                           std::to_string(e.waypoints_reached) + " waypoints");
    } catch (const NumericError& e) {
      aj["error"] = e.what();
      violations.push_back(m.name + ": adiabat " + std::to_string(k) + ": " + e.what());
    }
    adiabats.push_back(std::move(aj));
  }
  out["adiabats"] = std::move(adiabats);
}

void run_thermal(Context& c, json& out, std::vector<std::string>& violations) {
  const auto& suite = *c.spec.thermal;
  const auto& tol = c.spec.tolerances;
  SplitOptions sopt;
  sopt.tolerance = tol.split;
  json splits = json::array();
  for (const auto& r : suite.splits) {
    const auto& m1 = suite.models[r.left];
    const auto& m2 = suite.models[r.right];
    json sj{{"left", m1.name}, {"right", m2.name}, {"U", r.U}};
    try {
      const auto s = thermal_split(make_join(m1, m2), r.U, r.v1, r.v2, sopt);
      const double t1 = temperature(m1, s.x1).T;
      const double t2 = temperature(m2, s.x2).T;
      sj["x1"] = point_json(s.x1);
      sj["x2"] = point_json(s.x2);
      sj["entropy"] = s.entropy;
      sj["T1"] = t1;
      sj["T2"] = t2;
      sj["degenerate"] = s.degenerate;
      sj["maximizers"] = s.maximizers.size();
      if (!in_thermal_equilibrium(m1, s.x1, m2, s.x2, tol.equilibrium))
        violations.push_back("split of " + m1.name + " and " + m2.name + ": temperatures " + format_double(t1) + " and " +
                             format_double(t2) + " differ");
    } catch (const NumericError& e) {
      sj["error"] = e.what();
      violations.push_back("split of " + m1.name + " and " + m2.name + ": " + e.what());
    }
    splits.push_back(std::move(sj));
  }
  out["splits"] = std::move(splits);

  const auto seed = stage_seed(c.spec.seed, 6);
  out["seed"] = seed;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, suite.models.size() - 1);
  std::size_t flows = 0, skipped = 0, flow_violations = 0;
  for (std::size_t k = 0; k < suite.flow_pairs; ++k) {
    const auto& m1 = suite.models[pick(rng)];
    const auto& m2 = suite.models[pick(rng)];
    const auto x1 = sample_point(m1.domain, rng);
    const auto x2 = sample_point(m2.domain, rng);
    try {
      const auto r = check_energy_flow(m1, x1, m2, x2, sopt);
      ++flows;
      if (!r.ok && ++flow_violations <= 10)
        violations.push_back("energy flow: " + m1.name + " " + point_text(x1) + " at T " + format_double(r.t1) + " and " +
                             m2.name + " " + point_text(x2) + " at T " + format_double(r.t2) + " moved dU1 " +
                             format_double(r.du1));
    } catch (const NumericError&) {
      // The equilibrium split falls outside one of the domains.
      ++skipped;
    }
  }
  out["energy_flow"] = json{{"pairs", flows}, {"skipped", skipped}, {"violations", flow_violations}};

  std::vector<std::array<ThermalState, 3>> triples;
  std::size_t attempts = 0;
  while (triples.size() < suite.zeroth_triples && attempts < 20 * suite.zeroth_triples) {
    ++attempts;
    std::array<ThermalState, 3> t;
    t[0].model = pick(rng);
    t[0].x = sample_point(suite.models[t[0].model].domain, rng);
    const double T = temperature(suite.models[t[0].model], t[0].x).T;
    bool ok = true;
    for (std::size_t j = 1; j < 3 && ok; ++j) {
      t[j].model = pick(rng);
      const auto v = sample_point(suite.models[t[j].model].domain, rng).V;
      auto p = isotherm_point(suite.models[t[j].model], T, v);
      if (!p) ok = false;
      else t[j].x = *p;
    }
    if (ok) triples.push_back(std::move(t));
  }
  const auto z = check_zeroth_law(suite.models, triples, tol.equilibrium);
  json zj{{"triples", z.triples}, {"premises", z.premises}, {"non_equilibrium", z.non_equilibrium},
          {"violations", z.violations}, {"attempts", attempts}};
  if (z.witness) zj["witness"] = *z.witness;
  if (z.violations) violations.push_back("zeroth law: " + z.witness.value_or("violated"));
  out["zeroth_law"] = std::move(zj);

  json isotherms = json::array();
  for (std::size_t k = 0; k < suite.isotherms.size(); ++k) {
    const auto& r = suite.isotherms[k];
    const auto& m = suite.models[r.model];
    const auto pts = isotherm(m, r.T, r.probes);
    std::ostringstream csv;
    write_isotherm_csv(csv, m, pts);
    const auto file = "isotherm_" + std::to_string(k) + ".csv";
    c.bundle.files[file] = csv.str();
    isotherms.push_back(json{{"model", m.name}, {"T", r.T}, {"points", pts.size()}, {"probes", r.probes.size()},
                             {"samples", file}});
  }
  out["isotherms"] = std::move(isotherms);
}

std::string matrix_csv(const StateSpaceGraph& g, const Matrix& m) {
  std::vector<std::string> labels;
  for (const auto& n : g.nodes()) labels.push_back(n.id);
  std::ostringstream s;
  write_matrix_csv(s, labels, m);
  return s.str();
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (double x : row) r.push_back(detail::extended(x));
    out.push_back(std::move(r));
  }
  return out;
}

void run_calibration(Context& c, json& out, std::vector<std::string>& violations) {
  StateSpaceGraph g;
  std::size_t max_chain = 4;
  const bool derived = !c.spec.graph;
  if (c.spec.graph) {
    g = c.spec.graph->graph;
    max_chain = c.spec.graph->max_chain;
  } else {
    g = graph_from_relation(*c.closed, c.tables, c.multipliers);
  }
  out["source"] = derived ? "relation" : "graph";
  out["max_chain"] = max_chain;
  const auto m = compute_chains(g, max_chain);
  c.bundle.files["D.csv"] = matrix_csv(g, m.D);
  c.bundle.files["E.csv"] = matrix_csv(g, m.E);
  c.bundle.files["F.csv"] = matrix_csv(g, m.F);
  json labels = json::array();
  for (const auto& n : g.nodes()) labels.push_back(n.id);
  out["labels"] = labels;
  out["D"] = matrix_json(m.D);
  out["E"] = matrix_json(m.E);
  out["F"] = matrix_json(m.F);
  std::size_t unstable = 0;
  for (const auto& row : m.stable)
    for (bool s : row) unstable += s ? 0 : 1;
  out["unstable_pairs"] = unstable;

  const auto sinks = check_no_sinks(g, m);
  out["no_sinks"] = json{{"ok", sinks.ok}, {"pairs_checked", sinks.pairs_checked}, {"violations", sinks.violations}};
  for (const auto& v : sinks.violations) violations.push_back("sinks: " + v);

  const auto k = solve_additive_constants(g, m);
  json kj{{"feasible", k.feasible}, {"free", k.free}};
  if (k.feasible) {
    json b = json::object();
    json exact = json::object();
    for (const auto& [s, v] : k.B) b[s] = v;
    for (const auto& [s, v] : k.exact) exact[s] = v.str();
    kj["B"] = std::move(b);
    kj["exact"] = std::move(exact);
    kj["component"] = k.component;
    const double worst = constraint_violation(g, m, k.B);
    kj["max_constraint_excess"] = worst;
    if (worst > c.spec.tolerances.constraints)
      violations.push_back("constants: constraints exceeded by " + format_double(worst));
    json gaps = json::array();
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = i + 1; j < g.size(); ++j) {
        const auto& a = g.nodes()[i];
        const auto& b2 = g.nodes()[j];
        if (a.composite() || b2.composite() || !std::isfinite(m.F[i][j]) || !std::isfinite(m.F[j][i])) continue;
        const auto gap = detect_gap(g, m, a.id, b2.id);
        gaps.push_back(json{{"a", a.id}, {"b", b2.id}, {"gap", gap.gap}, {"width", gap.width},
                            {"lower", -m.F[j][i]}, {"upper", m.F[i][j]}});
      }
    kj["gaps"] = std::move(gaps);
  } else {
    kj["certificate"] = k.certificate;
    std::string cert;
    for (const auto& e : k.certificate) cert += (cert.empty() ? "" : ", ") + e;
    violations.push_back("constants: infeasible, certificate " + cert);
  }
  out["constants"] = std::move(kj);

  if (derived) {
    const auto r = verify_chain_criterion(g, m, *c.closed);
    json rj{{"checked", r.checked}, {"mismatches", r.mismatches}};
    if (r.witness) rj["witness"] = *r.witness;
    if (r.mismatches) violations.push_back("chain criterion: " + r.witness.value_or("mismatch"));
    out["chain_criterion"] = std::move(rj);
  }
}

}  // namespace

const char* to_string(Stage s) {
  for (const auto& [st, name] : kStageNames)
    if (st == s) return name;
  return "?";
}

std::optional<Stage> parse_stage(const std::string& name) {
  for (const auto& [st, n] : kStageNames)
    if (name == n) return st;
  return std::nullopt;
}

PipelineSpec parse_pipeline_spec(const std::string& text, const std::string& source, const std::string& base_dir) {
  return pipeline_from_json(detail::parse_json(text, source), source, base_dir);
}

PipelineSpec load_pipeline_spec(const std::string& path) {
  const auto dir = fs::path(path).parent_path();
  return pipeline_from_json(detail::load_json_file(path), path, dir.empty() ? "." : dir.string());
}

void validate_stages(const PipelineSpec& spec) {
  auto has = [&](Stage s) { return std::find(spec.stages.begin(), spec.stages.end(), s) != spec.stages.end(); };
  for (std::size_t i = 1; i < spec.stages.size(); ++i) {
    if (spec.stages[i] == spec.stages[i - 1])
      throw InputError(std::string("stage '") + to_string(spec.stages[i]) + "' listed twice");
    if (spec.stages[i] < spec.stages[i - 1])
      throw InputError(std::string("stage '") + to_string(spec.stages[i]) + "' must come before '" +
                       to_string(spec.stages[i - 1]) + "'");
  }
  for (Stage s : spec.stages) {
    const std::string name = to_string(s);
    switch (s) {
      case Stage::close:
        if (!spec.relation) throw InputError("stage 'close' needs a relation");
        break;
      case Stage::check_axioms:
        if (!spec.relation) throw InputError("stage 'check_axioms' needs a relation");
        break;
      case Stage::check_ch:
      case Stage::construct_entropy:
        if (!spec.oracle && !has(Stage::close)) throw InputError("stage '" + name + "' requires 'close' or an oracle");
        break;
      case Stage::verify_principle:
        if (!has(Stage::construct_entropy)) throw InputError("stage 'verify_principle' requires 'construct_entropy'");
        break;
      case Stage::simple_system_suite:
        if (!spec.simple_system) throw InputError("stage 'simple_system_suite' needs a simple_system section");
        break;
      case Stage::thermal_suite:
        if (!spec.thermal) throw InputError("stage 'thermal_suite' needs a thermal section");
        break;
      case Stage::calibration_suite:
        if (!spec.graph && !(has(Stage::close) && has(Stage::construct_entropy)))
          throw InputError("stage 'calibration_suite' needs a graph or 'close' and 'construct_entropy'");
        break;
    }
  }
}

ReportBundle run_pipeline(const PipelineSpec& spec) {
  validate_stages(spec);
  Context c{spec, std::nullopt, std::nullopt, nullptr, {}, {}, {}};
  if (spec.relation) c.raw = build_relation(*spec.relation);
  if (spec.oracle) {
    const auto& o = *spec.oracle;
    std::map<std::string, StatePoint> points;
    for (std::size_t i = 0; i < o.states.size(); ++i) points[o.states[i]] = o.points[i];
    auto model = o.model;
    std::map<std::string, OracleRelation::Oracle> oracles;
    oracles[o.space] = [model, points](const std::string& s) { return model.sigma(points.at(s)); };
    c.oracle = std::make_unique<OracleRelation>(SpaceCatalog({StateSpaceDecl{o.space, {}, o.states}}),
                                                std::move(oracles), spec.tolerances.oracle_relative);
  }

  json report{{"schema_version", kReportSchemaVersion}, {"seed", spec.seed}};
  json stages = json::array();
  std::size_t total = 0;
  for (Stage s : spec.stages) {
    json out = json::object();
    std::vector<std::string> violations;
    bool ran = true;
    // A failed close leaves nothing for the stages that need it.
    const bool needs_closed = (s == Stage::check_ch || s == Stage::construct_entropy ||
                               (s == Stage::calibration_suite && !spec.graph)) && !spec.oracle;
    if (needs_closed && !c.closed) ran = false;
    if (s == Stage::verify_principle && c.tables.empty()) ran = false;
    if (s == Stage::calibration_suite && !spec.graph && c.closed &&
        c.tables.size() != c.closed->catalog().spaces().size())
      ran = false;
    if (ran) {
      switch (s) {
        case Stage::close: run_close(c, out, violations); break;
        case Stage::check_axioms: run_axioms(c, out, violations); break;
        case Stage::check_ch: run_ch(c, out, violations); break;
        case Stage::construct_entropy: run_entropy(c, out, violations); break;
        case Stage::verify_principle: run_principle(c, out, violations); break;
        case Stage::simple_system_suite: run_simple(c, out, violations); break;
        case Stage::thermal_suite: run_thermal(c, out, violations); break;
        case Stage::calibration_suite: run_calibration(c, out, violations); break;
      }
    } else {
      violations.push_back("not run: an earlier stage failed");
    }
    out["name"] = to_string(s);
    out["ran"] = ran;
    out["violation_messages"] = violations;
    out["ok"] = violations.empty();
    total += violations.size();
    stages.push_back(std::move(out));
  }
  report["stages"] = std::move(stages);
  report["violations"] = total;
  report["ok"] = total == 0;
  json files = json::array();
  for (const auto& [name, body] : c.bundle.files) files.push_back(name);
  report["files"] = std::move(files);
  c.bundle.files["report.json"] = report.dump(2) + "\n";
  c.bundle.violations = total;
  return std::move(c.bundle);
}

void write_bundle(const ReportBundle& bundle, const std::string& dir) {
  const fs::path target = fs::absolute(fs::path(dir)).lexically_normal();
  const fs::path parent = target.parent_path();
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw InputError("cannot create '" + parent.string() + "': " + ec.message());
  fs::path tmp;
  for (unsigned k = 0;; ++k) {
    tmp = parent / ("." + target.filename().string() + ".tmp" + std::to_string(k));
    if (fs::create_directory(tmp, ec)) break;
    if (ec || k > 1000) throw InputError("cannot write into '" + parent.string() + "'");
  }
  try {
    for (const auto& [name, body] : bundle.files) {
      std::ofstream f(tmp / name, std::ios::binary);
      f << body;
      f.close();
      if (!f) throw InputError("cannot write '" + (tmp / name).string() + "'");
    }
    if (fs::exists(target)) {
      if (!fs::is_directory(target)) throw InputError("'" + target.string() + "' exists and is not a directory");
      fs::remove_all(target);
    }
    fs::rename(tmp, target);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(tmp, ec);
    throw InputError(std::string("cannot write report: ") + e.what());
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
}

std::string validate_file(const std::string& path) {
  const auto v = detail::load_json_file(path);
  const auto dir = fs::path(path).parent_path();
  const std::string base = dir.empty() ? "." : dir.string();
  if (!v.is_object()) throw InputError(path + ": expected an object");
  if (v.contains("stages")) {
    const auto spec = pipeline_from_json(v, path, base);
    validate_stages(spec);
    return "pipeline with " + std::to_string(spec.stages.size()) + " stages";
  }
  if (v.contains("spaces")) {
    const auto spec = detail::relation_from_json(v, path);
    const auto rel = build_relation(spec);
    return "relation with " + std::to_string(spec.spaces.size()) + " spaces and " + std::to_string(spec.facts.size()) +
           " facts";
  }
  if (v.contains("nodes")) {
    const auto g = detail::graph_from_json(v, path, base);
    return "graph with " + std::to_string(g.graph.size()) + " spaces and " + std::to_string(g.graph.facts().size()) +
           " facts";
  }
  if (v.contains("type")) {
    const auto m = detail::model_from_json(v, path);
    return "model '" + m.name + "'";
  }
  throw InputError(path + ": not a relation, graph, model or pipeline file");
}

}  // namespace entropy_engine
