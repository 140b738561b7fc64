#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "loaders.hpp"

namespace entropy_engine {

namespace detail {

namespace {

std::string at(const std::string& ctx, std::size_t i) { return ctx + "[" + std::to_string(i) + "]"; }

Interval interval_from_json(const json& v, const std::string& ctx) {
  const auto xs = get_numbers(v, ctx);
  if (xs.size() != 2) throw InputError(ctx + ": expected [lo, hi]");
  if (!(xs[0] < xs[1])) throw InputError(ctx + ": empty interval");
  return Interval{xs[0], xs[1]};
}

Domain domain_from_json(const json& v, const std::string& ctx) {
  Domain d;
  d.u = interval_from_json(require(v, "U", ctx), where(ctx, "U"));
  const auto& vv = require(v, "V", ctx);
  if (!vv.is_array() || vv.empty()) throw InputError(where(ctx, "V") + ": expected intervals");
  if (vv[0].is_array()) {
    for (std::size_t i = 0; i < vv.size(); ++i) d.v.push_back(interval_from_json(vv[i], at(where(ctx, "V"), i)));
  } else {
    d.v.push_back(interval_from_json(vv, where(ctx, "V")));
  }
  return d;
}

std::vector<std::vector<double>> table_from_json(const json& v, const std::string& ctx) {
  if (!v.is_array()) throw InputError(ctx + ": expected rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_numbers(v[i], at(ctx, i)));
  return out;
}

}  // namespace

CompoundState compound_from_json(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.empty()) throw InputError(ctx + ": expected a non-empty list of parts");
  std::vector<Part> parts;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto c = at(ctx, i);
    Part p;
    p.space = get_string(v[i], "space", c);
    p.state = get_string(v[i], "state", c);
    p.lambda = v[i].contains("lambda") ? get_rational(v[i].at("lambda"), where(c, "lambda")) : Rational(1);
    if (p.lambda <= 0) throw InputError(where(c, "lambda") + ": lambda must be positive");
    parts.push_back(std::move(p));
  }
  return CompoundState(std::move(parts));
}

RelationSpec relation_from_json(const json& v, const std::string& ctx) {
  RelationSpec spec;
  const auto& spaces = require(v, "spaces", ctx);
  if (!spaces.is_array()) throw InputError(where(ctx, "spaces") + ": expected an array");
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    const auto c = at(where(ctx, "spaces"), i);
    StateSpaceDecl d;
    d.id = get_string(spaces[i], "id", c);
    if (spaces[i].contains("composition")) d.composition = get_rationals(spaces[i].at("composition"), where(c, "composition"));
    const auto& st = require(spaces[i], "states", c);
    if (!st.is_array()) throw InputError(where(c, "states") + ": expected an array");
    for (std::size_t k = 0; k < st.size(); ++k) {
      if (!st[k].is_string()) throw InputError(at(where(c, "states"), k) + ": expected a string");
      d.states.push_back(st[k].get<std::string>());
    }
    spec.spaces.push_back(std::move(d));
  }
  if (v.contains("facts")) {
    const auto& facts = v.at("facts");
    if (!facts.is_array()) throw InputError(where(ctx, "facts") + ": expected an array");
    for (std::size_t i = 0; i < facts.size(); ++i) {
      const auto c = at(where(ctx, "facts"), i);
      if (!facts[i].is_array() || facts[i].size() != 2) throw InputError(c + ": expected [compound, compound]");
      spec.facts.emplace_back(compound_from_json(facts[i][0], c + "[0]"), compound_from_json(facts[i][1], c + "[1]"));
    }
  }
  spec.lambda_grid = v.contains("lambda_grid") ? get_rationals(v.at("lambda_grid"), where(ctx, "lambda_grid"))
                                               : std::vector<Rational>{Rational(1)};
  if (v.contains("epsilon_families")) {
    const auto& fams = v.at("epsilon_families");
    if (!fams.is_array()) throw InputError(where(ctx, "epsilon_families") + ": expected an array");
    for (std::size_t i = 0; i < fams.size(); ++i) {
      const auto c = at(where(ctx, "epsilon_families"), i);
      EpsilonFamily f;
      f.name = fams[i].contains("name") ? get_string(fams[i], "name", c) : "family" + std::to_string(i);
      f.x = compound_from_json(require(fams[i], "x", c), where(c, "x"));
      f.y = compound_from_json(require(fams[i], "y", c), where(c, "y"));
      f.z0 = compound_from_json(require(fams[i], "z0", c), where(c, "z0"));
      f.z1 = compound_from_json(require(fams[i], "z1", c), where(c, "z1"));
      f.epsilons = get_rationals(require(fams[i], "epsilons", c), where(c, "epsilons"));
      spec.epsilon_families.push_back(std::move(f));
    }
  }
  if (v.contains("max_parts")) {
    const auto& m = v.at("max_parts");
    if (!m.is_number_unsigned() || m.get<std::size_t>() < 1) throw InputError(where(ctx, "max_parts") + ": expected an integer >= 1");
    spec.closure.max_parts = m.get<std::size_t>();
  }
  if (v.contains("fact_budget")) {
    const auto& m = v.at("fact_budget");
    if (!m.is_number_unsigned()) throw InputError(where(ctx, "fact_budget") + ": expected a positive integer");
    spec.closure.fact_budget = m.get<std::size_t>();
  }
  return spec;
}

SimpleSystemModel model_from_json(const json& v, const std::string& ctx) {
  const std::string type = get_string(v, "type", ctx);
  SimpleSystemModel m;
  if (type == "ideal_gas") {
    m = ideal_gas(v.contains("moles") ? get_rational(v.at("moles"), where(ctx, "moles")) : Rational(1),
                  domain_from_json(require(v, "domain", ctx), where(ctx, "domain")));
  } else if (type == "van_der_waals") {
    m = van_der_waals(v.contains("moles") ? get_rational(v.at("moles"), where(ctx, "moles")) : Rational(1),
                      get_number(require(v, "a", ctx), where(ctx, "a")), get_number(require(v, "b", ctx), where(ctx, "b")),
                      domain_from_json(require(v, "domain", ctx), where(ctx, "domain")));
  } else if (type == "crossing") {
    m = crossing_model();
  } else if (type == "tabulated") {
    std::optional<std::vector<std::vector<double>>> s;
    if (v.contains("entropy_grid")) s = table_from_json(v.at("entropy_grid"), where(ctx, "entropy_grid"));
    m = tabulated_model("tabulated", get_numbers(require(v, "u_grid", ctx), where(ctx, "u_grid")),
                        get_numbers(require(v, "v_grid", ctx), where(ctx, "v_grid")),
                        table_from_json(require(v, "pressure_grid", ctx), where(ctx, "pressure_grid")), s);
  } else {
    throw InputError(where(ctx, "type") + ": unknown model type '" + type + "'");
  }
  if (v.contains("scale")) m = scaled_copy(m, get_rational(v.at("scale"), where(ctx, "scale")));
  if (v.contains("name")) m.name = get_string(v, "name", ctx);
  if (v.contains("lipschitz_bound")) m.lipschitz_bound = get_number(v.at("lipschitz_bound"), where(ctx, "lipschitz_bound"));
  return m;
}

StatePoint point_from_json(const json& v, const std::string& ctx) {
  StatePoint p;
  p.U = get_number(require(v, "U", ctx), where(ctx, "U"));
  const auto& vv = require(v, "V", ctx);
  p.V = vv.is_array() ? get_numbers(vv, where(ctx, "V")) : std::vector<double>{get_number(vv, where(ctx, "V"))};
  return p;
}

GraphSpec graph_from_json(const json& v, const std::string& ctx, const std::string& base_dir) {
  std::vector<SpaceNode> nodes;
  const auto& ns = require(v, "nodes", ctx);
  if (!ns.is_array()) throw InputError(where(ctx, "nodes") + ": expected an array");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto c = at(where(ctx, "nodes"), i);
    SpaceNode n;
    n.id = get_string(ns[i], "id", c);
    if (ns[i].contains("composition")) n.composition = get_rationals(ns[i].at("composition"), where(c, "composition"));
    if (ns[i].contains("components")) {
      const auto& comps = ns[i].at("components");
      if (!comps.is_array() || comps.empty()) throw InputError(where(c, "components") + ": expected a non-empty array");
      for (std::size_t k = 0; k < comps.size(); ++k) {
        const auto cc = at(where(c, "components"), k);
        CompositeComponent comp;
        comp.space = get_string(comps[k], "space", cc);
        comp.lambda = comps[k].contains("lambda") ? get_rational(comps[k].at("lambda"), where(cc, "lambda")) : Rational(1);
        n.components.push_back(std::move(comp));
      }
    }
    if (ns[i].contains("states")) {
      const auto& st = ns[i].at("states");
      if (!st.is_array()) throw InputError(where(c, "states") + ": expected an array");
      for (std::size_t k = 0; k < st.size(); ++k) {
        if (!st[k].is_string()) throw InputError(at(where(c, "states"), k) + ": expected a string");
        n.states.push_back(st[k].get<std::string>());
      }
    }
    if (ns[i].contains("entropy")) {
      const auto& e = ns[i].at("entropy");
      if (!e.is_object()) throw InputError(where(c, "entropy") + ": expected {state: value}");
      for (auto it = e.begin(); it != e.end(); ++it) n.entropy[it.key()] = get_number(it.value(), where(where(c, "entropy"), it.key()));
    } else if (ns[i].contains("entropy_table")) {
      auto path = std::filesystem::path(get_string(ns[i], "entropy_table", c));
      if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
      std::ifstream in(path);
      if (!in) throw InputError(where(c, "entropy_table") + ": cannot open '" + path.string() + "'");
      n.entropy = read_entropy_csv(in, n.id);
    }
    if (!n.composite() && n.states.empty()) {
      for (const auto& [s, val] : n.entropy) n.states.push_back(s);
    }
    nodes.push_back(std::move(n));
  }
  std::vector<GraphFact> facts;
  if (v.contains("facts")) {
    const auto& fs = v.at("facts");
    if (!fs.is_array()) throw InputError(where(ctx, "facts") + ": expected an array");
    auto endpoint = [](const json& e, const std::string& c) {
      return GraphEndpoint{get_string(e, "space", c), get_string(e, "state", c)};
    };
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const auto c = at(where(ctx, "facts"), i);
      if (fs[i].is_array() && fs[i].size() == 2) {
        facts.push_back({endpoint(fs[i][0], c + "[0]"), endpoint(fs[i][1], c + "[1]")});
      } else {
        facts.push_back({endpoint(require(fs[i], "from", c), where(c, "from")), endpoint(require(fs[i], "to", c), where(c, "to"))});
      }
    }
  }
  std::vector<std::string> catalysts;
  if (v.contains("catalysts")) {
    const auto& cs = v.at("catalysts");
    if (!cs.is_array()) throw InputError(where(ctx, "catalysts") + ": expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (!cs[i].is_string()) throw InputError(at(where(ctx, "catalysts"), i) + ": expected a space id");
      catalysts.push_back(cs[i].get<std::string>());
    }
  }
  GraphSpec g;
  g.graph = StateSpaceGraph(std::move(nodes), std::move(facts), std::move(catalysts));
  if (v.contains("max_chain")) {
    const auto& m = v.at("max_chain");
    if (!m.is_number_unsigned()) throw InputError(where(ctx, "max_chain") + ": expected a non-negative integer");
    g.max_chain = m.get<std::size_t>();
  }
  return g;
}

}  // namespace detail

RelationSpec parse_relation_spec(const std::string& text, const std::string& source) {
  return detail::relation_from_json(detail::parse_json(text, source), source);
}

RelationSpec load_relation_spec(const std::string& path) {
  return detail::relation_from_json(detail::load_json_file(path), path);
}

AccessibilityRelation build_relation(const RelationSpec& spec) {
  return build_relation(spec.spaces, spec.facts, spec.lambda_grid);
}

SimpleSystemModel parse_model(const std::string& text, const std::string& source) {
  return detail::model_from_json(detail::parse_json(text, source), source);
}

GraphSpec parse_graph(const std::string& text, const std::string& source, const std::string& base_dir) {
  return detail::graph_from_json(detail::parse_json(text, source), source, base_dir);
}

GraphSpec load_graph(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path();
  return detail::graph_from_json(detail::load_json_file(path), path, dir.empty() ? "." : dir.string());
}

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_entropy_csv(std::ostream& out, const EntropyTable& table) {
  out << "space,state,S,resolution\n";
  const std::string res = to_string(table.lambda_resolution);
  for (const auto& s : table.states) {
    out << table.space << "," << s << ",";
    auto e = table.exact.find(s);
    if (e != table.exact.end()) {
      out << format_double(to_double(e->second));
    } else {
      out << format_double(table.value(s));
    }
    out << "," << res << "\n";
  }
}

std::map<std::string, double> read_entropy_csv(std::istream& in, const std::string& space) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty entropy table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "space,state,S,resolution") throw InputError("entropy table header must be space,state,S,resolution");
  std::map<std::string, double> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) throw InputError("entropy table line " + std::to_string(row) + ": expected 4 columns");
    if (cells[0] != space) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("trailing");
      out[cells[1]] = v;
    } catch (const std::exception&) {
      throw InputError("entropy table line " + std::to_string(row) + ": bad value '" + cells[2] + "'");
    }
  }
  return out;
}

void write_matrix_csv(std::ostream& out, const std::vector<std::string>& labels, const Matrix& m) {
  out << "from";
  for (const auto& l : labels) out << "," << l;
  out << "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << labels[i];
    for (double x : m[i]) out << "," << format_double(x);
    out << "\n";
  }
}

}  // namespace entropy_engine
