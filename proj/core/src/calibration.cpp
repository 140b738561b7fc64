#include "entropy_engine/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace entropy_engine {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using boost::multiprecision::cpp_int;

}  // namespace

BigRational to_big(const Rational& r) {
  return BigRational(cpp_int(r.numerator()), cpp_int(r.denominator()));
}

BigRational to_big(double x) {
  if (!std::isfinite(x)) throw NumericError("cannot convert a non-finite value to a rational");
  if (x == 0.0) return BigRational(0);
  int e = 0;
  const double m = std::frexp(x, &e);  // x = m * 2^e, 0.5 <= |m| < 1
  const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  e -= 53;
  cpp_int num(mant);
  cpp_int den(1);
  if (e >= 0) {
    num <<= e;
  } else {
    den <<= -e;
  }
  return BigRational(num, den);
}

// ---------------------------------------------------------------------------

StateSpaceGraph::StateSpaceGraph(std::vector<SpaceNode> nodes, std::vector<GraphFact> facts,
                                 std::vector<std::string> catalysts)
    : nodes_(std::move(nodes)), facts_(std::move(facts)), catalysts_(std::move(catalysts)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id.empty()) throw InputError("graph node without an id");
    if (!index_.emplace(nodes_[i].id, i).second) throw InputError("duplicate graph node '" + nodes_[i].id + "'");
  }

  // Simple nodes first: element tags and tables.
  bool all_empty = true;
  std::size_t width = 0;
  for (const auto& n : nodes_) {
    if (n.composite()) continue;
    if (!n.composition.empty()) {
      all_empty = false;
      width = n.composition.size();
    }
  }
  std::size_t simple_count = 0;
  for (auto& n : nodes_) {
    if (n.composite()) continue;
    if (all_empty) {
      n.composition.clear();
      ++simple_count;
    } else if (n.composition.size() != width) {
      throw InputError("node '" + n.id + "' has a composition of the wrong length");
    }
    for (const auto& c : n.composition) {
      if (c < 0) throw InputError("node '" + n.id + "' has a negative composition entry");
    }
    std::set<std::string> seen;
    if (n.states.empty()) throw InputError("node '" + n.id + "' has no states");
    for (const auto& s : n.states) {
      if (s.find('|') != std::string::npos) throw InputError("state ids may not contain '|'");
      if (!seen.insert(s).second) throw InputError("duplicate state '" + s + "' in node '" + n.id + "'");
      auto it = n.entropy.find(s);
      if (it == n.entropy.end() || !std::isfinite(it->second)) {
        throw InputError("node '" + n.id + "' has no finite entropy for state '" + s + "'");
      }
    }
  }
  if (all_empty) {
    std::size_t k = 0;
    for (auto& n : nodes_) {
      if (n.composite()) continue;
      n.composition.assign(simple_count, Rational(0));
      n.composition[k++] = Rational(1);
    }
    width = simple_count;
  }

  for (auto& n : nodes_) {
    if (!n.composite()) continue;
    std::vector<Rational> comp(width, Rational(0));
    std::vector<std::string> states{""};
    std::map<std::string, double> entropy{{"", 0.0}};
    for (const auto& c : n.components) {
      if (c.lambda <= 0) throw InputError("composite '" + n.id + "' has a non-positive scale");
      auto it = index_.find(c.space);
      if (it == index_.end()) throw InputError("composite '" + n.id + "' references unknown space '" + c.space + "'");
      const auto& part = nodes_[it->second];
      if (part.composite()) throw InputError("composite '" + n.id + "' may only combine simple spaces");
      for (std::size_t e = 0; e < width; ++e) comp[e] += c.lambda * part.composition[e];
      std::vector<std::string> next;
      std::map<std::string, double> next_entropy;
      for (const auto& prefix : states) {
        for (const auto& s : part.states) {
          const std::string id = prefix.empty() ? s : prefix + "|" + s;
          next.push_back(id);
          next_entropy[id] = entropy.at(prefix) + to_double(c.lambda) * part.entropy.at(s);
        }
      }
      states = std::move(next);
      entropy = std::move(next_entropy);
    }
    if (!n.composition.empty() && n.composition != comp) {
      throw InputError("composite '" + n.id + "' declares a composition that differs from its components");
    }
    n.composition = comp;
    if (!n.states.empty()) {
      for (const auto& s : n.states) {
        if (!entropy.count(s)) throw InputError("composite '" + n.id + "' has no state '" + s + "'");
      }
    } else {
      n.states = states;
    }
    n.entropy.clear();
    for (const auto& s : n.states) n.entropy[s] = entropy.at(s);
  }

  for (const auto& f : facts_) {
    const auto& a = node(f.from.space);
    const auto& b = node(f.to.space);
    entropy(f.from);
    entropy(f.to);
    if (a.composition != b.composition) {
      throw InputError("fact " + f.from.space + ":" + f.from.state + " -> " + f.to.space + ":" + f.to.state +
                       " does not conserve the elements");
    }
  }
  for (const auto& c : catalysts_) node(c);
}

const SpaceNode& StateSpaceGraph::node(const std::string& id) const { return nodes_[index(id)]; }

std::size_t StateSpaceGraph::index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("unknown graph node '" + id + "'");
  return it->second;
}

double StateSpaceGraph::entropy(const GraphEndpoint& e) const {
  const auto& n = node(e.space);
  auto it = n.entropy.find(e.state);
  if (it == n.entropy.end()) throw InputError("node '" + e.space + "' has no state '" + e.state + "'");
  return it->second;
}

std::optional<std::size_t> StateSpaceGraph::product(const std::string& a, const std::string& b) const {
  std::multiset<std::string> want{a, b};
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.components.size() != 2) continue;
    if (n.components[0].lambda != 1 || n.components[1].lambda != 1) continue;
    if (std::multiset<std::string>{n.components[0].space, n.components[1].space} == want) return i;
  }
  return std::nullopt;
}

StateSpaceGraph graph_from_relation(const AccessibilityRelation& rel,
                                    const std::map<std::string, EntropyTable>& tables,
                                    const std::map<std::string, double>& multipliers) {
  const auto& cat = rel.catalog();
  std::vector<SpaceNode> nodes;
  std::vector<CompoundState> units;
  for (const auto& sp : cat.spaces()) {
    auto t = tables.find(sp.id);
    if (t == tables.end()) throw InputError("no entropy table for space '" + sp.id + "'");
    auto m = multipliers.find(sp.id);
    const double a = m == multipliers.end() ? 1.0 : m->second;
    SpaceNode n;
    n.id = sp.id;
    n.states = sp.states;
    n.composition = cat.composition(CompoundState::single(sp.id, sp.states.front()));
    for (const auto& s : sp.states) {
      n.entropy[s] = a * t->second.value(s);
      units.push_back(CompoundState::single(sp.id, s));
    }
    nodes.push_back(std::move(n));
  }
  std::vector<GraphFact> facts;
  for (const auto& x : units) {
    for (const auto& y : units) {
      if (x == y || cat.composition(x) != cat.composition(y)) continue;
      if (rel.accessible(x, y)) {
        const auto& px = x.parts().front();
        const auto& py = y.parts().front();
        facts.push_back({{px.space, px.state}, {py.space, py.state}});
      }
    }
  }
  return StateSpaceGraph(std::move(nodes), std::move(facts), {});
}

// ---------------------------------------------------------------------------

Matrix compute_D(const StateSpaceGraph& g) {
  const std::size_t n = g.size();
  Matrix d(n, std::vector<double>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;  // X < X
  for (const auto& f : g.facts()) {
    const std::size_t i = g.index(f.from.space);
    const std::size_t j = g.index(f.to.space);
    d[i][j] = std::min(d[i][j], g.entropy(f.to) - g.entropy(f.from));
  }
  return d;
}

double compute_D(const StateSpaceGraph& g, const std::string& from, const std::string& to) {
  return compute_D(g)[g.index(from)][g.index(to)];
}

namespace {

/// dist after exactly `rounds` relaxation rounds (walks with <= rounds edges).
std::vector<double> relax(const Matrix& d, std::size_t from, std::size_t rounds) {
  const std::size_t n = d.size();
  std::vector<double> dist(n, kInf);
  dist[from] = 0.0;
  for (std::size_t k = 0; k < rounds; ++k) {
    std::vector<double> next = dist;
    bool changed = false;
    for (std::size_t u = 0; u < n; ++u) {
      if (dist[u] == kInf) continue;
      for (std::size_t v = 0; v < n; ++v) {
        if (d[u][v] == kInf) continue;
        const double c = dist[u] + d[u][v];
        if (c < next[v]) {
          next[v] = c;
          changed = true;
        }
      }
    }
    dist = std::move(next);
    if (!changed) break;
  }
  return dist;
}

/// Nodes whose cheapest walk from `from` is unbounded below.
std::vector<bool> negative_reach(const Matrix& d, std::size_t from) {
  const std::size_t n = d.size();
  std::vector<double> dist = relax(d, from, n);
  std::vector<bool> bad(n, false);
  for (std::size_t u = 0; u < n; ++u) {
    if (dist[u] == kInf) continue;
    for (std::size_t v = 0; v < n; ++v) {
      if (d[u][v] != kInf && dist[u] + d[u][v] < dist[v]) bad[v] = true;
    }
  }
  std::vector<std::size_t> stack;
  for (std::size_t v = 0; v < n; ++v) {
    if (bad[v]) stack.push_back(v);
  }
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v) {
      if (d[u][v] != kInf && !bad[v]) {
        bad[v] = true;
        stack.push_back(v);
      }
    }
  }
  return bad;
}

void check_square(const Matrix& d) {
  for (const auto& row : d) {
    if (row.size() != d.size()) throw InputError("D matrix is not square");
    for (double x : row) {
      if (std::isnan(x) || x == -kInf) throw InputError("D matrix entries must be finite or +inf");
    }
  }
}

}  // namespace

ChainValue compute_E(const Matrix& d, std::size_t from, std::size_t to, std::size_t max_chain) {
  check_square(d);
  if (from >= d.size() || to >= d.size()) throw InputError("chain endpoint out of range");
  ChainValue v;
  v.value = relax(d, from, max_chain)[to];
  v.stable = relax(d, from, max_chain + 1)[to] == v.value && relax(d, from, max_chain + 2)[to] == v.value;
  v.unbounded_below = negative_reach(d, from)[to];
  return v;
}

ChainMatrices compute_chains(const StateSpaceGraph& g, std::size_t max_chain) {
  ChainMatrices m;
  m.max_chain = max_chain;
  m.D = compute_D(g);
  const std::size_t n = g.size();
  m.E.assign(n, std::vector<double>(n, kInf));
  m.stable.assign(n, std::vector<bool>(n, true));
  m.unbounded.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    const auto e0 = relax(m.D, i, max_chain);
    const auto e1 = relax(m.D, i, max_chain + 1);
    const auto e2 = relax(m.D, i, max_chain + 2);
    const auto bad = negative_reach(m.D, i);
    for (std::size_t j = 0; j < n; ++j) {
      m.E[i][j] = e0[j];
      m.stable[i][j] = e0[j] == e1[j] && e1[j] == e2[j];
      m.unbounded[i][j] = bad[j];
    }
  }
  m.F = m.E;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (const auto& c : g.catalysts()) {
        const auto p = g.product(g.nodes()[i].id, c);
        const auto q = g.product(g.nodes()[j].id, c);
        if (!p || !q) continue;
        if (m.E[*p][*q] < m.F[i][j]) m.F[i][j] = m.E[*p][*q];
        m.stable[i][j] = m.stable[i][j] && m.stable[*p][*q];
        m.unbounded[i][j] = m.unbounded[i][j] || m.unbounded[*p][*q];
      }
    }
  }
  return m;
}

double compute_F(const StateSpaceGraph& g, const ChainMatrices& m, const std::string& from,
                 const std::string& to) {
  return m.F[g.index(from)][g.index(to)];
}

SinkReport check_no_sinks(const StateSpaceGraph& g, const ChainMatrices& m) {
  SinkReport r;
  const std::size_t n = g.size();
  const auto& ids = g.nodes();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (m.unbounded[i][j]) {
        r.violations.push_back("F(" + ids[i].id + "," + ids[j].id + ") is unbounded below");
        continue;
      }
      if (j <= i) continue;
      const bool fwd = std::isfinite(m.F[i][j]);
      const bool back = std::isfinite(m.F[j][i]);
      if (fwd != back) {
        const auto& a = fwd ? ids[i].id : ids[j].id;
        const auto& b = fwd ? ids[j].id : ids[i].id;
        r.violations.push_back(a + " is connected to " + b + " but not back");
        continue;
      }
      if (!fwd) continue;
      ++r.pairs_checked;
      const double sum = m.F[i][j] + m.F[j][i];
      const double scale = std::max({1.0, std::abs(m.F[i][j]), std::abs(m.F[j][i])});
      if (sum < -1e-9 * scale) {
        r.violations.push_back("-F(" + ids[j].id + "," + ids[i].id + ") > F(" + ids[i].id + "," + ids[j].id + ")");
      }
    }
  }
  r.ok = r.violations.empty();
  return r;
}

// ---------------------------------------------------------------------------
// Additive constants: exact Fourier-Motzkin.

namespace {

struct Row {
  std::vector<BigRational> c;  // sum c_k B_k <= b
  BigRational b;
  std::map<std::size_t, BigRational> mult;  // combination of original rows
};

bool zero_row(const Row& r) {
  return std::all_of(r.c.begin(), r.c.end(), [](const BigRational& x) { return x == 0; });
}

/// Scale so the first non-zero coefficient has absolute value 1.
void normalize(Row& r) {
  for (const auto& x : r.c) {
    if (x == 0) continue;
    const BigRational s = x < 0 ? BigRational(-x) : x;
    for (auto& y : r.c) y /= s;
    r.b /= s;
    for (auto& [k, m] : r.mult) m /= s;
    return;
  }
}

std::string edge_text(const std::string& a, const std::string& b) { return a + "->" + b; }

}  // namespace

AdditiveConstants solve_additive_constants(const StateSpaceGraph& g, const ChainMatrices& m) {
  AdditiveConstants out;
  const auto& nodes = g.nodes();

  std::vector<std::string> vars;
  for (const auto& n : nodes) {
    if (!n.composite()) vars.push_back(n.id);
  }
  std::sort(vars.begin(), vars.end());
  std::map<std::string, std::size_t> var_index;
  for (std::size_t k = 0; k < vars.size(); ++k) var_index[vars[k]] = k;
  const std::size_t nv = vars.size();

  auto linear = [&](const SpaceNode& n) {
    std::vector<BigRational> c(nv, BigRational(0));
    if (n.composite()) {
      for (const auto& comp : n.components) c[var_index.at(comp.space)] += to_big(comp.lambda);
    } else {
      c[var_index.at(n.id)] = 1;
    }
    return c;
  };

  // Original constraints B_i - B_j <= F(i, j).
  std::vector<std::pair<std::size_t, std::size_t>> origin;
  std::vector<Row> rows;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (m.unbounded[i][j]) {
        out.feasible = false;
        out.certificate = {edge_text(nodes[i].id, nodes[j].id) + " (unbounded below)"};
        return out;
      }
      if (!std::isfinite(m.F[i][j])) continue;
      Row r;
      r.c = linear(nodes[i]);
      const auto cj = linear(nodes[j]);
      for (std::size_t k = 0; k < nv; ++k) r.c[k] -= cj[k];
      r.b = to_big(m.F[i][j]);
      r.mult[origin.size()] = 1;
      origin.emplace_back(i, j);
      rows.push_back(std::move(r));
    }
  }

  // Connected components of the variables.
  std::vector<std::size_t> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& r : rows) {
    std::optional<std::size_t> first;
    for (std::size_t k = 0; k < nv; ++k) {
      if (r.c[k] == 0) continue;
      if (!first) {
        first = k;
      } else {
        parent[find(k)] = find(*first);
      }
    }
  }
  std::map<std::size_t, std::size_t> comp_id;
  for (std::size_t k = 0; k < nv; ++k) {
    const std::size_t root = find(k);
    if (!comp_id.count(root)) comp_id.emplace(root, comp_id.size());
    out.component[vars[k]] = comp_id.at(root);
  }

  auto infeasible = [&](const Row& r) {
    out.feasible = false;
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& [k, mult] : r.mult) {
      if (mult > 0) edges.emplace_back(nodes[origin[k].first].id, nodes[origin[k].second].id);
    }
    // Chain the edges into a cycle where they allow it.
    std::vector<std::string> ordered;
    std::vector<bool> used(edges.size(), false);
    for (std::size_t start = 0; start < edges.size(); ++start) {
      if (used[start]) continue;
      used[start] = true;
      ordered.push_back(edge_text(edges[start].first, edges[start].second));
      std::string at = edges[start].second;
      bool extended = true;
      while (extended) {
        extended = false;
        for (std::size_t e = 0; e < edges.size(); ++e) {
          if (!used[e] && edges[e].first == at) {
            used[e] = true;
            ordered.push_back(edge_text(edges[e].first, edges[e].second));
            at = edges[e].second;
            extended = true;
            break;
          }
        }
      }
    }
    out.certificate = std::move(ordered);
    return out;
  };

  // Eliminate from the lexicographically last variable down to the first.
  std::vector<std::vector<Row>> bounds(nv);
  for (std::size_t step = 0; step < nv; ++step) {
    const std::size_t k = nv - 1 - step;
    std::vector<Row> pos;
    std::vector<Row> neg;
    std::map<std::vector<BigRational>, Row> rest;
    auto keep = [&rest](Row r) {
      normalize(r);
      auto it = rest.find(r.c);
      if (it == rest.end() || r.b < it->second.b) rest[r.c] = std::move(r);
    };
    for (auto& r : rows) {
      if (zero_row(r)) {
        if (r.b < 0) return infeasible(r);
        continue;
      }
      if (r.c[k] > 0) {
        pos.push_back(r);
      } else if (r.c[k] < 0) {
        neg.push_back(r);
      } else {
        keep(r);
      }
    }
    for (const auto& p : pos) {
      for (const auto& q : neg) {
        const BigRational a = p.c[k];
        const BigRational b = -q.c[k];
        Row r;
        r.c.resize(nv);
        for (std::size_t t = 0; t < nv; ++t) r.c[t] = b * p.c[t] + a * q.c[t];
        r.c[k] = 0;
        r.b = b * p.b + a * q.b;
        r.mult = p.mult;
        for (auto& [t, mm] : r.mult) mm *= b;
        for (const auto& [t, mm] : q.mult) r.mult[t] += a * mm;
        if (zero_row(r)) {
          if (r.b < 0) return infeasible(r);
          continue;
        }
        keep(std::move(r));
      }
    }
    bounds[k] = pos;
    bounds[k].insert(bounds[k].end(), neg.begin(), neg.end());
    rows.clear();
    for (auto& [c, r] : rest) rows.push_back(std::move(r));
  }
  for (const auto& r : rows) {
    if (zero_row(r) && r.b < 0) return infeasible(r);
  }

  // Back substitution in lexicographic order.
  std::vector<BigRational> value(nv, BigRational(0));
  for (std::size_t k = 0; k < nv; ++k) {
    std::optional<BigRational> lo;
    std::optional<BigRational> hi;
    for (const auto& r : bounds[k]) {
      BigRational rhs = r.b;
      for (std::size_t t = 0; t < k; ++t) rhs -= r.c[t] * value[t];
      const BigRational x = rhs / r.c[k];
      if (r.c[k] > 0) {
        if (!hi || x < *hi) hi = x;
      } else {
        if (!lo || x > *lo) lo = x;
      }
    }
    if (lo && hi) {
      value[k] = (*lo + *hi) / 2;
    } else if (lo) {
      value[k] = *lo;
    } else if (hi) {
      value[k] = *hi;
    } else {
      value[k] = 0;
      out.free.push_back(vars[k]);
    }
  }

  for (std::size_t k = 0; k < nv; ++k) out.exact[vars[k]] = value[k];
  for (const auto& n : nodes) {
    if (!n.composite()) continue;
    BigRational b = 0;
    for (const auto& c : n.components) b += to_big(c.lambda) * out.exact.at(c.space);
    out.exact[n.id] = b;
    out.component[n.id] = out.component.at(n.components.front().space);
  }
  for (const auto& [id, b] : out.exact) out.B[id] = b.convert_to<double>();
  return out;
}

double constraint_violation(const StateSpaceGraph& g, const ChainMatrices& m,
                            const std::map<std::string, double>& B) {
  const auto& nodes = g.nodes();
  auto value = [&](const SpaceNode& n) {
    if (!n.composite()) {
      auto it = B.find(n.id);
      if (it == B.end()) throw InputError("no additive constant for '" + n.id + "'");
      return it->second;
    }
    double s = 0.0;
    for (const auto& c : n.components) s += to_double(c.lambda) * B.at(c.space);
    return s;
  };
  double worst = -kInf;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (!std::isfinite(m.F[i][j])) continue;
      worst = std::max(worst, value(nodes[i]) - value(nodes[j]) - m.F[i][j]);
    }
  }
  return worst;
}

ChainCriterionReport verify_chain_criterion(const StateSpaceGraph& g, const ChainMatrices& m,
                               const AccessibilityQuery& rel) {
  ChainCriterionReport r;
  const auto& nodes = g.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].composite()) continue;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (nodes[j].composite()) continue;
      for (const auto& x : nodes[i].states) {
        for (const auto& y : nodes[j].states) {
          const auto cx = CompoundState::single(nodes[i].id, x);
          const auto cy = CompoundState::single(nodes[j].id, y);
          const bool lhs = rel.accessible(cx, cy);
          const double f = m.F[i][j];
          bool rhs = false;
          if (m.unbounded[i][j]) {
            rhs = true;
          } else if (std::isfinite(f)) {
            const double left = nodes[i].entropy.at(x) + f;
            const double right = nodes[j].entropy.at(y);
            rhs = left <= right + 1e-12 * std::max({1.0, std::abs(left), std::abs(right)});
          }
          ++r.checked;
          if (lhs != rhs) {
            ++r.mismatches;
            if (!r.witness) {
              r.witness = to_string(cx) + " vs " + to_string(cy) + ": relation says " +
                          (lhs ? "accessible" : "not accessible") + ", entropy test says " +
                          (rhs ? "accessible" : "not accessible");
            }
          }
        }
      }
    }
  }
  return r;
}

GapReport detect_gap(const StateSpaceGraph& g, const ChainMatrices& m, const std::string& a,
                     const std::string& b) {
  const std::size_t i = g.index(a);
  const std::size_t j = g.index(b);
  if (!std::isfinite(m.F[i][j]) || !std::isfinite(m.F[j][i]) || m.unbounded[i][j] || m.unbounded[j][i]) {
    throw QueryError("gap detection needs finite F in both directions between '" + a + "' and '" + b + "'");
  }
  GapReport r;
  r.width = m.F[i][j] + m.F[j][i];
  const double scale = std::max({1.0, std::abs(m.F[i][j]), std::abs(m.F[j][i])});
  r.gap = r.width > 1e-9 * scale;
  return r;
}

}  // namespace entropy_engine
