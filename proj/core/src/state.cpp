#include "entropy_engine/state.hpp"

#include <algorithm>
#include <set>

namespace entropy_engine {

std::strong_ordering operator<=>(const Part& a, const Part& b) {
  if (auto c = a.space <=> b.space; c != 0) return c;
  if (auto c = a.state <=> b.state; c != 0) return c;
  if (a.lambda < b.lambda) return std::strong_ordering::less;
  if (b.lambda < a.lambda) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

CompoundState::CompoundState(std::vector<Part> parts) : parts_(std::move(parts)) {
  for (const auto& p : parts_) {
    if (p.lambda <= 0) {
      throw InputError("non-positive lambda " + to_string(p.lambda) + " for " + p.space + ":" +
                       p.state);
    }
  }
  std::sort(parts_.begin(), parts_.end());
}

CompoundState CompoundState::single(std::string space, std::string state, Rational lambda) {
  return CompoundState({Part{std::move(space), std::move(state), lambda}});
}

CompoundState CompoundState::operator+(const CompoundState& other) const {
  std::vector<Part> merged;
  merged.reserve(parts_.size() + other.parts_.size());
  std::merge(parts_.begin(), parts_.end(), other.parts_.begin(), other.parts_.end(),
             std::back_inserter(merged));
  CompoundState out;
  out.parts_ = std::move(merged);
  return out;
}

CompoundState CompoundState::scaled(const Rational& factor) const {
  if (factor <= 0) throw InputError("scaling factor must be positive");
  CompoundState out = *this;
  for (auto& p : out.parts_) p.lambda *= factor;
  return out;
}

Rational CompoundState::total_scale(const std::string& space) const {
  Rational total(0);
  for (const auto& p : parts_) {
    if (p.space == space) total += p.lambda;
  }
  return total;
}

std::string to_string(const CompoundState& s) {
  if (s.empty()) return "()";
  std::string out;
  for (std::size_t i = 0; i < s.parts().size(); ++i) {
    const auto& p = s.parts()[i];
    if (i) out += " + ";
    if (p.lambda != 1) out += to_string(p.lambda) + "*";
    out += p.space + ":" + p.state;
  }
  return out;
}

std::pair<CompoundState, CompoundState> normalize_comparison(const std::vector<SignedTerm>& lhs,
                                                             const std::vector<SignedTerm>& rhs) {
  std::vector<Part> left;
  std::vector<Part> right;
  auto place = [](const SignedTerm& t, std::vector<Part>& same, std::vector<Part>& other) {
    if (t.coefficient > 0) {
      same.push_back(Part{t.space, t.state, t.coefficient});
    } else if (t.coefficient < 0) {
      other.push_back(Part{t.space, t.state, -t.coefficient});
    }
  };
  for (const auto& t : lhs) place(t, left, right);
  for (const auto& t : rhs) place(t, right, left);
  return {CompoundState(std::move(left)), CompoundState(std::move(right))};
}

SpaceCatalog::SpaceCatalog(std::vector<StateSpaceDecl> spaces) : spaces_(std::move(spaces)) {
  bool all_empty = true;
  std::optional<std::size_t> length;
  for (const auto& sp : spaces_) {
    if (!sp.composition.empty()) all_empty = false;
  }
  for (std::size_t i = 0; i < spaces_.size(); ++i) {
    auto& sp = spaces_[i];
    if (sp.id.empty()) throw InputError("state space with empty id");
    if (!index_.emplace(sp.id, i).second) throw InputError("duplicate state space '" + sp.id + "'");
    if (all_empty) {
      sp.composition.assign(spaces_.size(), Rational(0));
      sp.composition[i] = Rational(1);
    }
    if (length && *length != sp.composition.size()) {
      throw InputError("composition of '" + sp.id + "' has " +
                       std::to_string(sp.composition.size()) + " entries, expected " +
                       std::to_string(*length));
    }
    length = sp.composition.size();
    for (const auto& c : sp.composition) {
      if (c < 0) throw InputError("negative composition entry in '" + sp.id + "'");
    }
    std::map<std::string, std::size_t> states;
    for (std::size_t k = 0; k < sp.states.size(); ++k) {
      if (!states.emplace(sp.states[k], k).second) {
        throw InputError("duplicate state '" + sp.states[k] + "' in space '" + sp.id + "'");
      }
    }
    state_index_.push_back(std::move(states));
  }
  element_count_ = length.value_or(0);
}

const StateSpaceDecl& SpaceCatalog::space(const std::string& id) const {
  return spaces_[space_index(id)];
}

bool SpaceCatalog::has_space(const std::string& id) const { return index_.count(id) != 0; }

bool SpaceCatalog::has_state(const std::string& space, const std::string& state) const {
  auto it = index_.find(space);
  return it != index_.end() && state_index_[it->second].count(state) != 0;
}

std::size_t SpaceCatalog::space_index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("unknown state space '" + id + "'");
  return it->second;
}

std::size_t SpaceCatalog::state_index(const std::string& space, const std::string& state) const {
  const auto& states = state_index_[space_index(space)];
  auto it = states.find(state);
  if (it == states.end()) {
    throw InputError("unknown state '" + state + "' in space '" + space + "'");
  }
  return it->second;
}

void SpaceCatalog::validate(const CompoundState& s) const {
  for (const auto& p : s.parts()) {
    if (p.lambda <= 0) throw InputError("non-positive lambda in " + to_string(s));
    state_index(p.space, p.state);
  }
}

std::vector<Rational> SpaceCatalog::composition(const CompoundState& s) const {
  std::vector<Rational> total(element_count_, Rational(0));
  for (const auto& p : s.parts()) {
    const auto& comp = space(p.space).composition;
    for (std::size_t e = 0; e < element_count_; ++e) total[e] += p.lambda * comp[e];
  }
  return total;
}

}  // namespace entropy_engine
