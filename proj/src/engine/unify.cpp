#include "pltp/engine/unify.hpp"

#include <utility>
#include <vector>

namespace pltp::engine {

namespace {

Term walk(const Substitution& s, Term t) {
  while (t.is_var()) {
    auto it = s.find(t.ordinal());
    if (it == s.end()) break;
    t = it->second;
  }
  return t;
}

}  // namespace

std::optional<Substitution> unify(const Term& a, const Term& b, Substitution s) {
  std::vector<std::pair<Term, Term>> pending{{a, b}};
  while (!pending.empty()) {
    auto [x, y] = std::move(pending.back());
    pending.pop_back();
    x = walk(s, x);
    y = walk(s, y);
    if (x.same_node(y)) continue;
    if (x.is_var() && y.is_var() && x.ordinal() == y.ordinal()) continue;
    if (x.is_var()) {
      s.emplace(x.ordinal(), y);
      continue;
    }
    if (y.is_var()) {
      s.emplace(y.ordinal(), x);
      continue;
    }
    if (x.kind() != y.kind()) return std::nullopt;
    if (!x.is_compound()) {
      if (x != y) return std::nullopt;
      continue;
    }
    if (x.name() != y.name() || x.arity() != y.arity()) return std::nullopt;
    for (std::size_t i = x.arity(); i-- > 0;) pending.emplace_back(x.arg(i), y.arg(i));
  }
  return s;
}

Term apply(const Substitution& s, const Term& t0) {
  Term t = walk(s, t0);
  if (!t.is_compound() || t.is_ground()) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(apply(s, a));
  return Term::compound(t.name(), std::move(args));
}

}  // namespace pltp::engine
