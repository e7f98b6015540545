#include "pltp/engine/sandbox.hpp"

#include <set>
#include <vector>

#include "pltp/engine/errors.hpp"

namespace pltp::engine {

std::optional<Term> safe_goal(const Database& db, const Term& goal) {
  std::vector<Term> work{goal};
  std::set<Indicator> checked;
  while (!work.empty()) {
    const Term g = work.back();
    work.pop_back();
    if (g.is_var()) return errors::instantiation();
    if (!g.is_callable()) continue;
    if (const Builtin* b = db.builtin(g.name(), g.arity())) {
      switch (b->control) {
        case Control::Conjunction:
        case Control::Disjunction:
        case Control::IfThen:
          work.push_back(g.arg(1));
          work.push_back(g.arg(0));
          break;
        case Control::Not:
        case Control::Call:
        case Control::Once:
          work.push_back(g.arg(0));
          break;
        case Control::Findall:
          work.push_back(g.arg(1));
          break;
        case Control::None:
          if (!b->safe) {
            return errors::permission("call", "sandboxed", indicator_of(g).to_term());
          }
          break;
        default:
          break;
      }
      continue;
    }
    const Predicate* p = db.predicate(g.name(), g.arity());
    if (p == nullptr) continue;
    if (!checked.insert(indicator_of(g)).second) continue;
    for (const StoredClause& c : p->clauses) work.push_back(c.body);
  }
  return std::nullopt;
}

}  // namespace pltp::engine
