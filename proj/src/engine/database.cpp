#include "pltp/engine/database.hpp"

#include <map>
#include <utility>

namespace pltp::engine {

namespace answers {

AnswerStream none() {
  return [] { return std::optional<AnswerTuple>(); };
}

AnswerStream once(AnswerTuple tuple) {
  return [tuple = std::move(tuple), done = false]() mutable -> std::optional<AnswerTuple> {
    if (done) return std::nullopt;
    done = true;
    return std::move(tuple);
  };
}

AnswerStream yes(const std::vector<Term>& args) { return once(args); }

AnswerStream each(std::vector<AnswerTuple> tuples) {
  return [tuples = std::move(tuples), next = std::size_t{0}]() mutable
         -> std::optional<AnswerTuple> {
    if (next >= tuples.size()) return std::nullopt;
    return std::move(tuples[next++]);
  };
}

}  // namespace answers

namespace {

struct Renumber {
  std::map<std::size_t, Term> vars;

  Term operator()(const Term& t) {
    if (t.is_ground()) return t;
    if (t.is_var()) {
      auto it = vars.find(t.ordinal());
      if (it == vars.end()) {
        const std::size_t ordinal = vars.size();
        it = vars.emplace(t.ordinal(), Term::var(t.name(), ordinal)).first;
      }
      return it->second;
    }
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const Term& a : t.args()) args.push_back((*this)(a));
    return Term::compound(t.name(), std::move(args));
  }
};

// Wraps variable goals in call/1 so that cut inside them stays local.
Term wrap_body(const Term& body) {
  if (body.is_var()) return Term::compound("call", {body});
  if (body.is_compound(",", 2) || body.is_compound(";", 2) || body.is_compound("->", 2)) {
    return Term::compound(body.name(), {wrap_body(body.arg(0)), wrap_body(body.arg(1))});
  }
  if (body.is_compound("\\+", 1)) return Term::compound("\\+", {wrap_body(body.arg(0))});
  return body;
}

}  // namespace

StoredClause normalize_clause(const Clause& clause) {
  Renumber renumber;
  StoredClause stored{renumber(clause.head), wrap_body(renumber(clause.body)), 0};
  stored.variable_count = renumber.vars.size();
  return stored;
}

void Database::add_clauses(const std::vector<Clause>& clauses) {
  for (const Clause& c : clauses) {
    if (!c.head.is_callable()) {
      throw PrologError(errors::type(std::string("callable"), c.head));
    }
    if (builtin(c.head.name(), c.head.arity()) != nullptr) {
      throw PrologError(errors::permission("modify", "static_procedure",
                                           indicator_of(c.head).to_term()));
    }
  }
  for (const Clause& c : clauses) {
    predicates_[indicator_of(c.head)].clauses.push_back(normalize_clause(c));
  }
}

void Database::add_builtin(std::string name, std::size_t arity, Builtin b) {
  Indicator key{std::move(name), arity};
  if (builtins_.count(key) != 0 || predicates_.count(key) != 0) {
    throw DefinitionError("already defined: " + key.to_string());
  }
  builtins_.emplace(std::move(key), std::move(b));
}

const Builtin* Database::builtin(std::string_view name, std::size_t arity) const {
  auto it = builtins_.find(IndicatorView{name, arity});
  return it == builtins_.end() ? nullptr : &it->second;
}

const Predicate* Database::predicate(std::string_view name, std::size_t arity) const {
  auto it = predicates_.find(IndicatorView{name, arity});
  return it == predicates_.end() ? nullptr : &it->second;
}

std::vector<Indicator> Database::predicate_indicators() const {
  std::vector<Indicator> out;
  for (const auto& [key, _] : predicates_) out.push_back(key);
  return out;
}

std::vector<Indicator> Database::builtin_indicators() const {
  std::vector<Indicator> out;
  for (const auto& [key, _] : builtins_) out.push_back(key);
  return out;
}

Database consult(Database db, const std::vector<Clause>& clauses) {
  db.add_clauses(clauses);
  return db;
}

Database register_builtin(Database db, std::string name, std::size_t arity, Evaluator evaluator,
                          bool safe) {
  db.add_builtin(std::move(name), arity, Builtin{Control::None, std::move(evaluator), safe});
  return db;
}

}  // namespace pltp::engine
