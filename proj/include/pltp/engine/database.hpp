#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pltp/engine/errors.hpp"
#include "pltp/term.hpp"

namespace pltp::engine {

// One answer of a builtin call: a tuple unified position by position with the
// call's arguments. Answers may only contain variables taken from the
// arguments.
using AnswerTuple = std::vector<Term>;
// Produces answers lazily; nullopt means no further answers.
using AnswerStream = std::function<std::optional<AnswerTuple>()>;
// Receives the call's arguments with current bindings substituted.
using Evaluator = std::function<AnswerStream(const std::vector<Term>& args)>;

namespace answers {
AnswerStream none();
AnswerStream once(AnswerTuple tuple);
// Succeeds once leaving the arguments untouched.
AnswerStream yes(const std::vector<Term>& args);
AnswerStream each(std::vector<AnswerTuple> tuples);
}  // namespace answers

// Control constructs executed by the solver itself.
enum class Control {
  None,
  True,
  Fail,
  Conjunction,
  Disjunction,
  IfThen,
  Cut,
  Unify,
  Not,
  Call,
  Once,
  Findall,
  Output,
  Input,
  Debug,
};

struct Builtin {
  Control control = Control::None;
  Evaluator evaluator;
  bool safe = false;
};

struct StoredClause {
  Term head;
  Term body;
  // Variables are numbered 0..variable_count-1.
  std::size_t variable_count = 0;
};

struct Predicate {
  std::vector<StoredClause> clauses;
};

struct IndicatorView {
  std::string_view name;
  std::size_t arity;
};

struct IndicatorLess {
  using is_transparent = void;
  bool operator()(const Indicator& a, const Indicator& b) const { return a < b; }
  bool operator()(const Indicator& a, const IndicatorView& b) const {
    return a.name < b.name || (a.name == b.name && a.arity < b.arity);
  }
  bool operator()(const IndicatorView& a, const Indicator& b) const {
    return a.name < b.name || (a.name == b.name && a.arity < b.arity);
  }
};

// User clauses indexed by name/arity plus the registry of builtins. A key is
// never both a builtin and a user predicate.
class Database {
 public:
  // No builtins at all.
  Database() = default;
  // Control constructs and the standard builtin library.
  static Database standard();

  // Appends clauses per predicate in the given order. Throws PrologError
  // permission_error(modify, static_procedure, Name/Arity) on a builtin key.
  void add_clauses(const std::vector<Clause>& clauses);
  // Throws DefinitionError if name/arity is already a builtin or predicate.
  void add_builtin(std::string name, std::size_t arity, Builtin builtin);

  const Builtin* builtin(std::string_view name, std::size_t arity) const;
  const Predicate* predicate(std::string_view name, std::size_t arity) const;
  std::vector<Indicator> predicate_indicators() const;
  std::vector<Indicator> builtin_indicators() const;

 private:
  std::map<Indicator, Builtin, IndicatorLess> builtins_;
  std::map<Indicator, Predicate, IndicatorLess> predicates_;
};

Database consult(Database db, const std::vector<Clause>& clauses);
Database register_builtin(Database db, std::string name, std::size_t arity, Evaluator evaluator,
                          bool safe);

// Renumbers the variables of a clause to 0..n-1 in first-occurrence order and
// rewrites variable body goals G as call(G).
StoredClause normalize_clause(const Clause& clause);

}  // namespace pltp::engine
