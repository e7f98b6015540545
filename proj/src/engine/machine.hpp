#pragma once

// Resolution machine behind start_solve()/resume(). Bindings live in a store
// indexed by variable ordinal; the goal stack is a persistent linked list so
// choice points can share it.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pltp/engine/database.hpp"
#include "pltp/engine/solver.hpp"
#include "pltp/term.hpp"

namespace pltp::engine {

struct Frame {
  enum class Kind : std::uint8_t { Goal, CutTo, Collect };

  Frame(Kind k, Term g, std::size_t b, std::shared_ptr<Frame> n)
      : kind(k), goal(std::move(g)), barrier(b), depth(n ? n->depth + 1 : 1), next(std::move(n)) {}
  Frame(const Frame&) = delete;
  Frame& operator=(const Frame&) = delete;
  ~Frame();

  Kind kind;
  // Goal: the goal. Collect: the findall template.
  Term goal;
  // Goal: cut barrier. CutTo: choice stack height to cut back to.
  // Collect: collector id.
  std::size_t barrier;
  std::size_t depth;
  std::shared_ptr<Frame> next;
};

struct ChoicePoint {
  enum class Kind : std::uint8_t { Alternative, Clauses, Answers, FindallEnd };

  Kind kind = Kind::Alternative;
  std::size_t trail_mark = 0;
  std::size_t var_mark = 0;
  std::shared_ptr<Frame> cont;

  // Clauses
  Term goal = Term::nil();
  const Predicate* predicate = nullptr;
  std::size_t next_clause = 0;

  // Answers
  std::vector<Term> args;
  AnswerStream stream;
  std::optional<AnswerTuple> lookahead;

  // FindallEnd
  std::size_t collector = 0;
  Term result = Term::nil();
};

struct Outcome {
  enum class Kind { Solution, Output, Prompt, Failure, Error };
  Kind kind = Kind::Failure;
  Term data = Term::nil();
  Binding binding;
  bool alternatives = false;
  std::string error_kind;
};

class Machine {
 public:
  Machine(std::shared_ptr<const Database> db, SolveOptions options);
  ~Machine();

  void start(const Term& query, const Term& tmpl);
  // Continues after the last outcome. input is only meaningful after Prompt.
  Outcome resume(std::optional<Term> input);
  bool awaiting_input() const noexcept { return mode_ == Mode::Input; }

 private:
  enum class Mode { Run, Redo, Input, Done };

  Outcome run();
  bool step(const Frame& frame);
  bool call(const Term& goal, std::size_t barrier);
  bool control(Control c, const Term& goal, std::size_t barrier);
  bool call_builtin(const Builtin& b, const Term& goal);
  bool call_predicate(const Predicate& p, const Term& goal);
  bool try_clause(const StoredClause& c, const Term& goal, std::size_t barrier);
  bool backtrack();
  void cut_to(std::size_t height);

  void push_goal(Term goal, std::size_t barrier);
  void push_frame(Frame::Kind kind, Term goal, std::size_t barrier);
  ChoicePoint& push_choice(ChoicePoint::Kind kind);
  void check_depth() const;

  Term deref(Term t) const;
  void bind(std::size_t ordinal, const Term& value);
  bool unify(const Term& a, const Term& b);
  Term rename(const Term& t, std::size_t base) const;
  // Copy of t with all variables replaced by fresh ones.
  Term fresh_copy(const Term& t);
  Term resolve(const Term& t);
  Term resolve_rec(const Term& t);
  Term resolve_compound(const Term& t);
  std::size_t candidate(const Predicate& p, const Term& goal, std::size_t from) const;

  Outcome solution();
  Outcome error(const Term& formal);

  std::shared_ptr<const Database> db_;
  SolveOptions options_;
  Mode mode_ = Mode::Run;

  std::vector<std::optional<Term>> store_;
  std::vector<std::size_t> trail_;
  std::shared_ptr<Frame> cont_;
  std::vector<ChoicePoint> choices_;

  Term template_ = Term::nil();
  std::vector<std::pair<std::string, Term>> named_vars_;
  std::optional<Term> input_target_;
  std::optional<Outcome> pending_;

  std::map<std::size_t, std::vector<Term>> collectors_;
  std::size_t next_collector_ = 0;

  std::vector<std::pair<Term, Term>> unify_stack_;
  std::vector<bool> visiting_;
  std::vector<std::size_t> path_;
  std::uint64_t steps_ = 0;
};

}  // namespace pltp::engine
