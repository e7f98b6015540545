#include "machine.hpp"

#include <exception>
#include <map>
#include <utility>

#include "pltp/engine/errors.hpp"
#include "pltp/writer.hpp"

namespace pltp::engine {

namespace {

constexpr std::uint64_t kCancelCheckInterval = 256;

Term unbound(const Term& var) {
  return Term::var("_G" + std::to_string(var.ordinal()), var.ordinal());
}

}  // namespace

Frame::~Frame() {
  // Unlink uniquely owned tails one by one instead of recursing.
  std::shared_ptr<Frame> n = std::move(next);
  while (n && n.use_count() == 1) {
    std::shared_ptr<Frame> after = std::move(n->next);
    n = std::move(after);
  }
}

Machine::Machine(std::shared_ptr<const Database> db, SolveOptions options)
    : db_(std::move(db)), options_(std::move(options)) {}

Machine::~Machine() {
  choices_.clear();
  cont_.reset();
}

void Machine::start(const Term& query, const Term& tmpl) {
  // Map caller ordinals onto a dense range starting at zero.
  std::map<std::size_t, Term> vars;
  for (const Term* t : {&query, &tmpl}) {
    for (const Term& v : term_variables(*t)) {
      if (vars.count(v.ordinal()) != 0) continue;
      const std::size_t ordinal = vars.size();
      vars.emplace(v.ordinal(), Term::var(v.name(), ordinal));
    }
  }
  store_.resize(vars.size());
  auto map_term = [&vars](const auto& self, const Term& t) -> Term {
    if (t.is_ground()) return t;
    if (t.is_var()) return vars.at(t.ordinal());
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const Term& a : t.args()) args.push_back(self(self, a));
    return Term::compound(t.name(), std::move(args));
  };
  const Term goal = map_term(map_term, query);
  template_ = map_term(map_term, tmpl);
  for (const Term& v : term_variables(template_)) {
    if (v.name().empty() || v.name().front() == '_') continue;
    named_vars_.emplace_back(v.name(), v);
  }
  push_goal(goal, 0);
  mode_ = Mode::Run;
}

Outcome Machine::resume(std::optional<Term> input) {
  try {
    switch (mode_) {
      case Mode::Done:
        return Outcome{};
      case Mode::Redo:
        mode_ = Mode::Run;
        if (!backtrack()) {
          mode_ = Mode::Done;
          return Outcome{};
        }
        break;
      case Mode::Input: {
        mode_ = Mode::Run;
        const Term target = *input_target_;
        input_target_.reset();
        const Term value = fresh_copy(input.value_or(Term::nil()));
        if (!unify(target, value) && !backtrack()) {
          mode_ = Mode::Done;
          return Outcome{};
        }
        break;
      }
      case Mode::Run:
        break;
    }
  } catch (const PrologError& e) {
    return error(e.formal());
  }
  return run();
}

Outcome Machine::run() {
  try {
    for (;;) {
      if (++steps_ % kCancelCheckInterval == 0 && options_.cancel &&
          options_.cancel->load(std::memory_order_relaxed)) {
        return error(Term::atom("abort"));
      }
      if (!cont_) return solution();
      std::shared_ptr<Frame> frame = cont_;
      cont_ = frame->next;
      const bool ok = step(*frame);
      frame.reset();
      if (pending_) {
        Outcome out = std::move(*pending_);
        pending_.reset();
        if (!ok && !backtrack()) mode_ = Mode::Done;
        return out;
      }
      if (!ok && !backtrack()) {
        mode_ = Mode::Done;
        return Outcome{};
      }
    }
  } catch (const PrologError& e) {
    return error(e.formal());
  } catch (const std::bad_alloc&) {
    return error(errors::resource("memory"));
  } catch (const std::exception& e) {
    return error(Term::compound("system_error", {Term::atom(e.what())}));
  }
}

Outcome Machine::solution() {
  Outcome out;
  out.kind = Outcome::Kind::Solution;
  out.data = resolve(template_);
  for (const auto& [name, var] : named_vars_) out.binding.pairs.emplace_back(name, resolve(var));
  out.alternatives = !choices_.empty();
  mode_ = out.alternatives ? Mode::Redo : Mode::Done;
  return out;
}

Outcome Machine::error(const Term& formal) {
  mode_ = Mode::Done;
  choices_.clear();
  cont_.reset();
  Outcome out;
  out.kind = Outcome::Kind::Error;
  out.data = formal;
  out.error_kind = formal.name();
  return out;
}

bool Machine::step(const Frame& frame) {
  switch (frame.kind) {
    case Frame::Kind::Goal:
      return call(frame.goal, frame.barrier);
    case Frame::Kind::CutTo:
      cut_to(frame.barrier);
      return true;
    case Frame::Kind::Collect:
      collectors_[frame.barrier].push_back(resolve(frame.goal));
      return false;
  }
  return false;
}

bool Machine::call(const Term& goal_in, std::size_t barrier) {
  const Term goal = deref(goal_in);
  if (goal.is_var()) throw PrologError(errors::instantiation());
  if (!goal.is_callable()) throw PrologError(errors::type("callable", goal));
  if (const Builtin* b = db_->builtin(goal.name(), goal.arity())) {
    if (b->control != Control::None) return control(b->control, goal, barrier);
    return call_builtin(*b, goal);
  }
  if (const Predicate* p = db_->predicate(goal.name(), goal.arity())) {
    return call_predicate(*p, goal);
  }
  throw PrologError(
      errors::existence("procedure", Indicator{goal.name(), goal.arity()}.to_term()));
}

bool Machine::control(Control c, const Term& goal, std::size_t barrier) {
  switch (c) {
    case Control::None:
    case Control::True:
      return true;
    case Control::Fail:
      return false;
    case Control::Conjunction:
      push_goal(goal.arg(1), barrier);
      push_goal(goal.arg(0), barrier);
      return true;
    case Control::Disjunction: {
      const Term lhs = deref(goal.arg(0));
      if (lhs.is_compound("->", 2)) {
        const std::size_t height = choices_.size();
        {
          std::shared_ptr<Frame> saved = cont_;
          push_goal(goal.arg(1), barrier);
          push_choice(ChoicePoint::Kind::Alternative);
          cont_ = std::move(saved);
        }
        push_goal(lhs.arg(1), barrier);
        push_frame(Frame::Kind::CutTo, Term::nil(), height);
        push_goal(lhs.arg(0), choices_.size());
        return true;
      }
      {
        std::shared_ptr<Frame> saved = cont_;
        push_goal(goal.arg(1), barrier);
        push_choice(ChoicePoint::Kind::Alternative);
        cont_ = std::move(saved);
      }
      push_goal(lhs, barrier);
      return true;
    }
    case Control::IfThen: {
      const std::size_t height = choices_.size();
      push_goal(goal.arg(1), barrier);
      push_frame(Frame::Kind::CutTo, Term::nil(), height);
      push_goal(goal.arg(0), height);
      return true;
    }
    case Control::Cut:
      cut_to(barrier);
      return true;
    case Control::Unify:
      return unify(goal.arg(0), goal.arg(1));
    case Control::Not: {
      const std::size_t height = choices_.size();
      push_choice(ChoicePoint::Kind::Alternative);
      push_goal(Term::atom("fail"), 0);
      push_frame(Frame::Kind::CutTo, Term::nil(), height);
      push_goal(goal.arg(0), choices_.size());
      return true;
    }
    case Control::Call:
      push_goal(goal.arg(0), choices_.size());
      return true;
    case Control::Once: {
      const std::size_t height = choices_.size();
      push_frame(Frame::Kind::CutTo, Term::nil(), height);
      push_goal(goal.arg(0), height);
      return true;
    }
    case Control::Findall: {
      const std::size_t id = next_collector_++;
      collectors_[id];
      ChoicePoint& cp = push_choice(ChoicePoint::Kind::FindallEnd);
      cp.collector = id;
      cp.result = goal.arg(2);
      push_frame(Frame::Kind::Collect, goal.arg(0), id);
      push_goal(goal.arg(1), choices_.size());
      return true;
    }
    case Control::Output:
      pending_ = Outcome{Outcome::Kind::Output, resolve(goal.arg(0)), {}, false, {}};
      return true;
    case Control::Input:
      pending_ = Outcome{Outcome::Kind::Prompt, resolve(goal.arg(0)), {}, false, {}};
      input_target_ = goal.arg(1);
      mode_ = Mode::Input;
      return true;
    case Control::Debug:
      if (options_.debug_sink) {
        const Term message = resolve(goal.arg(0));
        options_.debug_sink(message.is_atom() ? message.name() : write_term(message));
      }
      return true;
  }
  return false;
}

bool Machine::call_builtin(const Builtin& b, const Term& goal) {
  std::vector<Term> args;
  if (goal.is_compound()) {
    args.reserve(goal.arity());
    for (const Term& a : goal.args()) args.push_back(resolve(a));
  }
  AnswerStream stream = b.evaluator(args);
  std::optional<AnswerTuple> first = stream();
  if (!first) return false;
  std::optional<AnswerTuple> look = stream();
  if (look) {
    ChoicePoint& cp = push_choice(ChoicePoint::Kind::Answers);
    cp.args = args;
    cp.stream = std::move(stream);
    cp.lookahead = std::move(look);
  }
  for (std::size_t i = 0; i < args.size() && i < first->size(); ++i) {
    if (!unify(args[i], (*first)[i])) return false;
  }
  return true;
}

std::size_t Machine::candidate(const Predicate& p, const Term& goal, std::size_t from) const {
  const std::size_t n = p.clauses.size();
  if (!goal.is_compound()) return from;
  const Term key = deref(goal.arg(0));
  if (key.is_var()) return from;
  for (std::size_t i = from; i < n; ++i) {
    const Term& h = p.clauses[i].head.arg(0);
    if (h.is_var()) return i;
    if (h.kind() != key.kind()) continue;
    if (h.is_compound()) {
      if (h.name() == key.name() && h.arity() == key.arity()) return i;
    } else if (h == key) {
      return i;
    }
  }
  return n;
}

bool Machine::call_predicate(const Predicate& p, const Term& goal) {
  const std::size_t first = candidate(p, goal, 0);
  if (first >= p.clauses.size()) return false;
  const std::size_t barrier = choices_.size();
  const std::size_t second = candidate(p, goal, first + 1);
  if (second < p.clauses.size()) {
    ChoicePoint& cp = push_choice(ChoicePoint::Kind::Clauses);
    cp.goal = goal;
    cp.predicate = &p;
    cp.next_clause = second;
  }
  return try_clause(p.clauses[first], goal, barrier);
}

bool Machine::try_clause(const StoredClause& c, const Term& goal, std::size_t barrier) {
  const std::size_t base = store_.size();
  store_.resize(base + c.variable_count);
  if (goal.is_compound()) {
    for (std::size_t i = 0; i < goal.arity(); ++i) {
      if (!unify(rename(c.head.arg(i), base), goal.arg(i))) return false;
    }
  }
  if (!c.body.is_atom("true")) push_goal(rename(c.body, base), barrier);
  return true;
}

bool Machine::backtrack() {
  while (!choices_.empty()) {
    ChoicePoint& cp = choices_.back();
    for (std::size_t i = trail_.size(); i-- > cp.trail_mark;) store_[trail_[i]].reset();
    trail_.resize(cp.trail_mark);
    store_.resize(cp.var_mark);
    cont_ = cp.cont;
    switch (cp.kind) {
      case ChoicePoint::Kind::Alternative:
        choices_.pop_back();
        return true;
      case ChoicePoint::Kind::Clauses: {
        const Predicate& p = *cp.predicate;
        const Term goal = cp.goal;
        const std::size_t index = cp.next_clause;
        const std::size_t barrier = choices_.size() - 1;
        const std::size_t next = candidate(p, goal, index + 1);
        if (next < p.clauses.size()) {
          cp.next_clause = next;
        } else {
          choices_.pop_back();
        }
        if (try_clause(p.clauses[index], goal, barrier)) return true;
        break;
      }
      case ChoicePoint::Kind::Answers: {
        const AnswerTuple tuple = std::move(*cp.lookahead);
        const std::vector<Term> args = cp.args;
        cp.lookahead = cp.stream();
        if (!cp.lookahead) choices_.pop_back();
        bool ok = true;
        for (std::size_t i = 0; ok && i < args.size() && i < tuple.size(); ++i) {
          ok = unify(args[i], tuple[i]);
        }
        if (ok) return true;
        break;
      }
      case ChoicePoint::Kind::FindallEnd: {
        const Term result = cp.result;
        auto it = collectors_.find(cp.collector);
        std::vector<Term> items = std::move(it->second);
        collectors_.erase(it);
        choices_.pop_back();
        for (Term& item : items) item = fresh_copy(item);
        if (unify(result, Term::list(std::move(items)))) return true;
        break;
      }
    }
  }
  return false;
}

void Machine::cut_to(std::size_t height) {
  while (choices_.size() > height) {
    if (choices_.back().kind == ChoicePoint::Kind::FindallEnd) {
      collectors_.erase(choices_.back().collector);
    }
    choices_.pop_back();
  }
}

void Machine::check_depth() const {
  const std::size_t depth = (cont_ ? cont_->depth : 0) + choices_.size();
  if (depth > options_.max_depth) throw PrologError(errors::resource("depth_limit"));
}

void Machine::push_goal(Term goal, std::size_t barrier) {
  push_frame(Frame::Kind::Goal, std::move(goal), barrier);
}

void Machine::push_frame(Frame::Kind kind, Term goal, std::size_t barrier) {
  cont_ = std::make_shared<Frame>(kind, std::move(goal), barrier, std::move(cont_));
  check_depth();
}

ChoicePoint& Machine::push_choice(ChoicePoint::Kind kind) {
  ChoicePoint& cp = choices_.emplace_back();
  cp.kind = kind;
  cp.trail_mark = trail_.size();
  cp.var_mark = store_.size();
  cp.cont = cont_;
  check_depth();
  return cp;
}

Term Machine::deref(Term t) const {
  while (t.is_var()) {
    const std::optional<Term>& b = store_[t.ordinal()];
    if (!b) break;
    t = *b;
  }
  return t;
}

void Machine::bind(std::size_t ordinal, const Term& value) {
  store_[ordinal] = value;
  // Variables newer than the last choice point vanish on backtracking anyway.
  if (!choices_.empty() && ordinal < choices_.back().var_mark) trail_.push_back(ordinal);
}

bool Machine::unify(const Term& a, const Term& b) {
  unify_stack_.clear();
  unify_stack_.emplace_back(a, b);
  while (!unify_stack_.empty()) {
    auto [x, y] = std::move(unify_stack_.back());
    unify_stack_.pop_back();
    x = deref(x);
    y = deref(y);
    if (x.same_node(y)) continue;
    if (x.is_var()) {
      if (y.is_var()) {
        if (x.ordinal() == y.ordinal()) continue;
        if (x.ordinal() < y.ordinal()) {
          bind(y.ordinal(), x);
        } else {
          bind(x.ordinal(), y);
        }
      } else {
        bind(x.ordinal(), y);
      }
      continue;
    }
    if (y.is_var()) {
      bind(y.ordinal(), x);
      continue;
    }
    if (x.kind() != y.kind()) return false;
    if (!x.is_compound()) {
      if (x != y) return false;
      continue;
    }
    if (x.arity() != y.arity() || x.name() != y.name()) return false;
    for (std::size_t i = x.arity(); i-- > 0;) unify_stack_.emplace_back(x.arg(i), y.arg(i));
  }
  return true;
}

Term Machine::rename(const Term& t, std::size_t base) const {
  if (t.is_ground()) return t;
  if (t.is_var()) return Term::var(t.name(), t.ordinal() + base);
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(rename(a, base));
  return Term::compound(t.name(), std::move(args));
}

Term Machine::fresh_copy(const Term& t) {
  if (t.is_ground()) return t;
  std::map<std::size_t, Term> vars;
  auto copy = [&](const auto& self, const Term& x) -> Term {
    if (x.is_ground()) return x;
    if (x.is_var()) {
      auto it = vars.find(x.ordinal());
      if (it == vars.end()) {
        const std::size_t ordinal = store_.size();
        store_.emplace_back();
        it = vars.emplace(x.ordinal(), Term::var(x.name(), ordinal)).first;
      }
      return it->second;
    }
    std::vector<Term> args;
    args.reserve(x.arity());
    for (const Term& a : x.args()) args.push_back(self(self, a));
    return Term::compound(x.name(), std::move(args));
  };
  return copy(copy, t);
}

Term Machine::resolve(const Term& t) {
  if (t.is_ground()) return t;
  if (visiting_.size() < store_.size()) visiting_.resize(store_.size(), false);
  path_.clear();
  return resolve_rec(t);
}

Term Machine::resolve_rec(const Term& t0) {
  const std::size_t mark = path_.size();
  Term t = t0;
  while (t.is_var()) {
    const std::size_t o = t.ordinal();
    const std::optional<Term>& b = store_[o];
    if (!b) break;
    if (visiting_[o]) {
      for (std::size_t v : path_) visiting_[v] = false;
      path_.clear();
      throw PrologError(errors::representation("cyclic_term"));
    }
    visiting_[o] = true;
    path_.push_back(o);
    t = *b;
  }
  Term result = t.is_var() ? unbound(t) : t.is_ground() ? t : resolve_compound(t);
  while (path_.size() > mark) {
    visiting_[path_.back()] = false;
    path_.pop_back();
  }
  return result;
}

Term Machine::resolve_compound(const Term& t) {
  if (!t.is_list_cell()) {
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const Term& a : t.args()) args.push_back(resolve_rec(a));
    return Term::compound(t.name(), std::move(args));
  }
  const std::size_t mark = path_.size();
  std::vector<Term> items;
  Term cur = t;
  while (cur.is_list_cell() && !cur.is_ground()) {
    items.push_back(resolve_rec(cur.arg(0)));
    cur = cur.arg(1);
    while (cur.is_var()) {
      const std::size_t o = cur.ordinal();
      const std::optional<Term>& b = store_[o];
      if (!b) break;
      if (visiting_[o]) {
        for (std::size_t v : path_) visiting_[v] = false;
        path_.clear();
        throw PrologError(errors::representation("cyclic_term"));
      }
      visiting_[o] = true;
      path_.push_back(o);
      cur = *b;
    }
  }
  Term tail = cur.is_var() ? unbound(cur) : cur.is_ground() ? cur : resolve_rec(cur);
  while (path_.size() > mark) {
    visiting_[path_.back()] = false;
    path_.pop_back();
  }
  return Term::list(std::move(items), std::move(tail));
}

}  // namespace pltp::engine
