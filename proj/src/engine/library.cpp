#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "arithmetic.hpp"
#include "pltp/engine/database.hpp"
#include "pltp/engine/errors.hpp"
#include "pltp/engine/unify.hpp"
#include "pltp/reader.hpp"
#include "pltp/writer.hpp"

namespace pltp::engine {

namespace {

using Args = std::vector<Term>;

AnswerStream test(bool ok, const Args& args) {
  return ok ? answers::yes(args) : answers::none();
}

std::optional<Term> parse_number(const std::string& text) {
  try {
    Term t = parse_term(text);
    if (t.is_number()) return t;
  } catch (const ParseError&) {
  }
  return std::nullopt;
}

AnswerStream atom_number(const Args& a) {
  if (a[0].is_atom()) {
    std::optional<Term> n = parse_number(a[0].name());
    if (!n) return answers::none();
    return answers::once({a[0], *n});
  }
  if (!a[0].is_var()) throw PrologError(errors::type("atom", a[0]));
  if (a[1].is_var()) throw PrologError(errors::instantiation());
  if (!a[1].is_number()) throw PrologError(errors::type("number", a[1]));
  return answers::once({Term::atom(write_term(a[1])), a[1]});
}

AnswerStream member(const Args& a) {
  return [list = a[1], cell = a[1]]() mutable -> std::optional<AnswerTuple> {
    if (!cell.is_list_cell()) return std::nullopt;
    Term item = cell.arg(0);
    cell = cell.arg(1);
    return AnswerTuple{item, list};
  };
}

// append/3 for a proper first or third list. Other modes would need fresh
// variables in the answers, which evaluators cannot create.
AnswerStream append(const Args& a) {
  if (auto front = list_items(a[0])) {
    return answers::once({a[0], a[1], Term::list(*front, a[1])});
  }
  if (auto whole = list_items(a[2])) {
    return [a, whole = std::move(*whole), split = std::size_t{0}]() mutable -> std::optional<AnswerTuple> {
      if (split > whole.size()) return std::nullopt;
      std::vector<Term> front(whole.begin(), whole.begin() + static_cast<std::ptrdiff_t>(split));
      std::vector<Term> back(whole.begin() + static_cast<std::ptrdiff_t>(split), whole.end());
      ++split;
      return AnswerTuple{Term::list(std::move(front)), Term::list(std::move(back)), a[2]};
    };
  }
  if (a[2].is_var() || a[2].is_list_cell()) throw PrologError(errors::instantiation());
  return answers::none();
}

std::int64_t integer_arg(const Term& t) {
  if (t.is_var()) throw PrologError(errors::instantiation());
  if (!t.is_integer()) throw PrologError(errors::type("integer", t));
  return t.int_value();
}

AnswerStream between(const Args& a) {
  const std::int64_t low = integer_arg(a[0]);
  std::int64_t high;
  if (a[1].is_atom("inf") || a[1].is_atom("infinite")) {
    high = std::numeric_limits<std::int64_t>::max();
  } else {
    high = integer_arg(a[1]);
  }
  if (!a[2].is_var()) {
    const std::int64_t x = integer_arg(a[2]);
    return test(low <= x && x <= high, a);
  }
  return [a, next = low, high, done = low > high]() mutable -> std::optional<AnswerTuple> {
    if (done) return std::nullopt;
    AnswerTuple out{a[0], a[1], Term::integer(next)};
    if (next == high) {
      done = true;
    } else {
      ++next;
    }
    return out;
  };
}

AnswerStream repeat(const Args&) {
  return [] { return std::optional<AnswerTuple>(AnswerTuple{}); };
}

AnswerStream length(const Args& a) {
  std::optional<std::vector<Term>> items = list_items(a[0]);
  if (!items) {
    if (a[0].is_var() || a[0].is_list_cell()) throw PrologError(errors::instantiation());
    return answers::none();
  }
  return answers::once({a[0], Term::integer(static_cast<std::int64_t>(items->size()))});
}

using Compare = bool (*)(int);

Evaluator arith_compare(Compare accept) {
  return [accept](const Args& a) {
    return test(accept(compare_numbers(evaluate(a[0]), evaluate(a[1]))), a);
  };
}

void add(Database& db, const char* name, std::size_t arity, Evaluator e, bool safe = true) {
  db.add_builtin(name, arity, Builtin{Control::None, std::move(e), safe});
}

void control(Database& db, const char* name, std::size_t arity, Control c) {
  db.add_builtin(name, arity, Builtin{c, {}, true});
}

}  // namespace

Database Database::standard() {
  Database db;
  control(db, "true", 0, Control::True);
  control(db, "fail", 0, Control::Fail);
  control(db, "false", 0, Control::Fail);
  control(db, ",", 2, Control::Conjunction);
  control(db, ";", 2, Control::Disjunction);
  control(db, "->", 2, Control::IfThen);
  control(db, "!", 0, Control::Cut);
  control(db, "=", 2, Control::Unify);
  control(db, "\\+", 1, Control::Not);
  control(db, "call", 1, Control::Call);
  control(db, "once", 1, Control::Once);
  control(db, "findall", 3, Control::Findall);
  control(db, "pengine_output", 1, Control::Output);
  control(db, "pengine_input", 2, Control::Input);
  control(db, "pengine_debug", 1, Control::Debug);

  add(db, "\\=", 2, [](const Args& a) { return test(!unify(a[0], a[1]).has_value(), a); });
  add(db, "==", 2, [](const Args& a) { return test(a[0] == a[1], a); });
  add(db, "\\==", 2, [](const Args& a) { return test(a[0] != a[1], a); });
  add(db, "is", 2, [](const Args& a) { return answers::once({evaluate(a[1]), a[1]}); });
  add(db, "<", 2, arith_compare([](int c) { return c < 0; }));
  add(db, ">", 2, arith_compare([](int c) { return c > 0; }));
  add(db, "=<", 2, arith_compare([](int c) { return c <= 0; }));
  add(db, ">=", 2, arith_compare([](int c) { return c >= 0; }));
  add(db, "=:=", 2, arith_compare([](int c) { return c == 0; }));
  add(db, "=\\=", 2, arith_compare([](int c) { return c != 0; }));

  add(db, "var", 1, [](const Args& a) { return test(a[0].is_var(), a); });
  add(db, "nonvar", 1, [](const Args& a) { return test(!a[0].is_var(), a); });
  add(db, "atom", 1, [](const Args& a) { return test(a[0].is_atom(), a); });
  add(db, "number", 1, [](const Args& a) { return test(a[0].is_number(), a); });
  add(db, "integer", 1, [](const Args& a) { return test(a[0].is_integer(), a); });
  add(db, "float", 1, [](const Args& a) { return test(a[0].is_float(), a); });
  add(db, "atomic", 1, [](const Args& a) { return test(!a[0].is_var() && !a[0].is_compound(), a); });
  add(db, "compound", 1, [](const Args& a) { return test(a[0].is_compound(), a); });
  add(db, "callable", 1, [](const Args& a) { return test(a[0].is_callable(), a); });
  add(db, "is_list", 1, [](const Args& a) { return test(list_items(a[0]).has_value(), a); });

  add(db, "atom_number", 2, atom_number);
  add(db, "member", 2, member);
  add(db, "append", 3, append);
  add(db, "between", 3, between);
  add(db, "repeat", 0, repeat);
  add(db, "length", 2, length);

  // Console I/O of the hosting process; never reachable from sandboxed goals.
  add(
      db, "write", 1,
      [](const Args& a) {
        std::cout << write_term(a[0]) << std::flush;
        return answers::yes(a);
      },
      false);
  add(
      db, "writeln", 1,
      [](const Args& a) {
        std::cout << write_term(a[0]) << std::endl;
        return answers::yes(a);
      },
      false);
  add(
      db, "nl", 0,
      [](const Args& a) {
        std::cout << std::endl;
        return answers::yes(a);
      },
      false);
  return db;
}

}  // namespace pltp::engine
