#include "arithmetic.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "pltp/engine/errors.hpp"

namespace pltp::engine {

namespace {

[[noreturn]] void overflow() { throw PrologError(errors::evaluation("int_overflow")); }
[[noreturn]] void zero_divisor() { throw PrologError(errors::evaluation("zero_divisor")); }

double as_double(const Term& t) {
  return t.is_integer() ? static_cast<double>(t.int_value()) : t.float_value();
}

Term checked_float(double v) {
  if (std::isnan(v)) throw PrologError(errors::evaluation("undefined"));
  if (std::isinf(v)) throw PrologError(errors::evaluation("float_overflow"));
  return Term::floating(v);
}

std::int64_t require_int(const Term& t) {
  if (!t.is_integer()) throw PrologError(errors::type("integer", t));
  return t.int_value();
}

Term to_integer(double v) {
  if (!std::isfinite(v) || v >= 9223372036854775808.0 || v < -9223372036854775808.0) overflow();
  return Term::integer(static_cast<std::int64_t>(v));
}

Term unary(const std::string& op, const Term& x) {
  if (op == "-") {
    if (x.is_integer()) {
      if (x.int_value() == std::numeric_limits<std::int64_t>::min()) overflow();
      return Term::integer(-x.int_value());
    }
    return Term::floating(-x.float_value());
  }
  if (op == "+") return x;
  if (op == "abs") {
    if (x.is_integer()) {
      if (x.int_value() == std::numeric_limits<std::int64_t>::min()) overflow();
      return Term::integer(x.int_value() < 0 ? -x.int_value() : x.int_value());
    }
    return Term::floating(std::fabs(x.float_value()));
  }
  if (op == "float") return Term::floating(as_double(x));
  if (op == "integer") return x.is_integer() ? x : to_integer(std::round(x.float_value()));
  if (op == "truncate") return x.is_integer() ? x : to_integer(std::trunc(x.float_value()));
  throw PrologError(errors::type("evaluable", Indicator{op, 1}.to_term()));
}

Term binary(const std::string& op, const Term& x, const Term& y) {
  const bool ints = x.is_integer() && y.is_integer();
  if (op == "+" || op == "-" || op == "*") {
    if (ints) {
      std::int64_t r = 0;
      const std::int64_t a = x.int_value();
      const std::int64_t b = y.int_value();
      const bool bad = op == "+"   ? __builtin_add_overflow(a, b, &r)
                       : op == "-" ? __builtin_sub_overflow(a, b, &r)
                                   : __builtin_mul_overflow(a, b, &r);
      if (bad) overflow();
      return Term::integer(r);
    }
    const double a = as_double(x);
    const double b = as_double(y);
    return checked_float(op == "+" ? a + b : op == "-" ? a - b : a * b);
  }
  if (op == "/") {
    if (ints) {
      const std::int64_t a = x.int_value();
      const std::int64_t b = y.int_value();
      if (b == 0) zero_divisor();
      if (b == -1 && a == std::numeric_limits<std::int64_t>::min()) overflow();
      if (a % b == 0) return Term::integer(a / b);
      return Term::floating(static_cast<double>(a) / static_cast<double>(b));
    }
    if (as_double(y) == 0.0) zero_divisor();
    return checked_float(as_double(x) / as_double(y));
  }
  if (op == "//" || op == "mod") {
    const std::int64_t a = require_int(x);
    const std::int64_t b = require_int(y);
    if (b == 0) zero_divisor();
    if (b == -1) {
      if (op == "mod") return Term::integer(0);
      if (a == std::numeric_limits<std::int64_t>::min()) overflow();
    }
    if (op == "//") return Term::integer(a / b);
    const std::int64_t m = a % b;
    return Term::integer(m != 0 && ((m < 0) != (b < 0)) ? m + b : m);
  }
  if (op == "min" || op == "max") {
    const int c = compare_numbers(x, y);
    if (op == "min") return c <= 0 ? x : y;
    return c >= 0 ? x : y;
  }
  throw PrologError(errors::type("evaluable", Indicator{op, 2}.to_term()));
}

}  // namespace

Term evaluate(const Term& expr) {
  switch (expr.kind()) {
    case TermKind::Integer:
    case TermKind::Float:
      return expr;
    case TermKind::Var:
      throw PrologError(errors::instantiation());
    case TermKind::Atom:
      throw PrologError(errors::type("evaluable", Indicator{expr.name(), 0}.to_term()));
    case TermKind::Compound:
      break;
  }
  if (expr.arity() == 1) return unary(expr.name(), evaluate(expr.arg(0)));
  if (expr.arity() == 2) return binary(expr.name(), evaluate(expr.arg(0)), evaluate(expr.arg(1)));
  throw PrologError(errors::type("evaluable", indicator_of(expr).to_term()));
}

int compare_numbers(const Term& a, const Term& b) {
  if (a.is_integer() && b.is_integer()) {
    return a.int_value() < b.int_value() ? -1 : a.int_value() > b.int_value() ? 1 : 0;
  }
  const double x = as_double(a);
  const double y = as_double(b);
  return x < y ? -1 : x > y ? 1 : 0;
}

}  // namespace pltp::engine
