#include "pltp/writer.hpp"

#include <charconv>
#include <cmath>

#include "operators.hpp"

namespace pltp {

namespace {

using detail::OpType;

bool is_solo_atom(const std::string& name) { return name == "[]" || name == "!" || name == ";"; }

bool is_letter_atom(const std::string& name) {
  if (name.empty() || !(name[0] >= 'a' && name[0] <= 'z')) return false;
  for (char c : name) {
    if (!detail::is_alnum_char(c)) return false;
  }
  return true;
}

bool is_symbol_atom(const std::string& name) {
  if (name.empty() || name == "." || name.rfind("/*", 0) == 0) return false;
  for (char c : name) {
    if (!detail::is_symbol_char(c)) return false;
  }
  return true;
}

bool symbolic(const std::string& op) {
  return op == "," || op == ";" || op == "|" || is_symbol_atom(op);
}

void append_quoted(std::string& out, const std::string& name) {
  out.push_back('\'');
  for (char c : name) {
    switch (c) {
      case '\'': out += "\\'"; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\a': out += "\\a"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\v': out += "\\v"; break;
      case '\0': out += "\\x0\\"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('\'');
}

class Writer {
 public:
  std::string out;

  void write(const Term& t, int max_priority) {
    switch (t.kind()) {
      case TermKind::Atom:
        write_atom_operand(t.name(), max_priority);
        return;
      case TermKind::Integer:
        out += std::to_string(t.int_value());
        return;
      case TermKind::Float:
        out += format_float(t.float_value());
        return;
      case TermKind::Var:
        if (t.name().empty() || t.name() == "_") {
          out += "_G" + std::to_string(t.ordinal());
        } else {
          out += t.name();
        }
        return;
      case TermKind::Compound:
        write_compound(t, max_priority);
        return;
    }
  }

 private:
  void write_atom_operand(const std::string& name, int max_priority) {
    // Operator atoms standing alone as operands are bracketed so they cannot
    // be taken for the operator itself.
    if (max_priority < 1200 && detail::is_operator_atom(name) && name != "[]") {
      out.push_back('(');
      out += format_atom(name);
      out.push_back(')');
      return;
    }
    out += format_atom(name);
  }

  // Arguments and list elements are delimited by ',', '|', ')' or ']', so
  // operator atoms need no brackets there.
  void write_arg(const Term& t) {
    if (t.is_atom()) {
      out += format_atom(t.name());
    } else {
      write(t, 999);
    }
  }

  void write_list(const Term& t) {
    out.push_back('[');
    const Term* cur = &t;
    bool first = true;
    while (cur->is_list_cell()) {
      if (!first) out.push_back(',');
      first = false;
      write_arg(cur->arg(0));
      cur = &cur->arg(1);
    }
    if (!cur->is_nil()) {
      out.push_back('|');
      write_arg(*cur);
    }
    out.push_back(']');
  }

  void write_compound(const Term& t, int max_priority) {
    if (t.is_list_cell()) {
      write_list(t);
      return;
    }
    const std::string& f = t.name();
    if (t.arity() == 2) {
      if (auto op = detail::infix_op(f)) {
        const int left_max = op->type == OpType::yfx ? op->priority : op->priority - 1;
        const int right_max = op->type == OpType::xfy ? op->priority : op->priority - 1;
        const bool bracket = op->priority > max_priority;
        if (bracket) out.push_back('(');
        write(t.arg(0), left_max);
        if (!symbolic(f)) {
          out.push_back(' ');
          out += f;
          out.push_back(' ');
          write(t.arg(1), right_max);
        } else {
          // Symbol-char operators are written tight unless the neighbouring
          // text would fuse with them into a single token.
          if (!out.empty() && detail::is_symbol_char(out.back()) && f != "," && f != ";" && f != "|") {
            out.push_back(' ');
          }
          out += f;
          const std::size_t at = out.size();
          write(t.arg(1), right_max);
          if (at < out.size() && detail::is_symbol_char(out[at]) && f != "," && f != ";" &&
              f != "|") {
            out.insert(at, 1, ' ');
          }
        }
        if (bracket) out.push_back(')');
        return;
      }
    }
    if (t.arity() == 1) {
      if (auto op = detail::prefix_op(f)) {
        const int arg_max = op->type == OpType::fy ? op->priority : op->priority - 1;
        const bool bracket = op->priority > max_priority;
        if (bracket) out.push_back('(');
        out += f;
        out.push_back(' ');
        write(t.arg(0), arg_max);
        if (bracket) out.push_back(')');
        return;
      }
    }
    out += format_atom(f);
    out.push_back('(');
    bool first = true;
    for (const auto& a : t.args()) {
      if (!first) out.push_back(',');
      first = false;
      write_arg(a);
    }
    out.push_back(')');
  }
};

}  // namespace

std::string format_atom(const std::string& name) {
  if (is_solo_atom(name) || is_letter_atom(name) || is_symbol_atom(name)) return name;
  std::string out;
  append_quoted(out, name);
  return out;
}

std::string format_float(double value) {
  if (std::isnan(value)) return "1.5NaN";
  if (std::isinf(value)) return value > 0 ? "1.0Inf" : "-1.0Inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string text(buf, ptr);
  const auto e = text.find_first_of("eE");
  if (text.find('.') == std::string::npos) {
    if (e == std::string::npos) {
      text += ".0";
    } else {
      text.insert(e, ".0");
    }
  }
  return text;
}

std::string write_term(const Term& t) {
  Writer w;
  w.write(t, 1200);
  return std::move(w.out);
}

}  // namespace pltp
