#include "pltp/term.hpp"

#include <cstring>
#include <stdexcept>
#include <unordered_set>

namespace pltp {

struct Term::Node {
  TermKind kind;
  std::string name;
  std::int64_t int_value = 0;
  double float_value = 0.0;
  std::size_t ordinal = 0;
  std::vector<Term> args;
  bool ground = true;

  Node(TermKind k, std::string n) : kind(k), name(std::move(n)) {}
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  // Long right-nested chains (lists, s(s(...))) would otherwise be released
  // recursively, one stack frame per cell.
  ~Node() {
    if (args.empty()) return;
    std::shared_ptr<const Node> tail = std::move(args.back().node_);
    while (tail && tail.use_count() == 1) {
      auto& cell = const_cast<Node&>(*tail);
      if (cell.args.empty()) break;
      std::shared_ptr<const Node> next = std::move(cell.args.back().node_);
      tail = std::move(next);
    }
  }
};

namespace {

const std::string& empty_string() {
  static const std::string empty;
  return empty;
}

const std::vector<Term>& no_args() {
  static const std::vector<Term> empty;
  return empty;
}

}  // namespace

Term Term::atom(std::string name) {
  return Term(std::make_shared<const Node>(TermKind::Atom, std::move(name)));
}

Term Term::integer(std::int64_t value) {
  auto node = std::make_shared<Node>(TermKind::Integer, std::string{});
  node->int_value = value;
  return Term(std::move(node));
}

Term Term::floating(double value) {
  auto node = std::make_shared<Node>(TermKind::Float, std::string{});
  node->float_value = value;
  return Term(std::move(node));
}

Term Term::var(std::string name, std::size_t ordinal) {
  auto node = std::make_shared<Node>(TermKind::Var, std::move(name));
  node->ordinal = ordinal;
  node->ground = false;
  return Term(std::move(node));
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  if (args.empty()) {
    throw std::invalid_argument("compound term '" + functor + "' needs at least one argument");
  }
  auto node = std::make_shared<Node>(TermKind::Compound, std::move(functor));
  for (const auto& a : args) {
    if (!a.is_ground()) {
      node->ground = false;
      break;
    }
  }
  node->args = std::move(args);
  return Term(std::move(node));
}

Term Term::nil() {
  static const Term empty = Term::atom("[]");
  return empty;
}

Term Term::list(std::vector<Term> items) { return list(std::move(items), nil()); }

Term Term::list(std::vector<Term> items, Term tail) {
  Term result = std::move(tail);
  for (auto it = items.rbegin(); it != items.rend(); ++it) {
    result = compound(".", {std::move(*it), std::move(result)});
  }
  return result;
}

TermKind Term::kind() const noexcept { return node_->kind; }

bool Term::is_atom(std::string_view name) const noexcept {
  return node_->kind == TermKind::Atom && node_->name == name;
}

bool Term::is_compound(std::string_view functor, std::size_t arity) const noexcept {
  return node_->kind == TermKind::Compound && node_->args.size() == arity && node_->name == functor;
}

bool Term::is_ground() const noexcept { return node_->ground; }

const std::string& Term::name() const noexcept {
  switch (node_->kind) {
    case TermKind::Atom:
    case TermKind::Var:
    case TermKind::Compound:
      return node_->name;
    default:
      return empty_string();
  }
}

std::int64_t Term::int_value() const noexcept { return node_->int_value; }
double Term::float_value() const noexcept { return node_->float_value; }
std::size_t Term::ordinal() const noexcept { return node_->ordinal; }
std::size_t Term::arity() const noexcept { return node_->args.size(); }

const std::vector<Term>& Term::args() const noexcept {
  return node_->kind == TermKind::Compound ? node_->args : no_args();
}

bool operator==(const Term& lhs, const Term& rhs) noexcept {
  const Term* a = &lhs;
  const Term* b = &rhs;
  for (;;) {
    if (a->node_ == b->node_) return true;
    const auto& x = *a->node_;
    const auto& y = *b->node_;
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case TermKind::Atom:
        return x.name == y.name;
      case TermKind::Integer:
        return x.int_value == y.int_value;
      case TermKind::Float:
        // Bitwise-style identity: NaN equals NaN, 0.0 differs from -0.0.
        return std::memcmp(&x.float_value, &y.float_value, sizeof(double)) == 0;
      case TermKind::Var:
        return x.ordinal == y.ordinal;
      case TermKind::Compound: {
        if (x.name != y.name || x.args.size() != y.args.size()) return false;
        const std::size_t last = x.args.size() - 1;
        for (std::size_t i = 0; i < last; ++i) {
          if (!(x.args[i] == y.args[i])) return false;
        }
        a = &x.args[last];
        b = &y.args[last];
        break;
      }
    }
  }
}

std::optional<std::vector<Term>> list_items(const Term& t) {
  std::vector<Term> items;
  const Term* cur = &t;
  while (cur->is_list_cell()) {
    items.push_back(cur->arg(0));
    cur = &cur->arg(1);
  }
  if (!cur->is_nil()) return std::nullopt;
  return items;
}

std::vector<Term> term_variables(const Term& t) {
  std::vector<Term> vars;
  std::unordered_set<std::size_t> seen;
  std::vector<const Term*> stack{&t};
  while (!stack.empty()) {
    const Term* cur = stack.back();
    stack.pop_back();
    if (cur->is_ground()) continue;
    if (cur->is_var()) {
      if (seen.insert(cur->ordinal()).second) vars.push_back(*cur);
      continue;
    }
    const auto& args = cur->args();
    for (auto it = args.rbegin(); it != args.rend(); ++it) stack.push_back(&*it);
  }
  return vars;
}

const Term* Binding::find(std::string_view name) const {
  for (const auto& [n, v] : pairs) {
    if (n == name) return &v;
  }
  return nullptr;
}

Term Indicator::to_term() const {
  return Term::compound("/", {Term::atom(name), Term::integer(static_cast<std::int64_t>(arity))});
}

Indicator indicator_of(const Term& callable) {
  return Indicator{callable.name(), callable.arity()};
}

}  // namespace pltp
