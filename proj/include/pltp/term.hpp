#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pltp {

enum class TermKind { Atom, Integer, Float, Var, Compound };

// Immutable logic value. Copies share structure; a Term is safe to hand to
// other threads. Lists are "."/2 chains terminated by the atom [].
class Term {
 public:
  static Term atom(std::string name);
  static Term integer(std::int64_t value);
  static Term floating(double value);
  static Term var(std::string name, std::size_t ordinal);
  // Throws std::invalid_argument when args is empty: zero-arity symbols are atoms.
  static Term compound(std::string functor, std::vector<Term> args);
  static Term nil();
  static Term list(std::vector<Term> items);
  static Term list(std::vector<Term> items, Term tail);

  TermKind kind() const noexcept;
  bool is_atom() const noexcept { return kind() == TermKind::Atom; }
  bool is_atom(std::string_view name) const noexcept;
  bool is_integer() const noexcept { return kind() == TermKind::Integer; }
  bool is_float() const noexcept { return kind() == TermKind::Float; }
  bool is_number() const noexcept { return is_integer() || is_float(); }
  bool is_var() const noexcept { return kind() == TermKind::Var; }
  bool is_compound() const noexcept { return kind() == TermKind::Compound; }
  bool is_compound(std::string_view functor, std::size_t arity) const noexcept;
  bool is_callable() const noexcept { return is_atom() || is_compound(); }
  bool is_nil() const noexcept { return is_atom("[]"); }
  bool is_list_cell() const noexcept { return is_compound(".", 2); }
  bool is_ground() const noexcept;

  // Atom name, compound functor or variable name.
  const std::string& name() const noexcept;
  std::int64_t int_value() const noexcept;
  double float_value() const noexcept;
  std::size_t ordinal() const noexcept;
  std::size_t arity() const noexcept;
  const std::vector<Term>& args() const noexcept;
  const Term& arg(std::size_t index) const { return args().at(index); }

  // True when both handles point at the same node.
  bool same_node(const Term& other) const noexcept { return node_ == other.node_; }

  // Structural identity; variables compare by ordinal.
  friend bool operator==(const Term& lhs, const Term& rhs) noexcept;
  friend bool operator!=(const Term& lhs, const Term& rhs) noexcept { return !(lhs == rhs); }

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

// Items of a proper list, or nullopt when t is not one.
std::optional<std::vector<Term>> list_items(const Term& t);

// Distinct variables of t in depth-first, left-to-right first-occurrence order.
std::vector<Term> term_variables(const Term& t);

// Name/value pairs for the variables of an answer, in query order.
struct Binding {
  std::vector<std::pair<std::string, Term>> pairs;

  const Term* find(std::string_view name) const;
  bool empty() const noexcept { return pairs.empty(); }
  friend bool operator==(const Binding&, const Binding&) = default;
};

struct Clause {
  Term head;
  Term body;
};

// Predicate key: name and arity.
struct Indicator {
  std::string name;
  std::size_t arity = 0;

  friend auto operator<=>(const Indicator&, const Indicator&) = default;
  std::string to_string() const { return name + "/" + std::to_string(arity); }
  Term to_term() const;
};

Indicator indicator_of(const Term& callable);

}  // namespace pltp
