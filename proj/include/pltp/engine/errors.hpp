#pragma once

#include <stdexcept>
#include <string>

#include "pltp/term.hpp"

namespace pltp::engine {

// A Prolog-level exception carrying its formal error term, e.g.
// existence_error(procedure, foo/1). Builtin evaluators throw it; the solver
// turns it into an Error step.
class PrologError : public std::runtime_error {
 public:
  explicit PrologError(Term formal);

  const Term& formal() const noexcept { return formal_; }
  // Functor (or atom) name of the formal term, e.g. "type_error".
  const std::string& kind() const noexcept { return formal_.name(); }

 private:
  Term formal_;
};

// Thrown by register_builtin() when the indicator is already defined.
class DefinitionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace errors {

Term instantiation();
Term type(const std::string& type, const Term& culprit);
Term domain(const std::string& domain, const Term& culprit);
Term existence(const std::string& kind, const Term& what);
Term permission(const std::string& action, const std::string& type, const Term& culprit);
Term evaluation(const std::string& what);
Term resource(const std::string& what);
Term representation(const std::string& what);

}  // namespace errors

}  // namespace pltp::engine
