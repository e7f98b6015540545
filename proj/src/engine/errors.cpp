#include "pltp/engine/errors.hpp"

#include "pltp/writer.hpp"

namespace pltp::engine {

PrologError::PrologError(Term formal)
    : std::runtime_error(write_term(formal)), formal_(std::move(formal)) {}

namespace errors {

namespace {
Term compound(const char* name, std::vector<Term> args) {
  return Term::compound(name, std::move(args));
}
}  // namespace

Term instantiation() { return Term::atom("instantiation_error"); }

Term type(const std::string& type, const Term& culprit) {
  return compound("type_error", {Term::atom(type), culprit});
}

Term domain(const std::string& domain, const Term& culprit) {
  return compound("domain_error", {Term::atom(domain), culprit});
}

Term existence(const std::string& kind, const Term& what) {
  return compound("existence_error", {Term::atom(kind), what});
}

Term permission(const std::string& action, const std::string& type, const Term& culprit) {
  return compound("permission_error", {Term::atom(action), Term::atom(type), culprit});
}

Term evaluation(const std::string& what) {
  return compound("evaluation_error", {Term::atom(what)});
}

Term resource(const std::string& what) { return compound("resource_error", {Term::atom(what)}); }

Term representation(const std::string& what) {
  return compound("representation_error", {Term::atom(what)});
}

}  // namespace errors

}  // namespace pltp::engine
