#pragma once

#include <optional>

#include "pltp/engine/database.hpp"
#include "pltp/term.hpp"

namespace pltp::engine {

// Static vetting of a goal before it runs. Returns nullopt when every
// reachable call is a safe builtin, a control construct with safe arguments or
// a user predicate whose clauses are themselves safe. Otherwise returns the
// error term: instantiation_error when a meta-call argument is not
// sufficiently instantiated, or permission_error(call, sandboxed, Name/Arity)
// for the first reachable unsafe builtin. Undefined predicates pass here and
// raise existence_error when called.
std::optional<Term> safe_goal(const Database& db, const Term& goal);

}  // namespace pltp::engine
