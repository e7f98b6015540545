#pragma once

#include <cstddef>
#include <map>
#include <optional>

#include "pltp/term.hpp"

namespace pltp::engine {

// Variable ordinal -> bound value. Values may mention further bound variables.
using Substitution = std::map<std::size_t, Term>;

// Most general unifier of a and b extending s, or nullopt. No occurs check.
std::optional<Substitution> unify(const Term& a, const Term& b, Substitution s = {});

// Replaces bound variables in t until only unbound ones remain.
Term apply(const Substitution& s, const Term& t);

}  // namespace pltp::engine
