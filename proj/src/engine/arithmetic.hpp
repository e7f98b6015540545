#pragma once

#include "pltp/term.hpp"

namespace pltp::engine {

// Evaluates an arithmetic expression to an Integer or Float term. Throws
// PrologError for unbound, non-evaluable or failing expressions.
Term evaluate(const Term& expr);

// Three-way comparison of two evaluated numbers.
int compare_numbers(const Term& a, const Term& b);

}  // namespace pltp::engine
