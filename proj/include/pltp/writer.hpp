#pragma once

#include <string>

#include "pltp/term.hpp"

namespace pltp {

// Canonical text for t: quoted where needed, operators in infix/prefix form
// with minimal parentheses, lists in bracket notation. parse_term() of the
// result is structurally identical to t up to variable ordinals.
//
// Named variables print under their name; anonymous ones as _G<ordinal>.
std::string write_term(const Term& t);

// Quotes an atom name only when the reader would not accept it bare.
std::string format_atom(const std::string& name);

std::string format_float(double value);

}  // namespace pltp
