#pragma once

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "pltp/term.hpp"

namespace pltp {

using json = nlohmann::ordered_json;

class JsonStructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Term -> JSON:
//   atom -> string, number -> number, proper list -> array,
//   @(true|false|null) -> JSON constant, json([K=V,...]) -> object,
//   any other compound -> {"functor": F, "args": [...]}.
// Unbound variables become {"functor":"$VAR","args":[Name]}. The term
// json/1 is reserved for objects.
json term_to_json(const Term& t);

// Inverse of term_to_json on its image. Plain objects decode to json/1 pair
// lists; "$VAR" objects decode to fresh variables (equal names share one).
// Throws JsonStructureError for an object with "functor" but bad "args".
Term json_to_term(const json& value);

}  // namespace pltp
