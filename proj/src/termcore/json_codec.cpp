#include "pltp/json_codec.hpp"

#include <map>

#include "pltp/reader.hpp"

namespace pltp {

namespace {

// Pairs of a json/1 term, or nullopt when the argument is not a proper
// list of Atom=Value.
std::optional<std::vector<std::pair<std::string, Term>>> object_pairs(const Term& t) {
  if (!t.is_compound("json", 1)) return std::nullopt;
  auto items = list_items(t.arg(0));
  if (!items) return std::nullopt;
  std::vector<std::pair<std::string, Term>> pairs;
  for (const auto& item : *items) {
    if (!item.is_compound("=", 2) || !item.arg(0).is_atom()) return std::nullopt;
    pairs.emplace_back(item.arg(0).name(), item.arg(1));
  }
  return pairs;
}

json compound_object(const Term& t) {
  json args = json::array();
  for (const auto& a : t.args()) args.push_back(term_to_json(a));
  return json{{"functor", t.name()}, {"args", std::move(args)}};
}

class Decoder {
 public:
  Term decode(const json& v) {
    switch (v.type()) {
      case json::value_t::string:
        return Term::atom(v.get<std::string>());
      case json::value_t::number_integer:
        return Term::integer(v.get<std::int64_t>());
      case json::value_t::number_unsigned: {
        const auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
          throw JsonStructureError("integer " + v.dump() + " is outside the signed 64-bit range");
        }
        return Term::integer(static_cast<std::int64_t>(u));
      }
      case json::value_t::number_float:
        return Term::floating(v.get<double>());
      case json::value_t::boolean:
        return Term::compound("@", {Term::atom(v.get<bool>() ? "true" : "false")});
      case json::value_t::null:
        return Term::compound("@", {Term::atom("null")});
      case json::value_t::array: {
        std::vector<Term> items;
        items.reserve(v.size());
        for (const auto& e : v) items.push_back(decode(e));
        return Term::list(std::move(items));
      }
      case json::value_t::object:
        return decode_object(v);
      default:
        throw JsonStructureError("unsupported JSON value: " + v.dump());
    }
  }

 private:
  Term decode_object(const json& v) {
    auto functor = v.find("functor");
    if (functor == v.end()) {
      std::vector<Term> pairs;
      for (const auto& [key, value] : v.items()) {
        pairs.push_back(Term::compound("=", {Term::atom(key), decode(value)}));
      }
      return Term::compound("json", {Term::list(std::move(pairs))});
    }
    auto args = v.find("args");
    if (!functor->is_string() || args == v.end() || !args->is_array() || args->empty()) {
      throw JsonStructureError("object with \"functor\" needs a string functor and a non-empty "
                               "\"args\" array: " + v.dump());
    }
    const auto name = functor->get<std::string>();
    if (name == "$VAR" && args->size() == 1 && args->front().is_string()) {
      return scope_.lookup(args->front().get<std::string>());
    }
    std::vector<Term> decoded;
    decoded.reserve(args->size());
    for (const auto& a : *args) decoded.push_back(decode(a));
    return Term::compound(name, std::move(decoded));
  }

  VariableScope scope_;
};

}  // namespace

json term_to_json(const Term& t) {
  switch (t.kind()) {
    case TermKind::Atom:
      if (t.is_nil()) return json::array();
      return t.name();
    case TermKind::Integer:
      return t.int_value();
    case TermKind::Float:
      return t.float_value();
    case TermKind::Var: {
      std::string name = t.name();
      if (name.empty() || name == "_") name = "_G" + std::to_string(t.ordinal());
      return json{{"functor", "$VAR"}, {"args", json::array({name})}};
    }
    case TermKind::Compound:
      break;
  }
  if (t.is_list_cell()) {
    if (auto items = list_items(t)) {
      json arr = json::array();
      for (const auto& item : *items) arr.push_back(term_to_json(item));
      return arr;
    }
    return compound_object(t);
  }
  if (t.is_compound("@", 1) && t.arg(0).is_atom()) {
    const auto& c = t.arg(0).name();
    if (c == "true") return true;
    if (c == "false") return false;
    if (c == "null") return nullptr;
  }
  if (auto pairs = object_pairs(t)) {
    json obj = json::object();
    for (auto& [k, v] : *pairs) obj[k] = term_to_json(v);
    return obj;
  }
  return compound_object(t);
}

Term json_to_term(const json& value) {
  Decoder decoder;
  return decoder.decode(value);
}

}  // namespace pltp
