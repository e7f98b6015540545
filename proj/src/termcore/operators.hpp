#pragma once

#include <optional>
#include <string_view>

namespace pltp::detail {

enum class OpType { xfx, xfy, yfx, fy, fx };

struct OpDef {
  int priority;
  OpType type;
};

inline std::optional<OpDef> infix_op(std::string_view name) {
  struct Entry {
    std::string_view name;
    OpDef def;
  };
  static constexpr Entry table[] = {
      {":-", {1200, OpType::xfx}}, {";", {1100, OpType::xfy}},   {"->", {1050, OpType::xfy}},
      {",", {1000, OpType::xfy}},  {"=", {700, OpType::xfx}},    {"\\=", {700, OpType::xfx}},
      {"==", {700, OpType::xfx}},  {"\\==", {700, OpType::xfx}}, {"is", {700, OpType::xfx}},
      {"<", {700, OpType::xfx}},   {">", {700, OpType::xfx}},    {"=<", {700, OpType::xfx}},
      {">=", {700, OpType::xfx}},  {"=:=", {700, OpType::xfx}},  {"=\\=", {700, OpType::xfx}},
      {"+", {500, OpType::yfx}},   {"-", {500, OpType::yfx}},    {"*", {400, OpType::yfx}},
      {"/", {400, OpType::yfx}},   {"//", {400, OpType::yfx}},   {"mod", {400, OpType::yfx}},
  };
  for (const auto& e : table) {
    if (e.name == name) return e.def;
  }
  return std::nullopt;
}

inline std::optional<OpDef> prefix_op(std::string_view name) {
  if (name == ":-" || name == "?-") return OpDef{1200, OpType::fx};
  if (name == "\\+") return OpDef{900, OpType::fy};
  if (name == "-") return OpDef{200, OpType::fy};
  return std::nullopt;
}

inline bool is_operator_atom(std::string_view name) {
  return infix_op(name).has_value() || prefix_op(name).has_value();
}

inline bool is_symbol_char(char c) {
  switch (c) {
    case '+': case '-': case '*': case '/': case '\\': case '^': case '<': case '>':
    case '=': case '~': case ':': case '.': case '?': case '@': case '#': case '&':
    case '$':
      return true;
    default:
      return false;
  }
}

inline bool is_alnum_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace pltp::detail
