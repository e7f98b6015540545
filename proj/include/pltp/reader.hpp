#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pltp/term.hpp"

namespace pltp {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column, std::size_t offset);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  std::size_t offset() const noexcept { return offset_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
  std::size_t column_;
  std::size_t offset_;
};

// Raised for syntax outside the supported subset, e.g. {}/1 terms or directives.
class UnsupportedConstruct : public ParseError {
 public:
  UnsupportedConstruct(const std::string& construct, std::size_t line, std::size_t column,
                       std::size_t offset);
  const std::string& construct() const noexcept { return construct_; }

 private:
  std::string construct_;
};

// Maps variable names to ordinals. Reusing one scope across several parses
// makes equally-named variables identical (e.g. an ask query and its template).
struct VariableScope {
  std::map<std::string, std::size_t, std::less<>> names;
  std::size_t next = 0;

  Term lookup(std::string_view name);
  Term fresh(std::string name);
};

// Parses one term. A trailing end token ('.') is accepted but not required.
Term parse_term(std::string_view input);
Term parse_term(std::string_view input, VariableScope& scope);

// Parses zero or more '.'-terminated clauses. Facts get body 'true'. Each
// clause's variables are numbered from zero.
std::vector<Clause> parse_program(std::string_view input);

}  // namespace pltp
