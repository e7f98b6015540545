#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pltp/engine/database.hpp"
#include "pltp/term.hpp"

namespace pltp::engine {

struct SolveOptions {
  // Bound on goal-stack depth plus open choice points.
  std::size_t max_depth = 1'000'000;
  // When set and raised, the running solve stops with an abort error.
  std::shared_ptr<std::atomic<bool>> cancel;
  // Receives pengine_debug/1 messages; they are dropped when empty.
  std::function<void(const std::string&)> debug_sink;
};

class Machine;

// Resumption point of a suspended solve. Move-only; resume() consumes it.
class SolverToken {
 public:
  explicit SolverToken(std::unique_ptr<Machine> machine);
  SolverToken(SolverToken&&) noexcept;
  SolverToken& operator=(SolverToken&&) noexcept;
  ~SolverToken();

  bool consumed() const noexcept { return machine_ == nullptr; }

 private:
  friend struct TokenAccess;
  std::unique_ptr<Machine> machine_;
};

class ConsumedTokenError : public std::logic_error {
 public:
  ConsumedTokenError() : std::logic_error("solver token already consumed") {}
};

struct Solution {
  // Named template variables (names starting with '_' excluded), query order.
  Binding binding;
  // The template with the answer's bindings substituted.
  Term instance;
  SolverToken token;
  // False when no choice point is left: resuming would certainly fail.
  bool has_alternatives = false;
};

struct Output {
  Term data;
  SolverToken token;
};

struct Prompt {
  Term prompt;
  SolverToken token;
};

struct Failure {};

struct Error {
  std::string kind;
  Term detail;
};

using SolveStep = std::variant<Solution, Output, Prompt, Failure, Error>;

SolveStep start_solve(std::shared_ptr<const Database> db, const Term& query, const Term& tmpl,
                      SolveOptions options = {});
SolveStep start_solve(std::shared_ptr<const Database> db, const Term& query,
                      SolveOptions options = {});

// Continues a suspended solve. input must be given exactly when the token came
// from a Prompt step; it is unified with the prompt's answer variable.
// Throws ConsumedTokenError for a consumed token and std::invalid_argument on
// an input mismatch.
SolveStep resume(SolverToken& token, std::optional<Term> input = std::nullopt);

struct Batch {
  std::vector<Term> solutions;
  std::vector<Binding> bindings;
  // True when a further solution attempt is pending; token is then set.
  bool more = false;
  std::optional<SolverToken> token;
  // Output, Prompt or Error step that interrupted collection. Solutions
  // gathered before it are kept; the caller resumes the step's token later
  // and continues with find_n() on the following step.
  std::optional<SolveStep> interrupt;
};

// Collects up to n solutions starting from step.
Batch find_n(std::size_t n, SolveStep step);
Batch find_n(std::size_t n, std::shared_ptr<const Database> db, const Term& goal,
             const Term& tmpl, SolveOptions options = {});

// Text form of an Error step, e.g. "existence_error(procedure,foo/1)".
std::string describe(const Error& error);

}  // namespace pltp::engine
