#include "pltp/engine/solver.hpp"

#include <utility>

#include "machine.hpp"
#include "pltp/writer.hpp"

namespace pltp::engine {

struct TokenAccess {
  static std::unique_ptr<Machine> take(SolverToken& token) { return std::move(token.machine_); }
  static const Machine* peek(const SolverToken& token) { return token.machine_.get(); }
};

SolverToken::SolverToken(std::unique_ptr<Machine> machine) : machine_(std::move(machine)) {}
SolverToken::SolverToken(SolverToken&&) noexcept = default;
SolverToken& SolverToken::operator=(SolverToken&&) noexcept = default;
SolverToken::~SolverToken() = default;

namespace {

SolveStep to_step(Outcome out, std::unique_ptr<Machine> m) {
  switch (out.kind) {
    case Outcome::Kind::Solution:
      return Solution{std::move(out.binding), std::move(out.data), SolverToken(std::move(m)),
                      out.alternatives};
    case Outcome::Kind::Output:
      return Output{std::move(out.data), SolverToken(std::move(m))};
    case Outcome::Kind::Prompt:
      return Prompt{std::move(out.data), SolverToken(std::move(m))};
    case Outcome::Kind::Failure:
      return Failure{};
    case Outcome::Kind::Error:
      return Error{std::move(out.error_kind), std::move(out.data)};
  }
  return Failure{};
}

}  // namespace

SolveStep start_solve(std::shared_ptr<const Database> db, const Term& query, const Term& tmpl,
                      SolveOptions options) {
  auto m = std::make_unique<Machine>(std::move(db), std::move(options));
  m->start(query, tmpl);
  Outcome out = m->resume(std::nullopt);
  return to_step(std::move(out), std::move(m));
}

SolveStep start_solve(std::shared_ptr<const Database> db, const Term& query,
                      SolveOptions options) {
  return start_solve(std::move(db), query, query, std::move(options));
}

SolveStep resume(SolverToken& token, std::optional<Term> input) {
  const Machine* peek = TokenAccess::peek(token);
  if (peek == nullptr) throw ConsumedTokenError();
  if (peek->awaiting_input() != input.has_value()) {
    throw std::invalid_argument(input ? "input given to a token that does not await input"
                                      : "prompt token resumed without input");
  }
  std::unique_ptr<Machine> m = TokenAccess::take(token);
  Outcome out = m->resume(std::move(input));
  return to_step(std::move(out), std::move(m));
}

Batch find_n(std::size_t n, SolveStep step) {
  if (n == 0) throw std::invalid_argument("find_n: n must be positive");
  Batch batch;
  for (;;) {
    if (auto* s = std::get_if<Solution>(&step)) {
      batch.solutions.push_back(std::move(s->instance));
      batch.bindings.push_back(std::move(s->binding));
      if (!s->has_alternatives) return batch;
      if (batch.solutions.size() >= n) {
        batch.more = true;
        batch.token.emplace(std::move(s->token));
        return batch;
      }
      SolverToken token = std::move(s->token);
      step = resume(token);
      continue;
    }
    if (std::holds_alternative<Failure>(step)) return batch;
    batch.interrupt.emplace(std::move(step));
    return batch;
  }
}

Batch find_n(std::size_t n, std::shared_ptr<const Database> db, const Term& goal,
             const Term& tmpl, SolveOptions options) {
  return find_n(n, start_solve(std::move(db), goal, tmpl, std::move(options)));
}

std::string describe(const Error& error) { return write_term(error.detail); }

}  // namespace pltp::engine
