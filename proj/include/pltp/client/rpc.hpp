#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pltp/client/session.hpp"
#include "pltp/engine/database.hpp"
#include "pltp/term.hpp"

namespace pltp::client {

// The remote query raised an error; data() is the payload of the error event.
class RemoteError : public std::runtime_error {
 public:
  explicit RemoteError(Term data);
  const Term& data() const noexcept { return data_; }

 private:
  Term data_;
};

// The remote query prompted for input and no way to answer was configured.
class PromptUnsupported : public std::runtime_error {
 public:
  explicit PromptUnsupported(const Term& prompt);
};

struct RpcOptions {
  std::vector<Clause> src_list;
  std::optional<std::string> src_text;
  std::size_t chunk = 1;
  // Send the query with the create request instead of after the create event.
  bool ask_at_create = true;
  // Answers prompt events; nullopt leaves the prompt unanswered, which is
  // treated like having no handler.
  std::function<std::optional<Term>(const std::string& id, const Term& prompt)> prompt_handler;
  // Without a prompt handler, read one term per prompt from standard input.
  bool prompt_from_stdin = false;
  // Defaults to writing the term and a newline to standard output.
  std::function<void(const std::string& id, const Term& data)> output_handler;
  std::function<void(const std::string& id, const std::string& message)> debug_handler;
};

// Solutions of one remote query, fetched on demand. Each solution is the
// query with the remote answer's bindings applied. The pengine is destroyed
// when the solutions run out, on close() and on destruction.
class RpcCursor {
 public:
  RpcCursor(Session& session, Term query, RpcOptions options);
  RpcCursor(const RpcCursor&) = delete;
  RpcCursor& operator=(const RpcCursor&) = delete;
  ~RpcCursor();

  // Throws RemoteError, PromptUnsupported or TransportError; the pengine is
  // gone once any of them is thrown.
  std::optional<Term> next();
  void close();

  // Empty until the pengine has been created.
  const std::string& id() const noexcept { return id_; }
  const Term& query_template() const noexcept { return template_; }

 private:
  void start();
  void process(std::vector<protocol::Event> events);
  Term reply_to(const Term& prompt);
  std::optional<Term> instance_of(const Term& solution) const;

  Session& session_;
  Term query_;
  Term template_;
  RpcOptions options_;
  std::size_t rename_base_ = 0;
  std::string id_;
  std::deque<Term> pending_;
  bool started_ = false;
  bool more_ = false;
  bool finished_ = false;
};

std::unique_ptr<RpcCursor> rpc(Session& session, const Term& query, RpcOptions options = {});

// All solutions at once.
std::vector<Term> rpc_all(Session& session, const Term& query, RpcOptions options = {});

// Clauses of the given predicates in database order, with variables named
// _V0, _V1, ... per clause. Throws engine::PrologError
// existence_error(procedure, Name/Arity) for an undefined predicate.
std::vector<Clause> collect_src_predicates(const engine::Database& db,
                                           const std::vector<Indicator>& indicators);

// Opens a session for a server URL.
using SessionFactory = std::function<std::shared_ptr<Session>(const std::string& url)>;

// Session over an HttpTransport for any http:// URL.
SessionFactory http_sessions();

// Adds pengine_rpc(URL, Query, Options) to db. Options: chunk(N),
// src_list(Clauses), src_text(Text), src_predicates(Indicators) where the
// indicators are looked up in db itself. Remote errors are rethrown as Prolog
// errors. Answers leaving variables unbound that are not in the query raise
// representation_error(pengine_rpc_answer).
engine::Database with_pengine_rpc(engine::Database db, SessionFactory sessions = http_sessions());

}  // namespace pltp::client
