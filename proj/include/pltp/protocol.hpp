#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pltp/term.hpp"

namespace pltp::protocol {

enum class Format { Prolog, Json };

std::string_view format_name(Format f);
std::optional<Format> parse_format(std::string_view name);

struct AskOptions {
  // Defaults to the whole query.
  std::optional<Term> tmpl;
  std::size_t chunk = 1;
};

struct AskAtCreate {
  Term query;
  AskOptions options;
};

struct CreateOptions {
  std::optional<std::string> name;
  std::optional<std::string> src_text;
  std::optional<std::vector<Clause>> src_list;
  std::optional<std::string> src_url;
  std::optional<AskAtCreate> ask;
  Format format = Format::Prolog;
  bool destroy_on_completion = true;
};

namespace request {
struct Create {
  CreateOptions options;
};
struct Ask {
  std::string id;
  Term query;
  AskOptions options;
};
struct Next {
  std::string id;
};
struct Stop {
  std::string id;
};
struct Respond {
  std::string id;
  Term input;
};
struct PullResponse {
  std::string id;
};
struct Abort {
  std::string id;
};
struct Destroy {
  std::string id;
};
}  // namespace request

using Request = std::variant<request::Create, request::Ask, request::Next, request::Stop,
                             request::Respond, request::PullResponse, request::Abort,
                             request::Destroy>;

namespace event {
struct Create {
  std::string id;
  Term data;
};
struct Output {
  std::string id;
  Term data;
};
struct Prompt {
  std::string id;
  Term data;
};
struct Success {
  std::string id;
  // Template instances, never empty.
  std::vector<Term> solutions;
  bool more = false;
  // Per-solution variable bindings, parallel to solutions when known.
  std::vector<Binding> bindings;
};
struct Failure {
  std::string id;
};
struct Error {
  std::string id;
  Term data;
};
struct Stop {
  std::string id;
};
struct Destroy {
  std::string id;
};
struct Debug {
  std::string id;
  std::string message;
};
}  // namespace event

using Event = std::variant<event::Create, event::Output, event::Prompt, event::Success,
                           event::Failure, event::Error, event::Stop, event::Destroy,
                           event::Debug>;

// Wire names: "create", "ask", ..., "pull_response"; "success", "destroy", ...
std::string_view request_name(const Request& r);
std::string_view event_name(const Event& e);
// Empty for Create requests.
std::string request_id(const Request& r);
const std::string& event_id(const Event& e);
std::string describe(const Event& e);

class LifecycleState {
 public:
  enum class Kind { Idle, Computing, HoldingOutput, WaitingInput, HoldingSolutions, Dead };

  static LifecycleState idle() { return LifecycleState(Kind::Idle); }
  static LifecycleState computing() { return LifecycleState(Kind::Computing); }
  static LifecycleState holding_output() { return LifecycleState(Kind::HoldingOutput); }
  static LifecycleState waiting_input() { return LifecycleState(Kind::WaitingInput); }
  static LifecycleState holding_solutions(bool more) {
    return LifecycleState(Kind::HoldingSolutions, more);
  }
  static LifecycleState dead() { return LifecycleState(Kind::Dead); }

  Kind kind() const noexcept { return kind_; }
  // Only meaningful for HoldingSolutions.
  bool more() const noexcept { return more_; }
  bool is_dead() const noexcept { return kind_ == Kind::Dead; }
  std::string to_string() const;

  friend bool operator==(const LifecycleState&, const LifecycleState&) = default;

 private:
  explicit LifecycleState(Kind k, bool more = false) : kind_(k), more_(more && k == Kind::HoldingSolutions) {}
  Kind kind_;
  bool more_;
};

class ProtocolViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Whether req may be sent to a pengine in state. Create never targets an
// existing pengine and is not admissible in any state.
bool admissible(const LifecycleState& state, const Request& req);

// State while the response to an admissible request is outstanding.
// Throws ProtocolViolation when req is not admissible.
LifecycleState apply_request(const LifecycleState& state, const Request& req);

// State after a response event. The state before a pengine's create response
// is Computing. Throws ProtocolViolation when the event cannot occur in state.
LifecycleState apply_event(const LifecycleState& state, const Event& event,
                           bool destroy_on_completion);

using TraceItem = std::variant<Request, Event>;

// True iff the trace of one pengine starts with a Create request and every
// request is admissible and answered by exactly one non-Debug event of a kind
// allowed for it. A Destroy directly following a query-ending event
// (final success, failure, error, stop) belongs to the same response. An Abort
// or Destroy sent while a query request is outstanding replaces that request.
bool one_response_per_request(const std::vector<TraceItem>& trace);

// Like one_response_per_request but reports the first offending position.
struct TraceCheck {
  bool ok = true;
  std::size_t position = 0;
  std::string reason;
};
TraceCheck check_trace(const std::vector<TraceItem>& trace);

}  // namespace pltp::protocol
