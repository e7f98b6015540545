#include "pltp/protocol.hpp"

#include "pltp/writer.hpp"

namespace pltp::protocol {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

using Kind = LifecycleState::Kind;

bool response_allowed(const Request& req, const Event& ev) {
  if (std::holds_alternative<event::Error>(ev)) return true;
  return std::visit(
      overloaded{
          [&](const request::Create&) { return std::holds_alternative<event::Create>(ev); },
          [&](const request::Stop&) { return std::holds_alternative<event::Stop>(ev); },
          [&](const request::Abort&) { return false; },
          [&](const request::Destroy&) { return std::holds_alternative<event::Destroy>(ev); },
          [&](const auto&) {
            return std::holds_alternative<event::Success>(ev) ||
                   std::holds_alternative<event::Failure>(ev) ||
                   std::holds_alternative<event::Output>(ev) ||
                   std::holds_alternative<event::Prompt>(ev);
          },
      },
      req);
}

// Events after which the server may destroy the pengine on its own.
bool ends_query(const Event& ev) {
  if (const auto* s = std::get_if<event::Success>(&ev)) return !s->more;
  return std::holds_alternative<event::Failure>(ev) || std::holds_alternative<event::Error>(ev) ||
         std::holds_alternative<event::Stop>(ev);
}

// Abort and Destroy may interrupt a running query; their single response
// then answers the interrupted request too.
bool supersedes(const Request& r) {
  return std::holds_alternative<request::Abort>(r) || std::holds_alternative<request::Destroy>(r);
}

}  // namespace

std::string_view format_name(Format f) { return f == Format::Json ? "json" : "prolog"; }

std::optional<Format> parse_format(std::string_view name) {
  if (name == "json") return Format::Json;
  if (name == "prolog") return Format::Prolog;
  return std::nullopt;
}

std::string_view request_name(const Request& r) {
  static constexpr std::string_view names[] = {"create",  "ask",           "next",  "stop",
                                               "respond", "pull_response", "abort", "destroy"};
  return names[r.index()];
}

std::string_view event_name(const Event& e) {
  static constexpr std::string_view names[] = {"create",  "output", "prompt",
                                               "success", "failure", "error",
                                               "stop",    "destroy", "debug"};
  return names[e.index()];
}

std::string request_id(const Request& r) {
  return std::visit(overloaded{[](const request::Create&) { return std::string(); },
                               [](const auto& x) { return x.id; }},
                    r);
}

const std::string& event_id(const Event& e) {
  return std::visit([](const auto& x) -> const std::string& { return x.id; }, e);
}

std::string describe(const Event& e) {
  const Term id = Term::atom(event_id(e));
  const Term t = std::visit(
      overloaded{
          [&](const event::Create& x) { return Term::compound("create", {id, x.data}); },
          [&](const event::Output& x) { return Term::compound("output", {id, x.data}); },
          [&](const event::Prompt& x) { return Term::compound("prompt", {id, x.data}); },
          [&](const event::Success& x) {
            return Term::compound("success", {id, Term::list(x.solutions),
                                              Term::atom(x.more ? "true" : "false")});
          },
          [&](const event::Failure&) { return Term::compound("failure", {id}); },
          [&](const event::Error& x) { return Term::compound("error", {id, x.data}); },
          [&](const event::Stop&) { return Term::compound("stop", {id}); },
          [&](const event::Destroy&) { return Term::compound("destroy", {id}); },
          [&](const event::Debug& x) {
            return Term::compound("debug", {id, Term::atom(x.message)});
          },
      },
      e);
  return write_term(t);
}

std::string LifecycleState::to_string() const {
  switch (kind_) {
    case Kind::Idle: return "idle";
    case Kind::Computing: return "computing";
    case Kind::HoldingOutput: return "holding_output";
    case Kind::WaitingInput: return "waiting_input";
    case Kind::HoldingSolutions: return more_ ? "holding_solutions(true)" : "holding_solutions(false)";
    case Kind::Dead: return "dead";
  }
  return "?";
}

bool admissible(const LifecycleState& state, const Request& req) {
  if (std::holds_alternative<request::Create>(req)) return false;
  const bool ask = std::holds_alternative<request::Ask>(req);
  const bool next = std::holds_alternative<request::Next>(req);
  const bool stop = std::holds_alternative<request::Stop>(req);
  const bool respond = std::holds_alternative<request::Respond>(req);
  const bool pull = std::holds_alternative<request::PullResponse>(req);
  const bool always = std::holds_alternative<request::Abort>(req) ||
                      std::holds_alternative<request::Destroy>(req);
  switch (state.kind()) {
    case Kind::Idle:
      return ask || always;
    case Kind::Computing:
    case Kind::HoldingOutput:
      return pull || always;
    case Kind::WaitingInput:
      return respond || always;
    case Kind::HoldingSolutions:
      return ask || always || (state.more() && (next || stop));
    case Kind::Dead:
      return false;
  }
  return false;
}

LifecycleState apply_request(const LifecycleState& state, const Request& req) {
  if (!admissible(state, req)) {
    throw ProtocolViolation(std::string(request_name(req)) + " not admissible in state " +
                            state.to_string());
  }
  return LifecycleState::computing();
}

LifecycleState apply_event(const LifecycleState& state, const Event& ev,
                           bool destroy_on_completion) {
  const auto finished = [&] {
    return destroy_on_completion ? LifecycleState::dead() : LifecycleState::idle();
  };
  if (std::holds_alternative<event::Destroy>(ev)) return LifecycleState::dead();
  if (std::holds_alternative<event::Debug>(ev)) {
    if (state.is_dead()) throw ProtocolViolation("debug event for a dead pengine");
    return state;
  }
  if (state.kind() != Kind::Computing) {
    throw ProtocolViolation(std::string(event_name(ev)) + " event in state " + state.to_string());
  }
  return std::visit(
      overloaded{
          [&](const event::Create&) { return LifecycleState::idle(); },
          [&](const event::Output&) { return LifecycleState::holding_output(); },
          [&](const event::Prompt&) { return LifecycleState::waiting_input(); },
          [&](const event::Success& s) {
            if (s.more) return LifecycleState::holding_solutions(true);
            return destroy_on_completion ? LifecycleState::dead()
                                         : LifecycleState::holding_solutions(false);
          },
          [&](const auto&) { return finished(); },
      },
      ev);
}

TraceCheck check_trace(const std::vector<TraceItem>& trace) {
  const auto fail = [](std::size_t at, std::string why) { return TraceCheck{false, at, std::move(why)}; };
  std::optional<LifecycleState> state;
  std::optional<Request> outstanding;
  bool destroy_flag = true;
  bool may_append_destroy = false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (const auto* req = std::get_if<Request>(&trace[i])) {
      may_append_destroy = false;
      if (outstanding && !(supersedes(*req) && !std::holds_alternative<request::Create>(*outstanding) &&
                           !supersedes(*outstanding))) {
        return fail(i, "request sent before the previous response");
      }
      if (!state) {
        const auto* create = std::get_if<request::Create>(req);
        if (create == nullptr) return fail(i, "trace does not start with create");
        destroy_flag = create->options.destroy_on_completion;
        state = LifecycleState::computing();
      } else {
        if (!admissible(*state, *req)) {
          return fail(i, std::string(request_name(*req)) + " not admissible in " +
                             state->to_string());
        }
        state = apply_request(*state, *req);
      }
      outstanding = *req;
      continue;
    }
    const Event& ev = std::get<Event>(trace[i]);
    if (std::holds_alternative<event::Debug>(ev)) {
      if (!state || state->is_dead()) return fail(i, "debug event outside a live pengine");
      continue;
    }
    if (!outstanding) {
      if (may_append_destroy && std::holds_alternative<event::Destroy>(ev)) {
        state = LifecycleState::dead();
        may_append_destroy = false;
        continue;
      }
      return fail(i, std::string(event_name(ev)) + " event without a request");
    }
    if (!response_allowed(*outstanding, ev)) {
      return fail(i, std::string(event_name(ev)) + " is not a response to " +
                         std::string(request_name(*outstanding)));
    }
    try {
      if (std::holds_alternative<request::Create>(*outstanding) &&
          std::holds_alternative<event::Error>(ev)) {
        state = LifecycleState::dead();
      } else {
        state = apply_event(*state, ev, destroy_flag);
      }
    } catch (const ProtocolViolation& e) {
      return fail(i, e.what());
    }
    outstanding.reset();
    may_append_destroy = ends_query(ev);
  }
  return TraceCheck{};
}

bool one_response_per_request(const std::vector<TraceItem>& trace) {
  return check_trace(trace).ok;
}

}  // namespace pltp::protocol
