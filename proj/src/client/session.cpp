#include "pltp/client/session.hpp"

#include <stdexcept>

namespace pltp::client {

using protocol::Event;
using protocol::LifecycleState;
using protocol::Request;
namespace event = protocol::event;
namespace request = protocol::request;

namespace {

Term no_such_pengine(const std::string& id) {
  return Term::compound("existence_error", {Term::atom("pengine"), Term::atom(id)});
}

}  // namespace

Session::Session(std::shared_ptr<Transport> transport) : transport_(std::move(transport)) {
  if (!transport_) throw std::invalid_argument("Session needs a transport");
}

std::vector<Event> Session::create(protocol::CreateOptions options) {
  return send(request::Create{std::move(options)});
}

std::vector<Event> Session::ask(const std::string& id, const Term& query, protocol::AskOptions options) {
  return send(request::Ask{id, query, std::move(options)});
}

std::vector<Event> Session::next(const std::string& id) { return send(request::Next{id}); }
std::vector<Event> Session::stop(const std::string& id) { return send(request::Stop{id}); }
std::vector<Event> Session::respond(const std::string& id, const Term& input) {
  return send(request::Respond{id, input});
}
std::vector<Event> Session::pull_response(const std::string& id) {
  return send(request::PullResponse{id});
}
std::vector<Event> Session::abort(const std::string& id) { return send(request::Abort{id}); }
std::vector<Event> Session::destroy(const std::string& id) { return send(request::Destroy{id}); }

std::vector<Event> Session::send(const Request& req) {
  std::vector<Event> events;
  if (const auto* create = std::get_if<request::Create>(&req)) {
    events = transport_->exchange(req);
    if (events.empty()) throw TransportError("create returned no event");
    if (std::holds_alternative<event::Create>(events.front())) {
      const std::string id = protocol::event_id(events.front());
      Entry& entry = pengines_[id];
      entry.destroy_on_completion = create->options.destroy_on_completion;
      entry.trace.push_back(req);
      const bool ask = create->options.ask.has_value();
      if (ask) entry.trace.push_back(request::Ask{id, create->options.ask->query, create->options.ask->options});
      for (const Event& e : events) apply(entry, e, ask);
      events = complete(id, std::move(events));
    }
  } else {
    const std::string id = protocol::request_id(req);
    const auto found = pengines_.find(id);
    if (found == pengines_.end() || found->second.state.is_dead()) {
      events = {event::Error{id, no_such_pengine(id)}};
    } else {
      Entry& entry = found->second;
      entry.state = protocol::apply_request(entry.state, req);
      entry.trace.push_back(req);
      events = transport_->exchange(req);
      for (const Event& e : events) apply(entry, e, false);
      events = complete(id, std::move(events));
    }
  }
  if (looping_) inbox_.insert(inbox_.end(), events.begin(), events.end());
  return events;
}

std::vector<Event> Session::complete(const std::string& id, std::vector<Event> events) {
  for (;;) {
    const auto it = pengines_.find(id);
    if (it == pengines_.end() || it->second.state != LifecycleState::computing()) return events;
    std::vector<Event> more = transport_->exchange(request::PullResponse{id});
    for (const Event& e : more) {
      apply(it->second, e, false);
      events.push_back(e);
    }
  }
}

void Session::apply(Entry& entry, const Event& ev, bool ask_at_create) {
  // The trace shows the implicit ask after the create event.
  if (std::holds_alternative<event::Create>(ev)) {
    entry.trace.insert(ask_at_create ? entry.trace.end() - 1 : entry.trace.end(), ev);
    entry.state = ask_at_create ? LifecycleState::computing() : LifecycleState::idle();
    return;
  }
  entry.trace.push_back(ev);
  if (const auto* err = std::get_if<event::Error>(&ev)) {
    if (err->data.is_compound("existence_error", 2) && err->data.arg(0).is_atom("pengine")) {
      entry.state = LifecycleState::dead();
      return;
    }
  }
  entry.state = protocol::apply_event(entry.state, ev, entry.destroy_on_completion);
}

std::optional<LifecycleState> Session::state(const std::string& id) const {
  const auto it = pengines_.find(id);
  if (it == pengines_.end()) return std::nullopt;
  return it->second.state;
}

std::vector<std::string> Session::live() const {
  std::vector<std::string> out;
  for (const auto& [id, entry] : pengines_) {
    if (!entry.state.is_dead()) out.push_back(id);
  }
  return out;
}

const std::vector<protocol::TraceItem>& Session::trace(const std::string& id) const {
  static const std::vector<protocol::TraceItem> empty;
  const auto it = pengines_.find(id);
  return it == pengines_.end() ? empty : it->second.trace;
}

void Session::event_loop(const Handler& handler, std::vector<Event> initial) {
  struct Guard {
    bool& flag;
    ~Guard() { flag = false; }
  } guard{looping_};
  looping_ = true;
  inbox_.assign(initial.begin(), initial.end());
  while (!inbox_.empty()) {
    const Event ev = std::move(inbox_.front());
    inbox_.pop_front();
    try {
      handler(*this, ev);
    } catch (...) {
      inbox_.clear();
      looping_ = false;
      for (const std::string& id : live()) {
        try {
          destroy(id);
        } catch (const std::exception&) {
        }
      }
      throw;
    }
  }
}

}  // namespace pltp::client
