#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pltp/client/transport.hpp"
#include "pltp/protocol.hpp"

namespace pltp::client {

// Client-side view of the pengines created through one transport. Each
// sender checks admissibility against the last known state, sends the
// request and blocks until its response has arrived: long-poll timeouts and
// debug events are followed by further pulls, so the returned events end with
// the one response event (plus a folded Destroy). Debug events come first.
//
// Requests for an unknown or dead pengine are answered locally with
// error(ID, existence_error(pengine, ID)). A request that is not admissible
// for a live pengine throws protocol::ProtocolViolation.
//
// Not thread-safe; use one Session per thread of control.
class Session {
 public:
  explicit Session(std::shared_ptr<Transport> transport);

  std::vector<protocol::Event> create(protocol::CreateOptions options);
  std::vector<protocol::Event> ask(const std::string& id, const Term& query,
                                   protocol::AskOptions options = {});
  std::vector<protocol::Event> next(const std::string& id);
  std::vector<protocol::Event> stop(const std::string& id);
  std::vector<protocol::Event> respond(const std::string& id, const Term& input);
  std::vector<protocol::Event> pull_response(const std::string& id);
  std::vector<protocol::Event> abort(const std::string& id);
  std::vector<protocol::Event> destroy(const std::string& id);
  std::vector<protocol::Event> send(const protocol::Request& request);

  std::optional<protocol::LifecycleState> state(const std::string& id) const;
  // Pengines not known to be dead.
  std::vector<std::string> live() const;
  // Requests and events exchanged for id, re-polls excluded.
  const std::vector<protocol::TraceItem>& trace(const std::string& id) const;

  using Handler = std::function<void(Session&, const protocol::Event&)>;
  // Passes initial and then every event received by requests the handler
  // sends, in order, until none is left. If the handler throws, all live
  // pengines are destroyed and the exception propagates.
  void event_loop(const Handler& handler, std::vector<protocol::Event> initial = {});

  Transport& transport() noexcept { return *transport_; }

 private:
  struct Entry {
    protocol::LifecycleState state = protocol::LifecycleState::computing();
    bool destroy_on_completion = true;
    std::vector<protocol::TraceItem> trace;
  };

  void apply(Entry& entry, const protocol::Event& event, bool ask_at_create);
  std::vector<protocol::Event> complete(const std::string& id, std::vector<protocol::Event> events);

  std::shared_ptr<Transport> transport_;
  std::map<std::string, Entry> pengines_;
  std::deque<protocol::Event> inbox_;
  bool looping_ = false;
};

}  // namespace pltp::client
