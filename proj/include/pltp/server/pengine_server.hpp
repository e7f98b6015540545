#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pltp/engine/database.hpp"
#include "pltp/protocol.hpp"
#include "pltp/server/config.hpp"

namespace pltp::server {

using Clock = std::chrono::steady_clock;

// Fetches program text for src_url; throws on failure.
using UrlFetcher = std::function<std::string(const std::string& url)>;

struct ServerOptions {
  ServerLimits limits;
  // Database every pengine starts from; Database::standard() when null.
  std::shared_ptr<const engine::Database> base;
  // Keep the request/event trace of every pengine (see traces()).
  bool record_traces = false;
  std::size_t max_depth = 1'000'000;
  // Period of the timeout reaper.
  std::chrono::milliseconds reap_interval{10};
  // Defaults to an HTTP GET of the URL.
  UrlFetcher fetch_url;
};

struct PengineTrace {
  std::string id;
  std::vector<protocol::TraceItem> items;
};

// Owns the pengines of one server. All methods are thread-safe.
//
// handle() answers one request with the events of its response: a single
// event, or a query-ending event followed by Destroy, or (for create with an
// ask option) the create event followed by the first answer when it arrives in
// time. An empty result means the wait ran out; the client then sends
// PullResponse, which keeps waiting for the same response.
class PengineServer {
 public:
  explicit PengineServer(ServerOptions options = {});
  ~PengineServer();

  PengineServer(const PengineServer&) = delete;
  PengineServer& operator=(const PengineServer&) = delete;

  std::vector<protocol::Event> handle(const protocol::Request& request, const std::string& owner,
                                      std::chrono::milliseconds wait);

  // Expires every live pengine whose deadline is at or before now and returns
  // the events queued for them. Called periodically by the reaper.
  std::vector<protocol::Event> enforce_timeouts(Clock::time_point now);

  // Pengines holding a slot.
  std::size_t live_count() const;
  const ServerLimits& limits() const noexcept { return options_.limits; }
  std::optional<protocol::Format> format_of(const std::string& id) const;
  std::optional<protocol::LifecycleState> state_of(const std::string& id) const;
  // Traces of all pengines created so far; empty unless record_traces is set.
  std::vector<PengineTrace> traces() const;

 private:
  struct Pengine;
  struct Command;

  std::vector<protocol::Event> create(const protocol::request::Create& req, const std::string& owner,
                                      std::chrono::milliseconds wait,
                                      std::unique_lock<std::mutex>& lock);
  std::shared_ptr<const engine::Database> build_database(const protocol::CreateOptions& options,
                                                         std::optional<Term>& error);
  void start_ask(Pengine& p, const Term& query, const protocol::AskOptions& options);
  void post(Pengine& p, std::size_t generation, protocol::Event event);
  void post_final(Pengine& p, protocol::Event event);
  void command(Pengine& p, Command cmd);
  void shut_down(Pengine& p);
  void release_slot(Pengine& p);
  void record(Pengine& p, protocol::TraceItem item);
  std::vector<protocol::Event> await(std::shared_ptr<Pengine> p, std::unique_lock<std::mutex>& lock,
                                     Clock::time_point until);
  std::vector<protocol::Event> deliver(Pengine& p);
  void retire(Pengine& p);
  void run_worker(std::shared_ptr<Pengine> p);
  void reap_loop();

  ServerOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Pengine>> pengines_;
  std::map<std::string, std::size_t> slaves_;
  std::size_t slots_ = 0;
  std::vector<PengineTrace> finished_traces_;
  std::vector<std::thread> graveyard_;
  bool stopping_ = false;
  std::condition_variable reaper_cv_;
  std::thread reaper_;
};

// Random RFC 4122 version 4 identifier.
std::string uuid_v4();

}  // namespace pltp::server
