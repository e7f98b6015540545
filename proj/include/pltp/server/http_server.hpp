#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "pltp/server/pengine_server.hpp"

namespace httplib {
class Server;
}

namespace pltp::server {

constexpr const char* kOwnerHeader = "X-Pengine-Owner";

struct HttpOptions {
  // How long create and send wait for a response before answering 204.
  std::chrono::milliseconds response_wait{10'000};
  // Upper bound for the timeout parameter of pull_response.
  std::chrono::milliseconds max_pull_wait{60'000};
  std::size_t threads = 32;
  // Static files served under /console.
  std::optional<std::string> console_dir;
};

// HTTP endpoints over a PengineServer:
//   POST /pengine/create                    body: create options
//   POST /pengine/send?id=ID                body: one request
//   GET  /pengine/pull_response?id=ID&timeout=S[&format=F]
// Bodies are text/x-prolog or application/json (by Content-Type). Responses
// use the pengine's format. 204 means no event arrived in time.
class HttpFrontend {
 public:
  HttpFrontend(PengineServer& pengines, HttpOptions options = {});
  ~HttpFrontend();

  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  // Port 0 picks a free port. Returns false when the address cannot be bound.
  bool bind(const std::string& host, int port);
  int port() const noexcept { return port_; }
  // Serves until stop(); bind() first.
  void listen();
  // listen() on a background thread.
  void start();
  void stop();

 private:
  PengineServer& pengines_;
  HttpOptions options_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace pltp::server
