#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "pltp/protocol.hpp"

namespace httplib {
class Client;
}

namespace pltp::server {
class PengineServer;
}

namespace pltp::client {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Carries one request to a pengine server and returns its response events.
// An empty result means no event arrived in time; send PullResponse to keep
// waiting. Throws TransportError when the server cannot be reached.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::vector<protocol::Event> exchange(const protocol::Request& request) = 0;
};

// Calls a PengineServer in the same process.
class LocalTransport : public Transport {
 public:
  explicit LocalTransport(server::PengineServer& server, std::string owner = "local",
                          std::chrono::milliseconds wait = std::chrono::seconds(10));
  std::vector<protocol::Event> exchange(const protocol::Request& request) override;

 private:
  server::PengineServer& server_;
  std::string owner_;
  std::chrono::milliseconds wait_;
};

struct HttpTransportOptions {
  std::string owner = "anonymous";
  protocol::Format format = protocol::Format::Prolog;
  // Long-poll timeout passed to pull_response.
  std::chrono::seconds pull_timeout{10};
};

// Talks to the HTTP endpoints at base_url, e.g. "http://127.0.0.1:9083".
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(const std::string& base_url, HttpTransportOptions options = {});
  ~HttpTransport() override;
  std::vector<protocol::Event> exchange(const protocol::Request& request) override;

 private:
  std::vector<protocol::Event> decode(int status, const std::string& body);
  void remember_template(const std::string& id, const Term& tmpl);
  void instantiate_solutions(std::vector<protocol::Event>& events);

  HttpTransportOptions options_;
  std::unique_ptr<httplib::Client> http_;
  std::mutex mutex_;
  // Templates of the running queries, to rebuild JSON answers.
  std::map<std::string, Term> templates_;
};

}  // namespace pltp::client
