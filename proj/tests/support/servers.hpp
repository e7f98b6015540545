#pragma once

// A PengineServer with an HTTP frontend on a free localhost port.

#include <memory>
#include <stdexcept>
#include <string>

#include "pltp/client/session.hpp"
#include "pltp/client/transport.hpp"
#include "pltp/server/http_server.hpp"
#include "pltp/server/pengine_server.hpp"

namespace pltp::testing {

struct HttpFixture {
  explicit HttpFixture(server::ServerOptions options = {}, server::HttpOptions http_options = {})
      : pengines(std::move(options)), frontend(pengines, http_options) {
    if (!frontend.bind("127.0.0.1", 0)) throw std::runtime_error("cannot bind a test port");
    frontend.start();
  }
  ~HttpFixture() { frontend.stop(); }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(frontend.port()); }

  std::shared_ptr<client::Session> http_session(protocol::Format format = protocol::Format::Prolog) {
    client::HttpTransportOptions o;
    o.format = format;
    o.owner = "tester";
    return std::make_shared<client::Session>(std::make_shared<client::HttpTransport>(url(), o));
  }

  std::shared_ptr<client::Session> local_session() {
    return std::make_shared<client::Session>(std::make_shared<client::LocalTransport>(pengines));
  }

  server::PengineServer pengines;
  server::HttpFrontend frontend;
};

}  // namespace pltp::testing
