#include "pltp/server/http_server.hpp"

#include <algorithm>
#include <cmath>

#include "httplib.h"
#include "pltp/wire.hpp"

namespace pltp::server {

using protocol::Event;
using protocol::Format;

namespace {

std::string owner_of(const httplib::Request& req) {
  const std::string owner = req.get_header_value(kOwnerHeader);
  return owner.empty() ? "anonymous" : owner;
}

void reply(httplib::Response& res, const std::vector<Event>& events, Format format, int status = 200) {
  if (events.empty()) {
    res.status = 204;
    return;
  }
  res.status = status;
  res.set_content(wire::encode_response(events, format), wire::content_type(format));
}

void reply_error(httplib::Response& res, const std::string& id, const Term& formal, Format format) {
  reply(res, {protocol::event::Error{id, formal}}, format, 400);
}

Term missing_id() {
  return Term::compound("existence_error", {Term::atom("parameter"), Term::atom("id")});
}

}  // namespace

HttpFrontend::HttpFrontend(PengineServer& pengines, HttpOptions options)
    : pengines_(pengines), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
  const std::size_t threads = options_.threads;
  http_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  http_->set_tcp_nodelay(true);
  // The library default adds SO_REUSEPORT, which would let a second server
  // share the port silently.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  http_->Post("/pengine/create", [this](const httplib::Request& req, httplib::Response& res) {
    const Format body_format = wire::format_of_content_type(req.get_header_value("Content-Type"));
    protocol::request::Create create;
    try {
      create = wire::decode_create(req.body, body_format);
    } catch (const wire::WireError& e) {
      reply_error(res, "", e.formal(), body_format);
      return;
    }
    const Format format = create.options.format;
    reply(res, pengines_.handle(create, owner_of(req), options_.response_wait), format);
  });

  http_->Post("/pengine/send", [this](const httplib::Request& req, httplib::Response& res) {
    const Format body_format = wire::format_of_content_type(req.get_header_value("Content-Type"));
    const std::string id = req.get_param_value("id");
    if (id.empty()) {
      reply_error(res, "", missing_id(), body_format);
      return;
    }
    const Format format = pengines_.format_of(id).value_or(body_format);
    protocol::Request request;
    try {
      request = wire::decode_send(id, req.body, body_format);
    } catch (const wire::WireError& e) {
      reply_error(res, id, e.formal(), format);
      return;
    }
    reply(res, pengines_.handle(request, owner_of(req), options_.response_wait), format);
  });

  http_->Get("/pengine/pull_response", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.get_param_value("id");
    std::optional<Format> requested;
    if (req.has_param("format")) requested = protocol::parse_format(req.get_param_value("format"));
    const Format format = requested.value_or(pengines_.format_of(id).value_or(Format::Prolog));
    if (id.empty()) {
      reply_error(res, "", missing_id(), format);
      return;
    }
    auto wait = options_.response_wait;
    if (req.has_param("timeout")) {
      double secs = 0;
      try {
        secs = std::stod(req.get_param_value("timeout"));
      } catch (const std::exception&) {
        secs = -1;
      }
      if (!(secs >= 0) || !std::isfinite(secs)) {
        reply_error(res, id,
                    Term::compound("domain_error", {Term::atom("timeout"),
                                                    Term::atom(req.get_param_value("timeout"))}),
                    format);
        return;
      }
      wait = std::min(options_.max_pull_wait,
                      std::chrono::milliseconds(static_cast<long long>(secs * 1000)));
    }
    reply(res, pengines_.handle(protocol::request::PullResponse{id}, owner_of(req), wait), format);
  });

  if (options_.console_dir) http_->set_mount_point("/console", *options_.console_dir);
}

HttpFrontend::~HttpFrontend() { stop(); }

bool HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = http_->bind_to_any_port(host);
    return port_ > 0;
  }
  if (!http_->bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

void HttpFrontend::listen() { http_->listen_after_bind(); }

void HttpFrontend::start() {
  thread_ = std::thread([this] { listen(); });
  http_->wait_until_ready();
}

void HttpFrontend::stop() {
  if (http_->is_running()) http_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace pltp::server
