#include "pltp/client/transport.hpp"

#include "httplib.h"
#include "pltp/server/pengine_server.hpp"
#include "pltp/wire.hpp"

namespace pltp::client {

using protocol::Event;
using protocol::Format;
using protocol::Request;
namespace event = protocol::event;
namespace request = protocol::request;

LocalTransport::LocalTransport(server::PengineServer& server, std::string owner,
                               std::chrono::milliseconds wait)
    : server_(server), owner_(std::move(owner)), wait_(wait) {}

std::vector<Event> LocalTransport::exchange(const Request& request) {
  return server_.handle(request, owner_, wait_);
}

HttpTransport::HttpTransport(const std::string& base_url, HttpTransportOptions options)
    : options_(std::move(options)), http_(std::make_unique<httplib::Client>(base_url)) {
  if (!http_->is_valid()) throw TransportError("invalid server URL: " + base_url);
  http_->set_keep_alive(true);
  http_->set_tcp_nodelay(true);
  http_->set_connection_timeout(5);
  // Long polls hold the connection for up to pull_timeout; leave headroom.
  http_->set_read_timeout(options_.pull_timeout.count() + 30);
  http_->set_default_headers({{"X-Pengine-Owner", options_.owner}});
}

HttpTransport::~HttpTransport() = default;

std::vector<Event> HttpTransport::exchange(const Request& req) {
  const Format format = options_.format;
  httplib::Result res;
  std::string id = protocol::request_id(req);
  if (const auto* create = std::get_if<request::Create>(&req)) {
    request::Create c = *create;
    c.options.format = format;
    res = http_->Post("/pengine/create", wire::encode_request(c, format), wire::content_type(format));
  } else if (std::holds_alternative<request::PullResponse>(req)) {
    const std::string path = "/pengine/pull_response?id=" + id +
                             "&timeout=" + std::to_string(options_.pull_timeout.count()) +
                             "&format=" + std::string(protocol::format_name(format));
    res = http_->Get(path);
  } else {
    if (const auto* ask = std::get_if<request::Ask>(&req)) {
      remember_template(id, ask->options.tmpl.value_or(ask->query));
    }
    res = http_->Post("/pengine/send?id=" + id, wire::encode_request(req, format),
                      wire::content_type(format));
  }
  if (!res) throw TransportError("HTTP request failed: " + httplib::to_string(res.error()));
  std::vector<Event> events = decode(res->status, res->body);
  if (const auto* create = std::get_if<request::Create>(&req)) {
    if (!events.empty() && create->options.ask &&
        std::holds_alternative<event::Create>(events.front())) {
      const auto& ask = *create->options.ask;
      remember_template(protocol::event_id(events.front()), ask.options.tmpl.value_or(ask.query));
    }
  }
  instantiate_solutions(events);
  return events;
}

std::vector<Event> HttpTransport::decode(int status, const std::string& body) {
  if (status == 204) return {};
  if (status != 200 && status != 400) {
    throw TransportError("unexpected HTTP status " + std::to_string(status));
  }
  try {
    return wire::decode_response(body, options_.format);
  } catch (const std::exception& e) {
    throw TransportError(std::string("undecodable response: ") + e.what());
  }
}

void HttpTransport::remember_template(const std::string& id, const Term& tmpl) {
  if (options_.format != Format::Json) return;
  std::lock_guard<std::mutex> lock(mutex_);
  templates_.insert_or_assign(id, tmpl);
}

void HttpTransport::instantiate_solutions(std::vector<Event>& events) {
  if (options_.format != Format::Json) return;
  std::lock_guard<std::mutex> lock(mutex_);
  for (Event& e : events) {
    if (auto* s = std::get_if<event::Success>(&e)) {
      const auto it = templates_.find(s->id);
      if (it == templates_.end()) continue;
      for (std::size_t i = 0; i < s->solutions.size() && i < s->bindings.size(); ++i) {
        s->solutions[i] = wire::instantiate(it->second, s->bindings[i]);
      }
    } else if (std::holds_alternative<event::Destroy>(e)) {
      templates_.erase(protocol::event_id(e));
    }
  }
}

}  // namespace pltp::client
