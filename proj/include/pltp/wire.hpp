#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pltp/json_codec.hpp"
#include "pltp/protocol.hpp"
#include "pltp/term.hpp"

// Text encodings of requests and responses for both wire formats. The
// request grammar is documented in docs/grammar.md.
namespace pltp::wire {

// A request body that cannot be decoded. formal() is the error term sent
// back, e.g. syntax_error(...) or domain_error(create_option, foo(1)).
class WireError : public std::runtime_error {
 public:
  explicit WireError(Term formal);
  const Term& formal() const noexcept { return formal_; }

 private:
  Term formal_;
};

constexpr const char* kPrologType = "text/x-prolog";
constexpr const char* kJsonType = "application/json";

// Body format from a Content-Type header value; prolog unless it names JSON.
protocol::Format format_of_content_type(const std::string& content_type);
const char* content_type(protocol::Format format);

// Server side. Throw WireError.
protocol::request::Create decode_create(const std::string& body, protocol::Format body_format);
protocol::Request decode_send(const std::string& id, const std::string& body,
                              protocol::Format body_format);

// Client side: the body for a create or send request. PullResponse has no
// body and throws std::invalid_argument.
std::string encode_request(const protocol::Request& request, protocol::Format format);

// One response, i.e. the events returned by PengineServer::handle. A
// query-ending event followed by Destroy folds into destroy(ID, Event); a
// create followed by an answer folds into create(ID, Data, Answer).
std::string encode_response(const std::vector<protocol::Event>& events, protocol::Format format);
// Inverse of encode_response. Throws WireError. JSON success events carry
// bindings only; their solutions hold json/1 terms until instantiate() is
// applied with the template.
std::vector<protocol::Event> decode_response(const std::string& body, protocol::Format format);

Term event_term(const protocol::Event& event);
json event_json(const protocol::Event& event);

// Replaces the named variables of tmpl by their bound values.
Term instantiate(const Term& tmpl, const Binding& binding);

}  // namespace pltp::wire
