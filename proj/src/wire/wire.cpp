#include "pltp/wire.hpp"

#include <cstdint>
#include <optional>
#include <utility>

#include "pltp/reader.hpp"
#include "pltp/writer.hpp"

namespace pltp::wire {

using protocol::Event;
using protocol::Format;
using protocol::Request;
namespace event = protocol::event;
namespace request = protocol::request;

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

Term compound(const char* f, std::vector<Term> args) { return Term::compound(f, std::move(args)); }

[[noreturn]] void fail_type(const char* type, const Term& culprit) {
  throw WireError(compound("type_error", {Term::atom(type), culprit}));
}

[[noreturn]] void fail_domain(const char* domain, const Term& culprit) {
  throw WireError(compound("domain_error", {Term::atom(domain), culprit}));
}

[[noreturn]] void fail_syntax(const std::string& message) {
  throw WireError(compound("syntax_error", {Term::atom(message)}));
}

Term parse_text(const std::string& text, VariableScope& scope) {
  try {
    return parse_term(text, scope);
  } catch (const ParseError& e) {
    fail_syntax(e.what());
  }
}

std::vector<Clause> parse_clauses(const std::string& text) {
  try {
    return parse_program(text);
  } catch (const ParseError& e) {
    fail_syntax(e.what());
  }
}

// An atom, or a double-quoted string read as a list of one-char atoms.
std::string text_of(const Term& t) {
  if (t.is_atom()) return t.name();
  if (auto items = list_items(t)) {
    std::string out;
    for (const Term& c : *items) {
      if (!c.is_atom() || c.name().size() != 1) fail_type("text", t);
      out += c.name();
    }
    return out;
  }
  fail_type("text", t);
}

std::size_t chunk_of(const Term& t) {
  if (!t.is_integer()) fail_type("integer", t);
  if (t.int_value() < 1) fail_domain("positive_integer", t);
  return static_cast<std::size_t>(t.int_value());
}

bool bool_of(const Term& t) {
  if (t.is_atom("true")) return true;
  if (t.is_atom("false")) return false;
  fail_type("bool", t);
}

Format format_option(const std::string& name) {
  if (auto f = protocol::parse_format(name)) return *f;
  fail_domain("format", Term::atom(name));
}

Clause clause_of(const Term& t) {
  if (t.is_compound(":-", 2)) return Clause{t.arg(0), t.arg(1)};
  return Clause{t, Term::atom("true")};
}

Term clause_term(const Clause& c) {
  if (c.body.is_atom("true")) return c.head;
  return compound(":-", {c.head, c.body});
}

protocol::AskOptions ask_options(const Term& list) {
  protocol::AskOptions options;
  auto items = list_items(list);
  if (!items) fail_type("list", list);
  for (const Term& o : *items) {
    if (o.is_compound("template", 1)) {
      options.tmpl = o.arg(0);
    } else if (o.is_compound("chunk", 1)) {
      options.chunk = chunk_of(o.arg(0));
    } else {
      fail_domain("ask_option", o);
    }
  }
  return options;
}

json parse_json(const std::string& body) {
  json value = json::parse(body, nullptr, false);
  if (value.is_discarded()) fail_syntax("malformed JSON");
  if (!value.is_object()) fail_type("json_object", Term::atom(body));
  return value;
}

const std::string& json_string(const json& object, const char* key) {
  const json& v = object.at(key);
  if (!v.is_string()) fail_type("string", Term::atom(key));
  return v.get_ref<const std::string&>();
}

std::size_t json_chunk(const json& v) {
  if (!v.is_number_integer()) fail_type("integer", Term::atom(v.dump()));
  const auto n = v.get<std::int64_t>();
  if (n < 1) fail_domain("positive_integer", Term::integer(n));
  return static_cast<std::size_t>(n);
}

Term json_input(const json& v) {
  if (!v.is_string()) return json_to_term(v);
  const std::string& text = v.get_ref<const std::string&>();
  try {
    return parse_term(text);
  } catch (const ParseError&) {
    return Term::atom(text);
  }
}

std::string clause_text(const Clause& c) { return write_term(clause_term(c)) + " ."; }

Term bool_term(bool b) { return Term::atom(b ? "true" : "false"); }

json binding_object(const Binding& b) {
  json out = json::object();
  for (const auto& [name, value] : b.pairs) out[name] = term_to_json(value);
  return out;
}

// Events whose response folds a trailing Destroy.
std::vector<Event> unfold_destroy(std::vector<Event> inner, std::string id) {
  inner.push_back(event::Destroy{std::move(id)});
  return inner;
}

std::vector<Event> decode_term(const Term& t) {
  if (!t.is_compound() || !t.arg(0).is_atom()) fail_domain("pengine_event", t);
  const std::string id = t.arg(0).name();
  const std::string& f = t.name();
  const std::size_t n = t.arity();
  if (f == "create" && n == 2) return {event::Create{id, t.arg(1)}};
  if (f == "create" && n == 3) {
    std::vector<Event> out{event::Create{id, t.arg(1)}};
    for (auto& e : decode_term(t.arg(2))) out.push_back(std::move(e));
    return out;
  }
  if (f == "output" && n == 2) return {event::Output{id, t.arg(1)}};
  if (f == "prompt" && n == 2) return {event::Prompt{id, t.arg(1)}};
  if (f == "success" && n == 3) {
    auto items = list_items(t.arg(1));
    if (!items || items->empty()) fail_type("non_empty_list", t.arg(1));
    return {event::Success{id, std::move(*items), bool_of(t.arg(2)), {}}};
  }
  if (f == "failure" && n == 1) return {event::Failure{id}};
  if (f == "error" && n == 2) return {event::Error{id, t.arg(1)}};
  if (f == "stop" && n == 1) return {event::Stop{id}};
  if (f == "destroy" && n == 1) return {event::Destroy{id}};
  if (f == "destroy" && n == 2) return unfold_destroy(decode_term(t.arg(1)), id);
  if (f == "debug" && n == 2) return {event::Debug{id, text_of(t.arg(1))}};
  fail_domain("pengine_event", t);
}

std::vector<Event> decode_json(const json& v) {
  if (!v.is_object() || !v.contains("event") || !v["event"].is_string()) {
    fail_domain("pengine_event", Term::atom(v.dump()));
  }
  const std::string& kind = v["event"].get_ref<const std::string&>();
  const std::string id = v.contains("id") && v["id"].is_string() ? v["id"].get<std::string>()
                                                                 : std::string();
  const auto data = [&]() -> Term {
    if (!v.contains("data")) fail_domain("pengine_event", Term::atom(v.dump()));
    return json_to_term(v["data"]);
  };
  if (kind == "create") {
    std::vector<Event> out{event::Create{id, data()}};
    if (v.contains("answer")) {
      for (auto& e : decode_json(v["answer"])) out.push_back(std::move(e));
    }
    return out;
  }
  if (kind == "output") return {event::Output{id, data()}};
  if (kind == "prompt") return {event::Prompt{id, data()}};
  if (kind == "success") {
    const json& rows = v.at("data");
    if (!rows.is_array() || rows.empty()) fail_type("non_empty_list", Term::atom(rows.dump()));
    event::Success s{id, {}, v.value("more", false), {}};
    for (const json& row : rows) {
      Binding b;
      if (row.is_object()) {
        for (const auto& [name, value] : row.items()) b.pairs.emplace_back(name, json_to_term(value));
      }
      s.solutions.push_back(json_to_term(row));
      s.bindings.push_back(std::move(b));
    }
    return {std::move(s)};
  }
  if (kind == "failure") return {event::Failure{id}};
  if (kind == "error") return {event::Error{id, data()}};
  if (kind == "stop") return {event::Stop{id}};
  if (kind == "destroy") {
    if (v.contains("data")) return unfold_destroy(decode_json(v["data"]), id);
    return {event::Destroy{id}};
  }
  if (kind == "debug") {
    const json& m = v.at("data");
    return {event::Debug{id, m.is_string() ? m.get<std::string>() : m.dump()}};
  }
  fail_domain("pengine_event", Term::atom(kind));
}

}  // namespace

WireError::WireError(Term formal) : std::runtime_error(write_term(formal)), formal_(std::move(formal)) {}

Format format_of_content_type(const std::string& content_type) {
  return content_type.find("json") != std::string::npos ? Format::Json : Format::Prolog;
}

const char* content_type(Format format) { return format == Format::Json ? kJsonType : kPrologType; }

request::Create decode_create(const std::string& body, Format body_format) try {
  request::Create req;
  protocol::CreateOptions& o = req.options;
  o.format = body_format;
  if (body_format == Format::Json) {
    const json v = body.empty() ? json::object() : parse_json(body);
    if (v.contains("format")) o.format = format_option(json_string(v, "format"));
    if (v.contains("src_text")) o.src_text = json_string(v, "src_text");
    if (v.contains("src_list")) {
      const json& list = v["src_list"];
      std::vector<Clause> clauses;
      const auto add = [&](const json& item) {
        if (!item.is_string()) fail_type("string", Term::atom(item.dump()));
        for (auto& c : parse_clauses(item.get<std::string>())) clauses.push_back(std::move(c));
      };
      if (list.is_array()) {
        for (const json& item : list) add(item);
      } else {
        add(list);
      }
      o.src_list = std::move(clauses);
    }
    if (v.contains("src_url")) o.src_url = json_string(v, "src_url");
    if (v.contains("name")) o.name = json_string(v, "name");
    if (v.contains("destroy")) {
      if (!v["destroy"].is_boolean()) fail_type("bool", Term::atom(v["destroy"].dump()));
      o.destroy_on_completion = v["destroy"].get<bool>();
    }
    if (v.contains("ask")) {
      VariableScope scope;
      protocol::AskAtCreate ask{parse_text(json_string(v, "ask"), scope), {}};
      if (v.contains("template")) ask.options.tmpl = parse_text(json_string(v, "template"), scope);
      if (v.contains("chunk")) ask.options.chunk = json_chunk(v["chunk"]);
      o.ask = std::move(ask);
    }
    return req;
  }

  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return req;
  VariableScope scope;
  const Term t = parse_text(body, scope);
  const Term list = t.is_compound("create", 1) ? t.arg(0) : t;
  auto items = list_items(list);
  if (!items) fail_type("list", list);
  std::optional<Term> query;
  protocol::AskOptions ask_opts;
  for (const Term& opt : *items) {
    if (!opt.is_compound() || opt.arity() != 1) fail_domain("create_option", opt);
    const std::string& key = opt.name();
    const Term& a = opt.arg(0);
    if (key == "src_text") {
      o.src_text = text_of(a);
    } else if (key == "src_list") {
      auto clauses = list_items(a);
      if (!clauses) fail_type("list", a);
      std::vector<Clause> out;
      for (const Term& c : *clauses) out.push_back(clause_of(c));
      o.src_list = std::move(out);
    } else if (key == "src_url") {
      o.src_url = text_of(a);
    } else if (key == "ask") {
      query = a;
    } else if (key == "template") {
      ask_opts.tmpl = a;
    } else if (key == "chunk") {
      ask_opts.chunk = chunk_of(a);
    } else if (key == "name") {
      o.name = text_of(a);
    } else if (key == "destroy") {
      o.destroy_on_completion = bool_of(a);
    } else if (key == "format") {
      o.format = format_option(text_of(a));
    } else if (key != "id") {
      fail_domain("create_option", opt);
    }
  }
  if (query) o.ask = protocol::AskAtCreate{*query, std::move(ask_opts)};
  return req;
} catch (const json::exception& e) {
  fail_syntax(e.what());
}

Request decode_send(const std::string& id, const std::string& body, Format body_format) try {
  if (body_format == Format::Json) {
    const json v = parse_json(body);
    if (!v.contains("command")) fail_domain("pengine_request", Term::atom(body));
    const std::string& cmd = json_string(v, "command");
    if (cmd == "ask") {
      VariableScope scope;
      request::Ask ask{id, parse_text(json_string(v, "query"), scope), {}};
      if (v.contains("template")) ask.options.tmpl = parse_text(json_string(v, "template"), scope);
      if (v.contains("chunk")) ask.options.chunk = json_chunk(v["chunk"]);
      return ask;
    }
    if (cmd == "next") return request::Next{id};
    if (cmd == "stop") return request::Stop{id};
    if (cmd == "respond" || cmd == "input") {
      if (!v.contains("input")) fail_domain("pengine_request", Term::atom(body));
      return request::Respond{id, json_input(v["input"])};
    }
    if (cmd == "pull_response") return request::PullResponse{id};
    if (cmd == "abort") return request::Abort{id};
    if (cmd == "destroy") return request::Destroy{id};
    fail_domain("pengine_request", Term::atom(cmd));
  }

  VariableScope scope;
  const Term t = parse_text(body, scope);
  if (t.is_compound("ask", 1)) return request::Ask{id, t.arg(0), {}};
  if (t.is_compound("ask", 2)) return request::Ask{id, t.arg(0), ask_options(t.arg(1))};
  if (t.is_atom("next")) return request::Next{id};
  if (t.is_atom("stop")) return request::Stop{id};
  if (t.is_compound("respond", 1) || t.is_compound("input", 1)) return request::Respond{id, t.arg(0)};
  if (t.is_atom("pull_response")) return request::PullResponse{id};
  if (t.is_atom("abort")) return request::Abort{id};
  if (t.is_atom("destroy")) return request::Destroy{id};
  fail_domain("pengine_request", t);
} catch (const json::exception& e) {
  fail_syntax(e.what());
} catch (const JsonStructureError& e) {
  fail_syntax(e.what());
}

std::string encode_request(const Request& req, Format format) {
  if (format == Format::Json) {
    json out = json::object();
    std::visit(
        overloaded{
            [&](const request::Create& r) {
              const auto& o = r.options;
              out["format"] = std::string(protocol::format_name(o.format));
              if (o.src_text) out["src_text"] = *o.src_text;
              if (o.src_list) {
                json list = json::array();
                for (const Clause& c : *o.src_list) list.push_back(clause_text(c));
                out["src_list"] = std::move(list);
              }
              if (o.src_url) out["src_url"] = *o.src_url;
              if (o.name) out["name"] = *o.name;
              out["destroy"] = o.destroy_on_completion;
              if (o.ask) {
                out["ask"] = write_term(o.ask->query);
                if (o.ask->options.tmpl) out["template"] = write_term(*o.ask->options.tmpl);
                out["chunk"] = o.ask->options.chunk;
              }
            },
            [&](const request::Ask& r) {
              out["command"] = "ask";
              out["query"] = write_term(r.query);
              if (r.options.tmpl) out["template"] = write_term(*r.options.tmpl);
              out["chunk"] = r.options.chunk;
            },
            [&](const request::Respond& r) {
              out["command"] = "respond";
              out["input"] = write_term(r.input);
            },
            [&](const request::PullResponse&) -> void {
              throw std::invalid_argument("pull_response has no request body");
            },
            [&](const auto&) { out["command"] = std::string(protocol::request_name(req)); },
        },
        req);
    return out.dump();
  }

  const auto ask_list = [](const protocol::AskOptions& o) {
    std::vector<Term> opts;
    if (o.tmpl) opts.push_back(compound("template", {*o.tmpl}));
    opts.push_back(compound("chunk", {Term::integer(static_cast<std::int64_t>(o.chunk))}));
    return opts;
  };
  const Term t = std::visit(
      overloaded{
          [&](const request::Create& r) {
            const auto& o = r.options;
            std::vector<Term> opts;
            if (o.src_list) {
              std::vector<Term> clauses;
              for (const Clause& c : *o.src_list) clauses.push_back(clause_term(c));
              opts.push_back(compound("src_list", {Term::list(std::move(clauses))}));
            }
            if (o.src_text) opts.push_back(compound("src_text", {Term::atom(*o.src_text)}));
            if (o.src_url) opts.push_back(compound("src_url", {Term::atom(*o.src_url)}));
            if (o.name) opts.push_back(compound("name", {Term::atom(*o.name)}));
            opts.push_back(compound("destroy", {bool_term(o.destroy_on_completion)}));
            opts.push_back(compound("format", {Term::atom(std::string(protocol::format_name(o.format)))}));
            if (o.ask) {
              opts.push_back(compound("ask", {o.ask->query}));
              for (Term& a : ask_list(o.ask->options)) opts.push_back(std::move(a));
            }
            return compound("create", {Term::list(std::move(opts))});
          },
          [&](const request::Ask& r) {
            return compound("ask", {r.query, Term::list(ask_list(r.options))});
          },
          [&](const request::Respond& r) { return compound("input", {r.input}); },
          [&](const request::PullResponse&) -> Term {
            throw std::invalid_argument("pull_response has no request body");
          },
          [&](const auto&) { return Term::atom(std::string(protocol::request_name(req))); },
      },
      req);
  return write_term(t);
}

Term event_term(const Event& e) {
  return std::visit(
      overloaded{
          [](const event::Create& x) { return compound("create", {Term::atom(x.id), x.data}); },
          [](const event::Output& x) { return compound("output", {Term::atom(x.id), x.data}); },
          [](const event::Prompt& x) { return compound("prompt", {Term::atom(x.id), x.data}); },
          [](const event::Success& x) {
            return compound("success", {Term::atom(x.id), Term::list(x.solutions), bool_term(x.more)});
          },
          [](const event::Failure& x) { return compound("failure", {Term::atom(x.id)}); },
          [](const event::Error& x) { return compound("error", {Term::atom(x.id), x.data}); },
          [](const event::Stop& x) { return compound("stop", {Term::atom(x.id)}); },
          [](const event::Destroy& x) { return compound("destroy", {Term::atom(x.id)}); },
          [](const event::Debug& x) {
            return compound("debug", {Term::atom(x.id), Term::atom(x.message)});
          },
      },
      e);
}

json event_json(const Event& e) {
  json out = json::object();
  out["event"] = std::string(protocol::event_name(e));
  out["id"] = protocol::event_id(e);
  std::visit(overloaded{
                 [&](const event::Create& x) { out["data"] = term_to_json(x.data); },
                 [&](const event::Output& x) { out["data"] = term_to_json(x.data); },
                 [&](const event::Prompt& x) { out["data"] = term_to_json(x.data); },
                 [&](const event::Success& x) {
                   json rows = json::array();
                   for (std::size_t i = 0; i < x.solutions.size(); ++i) {
                     rows.push_back(i < x.bindings.size() ? binding_object(x.bindings[i])
                                                          : json::object());
                   }
                   out["data"] = std::move(rows);
                   out["more"] = x.more;
                 },
                 [&](const event::Error& x) { out["data"] = term_to_json(x.data); },
                 [&](const event::Debug& x) { out["data"] = x.message; },
                 [](const auto&) {},
             },
             e);
  return out;
}

std::string encode_response(const std::vector<Event>& events, Format format) {
  if (events.empty()) throw std::invalid_argument("empty response");
  // Folds events[from..] into one term or object.
  const auto fold_term = [&events](std::size_t from, const auto& self) -> Term {
    const Event& first = events[from];
    if (from + 1 == events.size()) return event_term(first);
    if (const auto* c = std::get_if<event::Create>(&first)) {
      return compound("create", {Term::atom(c->id), c->data, self(from + 1, self)});
    }
    return compound("destroy", {Term::atom(protocol::event_id(first)), event_term(first)});
  };
  const auto fold_json = [&events](std::size_t from, const auto& self) -> json {
    const Event& first = events[from];
    if (from + 1 == events.size()) return event_json(first);
    json out = event_json(first);
    if (std::holds_alternative<event::Create>(first)) {
      out["answer"] = self(from + 1, self);
      return out;
    }
    json destroy = json::object();
    destroy["event"] = "destroy";
    destroy["id"] = protocol::event_id(first);
    destroy["data"] = std::move(out);
    return destroy;
  };
  if (format == Format::Json) return fold_json(0, fold_json).dump();
  return write_term(fold_term(0, fold_term));
}

std::vector<Event> decode_response(const std::string& body, Format format) {
  if (format == Format::Json) {
    json v = json::parse(body, nullptr, false);
    if (v.is_discarded()) fail_syntax("malformed JSON response");
    try {
      return decode_json(v);
    } catch (const json::exception& e) {
      fail_syntax(e.what());
    } catch (const JsonStructureError& e) {
      fail_syntax(e.what());
    }
  }
  VariableScope scope;
  return decode_term(parse_text(body, scope));
}

Term instantiate(const Term& tmpl, const Binding& binding) {
  if (tmpl.is_var()) {
    const Term* value = binding.find(tmpl.name());
    return value != nullptr ? *value : tmpl;
  }
  if (!tmpl.is_compound()) return tmpl;
  std::vector<Term> args;
  args.reserve(tmpl.arity());
  for (const Term& a : tmpl.args()) args.push_back(instantiate(a, binding));
  return Term::compound(tmpl.name(), std::move(args));
}

}  // namespace pltp::wire
