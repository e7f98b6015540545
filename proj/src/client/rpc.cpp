#include "pltp/client/rpc.hpp"

#include <algorithm>
#include <iostream>
#include <set>

#include "pltp/client/transport.hpp"
#include "pltp/engine/errors.hpp"
#include "pltp/engine/unify.hpp"
#include "pltp/reader.hpp"
#include "pltp/writer.hpp"

namespace pltp::client {

using protocol::Event;
namespace event = protocol::event;

namespace {

std::size_t max_ordinal_plus_one(const Term& t) {
  std::size_t n = 0;
  for (const Term& v : term_variables(t)) n = std::max(n, v.ordinal() + 1);
  return n;
}

Term shift_variables(const Term& t, std::size_t base) {
  switch (t.kind()) {
    case TermKind::Var:
      return Term::var("_R" + std::to_string(t.ordinal()), base + t.ordinal());
    case TermKind::Compound: {
      std::vector<Term> args;
      args.reserve(t.arity());
      for (const Term& a : t.args()) args.push_back(shift_variables(a, base));
      return Term::compound(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

Term template_of(const Term& query) {
  std::vector<Term> vars = term_variables(query);
  if (vars.empty()) return Term::atom("v");
  return Term::compound("v", std::move(vars));
}

}  // namespace

RemoteError::RemoteError(Term data) : std::runtime_error(write_term(data)), data_(std::move(data)) {}

PromptUnsupported::PromptUnsupported(const Term& prompt)
    : std::runtime_error("no handler for prompt " + write_term(prompt)) {}

RpcCursor::RpcCursor(Session& session, Term query, RpcOptions options)
    : session_(session),
      query_(std::move(query)),
      template_(template_of(query_)),
      options_(std::move(options)),
      rename_base_(max_ordinal_plus_one(query_)) {}

RpcCursor::~RpcCursor() {
  try {
    close();
  } catch (const std::exception&) {
  }
}

std::optional<Term> RpcCursor::next() {
  try {
    for (;;) {
      if (!pending_.empty()) {
        const Term solution = std::move(pending_.front());
        pending_.pop_front();
        if (auto instance = instance_of(solution)) return instance;
        continue;
      }
      if (finished_) {
        close();
        return std::nullopt;
      }
      if (!started_) {
        start();
      } else if (more_) {
        more_ = false;
        process(session_.next(id_));
      } else {
        finished_ = true;
      }
    }
  } catch (...) {
    pending_.clear();
    finished_ = true;
    try {
      close();
    } catch (const std::exception&) {
    }
    throw;
  }
}

void RpcCursor::close() {
  finished_ = true;
  pending_.clear();
  if (id_.empty()) return;
  const auto state = session_.state(id_);
  if (!state || state->is_dead()) return;
  // Await the destroy event, draining whatever the pengine still had queued.
  for (int i = 0; i < 3 && !session_.state(id_)->is_dead(); ++i) session_.destroy(id_);
}

void RpcCursor::start() {
  started_ = true;
  protocol::CreateOptions create;
  if (!options_.src_list.empty()) create.src_list = options_.src_list;
  create.src_text = options_.src_text;
  if (options_.ask_at_create) {
    protocol::AskOptions ask;
    ask.tmpl = template_;
    ask.chunk = options_.chunk;
    create.ask = protocol::AskAtCreate{query_, ask};
  }
  process(session_.create(std::move(create)));
}

void RpcCursor::process(std::vector<Event> events) {
  while (!events.empty()) {
    std::vector<Event> follow_up;
    for (const Event& e : events) {
      if (const auto* c = std::get_if<event::Create>(&e)) {
        id_ = c->id;
        if (!options_.ask_at_create) {
          protocol::AskOptions ask;
          ask.tmpl = template_;
          ask.chunk = options_.chunk;
          follow_up = session_.ask(id_, query_, ask);
        }
      } else if (const auto* err = std::get_if<event::Error>(&e)) {
        throw RemoteError(err->data);
      } else if (std::holds_alternative<event::Failure>(e) || std::holds_alternative<event::Stop>(e)) {
        finished_ = true;
      } else if (const auto* p = std::get_if<event::Prompt>(&e)) {
        follow_up = session_.respond(id_, reply_to(p->data));
      } else if (const auto* o = std::get_if<event::Output>(&e)) {
        if (options_.output_handler) {
          options_.output_handler(o->id, o->data);
        } else {
          std::cout << write_term(o->data) << '\n';
        }
        follow_up = session_.pull_response(id_);
      } else if (const auto* d = std::get_if<event::Debug>(&e)) {
        if (options_.debug_handler) options_.debug_handler(d->id, d->message);
      } else if (const auto* s = std::get_if<event::Success>(&e)) {
        pending_.insert(pending_.end(), s->solutions.begin(), s->solutions.end());
        more_ = s->more;
        if (!s->more) finished_ = true;
      }
    }
    events = std::move(follow_up);
  }
}

Term RpcCursor::reply_to(const Term& prompt) {
  if (options_.prompt_handler) {
    if (auto reply = options_.prompt_handler(id_, prompt)) return *reply;
  } else if (options_.prompt_from_stdin) {
    std::cout << write_term(prompt) << ' ' << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) return Term::atom("end_of_file");
    try {
      return parse_term(line);
    } catch (const ParseError&) {
      return Term::atom(line);
    }
  }
  throw PromptUnsupported(prompt);
}

std::optional<Term> RpcCursor::instance_of(const Term& solution) const {
  const auto s = engine::unify(template_, shift_variables(solution, rename_base_));
  if (!s) return std::nullopt;
  return engine::apply(*s, query_);
}

std::unique_ptr<RpcCursor> rpc(Session& session, const Term& query, RpcOptions options) {
  return std::make_unique<RpcCursor>(session, query, std::move(options));
}

std::vector<Term> rpc_all(Session& session, const Term& query, RpcOptions options) {
  RpcCursor cursor(session, query, std::move(options));
  std::vector<Term> out;
  while (auto t = cursor.next()) out.push_back(std::move(*t));
  return out;
}

namespace {

Term rename_clause_var(const Term& t) {
  switch (t.kind()) {
    case TermKind::Var:
      return Term::var("_V" + std::to_string(t.ordinal()), t.ordinal());
    case TermKind::Compound: {
      std::vector<Term> args;
      args.reserve(t.arity());
      for (const Term& a : t.args()) args.push_back(rename_clause_var(a));
      return Term::compound(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

}  // namespace

std::vector<Clause> collect_src_predicates(const engine::Database& db,
                                           const std::vector<Indicator>& indicators) {
  std::vector<Clause> out;
  for (const Indicator& ind : indicators) {
    const engine::Predicate* p = db.predicate(ind.name, ind.arity);
    if (p == nullptr) throw engine::PrologError(engine::errors::existence("procedure", ind.to_term()));
    for (const engine::StoredClause& c : p->clauses) {
      out.push_back(Clause{rename_clause_var(c.head), rename_clause_var(c.body)});
    }
  }
  return out;
}

SessionFactory http_sessions() {
  return [](const std::string& url) {
    return std::make_shared<Session>(std::make_shared<HttpTransport>(url));
  };
}

namespace {

Clause clause_of(const Term& t) {
  if (t.is_compound(":-", 2)) return Clause{t.arg(0), t.arg(1)};
  return Clause{t, Term::atom("true")};
}

Indicator indicator_term(const Term& t) {
  if (!t.is_compound("/", 2)) throw engine::PrologError(engine::errors::type("predicate_indicator", t));
  if (!t.arg(0).is_atom() || !t.arg(1).is_integer() || t.arg(1).int_value() < 0) {
    throw engine::PrologError(engine::errors::type("predicate_indicator", t));
  }
  return Indicator{t.arg(0).name(), static_cast<std::size_t>(t.arg(1).int_value())};
}

std::string text_of(const Term& t) {
  if (t.is_atom()) return t.name();
  if (auto items = list_items(t)) {
    std::string out;
    for (const Term& c : *items) {
      if (!c.is_atom() || c.name().size() != 1) throw engine::PrologError(engine::errors::type("text", t));
      out += c.name();
    }
    return out;
  }
  throw engine::PrologError(engine::errors::type("text", t));
}

RpcOptions rpc_options(const engine::Database& db, const Term& list) {
  if (list.is_var()) throw engine::PrologError(engine::errors::instantiation());
  auto items = list_items(list);
  if (!items) throw engine::PrologError(engine::errors::type("list", list));
  RpcOptions o;
  std::vector<Indicator> predicates;
  for (const Term& opt : *items) {
    if (opt.is_compound("chunk", 1) && opt.arg(0).is_integer() && opt.arg(0).int_value() > 0) {
      o.chunk = static_cast<std::size_t>(opt.arg(0).int_value());
    } else if (opt.is_compound("src_list", 1) && list_items(opt.arg(0))) {
      const auto clauses = list_items(opt.arg(0));
      for (const Term& c : *clauses) o.src_list.push_back(clause_of(c));
    } else if (opt.is_compound("src_text", 1)) {
      o.src_text = text_of(opt.arg(0));
    } else if (opt.is_compound("src_predicates", 1) && list_items(opt.arg(0))) {
      const auto indicators = list_items(opt.arg(0));
      for (const Term& i : *indicators) predicates.push_back(indicator_term(i));
    } else {
      throw engine::PrologError(engine::errors::domain("pengine_rpc_option", opt));
    }
  }
  const std::vector<Clause> carried = collect_src_predicates(db, predicates);
  o.src_list.insert(o.src_list.end(), carried.begin(), carried.end());
  return o;
}

}  // namespace

engine::Database with_pengine_rpc(engine::Database db, SessionFactory sessions) {
  auto local = std::make_shared<const engine::Database>(db);
  engine::Evaluator evaluator = [local, sessions](const std::vector<Term>& args) -> engine::AnswerStream {
    const Term& url = args[0];
    const Term& query = args[1];
    if (url.is_var() || query.is_var()) throw engine::PrologError(engine::errors::instantiation());
    if (!url.is_atom()) throw engine::PrologError(engine::errors::type("atom", url));
    if (!query.is_callable()) throw engine::PrologError(engine::errors::type("callable", query));
    RpcOptions options = rpc_options(*local, args[2]);
    std::shared_ptr<Session> session;
    try {
      session = sessions(url.name());
    } catch (const std::exception&) {
      throw engine::PrologError(engine::errors::existence("url", url));
    }
    auto cursor = std::make_shared<RpcCursor>(*session, query, std::move(options));
    std::set<std::size_t> allowed;
    for (const Term& v : term_variables(query)) allowed.insert(v.ordinal());
    return [session, cursor, allowed, args, url]() -> std::optional<engine::AnswerTuple> {
      std::optional<Term> instance;
      try {
        instance = cursor->next();
      } catch (const RemoteError& e) {
        throw engine::PrologError(e.data());
      } catch (const TransportError&) {
        throw engine::PrologError(engine::errors::existence("url", url));
      } catch (const PromptUnsupported&) {
        throw engine::PrologError(engine::errors::permission("input", "pengine_rpc", url));
      }
      if (!instance) return std::nullopt;
      for (const Term& v : term_variables(*instance)) {
        if (!allowed.count(v.ordinal())) {
          throw engine::PrologError(engine::errors::representation("pengine_rpc_answer"));
        }
      }
      return engine::AnswerTuple{args[0], *instance, args[2]};
    };
  };
  return engine::register_builtin(std::move(db), "pengine_rpc", 3, std::move(evaluator), false);
}

}  // namespace pltp::client
