#include "pltp/server/pengine_server.hpp"

#include <atomic>
#include <deque>
#include <random>
#include <stdexcept>

#include "httplib.h"
#include "pltp/engine/errors.hpp"
#include "pltp/engine/sandbox.hpp"
#include "pltp/engine/solver.hpp"
#include "pltp/reader.hpp"

namespace pltp::server {

using protocol::Event;
using protocol::LifecycleState;
using protocol::Request;
namespace event = protocol::event;
namespace request = protocol::request;
namespace errors = engine::errors;

namespace {

// Pengines whose slot was reclaimed but whose final events nobody collected.
constexpr auto kZombieTtl = std::chrono::seconds(60);

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

bool ends_query(const Event& ev) {
  if (const auto* s = std::get_if<event::Success>(&ev)) return !s->more;
  return std::holds_alternative<event::Failure>(ev) || std::holds_alternative<event::Error>(ev) ||
         std::holds_alternative<event::Stop>(ev);
}

Term protocol_error(const Request& req, const LifecycleState& state) {
  return Term::compound("protocol_error", {Term::atom(std::string(protocol::request_name(req))),
                                           parse_term(state.to_string())});
}

Term seconds_term(std::chrono::milliseconds ms) {
  if (ms.count() % 1000 == 0) return Term::integer(ms.count() / 1000);
  return Term::floating(static_cast<double>(ms.count()) / 1000.0);
}

std::string http_get(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("not an absolute URL");
  const auto slash = url.find('/', scheme + 3);
  const std::string origin = slash == std::string::npos ? url : url.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : url.substr(slash);
  httplib::Client client(origin);
  client.set_connection_timeout(5);
  client.set_read_timeout(10);
  auto res = client.Get(path);
  if (!res || res->status != 200) throw std::runtime_error("fetch failed");
  return res->body;
}

}  // namespace

std::string uuid_v4() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uniform_int_distribution<unsigned> byte(0, 255);
  unsigned char b[16];
  for (auto& x : b) x = static_cast<unsigned char>(byte(rng));
  b[6] = static_cast<unsigned char>((b[6] & 0x0F) | 0x40);
  b[8] = static_cast<unsigned char>((b[8] & 0x3F) | 0x80);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 16; ++i) {
    if (i == 4 || i == 6 || i == 8 || i == 10) out += '-';
    out += hex[b[i] >> 4];
    out += hex[b[i] & 0x0F];
  }
  return out;
}

struct PengineServer::Command {
  enum class Kind { Ask, Next, Respond, Continue, Drop, Exit };
  explicit Command(Kind k) : kind(k) {}
  Kind kind;
  std::size_t generation = 0;
  Term query = Term::nil();
  Term tmpl = Term::nil();
  std::size_t chunk = 1;
  Term input = Term::nil();
  std::shared_ptr<std::atomic<bool>> cancel;
};

struct PengineServer::Pengine {
  std::string id;
  std::optional<std::string> name;
  std::string owner;
  protocol::Format format = protocol::Format::Prolog;
  bool destroy_flag = true;
  std::shared_ptr<const engine::Database> db;
  LifecycleState state = LifecycleState::computing();
  Clock::time_point deadline;
  Clock::time_point released_at;

  std::deque<Event> events;
  std::deque<Command> commands;
  // Worker events tagged with an older generation are discarded.
  std::size_t generation = 0;
  // Bumped when an Abort or Destroy supersedes a waiting request.
  std::size_t epoch = 0;
  std::size_t waiters = 0;
  bool in_flight = false;
  bool slot = true;
  // No further commands reach the worker.
  bool closing = false;
  std::shared_ptr<std::atomic<bool>> cancel = std::make_shared<std::atomic<bool>>(false);
  std::condition_variable events_cv;
  std::condition_variable commands_cv;
  std::thread worker;
  std::vector<protocol::TraceItem> trace;
};

PengineServer::PengineServer(ServerOptions options) : options_(std::move(options)) {
  validate(options_.limits);
  if (!options_.base) {
    options_.base = std::make_shared<const engine::Database>(engine::Database::standard());
  }
  if (!options_.fetch_url) options_.fetch_url = http_get;
  reaper_ = std::thread([this] { reap_loop(); });
}

PengineServer::~PengineServer() {
  std::vector<std::thread> threads;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    stopping_ = true;
    for (auto& [id, p] : pengines_) {
      shut_down(*p);
      p->events_cv.notify_all();
      if (p->worker.joinable()) threads.push_back(std::move(p->worker));
    }
    for (auto& t : graveyard_) threads.push_back(std::move(t));
    graveyard_.clear();
  }
  reaper_cv_.notify_all();
  if (reaper_.joinable()) reaper_.join();
  for (auto& t : threads) t.join();
}

std::vector<Event> PengineServer::handle(const Request& req, const std::string& owner,
                                         std::chrono::milliseconds wait) {
  std::unique_lock<std::mutex> lock(mutex_);
  if (const auto* c = std::get_if<request::Create>(&req)) return create(*c, owner, wait, lock);

  const std::string id = protocol::request_id(req);
  const auto found = pengines_.find(id);
  if (found == pengines_.end()) {
    return {event::Error{id, errors::existence("pengine", Term::atom(id))}};
  }
  std::shared_ptr<Pengine> p = found->second;
  Pengine& pe = *p;
  const auto until = Clock::now() + wait;
  const auto refuse = [&] { return std::vector<Event>{event::Error{id, protocol_error(req, pe.state)}}; };

  if (std::holds_alternative<request::PullResponse>(req)) {
    if (pe.state == LifecycleState::computing()) {
      // Re-poll for the response of the request in flight.
      if (pe.waiters > 0) return refuse();
      return await(p, lock, until);
    }
    if (pe.state != LifecycleState::holding_output()) return refuse();
    record(pe, req);
    pe.state = LifecycleState::computing();
    pe.in_flight = true;
    command(pe, Command{Command::Kind::Continue});
    return await(p, lock, until);
  }

  const bool interrupting =
      std::holds_alternative<request::Abort>(req) || std::holds_alternative<request::Destroy>(req);
  if (pe.in_flight) {
    if (!interrupting) return refuse();
    ++pe.epoch;
    pe.events_cv.notify_all();
  } else if (!protocol::admissible(pe.state, req)) {
    return refuse();
  }
  record(pe, req);
  pe.state = protocol::apply_request(pe.state, req);
  pe.in_flight = true;

  if (std::holds_alternative<request::Destroy>(req)) {
    ++pe.generation;
    pe.events.clear();
    shut_down(pe);
    pe.events.push_back(event::Destroy{id});
    return deliver(pe);
  }
  // A pengine that already timed out answers with its pending final events.
  if (pe.closing) return await(p, lock, until);

  std::visit(overloaded{
                 [&](const request::Ask& r) { start_ask(pe, r.query, r.options); },
                 [&](const request::Next&) { command(pe, Command{Command::Kind::Next}); },
                 [&](const request::Respond& r) {
                   Command c{Command::Kind::Respond};
                   c.input = r.input;
                   command(pe, std::move(c));
                 },
                 [&](const request::Stop&) {
                   command(pe, Command{Command::Kind::Drop});
                   post_final(pe, event::Stop{id});
                 },
                 [&](const request::Abort&) {
                   ++pe.generation;
                   pe.events.clear();
                   pe.cancel->store(true);
                   pe.cancel = std::make_shared<std::atomic<bool>>(false);
                   command(pe, Command{Command::Kind::Drop});
                   post_final(pe, event::Error{id, Term::atom("abort")});
                 },
                 [](const auto&) {},
             },
             req);
  return await(p, lock, until);
}

std::vector<Event> PengineServer::create(const request::Create& req, const std::string& owner,
                                         std::chrono::milliseconds wait,
                                         std::unique_lock<std::mutex>& lock) {
  const protocol::CreateOptions& opts = req.options;
  const auto refusal = [&]() -> std::optional<Term> {
    if (stopping_) return errors::resource("server_shutdown");
    if (slots_ >= options_.limits.max_pengines) return errors::resource("max_pengines");
    const auto owned = slaves_.find(owner);
    if (owned != slaves_.end() && owned->second >= options_.limits.max_slaves) {
      return errors::resource("max_slaves");
    }
    if (opts.name) {
      for (const auto& [other_id, other] : pengines_) {
        if (other->slot && other->owner == owner && other->name == opts.name) {
          return errors::permission("create", "pengine", Term::atom(*opts.name));
        }
      }
    }
    return std::nullopt;
  };
  if (auto why = refusal()) return {event::Error{"", *why}};

  const std::string id = uuid_v4();
  std::optional<Term> source_error;
  lock.unlock();
  auto db = build_database(opts, source_error);
  lock.lock();
  if (source_error) return {event::Error{id, *source_error}};
  if (auto why = refusal()) return {event::Error{"", *why}};

  auto p = std::make_shared<Pengine>();
  p->id = id;
  p->name = opts.name;
  p->owner = owner;
  p->format = opts.format;
  p->destroy_flag = opts.destroy_on_completion;
  p->db = std::move(db);
  p->deadline = Clock::now() + options_.limits.timeout;
  ++slots_;
  ++slaves_[owner];

  const Term data = Term::compound(
      "json", {Term::list({Term::compound("=", {Term::atom("slave_limit"),
                                                Term::integer(static_cast<std::int64_t>(
                                                    options_.limits.max_slaves))}),
                           Term::compound("=", {Term::atom("timeout"),
                                                seconds_term(options_.limits.timeout)})})});
  const Event created = event::Create{id, data};
  record(*p, req);
  record(*p, created);
  p->state = LifecycleState::idle();
  p->worker = std::thread([this, p] { run_worker(p); });
  pengines_[id] = p;
  if (!opts.ask) return {created};

  // The first query travels with the create request.
  const Request ask = request::Ask{id, opts.ask->query, opts.ask->options};
  record(*p, ask);
  p->state = LifecycleState::computing();
  p->in_flight = true;
  start_ask(*p, opts.ask->query, opts.ask->options);
  std::vector<Event> out{created};
  for (auto& e : await(p, lock, Clock::now() + wait)) out.push_back(std::move(e));
  return out;
}

std::shared_ptr<const engine::Database> PengineServer::build_database(
    const protocol::CreateOptions& opts, std::optional<Term>& error) {
  if (!opts.src_list && !opts.src_text && !opts.src_url) return options_.base;
  engine::Database db = *options_.base;
  try {
    if (opts.src_list) db = engine::consult(std::move(db), *opts.src_list);
    if (opts.src_text) db = engine::consult(std::move(db), parse_program(*opts.src_text));
    if (opts.src_url) {
      const Term url = Term::atom(*opts.src_url);
      if (!options_.limits.allow_src_url) {
        error = errors::permission("load", "src_url", url);
        return nullptr;
      }
      std::string text;
      try {
        text = options_.fetch_url(*opts.src_url);
      } catch (const std::exception&) {
        error = errors::existence("url", url);
        return nullptr;
      }
      db = engine::consult(std::move(db), parse_program(text));
    }
  } catch (const ParseError& e) {
    error = Term::compound("syntax_error", {Term::atom(e.what())});
    return nullptr;
  } catch (const engine::PrologError& e) {
    error = e.formal();
    return nullptr;
  }
  return std::make_shared<const engine::Database>(std::move(db));
}

void PengineServer::start_ask(Pengine& p, const Term& query, const protocol::AskOptions& options) {
  if (options.chunk == 0) {
    post_final(p, event::Error{p.id, errors::domain("positive_integer", Term::integer(0))});
    return;
  }
  if (std::optional<Term> verdict = engine::safe_goal(*p.db, query)) {
    post_final(p, event::Error{p.id, *verdict});
    return;
  }
  Command c{Command::Kind::Ask};
  c.query = query;
  c.tmpl = options.tmpl.value_or(query);
  c.chunk = options.chunk;
  c.cancel = p.cancel;
  command(p, std::move(c));
}

void PengineServer::post(Pengine& p, std::size_t generation, Event ev) {
  if (generation != p.generation) return;
  p.events.push_back(std::move(ev));
  p.events_cv.notify_all();
}

void PengineServer::post_final(Pengine& p, Event ev) {
  p.events.push_back(std::move(ev));
  if (p.destroy_flag) {
    p.events.push_back(event::Destroy{p.id});
    shut_down(p);
  }
  p.events_cv.notify_all();
}

void PengineServer::command(Pengine& p, Command cmd) {
  if (p.closing) return;
  cmd.generation = p.generation;
  p.commands.push_back(std::move(cmd));
  p.commands_cv.notify_one();
}

void PengineServer::shut_down(Pengine& p) {
  release_slot(p);
  if (p.closing) return;
  p.closing = true;
  p.cancel->store(true);
  p.commands.clear();
  p.commands.push_back(Command{Command::Kind::Exit});
  p.commands_cv.notify_one();
}

void PengineServer::release_slot(Pengine& p) {
  if (!p.slot) return;
  p.slot = false;
  p.released_at = Clock::now();
  --slots_;
  const auto owned = slaves_.find(p.owner);
  if (owned != slaves_.end() && --owned->second == 0) slaves_.erase(owned);
}

void PengineServer::record(Pengine& p, protocol::TraceItem item) {
  if (options_.record_traces) p.trace.push_back(std::move(item));
}

std::vector<Event> PengineServer::await(std::shared_ptr<Pengine> p,
                                        std::unique_lock<std::mutex>& lock,
                                        Clock::time_point until) {
  const std::size_t epoch = p->epoch;
  ++p->waiters;
  p->events_cv.wait_until(lock, until, [&] {
    return !p->events.empty() || p->epoch != epoch || stopping_;
  });
  --p->waiters;
  if (p->epoch != epoch || p->events.empty()) return {};
  return deliver(*p);
}

std::vector<Event> PengineServer::deliver(Pengine& p) {
  std::vector<Event> out;
  out.push_back(std::move(p.events.front()));
  p.events.pop_front();
  if (std::holds_alternative<event::Debug>(out.front())) {
    record(p, out.front());
    return out;
  }
  if (ends_query(out.front()) && !p.events.empty() &&
      std::holds_alternative<event::Destroy>(p.events.front())) {
    out.push_back(std::move(p.events.front()));
    p.events.pop_front();
  }
  for (const Event& e : out) {
    record(p, e);
    p.state = protocol::apply_event(p.state, e, p.destroy_flag);
  }
  p.in_flight = false;
  if (p.state.is_dead()) retire(p);
  return out;
}

void PengineServer::retire(Pengine& p) {
  shut_down(p);
  if (p.worker.joinable()) graveyard_.push_back(std::move(p.worker));
  if (options_.record_traces) finished_traces_.push_back(PengineTrace{p.id, std::move(p.trace)});
  pengines_.erase(p.id);
}

std::vector<Event> PengineServer::enforce_timeouts(Clock::time_point now) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<Event> posted;
  std::vector<std::string> zombies;
  for (auto& [id, p] : pengines_) {
    if (p->slot && p->deadline <= now) {
      ++p->generation;
      p->events.clear();
      const Event error = event::Error{id, Term::atom("time_limit_exceeded")};
      const Event destroy = event::Destroy{id};
      p->events.push_back(error);
      p->events.push_back(destroy);
      shut_down(*p);
      p->events_cv.notify_all();
      posted.push_back(error);
      posted.push_back(destroy);
    } else if (!p->slot && p->waiters == 0 && now - p->released_at > kZombieTtl) {
      zombies.push_back(id);
    }
  }
  for (const auto& id : zombies) retire(*pengines_.at(id));
  return posted;
}

void PengineServer::reap_loop() {
  std::unique_lock<std::mutex> lock(mutex_);
  while (!stopping_) {
    reaper_cv_.wait_for(lock, options_.reap_interval, [this] { return stopping_; });
    if (stopping_) break;
    std::vector<std::thread> dead;
    dead.swap(graveyard_);
    lock.unlock();
    for (auto& t : dead) t.join();
    enforce_timeouts(Clock::now());
    lock.lock();
  }
}

void PengineServer::run_worker(std::shared_ptr<Pengine> p) {
  std::size_t generation = 0;
  std::optional<engine::SolverToken> token;
  std::vector<Term> solutions;
  std::vector<Binding> bindings;
  std::size_t chunk = 1;

  const auto finish = [&](Event ev) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (generation == p->generation) post_final(*p, std::move(ev));
  };
  const auto suspend = [&](Event ev) {
    std::lock_guard<std::mutex> lock(mutex_);
    post(*p, generation, std::move(ev));
  };

  for (;;) {
    Command cmd{Command::Kind::Exit};
    {
      std::unique_lock<std::mutex> lock(mutex_);
      p->commands_cv.wait(lock, [&] { return !p->commands.empty(); });
      cmd = std::move(p->commands.front());
      p->commands.pop_front();
    }
    if (cmd.kind == Command::Kind::Exit) return;
    generation = cmd.generation;
    if (cmd.kind == Command::Kind::Drop || cmd.kind == Command::Kind::Ask) {
      token.reset();
      solutions.clear();
      bindings.clear();
      if (cmd.kind == Command::Kind::Drop) continue;
    }

    engine::Batch batch;
    try {
      engine::SolveStep step = engine::Failure{};
      if (cmd.kind == Command::Kind::Ask) {
        chunk = cmd.chunk;
        engine::SolveOptions so;
        so.max_depth = options_.max_depth;
        so.cancel = cmd.cancel;
        so.debug_sink = [&](const std::string& message) { suspend(event::Debug{p->id, message}); };
        step = engine::start_solve(p->db, cmd.query, cmd.tmpl, std::move(so));
      } else if (!token) {
        finish(event::Error{p->id, Term::compound("system_error", {Term::atom("no_query")})});
        continue;
      } else if (cmd.kind == Command::Kind::Respond) {
        step = engine::resume(*token, cmd.input);
      } else {
        step = engine::resume(*token);
      }
      token.reset();
      batch = engine::find_n(chunk - solutions.size(), std::move(step));
    } catch (const std::exception& e) {
      token.reset();
      solutions.clear();
      bindings.clear();
      finish(event::Error{p->id, Term::compound("system_error", {Term::atom(e.what())})});
      continue;
    }

    for (auto& s : batch.solutions) solutions.push_back(std::move(s));
    for (auto& b : batch.bindings) bindings.push_back(std::move(b));
    if (batch.interrupt) {
      engine::SolveStep& step = *batch.interrupt;
      if (auto* out = std::get_if<engine::Output>(&step)) {
        token.emplace(std::move(out->token));
        suspend(event::Output{p->id, out->data});
      } else if (auto* prompt = std::get_if<engine::Prompt>(&step)) {
        token.emplace(std::move(prompt->token));
        suspend(event::Prompt{p->id, prompt->prompt});
      } else if (auto* err = std::get_if<engine::Error>(&step)) {
        solutions.clear();
        bindings.clear();
        finish(event::Error{p->id, err->detail});
      }
      continue;
    }
    if (solutions.empty()) {
      finish(event::Failure{p->id});
      continue;
    }
    event::Success success{p->id, std::move(solutions), batch.more, std::move(bindings)};
    solutions.clear();
    bindings.clear();
    if (batch.more) {
      token = std::move(batch.token);
      suspend(std::move(success));
    } else {
      finish(std::move(success));
    }
  }
}

std::size_t PengineServer::live_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return slots_;
}

std::optional<protocol::Format> PengineServer::format_of(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = pengines_.find(id);
  if (it == pengines_.end()) return std::nullopt;
  return it->second->format;
}

std::optional<LifecycleState> PengineServer::state_of(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = pengines_.find(id);
  if (it == pengines_.end()) return std::nullopt;
  return it->second->state;
}

std::vector<PengineTrace> PengineServer::traces() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<PengineTrace> out = finished_traces_;
  for (const auto& [id, p] : pengines_) out.push_back(PengineTrace{id, p->trace});
  return out;
}

}  // namespace pltp::server
