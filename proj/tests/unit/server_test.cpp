#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "pltp/reader.hpp"
#include "pltp/server/config.hpp"
#include "pltp/server/pengine_server.hpp"
#include "pltp/writer.hpp"
#include "support/events.hpp"
#include "support/walks.hpp"

using namespace pltp;
using namespace pltp::protocol;
using namespace pltp::server;
using namespace std::chrono_literals;

namespace {

const char* kQ = "q(X) :- p(X). p(a). p(b). p(c).";
const char* kConsole = "main :- repeat, pengine_input('myprompt>', X), pengine_output(X), X == stop.";

using testing::described;
using testing::Lines;

struct Fixture {
  explicit Fixture(ServerLimits limits = {}) : server(make_options(limits)) {}

  static ServerOptions make_options(ServerLimits limits) {
    ServerOptions o;
    o.limits = limits;
    o.record_traces = true;
    return o;
  }

  std::string create(CreateOptions options, const std::string& owner = "t") {
    auto events = server.handle(request::Create{std::move(options)}, owner, 2s);
    REQUIRE(!events.empty());
    REQUIRE(std::holds_alternative<event::Create>(events.front()));
    return event_id(events.front());
  }

  std::vector<Event> send(Request req, std::chrono::milliseconds wait = 2s) {
    return server.handle(req, "t", wait);
  }

  Lines ask(const std::string& id, const std::string& query, const char* tmpl = nullptr,
            std::size_t chunk = 1) {
    VariableScope scope;
    AskOptions o;
    Term q = parse_term(query, scope);
    if (tmpl != nullptr) o.tmpl = parse_term(tmpl, scope);
    o.chunk = chunk;
    return described(send(request::Ask{id, q, o}));
  }

  void expect_clean_traces() {
    for (const auto& t : server.traces()) {
      const TraceCheck c = check_trace(t.items);
      CHECK_MESSAGE(c.ok, t.id << " at " << c.position << ": " << c.reason);
    }
  }

  PengineServer server;
};

CreateOptions with_source(const char* text, bool destroy = true) {
  CreateOptions o;
  o.src_text = text;
  o.destroy_on_completion = destroy;
  return o;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults and settings") {
    ServerConfig c;
    CHECK(c.port == 9083);
    CHECK(c.limits.max_pengines == 100);
    apply_setting(c, "max_pengines", "3");
    apply_setting(c, "timeout_secs", "0.2");
    apply_setting(c, "allow_src_url", "true");
    CHECK(c.limits.max_pengines == 3);
    CHECK(c.limits.timeout == 200ms);
    CHECK(c.limits.allow_src_url);
    CHECK_THROWS_AS(apply_setting(c, "max_slaves", "0"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "port", "70000"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "colour", "red"), ConfigError);
  }

  TEST_CASE("environment overrides") {
    ServerConfig c;
    apply_environment(c, [](const char* name) -> const char* {
      if (std::string(name) == "PLTP_PORT") return "8081";
      if (std::string(name) == "PLTP_MAX_SLAVES") return "4";
      return nullptr;
    });
    CHECK(c.port == 8081);
    CHECK(c.limits.max_slaves == 4);
    CHECK_THROWS_AS(apply_environment(c, [](const char*) { return "x"; }), ConfigError);
  }
}

TEST_SUITE("create") {
  TEST_CASE("create with no options leaves the pengine idle") {
    Fixture f;
    auto events = f.server.handle(request::Create{}, "t", 1s);
    REQUIRE(events.size() == 1);
    CHECK(described(events) == Lines{"create(ID,json([slave_limit=10,timeout=300]))"});
    const std::string id = event_id(events.front());
    CHECK(id.size() == 36);
    CHECK(id[14] == '4');
    CHECK(f.server.state_of(id) == LifecycleState::idle());
    CHECK(f.server.live_count() == 1);
  }

  TEST_CASE("pool limit") {
    ServerLimits limits;
    limits.max_pengines = 1;
    Fixture f(limits);
    f.create({});
    auto events = f.server.handle(request::Create{}, "t", 1s);
    CHECK(described(events) == Lines{"error('',resource_error(max_pengines))"});
  }

  TEST_CASE("slave limit per owner") {
    ServerLimits limits;
    limits.max_slaves = 2;
    Fixture f(limits);
    f.create({}, "alice");
    f.create({}, "alice");
    CHECK(described(f.server.handle(request::Create{}, "alice", 1s)) ==
          Lines{"error('',resource_error(max_slaves))"});
    f.create({}, "bob");
  }

  TEST_CASE("names are unique per owner") {
    Fixture f;
    CreateOptions o;
    o.name = "master";
    f.create(o, "alice");
    f.create(o, "bob");
    CHECK(described(f.server.handle(request::Create{o}, "alice", 1s)) ==
          Lines{"error('',permission_error(create,pengine,master))"});
  }

  TEST_CASE("source errors") {
    Fixture f;
    auto events = f.server.handle(request::Create{with_source("p(a")}, "t", 1s);
    REQUIRE(events.size() == 1);
    const auto* e = std::get_if<event::Error>(&events.front());
    REQUIRE(e != nullptr);
    CHECK(e->data.is_compound("syntax_error", 1));
    CHECK(described(f.server.handle(request::Create{with_source("is(a, b).")}, "t", 1s)) ==
          Lines{"error(ID,permission_error(modify,static_procedure,(is)/2))"});
    CHECK(f.server.live_count() == 0);
  }

  TEST_CASE("src_url is refused unless enabled") {
    CreateOptions o;
    o.src_url = "http://example.invalid/p.pl";
    {
      Fixture f;
      CHECK(described(f.server.handle(request::Create{o}, "t", 1s)) ==
            Lines{"error(ID,permission_error(load,src_url,'http://example.invalid/p.pl'))"});
    }
    ServerOptions so;
    so.limits.allow_src_url = true;
    so.fetch_url = [](const std::string& url) -> std::string {
      if (url.find("missing") != std::string::npos) throw std::runtime_error("404");
      return "p(from_url).";
    };
    PengineServer server(so);
    auto created = server.handle(request::Create{o}, "t", 1s);
    REQUIRE(std::holds_alternative<event::Create>(created.front()));
    const std::string id = event_id(created.front());
    auto answer = server.handle(request::Ask{id, parse_term("p(X)"), {}}, "t", 2s);
    CHECK(described(answer) == Lines{"success(ID,[p(from_url)],false)", "destroy(ID)"});
    o.src_url = "http://example.invalid/missing.pl";
    CHECK(described(server.handle(request::Create{o}, "t", 1s)) ==
          Lines{"error(ID,existence_error(url,'http://example.invalid/missing.pl'))"});
  }

  TEST_CASE("ask at create piggybacks the first answer") {
    Fixture f;
    CreateOptions o = with_source(kQ);
    o.ask = AskAtCreate{parse_term("q(X)"), {}};
    auto events = f.server.handle(request::Create{o}, "t", 2s);
    CHECK(described(events) == Lines{"create(ID,json([slave_limit=10,timeout=300]))",
                                     "success(ID,[q(a)],true)"});
    o.ask = AskAtCreate{parse_term("fail"), {}};
    CHECK(described(f.server.handle(request::Create{o}, "t", 2s)) ==
          Lines{"create(ID,json([slave_limit=10,timeout=300]))", "failure(ID)", "destroy(ID)"});
    f.expect_clean_traces();
  }
}

TEST_SUITE("ask") {
  TEST_CASE("three solutions one at a time") {
    Fixture f;
    const std::string id = f.create(with_source(kQ));
    CHECK(f.ask(id, "q(X)", "X") == Lines{"success(ID,[a],true)"});
    CHECK(described(f.send(request::Next{id})) == Lines{"success(ID,[b],true)"});
    CHECK(described(f.send(request::Next{id})) == Lines{"success(ID,[c],false)", "destroy(ID)"});
    CHECK(f.server.live_count() == 0);
    CHECK_FALSE(f.server.state_of(id).has_value());
    f.expect_clean_traces();
  }

  TEST_CASE("chunks of two") {
    Fixture f;
    const std::string id = f.create(with_source("p(a). p(b). p(c)."));
    CHECK(f.ask(id, "p(X)", nullptr, 2) == Lines{"success(ID,[p(a),p(b)],true)"});
    CHECK(described(f.send(request::Next{id})) == Lines{"success(ID,[p(c)],false)", "destroy(ID)"});
  }

  TEST_CASE("success events carry bindings") {
    Fixture f;
    const std::string id = f.create({});
    auto events = f.send(request::Ask{id, parse_term("append(Xs,Ys,[a])"), {}});
    CHECK(described(events) == Lines{"success(ID,[append([],[a],[a])],true)"});
    const std::string id2 = f.create(with_source("app([],L,L). app([H|T],L,[H|R]) :- app(T,L,R)."));
    events = f.send(request::Ask{id2, parse_term("app(Xs,Ys,[a,b,c])"), {}});
    events = f.send(request::Next{id2});
    REQUIRE(events.size() == 1);
    const auto& s = std::get<event::Success>(events.front());
    REQUIRE(s.bindings.size() == 1);
    CHECK(write_term(*s.bindings[0].find("Xs")) == "[a]");
    CHECK(write_term(*s.bindings[0].find("Ys")) == "[b,c]");
  }

  TEST_CASE("without auto-destroy the pengine stays for further queries") {
    Fixture f;
    const std::string id = f.create(with_source(kQ, false));
    CHECK(f.ask(id, "p(c)") == Lines{"success(ID,[p(c)],false)"});
    CHECK(f.server.state_of(id) == LifecycleState::holding_solutions(false));
    CHECK(f.ask(id, "p(d)") == Lines{"failure(ID)"});
    CHECK(f.server.state_of(id) == LifecycleState::idle());
    CHECK(f.ask(id, "q(X)", "X") == Lines{"success(ID,[a],true)"});
    // A new ask drops the remaining solutions of the previous one.
    CHECK(f.ask(id, "q(X)", "X", 3) == Lines{"success(ID,[a,b,c],false)"});
    CHECK(described(f.send(request::Destroy{id})) == Lines{"destroy(ID)"});
    f.expect_clean_traces();
  }

  TEST_CASE("stop") {
    Fixture f;
    const std::string id = f.create(with_source(kQ, false));
    f.ask(id, "q(X)");
    CHECK(described(f.send(request::Stop{id})) == Lines{"stop(ID)"});
    CHECK(f.server.state_of(id) == LifecycleState::idle());
    const std::string id2 = f.create(with_source(kQ));
    f.ask(id2, "q(X)");
    CHECK(described(f.send(request::Stop{id2})) == Lines{"stop(ID)", "destroy(ID)"});
  }

  TEST_CASE("errors end the query") {
    Fixture f;
    const std::string id = f.create(with_source(kQ, false));
    CHECK(f.ask(id, "X is foo + 1") ==
          Lines{"error(ID,type_error(evaluable,foo/0))"});
    CHECK(f.ask(id, "nope(1)") == Lines{"error(ID,existence_error(procedure,nope/1))"});
    CHECK(f.server.state_of(id) == LifecycleState::idle());
  }

  TEST_CASE("sandbox verdicts are returned before running") {
    Fixture f;
    const std::string id = f.create(with_source(kQ, false));
    CHECK(f.ask(id, "p(X), write(X)") ==
          Lines{"error(ID,permission_error(call,sandboxed,write/1))"});
    CHECK(f.ask(id, "call(G)") == Lines{"error(ID,instantiation_error)"});
  }
}

TEST_SUITE("interaction") {
  TEST_CASE("prompt, respond and output") {
    Fixture f;
    const std::string id = f.create(with_source(kConsole));
    CHECK(f.ask(id, "main") == Lines{"prompt(ID,'myprompt>')"});
    CHECK(described(f.send(request::Respond{id, Term::atom("hello")})) == Lines{"output(ID,hello)"});
    CHECK(f.server.state_of(id) == LifecycleState::holding_output());
    CHECK(described(f.send(request::PullResponse{id})) == Lines{"prompt(ID,'myprompt>')"});
    CHECK(described(f.send(request::Respond{id, Term::atom("stop")})) == Lines{"output(ID,stop)"});
    CHECK(described(f.send(request::PullResponse{id})) == Lines{"success(ID,[main],true)"});
    CHECK(described(f.send(request::Stop{id})) == Lines{"stop(ID)", "destroy(ID)"});
    f.expect_clean_traces();
  }

  TEST_CASE("output inside a chunk keeps the partial batch") {
    Fixture f;
    const std::string id =
        f.create(with_source("p(1). p(2). p(3). r(X) :- p(X), pengine_output(X)."));
    CHECK(f.ask(id, "r(X)", "X", 2) == Lines{"output(ID,1)"});
    CHECK(described(f.send(request::PullResponse{id})) == Lines{"output(ID,2)"});
    CHECK(described(f.send(request::PullResponse{id})) == Lines{"success(ID,[1,2],true)"});
    CHECK(described(f.send(request::Next{id})) == Lines{"output(ID,3)"});
    CHECK(described(f.send(request::PullResponse{id})) == Lines{"success(ID,[3],false)", "destroy(ID)"});
  }

  TEST_CASE("debug messages take a response slot") {
    Fixture f;
    const std::string id = f.create(with_source(kQ));
    CHECK(f.ask(id, "pengine_debug(hi), p(X)", "X") == Lines{"debug(ID,hi)"});
    CHECK(f.server.state_of(id) == LifecycleState::computing());
    CHECK(described(f.send(request::PullResponse{id})) == Lines{"success(ID,[a],true)"});
    f.expect_clean_traces();
  }
}

TEST_SUITE("request handling") {
  TEST_CASE("unknown and destroyed ids") {
    Fixture f;
    CHECK(described(f.send(request::Next{"nope"})) ==
          Lines{"error(ID,existence_error(pengine,ID))"});
    const std::string id = f.create({});
    CHECK(described(f.send(request::Destroy{id})) == Lines{"destroy(ID)"});
    CHECK(f.server.live_count() == 0);
    auto events = f.send(request::Next{id});
    REQUIRE(events.size() == 1);
    CHECK(std::get<event::Error>(events.front()).data.is_compound("existence_error", 2));
  }

  TEST_CASE("inadmissible requests get a protocol error and change nothing") {
    Fixture f;
    const std::string id = f.create(with_source(kQ));
    CHECK(described(f.send(request::Next{id})) == Lines{"error(ID,protocol_error(next,idle))"});
    CHECK(f.server.state_of(id) == LifecycleState::idle());
    CHECK(f.ask(id, "q(X)") == Lines{"success(ID,[q(a)],true)"});
    f.expect_clean_traces();
  }

  TEST_CASE("a second request while one is in flight") {
    Fixture f;
    const std::string id = f.create(with_source("loop :- repeat, fail.", false));
    CHECK(f.server.handle(request::Ask{id, parse_term("loop"), {}}, "t", 0ms).empty());
    CHECK(described(f.send(request::Ask{id, parse_term("true"), {}})) ==
          Lines{"error(ID,protocol_error(ask,computing))"});
    // Re-polling is fine; the query is still running.
    CHECK(f.send(request::PullResponse{id}, 20ms).empty());
    CHECK(described(f.send(request::Abort{id})) == Lines{"error(ID,abort)"});
    CHECK(f.server.state_of(id) == LifecycleState::idle());
    CHECK(f.ask(id, "true") == Lines{"success(ID,[true],false)"});
    f.expect_clean_traces();
  }

  TEST_CASE("concurrent pull on the same id is refused") {
    Fixture f;
    const std::string id = f.create(with_source("loop :- repeat, fail."));
    CHECK(f.server.handle(request::Ask{id, parse_term("loop"), {}}, "t", 0ms).empty());
    std::thread waiter([&] { f.server.handle(request::PullResponse{id}, "t", 300ms); });
    std::this_thread::sleep_for(50ms);
    CHECK(described(f.send(request::PullResponse{id})) ==
          Lines{"error(ID,protocol_error(pull_response,computing))"});
    waiter.join();
    CHECK(described(f.send(request::Destroy{id})) == Lines{"destroy(ID)"});
    CHECK(f.server.live_count() == 0);
  }

  TEST_CASE("abort with auto-destroy") {
    Fixture f;
    const std::string id = f.create(with_source(kConsole));
    CHECK(f.ask(id, "main") == Lines{"prompt(ID,'myprompt>')"});
    CHECK(described(f.send(request::Abort{id})) == Lines{"error(ID,abort)", "destroy(ID)"});
    CHECK(f.server.live_count() == 0);
  }

  TEST_CASE("destroy interrupts a running query") {
    Fixture f;
    const std::string id = f.create(with_source("loop :- repeat, fail.", false));
    CHECK(f.server.handle(request::Ask{id, parse_term("loop"), {}}, "t", 0ms).empty());
    CHECK(described(f.send(request::Destroy{id})) == Lines{"destroy(ID)"});
    CHECK(f.server.live_count() == 0);
    f.expect_clean_traces();
  }
}

TEST_SUITE("timeouts") {
  TEST_CASE("a looping query is stopped within twice the timeout") {
    ServerLimits limits;
    limits.timeout = 200ms;
    Fixture f(limits);
    const auto start = Clock::now();
    const std::string id = f.create(with_source("loop :- repeat, fail."));
    auto events = f.send(request::Ask{id, parse_term("loop"), {}}, 2s);
    const auto elapsed = Clock::now() - start;
    CHECK(described(events) == Lines{"error(ID,time_limit_exceeded)", "destroy(ID)"});
    CHECK(elapsed < 400ms);
    CHECK(f.server.live_count() == 0);
    f.expect_clean_traces();
  }

  TEST_CASE("enforce_timeouts") {
    Fixture f;
    const std::string a = f.create(with_source(kQ, false));
    const std::string b = f.create({});
    CHECK(f.server.enforce_timeouts(Clock::now()).empty());
    CHECK(f.server.live_count() == 2);
    auto posted = f.server.enforce_timeouts(Clock::now() + 1h);
    CHECK(posted.size() == 4);
    CHECK(f.server.live_count() == 0);
    // The idle pengine reports the expiry on its next request.
    CHECK(f.ask(a, "q(X)") == Lines{"error(ID,time_limit_exceeded)", "destroy(ID)"});
    CHECK(described(f.send(request::Destroy{b})) == Lines{"destroy(ID)"});
    f.expect_clean_traces();
  }
}

TEST_SUITE("random walks") {
  TEST_CASE("admissible walks keep every trace well formed") {
    Fixture f;
    testing::WalkStats stats;
    testing::Walker walker(f.server, 20240611);
    for (int i = 0; i < 1500; ++i) walker.walk(stats);
    testing::audit_traces(f.server.traces(), stats);
    INFO(stats.first_problem);
    CHECK(stats.walks == 1500);
    CHECK(stats.bad_transitions == 0);
    CHECK(stats.trace_violations == 0);
    CHECK(stats.missing_destroys == 0);
    CHECK(f.server.live_count() == 0);
  }
}
