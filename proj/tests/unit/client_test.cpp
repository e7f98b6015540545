#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "pltp/client/rpc.hpp"
#include "pltp/client/session.hpp"
#include "pltp/engine/solver.hpp"
#include "pltp/reader.hpp"
#include "pltp/writer.hpp"
#include "support/events.hpp"
#include "support/program_gen.hpp"
#include "support/servers.hpp"
#include "support/term_gen.hpp"

using namespace pltp;
using namespace pltp::client;
using namespace pltp::protocol;
using namespace std::chrono_literals;
using testing::described;
using testing::Lines;

namespace {

const char* kQ = "q(X) :- p(X). p(a). p(b). p(c).";

server::ServerOptions traced() {
  server::ServerOptions o;
  o.record_traces = true;
  return o;
}

// Runs body once per transport: local, HTTP with Prolog bodies, HTTP with JSON.
void each_transport(testing::HttpFixture& f, const std::function<void(Session&)>& body) {
  {
    INFO("local");
    body(*f.local_session());
  }
  {
    INFO("http prolog");
    body(*f.http_session(Format::Prolog));
  }
  {
    INFO("http json");
    body(*f.http_session(Format::Json));
  }
}

std::vector<std::string> texts(const std::vector<Term>& terms) {
  std::vector<std::string> out;
  for (const Term& t : terms) out.push_back(write_term(t));
  return out;
}

// Equal up to the naming of unbound variables.
bool same_answers(const std::vector<Term>& a, const std::vector<Term>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!testing::is_variant(a[i], b[i])) return false;
  }
  return true;
}

CreateOptions source(const char* text) {
  CreateOptions o;
  o.src_text = text;
  return o;
}

void expect_clean_traces(const server::PengineServer& s) {
  for (const auto& t : s.traces()) {
    const TraceCheck c = check_trace(t.items);
    CHECK_MESSAGE(c.ok, t.id << " at " << c.position << ": " << c.reason);
  }
}

// Prints every solution, asking for more until the query is done.
std::vector<std::string> run_event_loop(Session& s, const std::optional<Term>& tmpl) {
  std::vector<std::string> printed;
  s.event_loop(
      [&](Session& session, const Event& e) {
        if (const auto* c = std::get_if<event::Create>(&e)) {
          VariableScope scope;
          AskOptions o;
          const Term q = parse_term("q(X)", scope);
          if (tmpl) o.tmpl = parse_term("X", scope);
          session.ask(c->id, q, o);
        } else if (const auto* ok = std::get_if<event::Success>(&e)) {
          for (const Term& t : ok->solutions) printed.push_back(write_term(t));
          if (ok->more) session.next(ok->id);
        }
      },
      s.create(source(kQ)));
  return printed;
}

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("event loop prints q(a), q(b), q(c)") {
    testing::HttpFixture f(traced());
    each_transport(f, [&](Session& s) {
      CHECK(run_event_loop(s, std::nullopt) == std::vector<std::string>{"q(a)", "q(b)", "q(c)"});
      CHECK(run_event_loop(s, Term::atom("x")) == std::vector<std::string>{"a", "b", "c"});
      CHECK(s.live().empty());
    });
    CHECK(f.pengines.live_count() == 0);
    expect_clean_traces(f.pengines);
  }

  TEST_CASE("event loop with no events returns at once") {
    testing::HttpFixture f;
    auto s = f.local_session();
    int calls = 0;
    s->event_loop([&](Session&, const Event&) { ++calls; });
    CHECK(calls == 0);
  }

  TEST_CASE("ask answers with the first solution") {
    testing::HttpFixture f;
    each_transport(f, [&](Session& s) {
      auto created = s.create(source(kQ));
      REQUIRE(created.size() == 1);
      const std::string id = event_id(created.front());
      CHECK(s.state(id) == LifecycleState::idle());
      VariableScope scope;
      AskOptions o;
      const Term q = parse_term("q(X)", scope);
      o.tmpl = parse_term("v(X)", scope);
      CHECK(described(s.ask(id, q, o)) == Lines{"success(ID,[v(a)],true)"});
      CHECK(described(s.next(id)) == Lines{"success(ID,[v(b)],true)"});
      CHECK(described(s.next(id)) == Lines{"success(ID,[v(c)],false)", "destroy(ID)"});
      CHECK(s.state(id) == LifecycleState::dead());
    });
  }

  TEST_CASE("requests to a destroyed pengine get existence errors") {
    testing::HttpFixture f;
    each_transport(f, [&](Session& s) {
      const std::string id = event_id(s.create({}).front());
      CHECK(described(s.destroy(id)) == Lines{"destroy(ID)"});
      CHECK(described(s.next(id)) == Lines{"error(ID,existence_error(pengine,ID))"});
      CHECK(described(s.next("unknown")) == Lines{"error(ID,existence_error(pengine,ID))"});
    });
  }

  TEST_CASE("locally inadmissible requests throw") {
    testing::HttpFixture f;
    auto s = f.local_session();
    const std::string id = event_id(s->create({}).front());
    CHECK_THROWS_AS(s->next(id), ProtocolViolation);
    CHECK_THROWS_AS(s->respond(id, Term::atom("x")), ProtocolViolation);
    CHECK(s->state(id) == LifecycleState::idle());
    s->destroy(id);
  }

  TEST_CASE("stopping on the first success ends with stop and destroy") {
    testing::HttpFixture f(traced());
    auto s = f.local_session();
    std::vector<std::string> seen;
    CreateOptions o = source(kQ);
    o.ask = AskAtCreate{parse_term("q(X)"), {}};
    s->event_loop(
        [&](Session& session, const Event& e) {
          seen.push_back(std::string(event_name(e)));
          if (const auto* ok = std::get_if<event::Success>(&e)) session.stop(ok->id);
        },
        s->create(o));
    CHECK(seen == std::vector<std::string>{"create", "success", "stop", "destroy"});
    CHECK(s->live().empty());
    expect_clean_traces(f.pengines);
    REQUIRE(f.pengines.traces().size() == 1);
    // The client sees the same conversation as the server recorded.
    const auto& mine = s->trace(f.pengines.traces().front().id);
    CHECK(check_trace(mine).ok);
    CHECK(mine.size() == f.pengines.traces().front().items.size());
  }

  TEST_CASE("a throwing handler destroys live pengines") {
    testing::HttpFixture f;
    auto s = f.local_session();
    CHECK_THROWS_AS(s->event_loop([](Session&, const Event&) { throw std::runtime_error("boom"); },
                                  s->create(source(kQ))),
                    std::runtime_error);
    CHECK(s->live().empty());
    CHECK(f.pengines.live_count() == 0);
  }

  TEST_CASE("output and prompt stop the automatic pulls") {
    testing::HttpFixture f;
    each_transport(f, [&](Session& s) {
      const std::string id =
          event_id(s.create(source("main :- pengine_output(hi), pengine_input(p, X), X == ok.")).front());
      CHECK(described(s.ask(id, parse_term("main"), {})) == Lines{"output(ID,hi)"});
      CHECK(s.state(id) == LifecycleState::holding_output());
      CHECK(described(s.pull_response(id)) == Lines{"prompt(ID,p)"});
      CHECK(described(s.respond(id, Term::atom("ok"))) == Lines{"success(ID,[main],false)", "destroy(ID)"});
    });
  }
}

TEST_SUITE("rpc") {
  TEST_CASE("solutions bind the query variables") {
    testing::HttpFixture f;
    each_transport(f, [&](Session& s) {
      RpcOptions o;
      o.src_text = kQ;
      CHECK(texts(rpc_all(s, parse_term("q(X)"), o)) == std::vector<std::string>{"q(a)", "q(b)", "q(c)"});
      CHECK(texts(rpc_all(s, parse_term("true"), {})) == std::vector<std::string>{"true"});
      CHECK(texts(rpc_all(s, parse_term("append(X, Y, [1])"), {})) ==
            std::vector<std::string>{"append([],[1],[1])", "append([1],[],[1])"});
    });
    CHECK(f.pengines.live_count() == 0);
  }

  TEST_CASE("conjunction with a remote goal yields X = c then X = d") {
    testing::HttpFixture f(traced());
    const std::string url = f.url();
    auto db = std::make_shared<const engine::Database>(
        with_pengine_rpc(engine::Database::standard()));
    const Term goal = parse_term("member(X, [a,b,c,d]), pengine_rpc('" + url +
                                 "', p(X), [src_list([p(b), p(c), p(d), p(e)])]), member(X, [c,d,e,f])");
    const Term x = term_variables(goal).front();
    const engine::Batch batch = engine::find_n(100, db, goal, x);
    CHECK(texts(batch.solutions) == std::vector<std::string>{"c", "d"});
    CHECK_FALSE(batch.interrupt.has_value());
    CHECK(f.pengines.live_count() == 0);
    // One remote pengine per outer member/2 answer.
    CHECK(f.pengines.traces().size() == 4);
    expect_clean_traces(f.pengines);
  }

  TEST_CASE("remote errors become Prolog errors of the caller") {
    testing::HttpFixture f;
    auto db = std::make_shared<const engine::Database>(with_pengine_rpc(engine::Database::standard()));
    auto step = engine::start_solve(db, parse_term("pengine_rpc('" + f.url() + "', nope, [])"));
    REQUIRE(std::holds_alternative<engine::Error>(step));
    CHECK(engine::describe(std::get<engine::Error>(step)) == "existence_error(procedure,nope/0)");
    step = engine::start_solve(db, parse_term("pengine_rpc('http://127.0.0.1:1', true, [])"));
    REQUIRE(std::holds_alternative<engine::Error>(step));
    CHECK(engine::describe(std::get<engine::Error>(step)) == "existence_error(url,'http://127.0.0.1:1')");
  }

  TEST_CASE("src_predicates carries local clauses") {
    testing::HttpFixture f;
    engine::Database local = engine::consult(engine::Database::standard(),
                                             parse_program("edge(a,b). edge(b,c). path(X,Y) :- edge(X,Y). "
                                                           "path(X,Y) :- edge(X,Z), path(Z,Y)."));
    auto db = std::make_shared<const engine::Database>(with_pengine_rpc(std::move(local)));
    const Term goal = parse_term("pengine_rpc('" + f.url() +
                                 "', path(a, Y), [src_predicates([edge/2, path/2]), chunk(2)])");
    const engine::Batch batch = engine::find_n(10, db, goal, goal.arg(1));
    CHECK(texts(batch.solutions) == std::vector<std::string>{"path(a,b)", "path(a,c)"});
  }

  TEST_CASE("failure yields nothing in one create to destroy cycle") {
    testing::HttpFixture f(traced());
    each_transport(f, [&](Session& s) { CHECK(rpc_all(s, parse_term("fail"), {}).empty()); });
    const auto traces = f.pengines.traces();
    REQUIRE(traces.size() == 3);
    for (const auto& t : traces) {
      // create, ask, create event, failure, destroy
      CHECK(t.items.size() == 5);
      CHECK(std::holds_alternative<event::Failure>(std::get<Event>(t.items[3])));
      CHECK(std::holds_alternative<event::Destroy>(std::get<Event>(t.items[4])));
    }
  }

  TEST_CASE("two-step create then ask gives the same solutions") {
    testing::HttpFixture f(traced());
    auto s = f.http_session();
    RpcOptions o;
    o.src_text = kQ;
    o.ask_at_create = false;
    CHECK(texts(rpc_all(*s, parse_term("q(X)"), o)) == std::vector<std::string>{"q(a)", "q(b)", "q(c)"});
    expect_clean_traces(f.pengines);
  }

  TEST_CASE("chunk size does not change the sequence") {
    testing::HttpFixture f;
    std::string facts;
    for (int i = 0; i < 1981; ++i) facts += "e(" + std::to_string(i) + ", n" + std::to_string(i % 17) + ").\n";
    auto s = f.local_session();
    std::vector<std::string> reference;
    for (std::size_t chunk : {1, 2, 7, 128}) {
      RpcOptions o;
      o.src_text = facts;
      o.chunk = chunk;
      const auto got = texts(rpc_all(*s, parse_term("e(I, N)"), o));
      CHECK(got.size() == 1981);
      if (reference.empty()) reference = got;
      CHECK(got == reference);
    }
    CHECK(f.pengines.live_count() == 0);
  }

  TEST_CASE("closing a cursor early destroys the pengine") {
    testing::HttpFixture f;
    each_transport(f, [&](Session& s) {
      auto cursor = rpc(s, parse_term("between(1, 1000, X)"), {});
      CHECK(write_term(*cursor->next()) == "between(1,1000,1)");
      CHECK(f.pengines.live_count() == 1);
      cursor.reset();
      CHECK(f.pengines.live_count() == 0);
      CHECK(s.live().empty());
    });
  }

  TEST_CASE("remote error is raised and the pengine is gone") {
    testing::HttpFixture f;
    each_transport(f, [&](Session& s) {
      auto cursor = rpc(s, parse_term("X is foo + 1"), {});
      try {
        cursor->next();
        FAIL("expected a remote error");
      } catch (const RemoteError& e) {
        CHECK(write_term(e.data()) == "type_error(evaluable,foo/0)");
      }
      CHECK(s.live().empty());
    });
    CHECK(f.pengines.live_count() == 0);
  }

  TEST_CASE("prompts and output go to the handlers") {
    testing::HttpFixture f;
    each_transport(f, [&](Session& s) {
      RpcOptions o;
      o.src_text = "main(L) :- repeat, pengine_input(more, X), pengine_output(got(X)), X == stop, !, L = done.";
      std::vector<std::string> asked = {"one", "two", "stop"};
      std::size_t next = 0;
      std::vector<std::string> printed;
      o.prompt_handler = [&](const std::string&, const Term& prompt) -> std::optional<Term> {
        CHECK(write_term(prompt) == "more");
        return Term::atom(asked.at(next++));
      };
      o.output_handler = [&](const std::string&, const Term& t) { printed.push_back(write_term(t)); };
      CHECK(texts(rpc_all(s, parse_term("main(L)"), o)) == std::vector<std::string>{"main(done)"});
      CHECK(printed == std::vector<std::string>{"got(one)", "got(two)", "got(stop)"});
    });
  }

  TEST_CASE("a prompt without a handler fails the call") {
    testing::HttpFixture f;
    auto s = f.local_session();
    CHECK_THROWS_AS(rpc_all(*s, parse_term("pengine_input(p, X)"), {}), PromptUnsupported);
    CHECK(f.pengines.live_count() == 0);
  }

  TEST_CASE("answers with unbound variables keep them apart from the query") {
    testing::HttpFixture f;
    each_transport(f, [&](Session& s) {
      const auto got = rpc_all(s, parse_term("Y = f(Z, W), W = g(_)"), {});
      REQUIRE(got.size() == 1);
      const Term& eq = got.front().arg(0).arg(1);
      CHECK(eq.is_compound("f", 2));
      CHECK(eq.arg(0).is_var());
      CHECK(eq.arg(1).is_compound("g", 1));
    });
  }

  TEST_CASE("rpc matches the local solver on generated programs") {
    testing::HttpFixture f;
    auto s = f.local_session();
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      testing::ProgramGenerator gen(seed);
      const auto program = gen.program();
      auto db = std::make_shared<const engine::Database>(
          engine::consult(engine::Database::standard(), parse_program(program.text)));
      for (const std::string& q : program.queries) {
        const Term query = parse_term(q);
        const engine::Batch expected = engine::find_n(100000, db, query, query);
        RpcOptions o;
        o.src_text = program.text;
        o.chunk = static_cast<std::size_t>(gen.pick(1, 5));
        std::vector<Term> got;
        if (expected.interrupt) {
          CHECK_THROWS_AS(rpc_all(*s, query, o), RemoteError);
          continue;
        }
        got = rpc_all(*s, query, o);
        CHECK_MESSAGE(same_answers(got, expected.solutions), program.text << "?- " << q);
      }
    }
  }
}

TEST_SUITE("src predicates") {
  TEST_CASE("clauses are copied in order with renamed variables") {
    engine::Database db = engine::consult(
        engine::Database::standard(),
        parse_program("event_point(e1, 1, 2). event_point(e2, 5, 5).\n"
                      "event_in_area(E, X0-Y0, X1-Y1) :- event_point(E, X, Y), X >= X0, X =< X1, Y >= Y0, Y =< Y1."));
    const auto clauses = collect_src_predicates(db, {{"event_point", 3}, {"event_in_area", 3}});
    REQUIRE(clauses.size() == 3);
    CHECK(write_term(clauses[0].head) == "event_point(e1,1,2)");
    CHECK(write_term(clauses[2].head) == "event_in_area(_V0,_V1-_V2,_V3-_V4)");
    CHECK(collect_src_predicates(db, {}).empty());
    CHECK_THROWS_AS(collect_src_predicates(db, {{"missing", 1}}), engine::PrologError);
  }
}
