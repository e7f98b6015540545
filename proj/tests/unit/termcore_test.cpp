#include <set>

#include "doctest.h"
#include "pltp/json_codec.hpp"
#include "pltp/reader.hpp"
#include "pltp/writer.hpp"
#include "support/term_gen.hpp"

using namespace pltp;
using pltp::testing::is_variant;
using pltp::testing::TermGenerator;

namespace {

Term atom(const char* name) { return Term::atom(name); }

bool contains_json_functor(const Term& t) {
  if (t.is_compound("json", 1)) return true;
  for (const auto& a : t.args()) {
    if (contains_json_functor(a)) return true;
  }
  return false;
}

bool has_functor_key(const json& v) {
  if (v.is_object()) return v.contains("functor");
  return false;
}

}  // namespace

TEST_SUITE("parse_term") {
  TEST_CASE("smallest compound") {
    Term t = parse_term("q(X)");
    REQUIRE(t.is_compound("q", 1));
    CHECK(t.arg(0).is_var());
    CHECK(t.arg(0).name() == "X");
  }

  TEST_CASE("append query carries a dotted list") {
    Term t = parse_term("append(Xs,Ys,[a,b,c])");
    REQUIRE(t.is_compound("append", 3));
    CHECK(t.arg(2) == Term::list({atom("a"), atom("b"), atom("c")}));
    CHECK(t.arg(2).is_compound(".", 2));
    CHECK(t.arg(0).ordinal() != t.arg(1).ordinal());
  }

  TEST_CASE("zero-arity symbol is an atom") {
    Term t = parse_term("foo");
    CHECK(t.is_atom("foo"));
  }

  TEST_CASE("variables share ordinals by name and _ is always fresh") {
    Term t = parse_term("f(X, Y, X, _, _)");
    CHECK(t.arg(0).ordinal() == t.arg(2).ordinal());
    CHECK(t.arg(0).ordinal() != t.arg(1).ordinal());
    CHECK(t.arg(3).ordinal() != t.arg(4).ordinal());
  }

  TEST_CASE("operator priorities") {
    CHECK(parse_term("1 + 2 * 3") ==
          Term::compound("+", {Term::integer(1),
                               Term::compound("*", {Term::integer(2), Term::integer(3)})}));
    CHECK(parse_term("1 - 2 - 3") ==
          Term::compound("-", {Term::compound("-", {Term::integer(1), Term::integer(2)}),
                               Term::integer(3)}));
    Term clause = parse_term("h :- a, b ; c -> d");
    REQUIRE(clause.is_compound(":-", 2));
    const Term& body = clause.arg(1);
    REQUIRE(body.is_compound(";", 2));
    CHECK(body.arg(0).is_compound(",", 2));
    CHECK(body.arg(1).is_compound("->", 2));
    CHECK(parse_term("\\+ a = b") ==
          Term::compound("\\+", {Term::compound("=", {atom("a"), atom("b")})}));
    CHECK(parse_term("X == stop").is_compound("==", 2));
    CHECK(parse_term("X is 7 mod 3").arg(1).is_compound("mod", 2));
  }

  TEST_CASE("negative numbers and prefix minus") {
    CHECK(parse_term("-1") == Term::integer(-1));
    CHECK(parse_term("- 1") == Term::compound("-", {Term::integer(1)}));
    CHECK(parse_term("a - -1") == Term::compound("-", {atom("a"), Term::integer(-1)}));
    CHECK(parse_term("-2.5") == Term::floating(-2.5));
    CHECK(parse_term("-9223372036854775808") ==
          Term::integer(std::numeric_limits<std::int64_t>::min()));
  }

  TEST_CASE("quoted atoms, escapes, strings and comments") {
    CHECK(parse_term("'hello world'") == atom("hello world"));
    CHECK(parse_term("'it''s'") == atom("it's"));
    CHECK(parse_term("'a\\nb'") == atom("a\nb"));
    CHECK(parse_term("\"ab\"") == Term::list({atom("a"), atom("b")}));
    CHECK(parse_term("f(a, % trailing comment\n b /* block */)") ==
          Term::compound("f", {atom("a"), atom("b")}));
    CHECK(parse_term("[a|T]").arg(1).is_var());
    CHECK(parse_term("'-'(1)") == Term::compound("-", {Term::integer(1)}));
  }

  TEST_CASE("floats") {
    CHECK(parse_term("1.5e3") == Term::floating(1500.0));
    CHECK(parse_term("0.1") == Term::floating(0.1));
    CHECK(std::isinf(parse_term("1.0Inf").float_value()));
  }

  TEST_CASE("syntax errors report line and column") {
    try {
      parse_term("foo(a,\n  b c)");
      FAIL("expected a syntax error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 5);
    }
    CHECK_THROWS_AS(parse_term("f(a"), ParseError);
    CHECK_THROWS_AS(parse_term("a b"), ParseError);
    CHECK_THROWS_AS(parse_term("'unterminated"), ParseError);
  }

  TEST_CASE("unsupported constructs are named") {
    try {
      parse_term("{a, b}");
      FAIL("expected UnsupportedConstruct");
    } catch (const UnsupportedConstruct& e) {
      CHECK(e.construct() == "{}/1");
    }
    CHECK_THROWS_AS(parse_term("0'a"), UnsupportedConstruct);
  }

  TEST_CASE("integers outside 64 bits are rejected") {
    CHECK_THROWS_AS(parse_term("9223372036854775808"), ParseError);
    CHECK_THROWS_AS(parse_term("-9223372036854775809"), ParseError);
    CHECK(parse_term("9223372036854775807").int_value() ==
          std::numeric_limits<std::int64_t>::max());
  }

  TEST_CASE("shared scope links query and template variables") {
    VariableScope scope;
    Term query = parse_term("q(X, Y)", scope);
    Term tmpl = parse_term("X", scope);
    CHECK(tmpl.ordinal() == query.arg(0).ordinal());
  }
}

TEST_SUITE("parse_program") {
  TEST_CASE("rule plus three facts") {
    auto clauses = parse_program("q(X) :- p(X). p(a). p(b). p(c).");
    REQUIRE(clauses.size() == 4);
    CHECK(clauses[0].head.is_compound("q", 1));
    CHECK(clauses[0].body.is_compound("p", 1));
    CHECK(clauses[0].head.arg(0).ordinal() == clauses[0].body.arg(0).ordinal());
    for (int i = 1; i < 4; ++i) CHECK(clauses[static_cast<std::size_t>(i)].body.is_atom("true"));
    CHECK(clauses[3].head == Term::compound("p", {atom("c")}));
  }

  TEST_CASE("empty text") { CHECK(parse_program("").empty()); }

  TEST_CASE("four facts") {
    auto clauses = parse_program("p(b). p(c). p(d). p(e).");
    REQUIRE(clauses.size() == 4);
    CHECK(clauses[0].head == Term::compound("p", {atom("b")}));
    CHECK(clauses[3].head == Term::compound("p", {atom("e")}));
  }

  TEST_CASE("multi-line program with comments") {
    auto clauses = parse_program(
        "% a loop\nmain :-\n    repeat,\n    pengine_input('myprompt>', X),\n"
        "    pengine_output(X),\n    X == stop.\n");
    REQUIRE(clauses.size() == 1);
    CHECK(clauses[0].head.is_atom("main"));
  }

  TEST_CASE("syntax error carries the clause offset") {
    try {
      parse_program("p(a).\np(b) :- .\n");
      FAIL("expected a syntax error");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 6);
      CHECK(e.line() == 2);
    }
  }

  TEST_CASE("non-callable head") {
    CHECK_THROWS_AS(parse_program("3 :- true."), ParseError);
    CHECK_THROWS_AS(parse_program("X."), ParseError);
  }

  TEST_CASE("directives are unsupported") {
    CHECK_THROWS_AS(parse_program(":- use_module(library(lists))."), UnsupportedConstruct);
  }

  TEST_CASE("missing end token") { CHECK_THROWS_AS(parse_program("p(a)"), ParseError); }
}

TEST_SUITE("write_term") {
  TEST_CASE("compound") { CHECK(write_term(Term::compound("q", {atom("a")})) == "q(a)"); }
  TEST_CASE("list notation") {
    CHECK(write_term(Term::list({atom("a"), atom("b"), atom("c")})) == "[a,b,c]");
    CHECK(write_term(Term::list({atom("a")}, Term::var("T", 0))) == "[a|T]");
    CHECK(write_term(Term::nil()) == "[]");
  }
  TEST_CASE("quoting") {
    CHECK(write_term(atom("hello world")) == "'hello world'");
    CHECK(write_term(atom("Abc")) == "'Abc'");
    CHECK(write_term(atom("it's")) == "'it\\'s'");
    CHECK(write_term(atom("[]")) == "[]");
    CHECK(write_term(atom(",")) == "','");
    CHECK(write_term(atom("=..")) == "=..");
  }
  TEST_CASE("operators") {
    CHECK(write_term(parse_term("a :- b, c")) == "a:-b,c");
    CHECK(write_term(parse_term("(a :- b)")) == "a:-b");
    CHECK(write_term(parse_term("f((a, b))")) == "f((a,b))");
    CHECK(write_term(parse_term("(1 + 2) * 3")) == "(1+2)*3");
    CHECK(write_term(parse_term("1 - (2 - 3)")) == "1-(2-3)");
    CHECK(write_term(parse_term("X is 1 mod 2")) == "X is 1 mod 2");
    CHECK(write_term(parse_term("name / 1")) == "name/1");
    CHECK(write_term(parse_term("- 1")) == "- 1");
    CHECK(write_term(Term::integer(-1)) == "-1");
    CHECK(write_term(parse_term("\\+ (a, b)")) == "\\+ (a,b)");
  }
  TEST_CASE("tight operators keep neighbouring symbol chars apart") {
    CHECK(write_term(parse_term("1 - -1")) == "1- -1");
    CHECK(write_term(parse_term("@ = x")) == "@ =x");
    CHECK(write_term(parse_term("a = (\\+ b)")) == "a=(\\+ b)");
    CHECK(write_term(parse_term("a = -(1)")) == "a= - 1");
    CHECK(write_term(parse_term("a / (*)")) == "a/(*)");
    CHECK(write_term(parse_term("a - (- 1)")) == "a- - 1");
  }
  TEST_CASE("floats always carry a fraction") {
    CHECK(write_term(Term::floating(1.0)) == "1.0");
    CHECK(write_term(Term::floating(1e20)) == "1.0e+20");
    CHECK(write_term(Term::floating(0.5)) == "0.5");
  }
  TEST_CASE("anonymous variables print by ordinal") {
    CHECK(write_term(Term::var("_", 7)) == "_G7");
  }
}

TEST_SUITE("json mapping") {
  TEST_CASE("rule i: atom to string") { CHECK(term_to_json(atom("a")) == json("a")); }
  TEST_CASE("rule ii: numbers") {
    CHECK(term_to_json(Term::integer(42)) == json(42));
    CHECK(term_to_json(Term::floating(2.5)) == json(2.5));
  }
  TEST_CASE("rule iii: proper list to array") {
    CHECK(term_to_json(parse_term("[a,[b],1]")) == json::parse(R"(["a",["b"],1])"));
    CHECK(term_to_json(Term::nil()) == json::array());
  }
  TEST_CASE("rule iv: @ constants") {
    CHECK(term_to_json(parse_term("@(true)")) == json(true));
    CHECK(term_to_json(parse_term("@(false)")) == json(false));
    CHECK(term_to_json(parse_term("@(null)")) == json(nullptr));
    CHECK(term_to_json(parse_term("@(maybe)")) ==
          json::parse(R"({"functor":"@","args":["maybe"]})"));
  }
  TEST_CASE("rule v: json/1 pair list to object") {
    CHECK(term_to_json(parse_term("json([name=bob, age=7])")) ==
          json::parse(R"({"name":"bob","age":7})"));
    CHECK(term_to_json(parse_term("json([])")) == json::object());
  }
  TEST_CASE("rule vi: other compounds") {
    CHECK(term_to_json(parse_term("foo(1, b)")) ==
          json::parse(R"({"functor":"foo","args":[1,"b"]})"));
    CHECK(term_to_json(parse_term("json(x)")) ==
          json::parse(R"({"functor":"json","args":["x"]})"));
  }
  TEST_CASE("improper lists use rule vi on the cell") {
    CHECK(term_to_json(parse_term("'.'(a, b)")) ==
          json::parse(R"({"functor":".","args":["a","b"]})"));
    json partial = term_to_json(parse_term("[a|T]"));
    CHECK(partial["functor"] == ".");
    CHECK(partial["args"][1] == json::parse(R"({"functor":"$VAR","args":["T"]})"));
  }
  TEST_CASE("variables serialise as $VAR objects") {
    CHECK(term_to_json(Term::var("X", 0)) == json::parse(R"({"functor":"$VAR","args":["X"]})"));
  }
  TEST_CASE("json_to_term examples") {
    CHECK(json_to_term(json("a")) == atom("a"));
    CHECK(json_to_term(json::parse(R"({"functor":"foo","args":[1,"b"]})")) ==
          Term::compound("foo", {Term::integer(1), atom("b")}));
    CHECK(json_to_term(json::parse(R"(["a"])")) == Term::list({atom("a")}));
    CHECK(json_to_term(json(true)) == parse_term("@(true)"));
    CHECK(json_to_term(json::parse(R"({"k":"v"})")) == parse_term("json([k=v])"));
    CHECK(json_to_term(json(3.0)).is_float());
  }
  TEST_CASE("$VAR objects decode to shared fresh variables") {
    Term t = json_to_term(json::parse(
        R"({"functor":"f","args":[{"functor":"$VAR","args":["X"]},{"functor":"$VAR","args":["X"]}]})"));
    REQUIRE(t.arg(0).is_var());
    CHECK(t.arg(0) == t.arg(1));
  }
  TEST_CASE("malformed functor objects are structure errors") {
    CHECK_THROWS_AS(json_to_term(json::parse(R"({"functor":"f"})")), JsonStructureError);
    CHECK_THROWS_AS(json_to_term(json::parse(R"({"functor":"f","args":[]})")), JsonStructureError);
    CHECK_THROWS_AS(json_to_term(json::parse(R"({"functor":"f","args":"x"})")), JsonStructureError);
    CHECK_THROWS_AS(json_to_term(json::parse(R"({"functor":3,"args":[1]})")), JsonStructureError);
  }
  TEST_CASE("round trip oracle on rule vi objects") {
    json obj = json::parse(R"({"functor":"point","args":[1.5,{"functor":"g","args":["x",[]]}]})");
    CHECK(term_to_json(json_to_term(obj)) == obj);
  }
}

TEST_SUITE("term_variables") {
  TEST_CASE("examples") {
    auto vars = term_variables(parse_term("q(X)"));
    REQUIRE(vars.size() == 1);
    CHECK(vars[0].name() == "X");
    auto two = term_variables(parse_term("append(Xs,Ys,[a,b,c])"));
    REQUIRE(two.size() == 2);
    CHECK(two[0].name() == "Xs");
    CHECK(two[1].name() == "Ys");
    CHECK(term_variables(atom("a")).empty());
  }
  TEST_CASE("first occurrence order") {
    auto vars = term_variables(parse_term("f(g(B, A), A, C, B)"));
    REQUIRE(vars.size() == 3);
    CHECK(vars[0].name() == "B");
    CHECK(vars[1].name() == "A");
    CHECK(vars[2].name() == "C");
  }
}

TEST_SUITE("termcore properties") {
  TEST_CASE("write/parse round trip over generated terms") {
    TermGenerator gen(0x5eed);
    for (int i = 0; i < 3000; ++i) {
      Term t = gen.term(5);
      const std::string text = write_term(t);
      INFO("text: " << text);
      Term back = parse_term(text);
      CHECK(is_variant(t, back));
    }
  }

  TEST_CASE("JSON round trip over generated ground terms") {
    TermGenerator gen(0xbeef, /*with_vars=*/false);
    int checked = 0;
    while (checked < 3000) {
      Term t = gen.term(5);
      if (contains_json_functor(t)) continue;
      ++checked;
      json j = term_to_json(t);
      INFO("json: " << j.dump());
      CHECK(json_to_term(j) == t);
      CHECK(json_to_term(json::parse(j.dump())) == t);
    }
  }

  TEST_CASE("proper lists never serialise with a functor key") {
    TermGenerator gen(7, false);
    for (int i = 0; i < 1000; ++i) {
      Term t = gen.term(4);
      if (auto items = list_items(t)) {
        json j = term_to_json(t);
        CHECK(j.is_array());
        CHECK_FALSE(has_functor_key(j));
      }
    }
  }

  TEST_CASE("term_variables is duplicate free and counts distinct ordinals") {
    TermGenerator gen(99);
    for (int i = 0; i < 1000; ++i) {
      Term t = gen.term(5);
      auto vars = term_variables(t);
      std::set<std::size_t> ordinals;
      for (const auto& v : vars) ordinals.insert(v.ordinal());
      CHECK(ordinals.size() == vars.size());
      // independent count: every variable ordinal reachable by a full walk
      std::set<std::size_t> walked;
      std::vector<Term> stack{t};
      while (!stack.empty()) {
        Term cur = stack.back();
        stack.pop_back();
        if (cur.is_var()) walked.insert(cur.ordinal());
        for (const auto& a : cur.args()) stack.push_back(a);
      }
      CHECK(walked == ordinals);
    }
  }

  TEST_CASE("long lists are built, compared and released without deep recursion") {
    std::vector<Term> items;
    for (int i = 0; i < 500000; ++i) items.push_back(Term::integer(i));
    Term big = Term::list(items);
    Term same = Term::list(std::move(items));
    CHECK(big == same);
    CHECK(list_items(big)->size() == 500000);
  }
}
