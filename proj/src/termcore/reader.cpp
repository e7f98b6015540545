#include "pltp/reader.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "operators.hpp"

namespace pltp {

namespace {

std::string located(const std::string& message, std::size_t line, std::size_t column) {
  return "syntax error: " + message + " (line " + std::to_string(line) + ", column " +
         std::to_string(column) + ")";
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column,
                       std::size_t offset)
    : std::runtime_error(located(message, line, column)),
      detail_(message),
      line_(line),
      column_(column),
      offset_(offset) {}

UnsupportedConstruct::UnsupportedConstruct(const std::string& construct, std::size_t line,
                                           std::size_t column, std::size_t offset)
    : ParseError("unsupported construct " + construct, line, column, offset),
      construct_(construct) {}

Term VariableScope::lookup(std::string_view name) {
  if (auto it = names.find(name); it != names.end()) return Term::var(std::string(name), it->second);
  const std::size_t ordinal = next++;
  names.emplace(std::string(name), ordinal);
  return Term::var(std::string(name), ordinal);
}

Term VariableScope::fresh(std::string name) { return Term::var(std::move(name), next++); }

namespace {

using detail::OpType;

enum class Tok { Name, QuotedName, Var, Int, Float, Str, Punct, End, Eof };

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  double float_value = 0.0;
  std::size_t offset = 0;
  std::size_t line = 1;
  std::size_t column = 1;
  bool layout_before = false;

  bool is_punct(char c) const { return kind == Tok::Punct && text.size() == 1 && text[0] == c; }
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    Token tok;
    tok.layout_before = skip_layout();
    tok.offset = pos_;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= src_.size()) {
      tok.kind = Tok::Eof;
      return tok;
    }
    const char c = src_[pos_];
    if (c >= '0' && c <= '9') {
      lex_number(tok);
    } else if (c == '_' || (c >= 'A' && c <= 'Z')) {
      tok.kind = Tok::Var;
      tok.text = take_while(detail::is_alnum_char);
    } else if (c >= 'a' && c <= 'z') {
      tok.kind = Tok::Name;
      tok.text = take_while(detail::is_alnum_char);
    } else if (c == '\'') {
      tok.kind = Tok::QuotedName;
      tok.text = lex_quoted('\'');
    } else if (c == '"') {
      tok.kind = Tok::Str;
      tok.text = lex_quoted('"');
    } else if (c == '`') {
      throw UnsupportedConstruct("back-quoted text", line_, column_, pos_);
    } else if (c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}' || c == ',' ||
               c == '|') {
      tok.kind = Tok::Punct;
      tok.text = std::string(1, c);
      advance();
    } else if (c == '!' || c == ';') {
      tok.kind = Tok::Name;
      tok.text = std::string(1, c);
      advance();
    } else if (detail::is_symbol_char(c)) {
      tok.text = take_while(detail::is_symbol_char);
      tok.kind = Tok::Name;
      if (tok.text == "." && end_follows()) tok.kind = Tok::End;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line_, column_, pos_);
    }
    return tok;
  }

 private:
  char peek_char(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  bool end_follows() const {
    if (pos_ >= src_.size()) return true;
    const char c = src_[pos_];
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '%';
  }

  bool skip_layout() {
    bool skipped = false;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        advance();
      } else if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '/' && peek_char(1) == '*') {
        const std::size_t line = line_, column = column_, offset = pos_;
        advance();
        advance();
        while (pos_ < src_.size() && !(src_[pos_] == '*' && peek_char(1) == '/')) advance();
        if (pos_ >= src_.size()) throw ParseError("unterminated block comment", line, column, offset);
        advance();
        advance();
      } else {
        break;
      }
      skipped = true;
    }
    return skipped;
  }

  template <typename Pred>
  std::string take_while(Pred pred) {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && pred(src_[pos_])) advance();
    return std::string(src_.substr(start, pos_ - start));
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  void lex_number(Token& tok) {
    if (src_[pos_] == '0' && peek_char(1) == '\'') {
      throw UnsupportedConstruct("0'c character code", line_, column_, pos_);
    }
    const std::size_t start = pos_;
    take_while(is_digit);
    bool is_float = false;
    if (peek_char() == '.' && is_digit(peek_char(1))) {
      is_float = true;
      advance();
      take_while(is_digit);
      if ((peek_char() == 'e' || peek_char() == 'E') &&
          (is_digit(peek_char(1)) ||
           ((peek_char(1) == '+' || peek_char(1) == '-') && is_digit(peek_char(2))))) {
        advance();
        if (peek_char() == '+' || peek_char() == '-') advance();
        take_while(is_digit);
      }
    }
    tok.text = std::string(src_.substr(start, pos_ - start));
    if (!is_float) {
      tok.kind = Tok::Int;
      return;
    }
    tok.kind = Tok::Float;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
    if (ec != std::errc{}) throw ParseError("malformed float", tok.line, tok.column, tok.offset);
    if (src_.substr(pos_, 3) == "Inf") {
      for (int i = 0; i < 3; ++i) advance();
      value = std::numeric_limits<double>::infinity();
    } else if (src_.substr(pos_, 3) == "NaN") {
      for (int i = 0; i < 3; ++i) advance();
      value = std::numeric_limits<double>::quiet_NaN();
    }
    tok.float_value = value;
  }

  std::string lex_quoted(char quote) {
    const std::size_t line = line_, column = column_, offset = pos_;
    advance();
    std::string out;
    for (;;) {
      if (pos_ >= src_.size()) throw ParseError("unterminated quoted text", line, column, offset);
      char c = src_[pos_];
      if (c == quote) {
        if (peek_char(1) == quote) {
          out.push_back(quote);
          advance();
          advance();
          continue;
        }
        advance();
        return out;
      }
      if (c != '\\') {
        out.push_back(c);
        advance();
        continue;
      }
      advance();
      if (pos_ >= src_.size()) throw ParseError("unterminated escape", line_, column_, pos_);
      const char e = src_[pos_];
      advance();
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case 'a': out.push_back('\a'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case 'v': out.push_back('\v'); break;
        case '0': out.push_back('\0'); break;
        case '\\': case '\'': case '"': case '`': out.push_back(e); break;
        case '\n': break;
        case 'x': {
          std::string hex = take_while([](char h) {
            return (h >= '0' && h <= '9') || (h >= 'a' && h <= 'f') || (h >= 'A' && h <= 'F');
          });
          if (peek_char() == '\\') advance();
          unsigned value = 0;
          auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
          if (hex.empty() || ec != std::errc{} || value > 0xff) {
            throw ParseError("bad \\x escape", line_, column_, pos_);
          }
          out.push_back(static_cast<char>(value));
          break;
        }
        default:
          throw ParseError(std::string("unknown escape \\") + e, line_, column_, pos_);
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Parser {
 public:
  Parser(std::string_view src, VariableScope* scope) : lexer_(src), scope_(scope) {}

  void set_scope(VariableScope* scope) { scope_ = scope; }

  const Token& peek(std::size_t ahead = 0) {
    while (buffer_.size() <= ahead) buffer_.push_back(lexer_.next());
    return buffer_[ahead];
  }

  Token take() {
    peek();
    Token t = std::move(buffer_.front());
    buffer_.erase(buffer_.begin());
    return t;
  }

  [[noreturn]] void fail(const Token& at, const std::string& message) {
    throw ParseError(message, at.line, at.column, at.offset);
  }

  void expect_punct(char c) {
    const Token& t = peek();
    if (!t.is_punct(c)) fail(t, std::string("expected '") + c + "' but found " + describe(t));
    take();
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::Eof: return "end of input";
      case Tok::End: return "end of clause";
      default: return "'" + t.text + "'";
    }
  }

  Term parse(int max_priority) {
    int left_priority = 0;
    Term left = parse_primary(max_priority, left_priority);
    return parse_infix(std::move(left), left_priority, max_priority);
  }

 private:
  bool functional_follows() {
    const Token& next = peek(1);
    return next.is_punct('(') && !next.layout_before;
  }

  static bool ends_operand(const Token& t) {
    if (t.kind == Tok::Eof || t.kind == Tok::End) return true;
    if (t.kind != Tok::Punct) return false;
    return t.text == ")" || t.text == "]" || t.text == "}" || t.text == "," || t.text == "|";
  }

  Term integer_from(const Token& tok, bool negative) {
    std::uint64_t magnitude = 0;
    auto [ptr, ec] =
        std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), magnitude);
    constexpr auto max = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
    if (ec != std::errc{} || magnitude > max + (negative ? 1 : 0)) {
      fail(tok, "integer " + std::string(negative ? "-" : "") + tok.text +
                    " is outside the signed 64-bit range");
    }
    if (negative) {
      if (magnitude == max + 1) return Term::integer(std::numeric_limits<std::int64_t>::min());
      return Term::integer(-static_cast<std::int64_t>(magnitude));
    }
    return Term::integer(static_cast<std::int64_t>(magnitude));
  }

  Term parse_arglist(std::string functor) {
    expect_punct('(');
    std::vector<Term> args;
    args.push_back(parse(999));
    while (peek().is_punct(',')) {
      take();
      args.push_back(parse(999));
    }
    expect_punct(')');
    return Term::compound(std::move(functor), std::move(args));
  }

  Term parse_list() {
    // '[' already consumed
    std::vector<Term> items;
    items.push_back(parse(999));
    while (peek().is_punct(',')) {
      take();
      items.push_back(parse(999));
    }
    Term tail = Term::nil();
    if (peek().is_punct('|')) {
      take();
      tail = parse(999);
    }
    expect_punct(']');
    return Term::list(std::move(items), std::move(tail));
  }

  Term parse_primary(int max_priority, int& priority) {
    priority = 0;
    Token tok = take();
    switch (tok.kind) {
      case Tok::Int:
        return integer_from(tok, false);
      case Tok::Float:
        return Term::floating(tok.float_value);
      case Tok::Var:
        return tok.text == "_" ? scope_->fresh("_") : scope_->lookup(tok.text);
      case Tok::Str: {
        std::vector<Term> chars;
        for (char c : tok.text) chars.push_back(Term::atom(std::string(1, c)));
        return Term::list(std::move(chars));
      }
      case Tok::Punct:
        if (tok.text == "(") {
          Term inner = parse(1200);
          expect_punct(')');
          return inner;
        }
        if (tok.text == "[") {
          if (peek().is_punct(']')) {
            take();
            return Term::nil();
          }
          return parse_list();
        }
        if (tok.text == "{") {
          if (peek().is_punct('}')) {
            take();
            return Term::atom("{}");
          }
          throw UnsupportedConstruct("{}/1", tok.line, tok.column, tok.offset);
        }
        fail(tok, "unexpected " + describe(tok));
      case Tok::QuotedName:
        if (peek().is_punct('(') && !peek().layout_before) return parse_arglist(tok.text);
        return Term::atom(tok.text);
      case Tok::Name:
        return parse_name(tok, max_priority, priority);
      case Tok::End:
      case Tok::Eof:
        fail(tok, "unexpected " + describe(tok));
    }
    fail(tok, "unexpected token");
  }

  Term parse_name(const Token& tok, int max_priority, int& priority) {
    const Token& next = peek();
    if (next.is_punct('(') && !next.layout_before) return parse_arglist(tok.text);
    if (tok.text == "-" && !next.layout_before && (next.kind == Tok::Int || next.kind == Tok::Float)) {
      Token number = take();
      if (number.kind == Tok::Float) return Term::floating(-number.float_value);
      return integer_from(number, true);
    }
    auto prefix = detail::prefix_op(tok.text);
    if (!prefix || ends_operand(next)) return Term::atom(tok.text);
    if (next.kind == Tok::Name && detail::infix_op(next.text) && !detail::prefix_op(next.text) &&
        !functional_follows()) {
      return Term::atom(tok.text);
    }
    if (prefix->priority > max_priority) {
      fail(tok, "operator priority clash for prefix '" + tok.text + "'");
    }
    const int arg_max = prefix->type == OpType::fy ? prefix->priority : prefix->priority - 1;
    Term operand = parse(arg_max);
    priority = prefix->priority;
    return Term::compound(tok.text, {std::move(operand)});
  }

  Term parse_infix(Term left, int left_priority, int max_priority) {
    for (;;) {
      const Token& tok = peek();
      std::string name;
      if (tok.is_punct(',')) {
        name = ",";
      } else if (tok.kind == Tok::Name) {
        name = tok.text;
      } else {
        break;
      }
      auto op = detail::infix_op(name);
      if (!op || op->priority > max_priority) break;
      const int left_max = op->type == OpType::yfx ? op->priority : op->priority - 1;
      const int right_max = op->type == OpType::xfy ? op->priority : op->priority - 1;
      if (left_priority > left_max) {
        fail(tok, "operator priority clash for infix '" + name + "'");
      }
      take();
      Term right = parse(right_max);
      left = Term::compound(name, {std::move(left), std::move(right)});
      left_priority = op->priority;
    }
    return left;
  }

  Lexer lexer_;
  VariableScope* scope_;
  std::vector<Token> buffer_;
};

}  // namespace

Term parse_term(std::string_view input) {
  VariableScope scope;
  return parse_term(input, scope);
}

Term parse_term(std::string_view input, VariableScope& scope) {
  Parser parser(input, &scope);
  Term t = parser.parse(1200);
  if (parser.peek().kind == Tok::End) parser.take();
  const Token& rest = parser.peek();
  if (rest.kind != Tok::Eof) parser.fail(rest, "unexpected " + Parser::describe(rest) + " after term");
  return t;
}

std::vector<Clause> parse_program(std::string_view input) {
  std::vector<Clause> clauses;
  Parser parser(input, nullptr);
  while (parser.peek().kind != Tok::Eof) {
    const Token start = parser.peek();
    VariableScope scope;
    parser.set_scope(&scope);
    Term t = [&] {
      try {
        Term parsed = parser.parse(1200);
        const Token& end = parser.peek();
        if (end.kind != Tok::End) {
          parser.fail(end, "expected end of clause but found " + Parser::describe(end));
        }
        parser.take();
        return parsed;
      } catch (const UnsupportedConstruct&) {
        throw;
      } catch (const ParseError& e) {
        throw ParseError(e.detail() + " in clause starting at offset " +
                             std::to_string(start.offset),
                         e.line(), e.column(), start.offset);
      }
    }();
    if (t.is_compound(":-", 1) || t.is_compound("?-", 1)) {
      throw UnsupportedConstruct("directive", start.line, start.column, start.offset);
    }
    Term head = t.is_compound(":-", 2) ? t.arg(0) : t;
    Term body = t.is_compound(":-", 2) ? t.arg(1) : Term::atom("true");
    if (!head.is_callable()) {
      throw ParseError("non-callable clause head in clause starting at offset " +
                           std::to_string(start.offset),
                       start.line, start.column, start.offset);
    }
    clauses.push_back(Clause{std::move(head), std::move(body)});
  }
  return clauses;
}

}  // namespace pltp
