#include <fstream>
#include <iostream>
#include <sstream>

#include "pltp/cli/commands.hpp"
#include "pltp/client/rpc.hpp"
#include "pltp/client/transport.hpp"
#include "pltp/engine/unify.hpp"
#include "pltp/reader.hpp"
#include "pltp/writer.hpp"

namespace pltp::cli {

namespace {

// Thrown by the prompt handler when the input is exhausted.
struct InputEnded {};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

int run_query(client::Session& session, const QueryArgs& args, std::istream& in, std::ostream& out,
              std::ostream& err) {
  VariableScope scope;
  Term query = Term::atom("true");
  Term tmpl = query;
  try {
    query = parse_term(args.query, scope);
    tmpl = args.template_text ? parse_term(*args.template_text, scope) : query;
  } catch (const ParseError& e) {
    err << "syntax error: " << e.what() << '\n';
    return kExitUsage;
  }

  client::RpcOptions options;
  options.chunk = args.chunk;
  if (args.src_file) {
    auto text = read_file(*args.src_file);
    if (!text) {
      err << "cannot read " << *args.src_file << '\n';
      return kExitUsage;
    }
    options.src_text = std::move(*text);
  }
  options.output_handler = [&out](const std::string&, const Term& t) { out << write_term(t) << '\n'; };
  options.prompt_handler = [&in, &out](const std::string&, const Term& prompt) -> std::optional<Term> {
    out << write_term(prompt) << ' ' << std::flush;
    std::string line;
    if (!std::getline(in, line)) throw InputEnded{};
    try {
      return parse_term(line);
    } catch (const ParseError&) {
      return Term::atom(line);
    }
  };

  std::size_t count = 0;
  try {
    client::RpcCursor cursor(session, query, std::move(options));
    while (auto instance = cursor.next()) {
      ++count;
      const auto s = engine::unify(query, *instance);
      out << write_term(s ? engine::apply(*s, tmpl) : *instance) << '\n';
      if (args.interactive) {
        out << "more? " << std::flush;
        std::string answer;
        if (!std::getline(in, answer) || answer.find(';') == std::string::npos) break;
      }
    }
  } catch (const InputEnded&) {
    err << "input ended; query stopped\n";
  } catch (const client::RemoteError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRemoteError;
  } catch (const client::PromptUnsupported& e) {
    err << "error: " << e.what() << '\n';
    return kExitRemoteError;
  } catch (const client::TransportError& e) {
    err << "cannot reach " << args.url << ": " << e.what() << '\n';
    return kExitUnreachable;
  }
  if (count == 0) {
    out << "false\n";
    return kExitNoSolutions;
  }
  return kExitOk;
}

int cmd_query(const QueryArgs& args, std::istream& in, std::ostream& out, std::ostream& err) {
  std::shared_ptr<client::Transport> transport;
  try {
    client::HttpTransportOptions o;
    o.format = args.format;
    transport = std::make_shared<client::HttpTransport>(args.url, o);
  } catch (const client::TransportError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }
  client::Session session(transport);
  return run_query(session, args, in, out, err);
}

}  // namespace pltp::cli
