#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pltp/client/session.hpp"
#include "pltp/json_codec.hpp"
#include "pltp/protocol.hpp"
#include "pltp/server/config.hpp"

namespace pltp::cli {

// Exit codes of the pltp tool.
constexpr int kExitOk = 0;
constexpr int kExitRemoteError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoSolutions = 3;
constexpr int kExitUnreachable = 4;

struct QueryArgs {
  std::string url = "http://127.0.0.1:9083";
  std::string query;
  std::optional<std::string> src_file;
  std::size_t chunk = 1;
  std::optional<std::string> template_text;
  protocol::Format format = protocol::Format::Prolog;
  // After each solution read ';' for more, anything else stops.
  bool interactive = false;
};

// Prints one template instance per line. Prompts read a line from in;
// output events are written to out.
int cmd_query(const QueryArgs& args, std::istream& in, std::ostream& out, std::ostream& err);
// As above over an existing session (used by tests with a local server).
int run_query(client::Session& session, const QueryArgs& args, std::istream& in, std::ostream& out,
              std::ostream& err);

struct BenchOptions {
  std::size_t facts = 1981;
  std::vector<std::size_t> chunks{1, 2, 8, 32, 128};
  std::size_t iterations = 3;
};

struct BenchRow {
  std::size_t chunk = 0;
  // Means over the iterations, client side.
  double wall_ms = 0;
  double cpu_ms = 0;
  std::size_t solutions = 0;
};

struct BenchReport {
  std::size_t facts = 0;
  std::size_t iterations = 0;
  std::vector<BenchRow> rows;
  // Every run returned the same solution multiset.
  bool consistent = true;
};

// Fact base of n event/3 facts with pseudo-random coordinates.
std::string bench_fact_base(std::size_t n);
BenchReport run_bench(client::Session& session, const BenchOptions& options);
json bench_json(const BenchReport& report);
std::string bench_table(const BenchReport& report);

// Binds, prints the effective limits and serves until wait_for_shutdown
// returns. Returns kExitUsage when the address cannot be bound.
int cmd_serve(const server::ServerConfig& config, std::ostream& out, std::ostream& err,
              const std::function<void()>& wait_for_shutdown);

}  // namespace pltp::cli
