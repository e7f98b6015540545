#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <pthread.h>

#include "CLI11.hpp"
#include "pltp/cli/commands.hpp"
#include "pltp/client/rpc.hpp"
#include "pltp/client/transport.hpp"
#include "pltp/server/http_server.hpp"
#include "pltp/server/pengine_server.hpp"

using namespace pltp;

namespace {

std::string default_url() {
  if (const char* url = std::getenv("PLTP_URL")) return url;
  if (const char* port = std::getenv("PLTP_PORT")) return std::string("http://127.0.0.1:") + port;
  return "http://127.0.0.1:9083";
}

sigset_t shutdown_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  return set;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Remote logic engines over HTTP"};
  app.require_subcommand(1);

  auto* serve = app.add_subcommand("serve", "Run a pengine server");
  server::ServerConfig config;
  std::string config_file;
  std::string host;
  int port = 0;
  std::size_t max_pengines = 0;
  std::size_t max_slaves = 0;
  double timeout_secs = 0;
  std::string console_dir;
  serve->add_option("--config", config_file, "File of key = value settings")->check(CLI::ExistingFile);
  serve->add_option("--host", host, "Address to bind");
  serve->add_option("--port", port, "Port to bind, 0 for any")->check(CLI::Range(0, 65535));
  serve->add_option("--max-pengines", max_pengines, "Pengines alive at once")->check(CLI::PositiveNumber);
  serve->add_option("--max-slaves", max_slaves, "Pengines per client")->check(CLI::PositiveNumber);
  serve->add_option("--timeout", timeout_secs, "Pengine lifetime in seconds")->check(CLI::PositiveNumber);
  auto* allow_src_url = serve->add_flag("--allow-src-url", "Let create load programs from URLs");
  serve->add_option("--console-dir", console_dir, "Static files served under /console")
      ->check(CLI::ExistingDirectory);

  auto* query = app.add_subcommand("query", "Run a query on a server and print its solutions");
  cli::QueryArgs qargs;
  qargs.url = default_url();
  std::string format = "prolog";
  query->add_option("--url", qargs.url, "Server base URL");
  query->add_option("query", qargs.query, "Goal, e.g. 'p(X)'")->required();
  query->add_option("--src-file", qargs.src_file, "Program loaded into the pengine")->check(CLI::ExistingFile);
  query->add_option("--chunk", qargs.chunk, "Solutions per answer")->check(CLI::PositiveNumber);
  query->add_option("--template", qargs.template_text, "Term printed per solution");
  query->add_option("--format", format, "Wire format")->check(CLI::IsMember({"prolog", "json"}));
  query->add_flag("--interactive", qargs.interactive, "Ask before fetching each further solution");

  auto* bench = app.add_subcommand("bench", "Time full enumeration at several chunk sizes");
  std::string bench_url = default_url();
  cli::BenchOptions bopts;
  std::string output = "text";
  bool self_host = false;
  bench->add_option("--url", bench_url, "Server base URL");
  bench->add_option("--facts", bopts.facts, "Size of the generated fact base")->check(CLI::PositiveNumber);
  bench->add_option("--chunks", bopts.chunks, "Chunk sizes")->delimiter(',')->check(CLI::PositiveNumber);
  bench->add_option("--iterations", bopts.iterations, "Runs per chunk size")->check(CLI::PositiveNumber);
  bench->add_option("--output", output, "Report format")->check(CLI::IsMember({"text", "json"}));
  bench->add_flag("--self-host", self_host, "Start a server in this process on a free port");

  CLI11_PARSE(app, argc, argv);

  if (serve->parsed()) {
    try {
      if (!config_file.empty()) server::apply_config_file(config, config_file);
      server::apply_environment(config);
      if (serve->count("--host")) config.host = host;
      if (serve->count("--port")) config.port = static_cast<std::uint16_t>(port);
      if (serve->count("--max-pengines")) config.limits.max_pengines = max_pengines;
      if (serve->count("--max-slaves")) config.limits.max_slaves = max_slaves;
      if (serve->count("--timeout")) {
        config.limits.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_secs * 1000.0));
      }
      if (allow_src_url->count()) config.limits.allow_src_url = true;
      if (serve->count("--console-dir")) config.console_dir = console_dir;
      server::validate(config.limits);
    } catch (const server::ConfigError& e) {
      std::cerr << e.what() << '\n';
      return cli::kExitUsage;
    }
    // Worker threads inherit the mask, so only sigwait sees the signals.
    const sigset_t signals = shutdown_signals();
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);
    return cli::cmd_serve(config, std::cout, std::cerr, [&signals] {
      int received = 0;
      sigwait(&signals, &received);
    });
  }

  if (query->parsed()) {
    qargs.format = format == "json" ? protocol::Format::Json : protocol::Format::Prolog;
    return cli::cmd_query(qargs, std::cin, std::cout, std::cerr);
  }

  std::unique_ptr<server::PengineServer> local;
  std::unique_ptr<server::HttpFrontend> frontend;
  if (self_host) {
    local = std::make_unique<server::PengineServer>();
    frontend = std::make_unique<server::HttpFrontend>(*local);
    if (!frontend->bind("127.0.0.1", 0)) {
      std::cerr << "cannot bind a local port\n";
      return cli::kExitUsage;
    }
    frontend->start();
    bench_url = "http://127.0.0.1:" + std::to_string(frontend->port());
  }
  try {
    client::Session session(std::make_shared<client::HttpTransport>(bench_url));
    const cli::BenchReport report = cli::run_bench(session, bopts);
    if (output == "json") {
      std::cout << cli::bench_json(report).dump(2) << '\n';
    } else {
      std::cout << cli::bench_table(report);
    }
    if (frontend) frontend->stop();
    return report.consistent ? cli::kExitOk : cli::kExitRemoteError;
  } catch (const client::TransportError& e) {
    std::cerr << "cannot reach " << bench_url << ": " << e.what() << '\n';
    return cli::kExitUnreachable;
  } catch (const client::RemoteError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitRemoteError;
  }
}
