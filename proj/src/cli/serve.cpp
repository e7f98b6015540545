#include <iostream>

#include "pltp/cli/commands.hpp"
#include "pltp/server/http_server.hpp"
#include "pltp/server/pengine_server.hpp"

namespace pltp::cli {

int cmd_serve(const server::ServerConfig& config, std::ostream& out, std::ostream& err,
              const std::function<void()>& wait_for_shutdown) {
  server::ServerOptions options;
  options.limits = config.limits;
  server::PengineServer pengines(options);
  server::HttpOptions http_options;
  http_options.console_dir = config.console_dir;
  server::HttpFrontend frontend(pengines, http_options);
  if (!frontend.bind(config.host, config.port)) {
    err << "cannot listen on " << config.host << ':' << config.port << '\n';
    return kExitUsage;
  }
  const auto& l = config.limits;
  out << "listening on http://" << config.host << ':' << frontend.port() << '\n'
      << "max_pengines=" << l.max_pengines << " max_slaves=" << l.max_slaves
      << " timeout_secs=" << static_cast<double>(l.timeout.count()) / 1000.0
      << " allow_src_url=" << (l.allow_src_url ? "true" : "false") << '\n';
  if (config.console_dir) out << "console at /console from " << *config.console_dir << '\n';
  out << std::flush;
  frontend.start();
  wait_for_shutdown();
  frontend.stop();
  return kExitOk;
}

}  // namespace pltp::cli
