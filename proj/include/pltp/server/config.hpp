#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace pltp::server {

struct ServerLimits {
  std::size_t max_pengines = 100;
  // Per owner token.
  std::size_t max_slaves = 10;
  // Lifetime of a pengine counted from its creation.
  std::chrono::milliseconds timeout{300'000};
  bool allow_src_url = false;
};

struct ServerConfig {
  ServerLimits limits;
  std::string host = "127.0.0.1";
  std::uint16_t port = 9083;
  // Directory served under /console when set.
  std::optional<std::string> console_dir;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ConfigError unless all limits are positive.
void validate(const ServerLimits& limits);

// Applies one setting. Keys: host, port, max_pengines, max_slaves,
// timeout_secs, allow_src_url, console_dir. Throws ConfigError.
void apply_setting(ServerConfig& config, const std::string& key, const std::string& value);

// Reads "key = value" lines; blank lines and lines starting with '#' are
// skipped. Throws ConfigError naming the line on bad input.
void apply_config_file(ServerConfig& config, const std::string& path);

// Applies PLTP_PORT, PLTP_MAX_PENGINES, PLTP_MAX_SLAVES, PLTP_TIMEOUT_SECS,
// PLTP_ALLOW_SRC_URL when set. getenv defaults to std::getenv.
void apply_environment(ServerConfig& config,
                       const std::function<const char*(const char*)>& getenv = {});

}  // namespace pltp::server
