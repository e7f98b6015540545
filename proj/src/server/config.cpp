#include "pltp/server/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

namespace pltp::server {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(value, &used);
    if (used == value.size() && n > 0) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a positive integer, got '" + value + "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

}  // namespace

void validate(const ServerLimits& limits) {
  if (limits.max_pengines == 0) throw ConfigError("max_pengines must be positive");
  if (limits.max_slaves == 0) throw ConfigError("max_slaves must be positive");
  if (limits.timeout.count() <= 0) throw ConfigError("timeout must be positive");
}

void apply_setting(ServerConfig& config, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "host") {
    if (value.empty()) throw ConfigError("host: empty value");
    config.host = value;
  } else if (key == "port") {
    const std::size_t port = parse_count(key, value);
    if (port > std::numeric_limits<std::uint16_t>::max()) {
      throw ConfigError("port: out of range: " + value);
    }
    config.port = static_cast<std::uint16_t>(port);
  } else if (key == "max_pengines") {
    config.limits.max_pengines = parse_count(key, value);
  } else if (key == "max_slaves") {
    config.limits.max_slaves = parse_count(key, value);
  } else if (key == "timeout_secs") {
    double secs = 0;
    try {
      std::size_t used = 0;
      secs = std::stod(value, &used);
      if (used != value.size()) secs = 0;
    } catch (const std::exception&) {
    }
    if (!(secs > 0) || !std::isfinite(secs)) {
      throw ConfigError("timeout_secs: expected a positive number, got '" + value + "'");
    }
    config.limits.timeout = std::chrono::milliseconds(static_cast<long long>(std::ceil(secs * 1000)));
  } else if (key == "allow_src_url") {
    config.limits.allow_src_url = parse_bool(key, value);
  } else if (key == "console_dir") {
    config.console_dir = value;
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

void apply_config_file(ServerConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(number) + ": expected key = value");
    }
    try {
      apply_setting(config, trim(text.substr(0, eq)), text.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void apply_environment(ServerConfig& config,
                       const std::function<const char*(const char*)>& getenv) {
  const auto get = [&getenv](const char* name) -> const char* {
    return getenv ? getenv(name) : std::getenv(name);
  };
  const std::pair<const char*, const char*> vars[] = {
      {"PLTP_PORT", "port"},
      {"PLTP_MAX_PENGINES", "max_pengines"},
      {"PLTP_MAX_SLAVES", "max_slaves"},
      {"PLTP_TIMEOUT_SECS", "timeout_secs"},
      {"PLTP_ALLOW_SRC_URL", "allow_src_url"},
  };
  for (const auto& [env, key] : vars) {
    if (const char* value = get(env)) {
      try {
        apply_setting(config, key, value);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string(env) + ": " + e.what());
      }
    }
  }
}

}  // namespace pltp::server
