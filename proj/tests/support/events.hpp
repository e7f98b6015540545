#pragma once

#include <string>
#include <vector>

#include "pltp/protocol.hpp"
#include "pltp/writer.hpp"

namespace pltp::testing {

using Lines = std::vector<std::string>;

// Event texts with the (random) pengine id replaced by ID.
inline Lines described(const std::vector<protocol::Event>& events) {
  Lines out;
  for (const auto& e : events) {
    std::string text = protocol::describe(e);
    const std::string& id = protocol::event_id(e);
    if (!id.empty()) {
      const std::string quoted = write_term(Term::atom(id));
      for (auto pos = text.find(quoted); pos != std::string::npos; pos = text.find(quoted)) {
        text.replace(pos, quoted.size(), "ID");
      }
    }
    out.push_back(text);
  }
  return out;
}

}  // namespace pltp::testing
