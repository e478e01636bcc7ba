#pragma once

#include <stdexcept>
#include <string>

namespace usid {

// Single exception type for configuration, parsing and precondition errors.
// Dataplane failures (drops) are not exceptions; they travel as outcomes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

}  // namespace usid
