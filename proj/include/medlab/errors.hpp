#pragma once

#include <stdexcept>
#include <string>

namespace medlab {

// Bad run configuration (CLI args, config files, unknown keys). Exit code 2.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A proven internal bound was violated at runtime (construction bug or
// mis-declared class constants). Exit code 3. Never clamped over.
struct invariant_error : std::logic_error {
  explicit invariant_error(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace medlab
