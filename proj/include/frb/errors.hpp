#pragma once

#include <stdexcept>
#include <string>

namespace frb {

// Error taxonomy mirrored by the CLI exit codes: config 2, capacity 3,
// non-convergence 4.  Everything else (contract violations) stays on the
// std::invalid_argument / std::runtime_error defaults.

struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct capacity_error : std::runtime_error {
  explicit capacity_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct convergence_error : std::runtime_error {
  explicit convergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace frb
