#pragma once

#include <stdexcept>
#include <string>

namespace rvrbm {

/// Invalid configuration or argument. Maps to exit code 1 in the CLI.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while a simulation is running (non-finite state, ...). Exit code 2.
class SimulationError : public std::runtime_error
{
public:
  SimulationError(const std::string& what, long step = -1)
    : std::runtime_error(what), step_(step)
  {
  }
  long step() const { return step_; }

private:
  long step_;
};

/// File-system failure. Exit code 3.
class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace rvrbm
