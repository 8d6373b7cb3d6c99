#pragma once

#include <stdexcept>
#include <string>

namespace pcnls
{

/// Raised on violated preconditions (bad parameters, bad grids, out-of-range
/// dilations).
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a time integration cannot continue: non-finite samples or a
/// solution modulus that has collapsed below the working floor.
class SimulationAborted : public Error
{
public:
  SimulationAborted(const std::string& what, double time)
    : Error(what), time_(time)
  {}

  double time() const noexcept { return time_; }

private:
  double time_;
};

} // namespace pcnls
