#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace landscape_lab {

// Caller supplied something outside an operation's domain (bad dimension,
// level out of range, malformed config, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation produced a non-finite value or otherwise broke down.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::size_t step = 0)
      : std::runtime_error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace landscape_lab
