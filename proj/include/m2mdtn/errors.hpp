#ifndef M2MDTN_ERRORS_HPP
#define M2MDTN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace m2mdtn {

// Base for everything the analytical pipeline can reject or fail on.
class ModelError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Input outside the domain of a closed form (a <= 0, v_max == v_min, ...).
class DomainError : public ModelError {
  public:
    using ModelError::ModelError;
};

// Input is valid but the quantity is undefined (absorbing no-event state,
// zero-mass conditional distribution, unreachable delivery).
class DegenerateError : public ModelError {
  public:
    using ModelError::ModelError;
};

class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string &what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const { return line_; }

  private:
    int line_;
};

} // namespace m2mdtn

#endif
