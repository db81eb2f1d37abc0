#pragma once

#include <stdexcept>
#include <string>

namespace nqn {

/// Invalid user-supplied configuration. `field()` names the offending entry
/// so front ends can report it verbatim.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A numerical routine did not reach its requested accuracy.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nqn
