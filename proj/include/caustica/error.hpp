#pragma once

#include <stdexcept>
#include <string>

namespace caustica {

// Raised when an input violates an operation's precondition.  `code` is a
// short machine-readable tag that the CLI forwards in its error JSON.
class PreconditionError : public std::invalid_argument {
public:
    PreconditionError(std::string code, const std::string& what)
        : std::invalid_argument(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// A numerical procedure failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace caustica
