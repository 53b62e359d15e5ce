#pragma once

#include <stdexcept>
#include <string>

namespace tempo {

/// Bad configuration or usage. CLI exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input data or protocol violation (parse errors, leakage). CLI exit code 2.
struct ValidationError : std::runtime_error {
    ValidationError(std::string kind, const std::string& what)
        : std::runtime_error(what), kind(std::move(kind)) {}
    std::string kind;
};

/// Non-finite loss during training. CLI exit code 3.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tempo
