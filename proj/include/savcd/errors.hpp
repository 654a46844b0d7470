#pragma once

#include <stdexcept>
#include <string>

namespace savcd {

// Exit-code mapping lives in the CLI: ConfigError -> 2, BackendError -> 3,
// ImageIoError -> 4.

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class BackendError : public std::runtime_error {
public:
    explicit BackendError(const std::string& what, int step = -1)
        : std::runtime_error(what), step_(step) {}

    // Decode step at which the transport failed, -1 if not step-scoped.
    int step() const noexcept { return step_; }

private:
    int step_;
};

class ImageIoError : public std::runtime_error {
public:
    explicit ImageIoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace savcd
