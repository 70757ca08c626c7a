#pragma once

#include <stdexcept>
#include <string>

namespace swspde {

/// Invalid input data. `path` names the offending field (e.g. "model.rho").
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string path, const std::string& message)
        : std::invalid_argument(path.empty() ? message : path + ": " + message),
          path_(std::move(path)), message_(message) {}

    const std::string& path() const noexcept { return path_; }
    /// The message without the path prefix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string path_;
    std::string message_;
};

/// A simulated state became non-finite.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(double time)
        : std::runtime_error("non-finite state at t=" + std::to_string(time)), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

} // namespace swspde
