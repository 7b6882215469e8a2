#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace motionfield {

enum class ErrorKind {
    shape,
    parameter,
    convergence,
    input,
    format,
    schema,
    io,
    contract,
    not_found,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::shape: return "shape";
        case ErrorKind::parameter: return "parameter";
        case ErrorKind::convergence: return "convergence";
        case ErrorKind::input: return "input";
        case ErrorKind::format: return "format";
        case ErrorKind::schema: return "schema";
        case ErrorKind::io: return "io";
        case ErrorKind::contract: return "contract";
        case ErrorKind::not_found: return "not_found";
    }
    return "unknown";
}

/// Every failure raised by the engine carries the module that produced it,
/// so callers several layers up (CLI, HTTP) can attribute it.
class Error : public std::runtime_error {
public:
    Error(std::string module, ErrorKind kind, const std::string& message)
        : std::runtime_error(message), module_(std::move(module)), kind_(kind) {}

    const std::string& module() const noexcept { return module_; }
    ErrorKind kind() const noexcept { return kind_; }

private:
    std::string module_;
    ErrorKind kind_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(std::string module, const std::string& message, double residual, int iterations)
        : Error(std::move(module), ErrorKind::convergence, message),
          residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

namespace module_name {
inline constexpr const char* hints = "motion-hints";
inline constexpr const char* densify = "s2d-densify";
inline constexpr const char* warp = "warp";
inline constexpr const char* compose = "compose";
inline constexpr const char* scheduler = "scheduler";
inline constexpr const char* pipeline = "pipeline-service";
}  // namespace module_name

}  // namespace motionfield
