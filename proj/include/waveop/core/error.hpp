#pragma once

#include <stdexcept>
#include <string>

namespace waveop {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or configuration value.
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& msg) : Error(msg) {}
};

/// Array shape / dof-count mismatch.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

/// A time integration produced a non-finite state.
class SolverBlowupError : public Error {
public:
    SolverBlowupError(const std::string& msg, double t_fail)
        : Error(msg), t(t_fail) {}
    double t;
};

/// Local stencil assembly failed (ill-conditioned system, bad node layout).
class DiscretizationError : public Error {
public:
    explicit DiscretizationError(const std::string& msg) : Error(msg) {}
};

/// On-disk data does not match its recorded checksums or shapes.
class CorruptionError : public Error {
public:
    explicit CorruptionError(const std::string& msg) : Error(msg) {}
};

/// A run configuration failed validation; `field` is the offending path.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field_path, const std::string& msg)
        : Error(field_path + ": " + msg), field(field_path) {}
    std::string field;
};

} // namespace waveop
