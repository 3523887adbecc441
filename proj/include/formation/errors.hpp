#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace formation {

/// Base class of every error thrown by the library. `code()` is a stable
/// machine-readable identifier used by the CLI error records.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error("dimension_error", what) {}
};

/// Iterative method failed; carries the last iterate when one exists.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> last = {})
        : Error("no_convergence", what), last_(std::move(last)) {}
    const std::vector<double>& last_iterate() const noexcept { return last_; }

private:
    std::vector<double> last_;
};

class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, double time)
        : Error("blow_up", what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& what) : Error("infeasible_lengths", what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, std::string code = "config_error")
        : Error(std::move(code), what) {}
};

class GraphError : public Error {
public:
    explicit GraphError(const std::string& what) : Error("invalid_graph", what) {}
};

/// A formula was evaluated outside the set where it is valid (for example an
/// equilibrium-only factorization at a non-equilibrium).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain_error", what) {}
};

class InconsistentStateError : public Error {
public:
    explicit InconsistentStateError(const std::string& what)
        : Error("inconsistent_state", what) {}
};

class SingularityError : public Error {
public:
    explicit SingularityError(const std::string& what) : Error("non_hyperbolic", what) {}
};

}  // namespace formation
