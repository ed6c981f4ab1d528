#ifndef SATRACK_ERRORS_HPP
#define SATRACK_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

#include "satrack/types.hpp"

namespace satrack {

/// Error categories double as process exit codes in the CLI.
enum class ErrorCategory : int {
    internal = 1,
    parse = 2,
    validation = 3,
    io = 4,
    non_convergence = 5,
    domain_exit = 6,
    domain = 7,
    configuration = 8,
    input = 9,
};

const char* category_name(ErrorCategory c);

class Error : public std::runtime_error {
  public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category)
    {
    }
    ErrorCategory category() const noexcept { return category_; }

  private:
    ErrorCategory category_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
  public:
    explicit DomainError(const std::string& what) : Error(ErrorCategory::domain, what) {}
};

/// Bad tuning/configuration parameter (node counts, sample sizes, empty grids).
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::configuration, what) {}
};

/// Malformed or inconsistent operation input.
class InputError : public Error {
  public:
    explicit InputError(const std::string& what) : Error(ErrorCategory::input, what) {}
};

class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(ErrorCategory::parse, what), line_(line), column_(column)
    {
    }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

/// Semantic config violation; carries the offending key path.
class ValidationError : public Error {
  public:
    ValidationError(std::string key, const std::string& what)
        : Error(ErrorCategory::validation, what), key_(std::move(key))
    {
    }
    const std::string& key() const noexcept { return key_; }

  private:
    std::string key_;
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

class NonConvergenceError : public Error {
  public:
    NonConvergenceError(const std::string& what, Vector last_iterate, double last_residual)
        : Error(ErrorCategory::non_convergence, what),
          last_iterate_(std::move(last_iterate)),
          last_residual_(last_residual)
    {
    }
    const Vector& last_iterate() const noexcept { return last_iterate_; }
    double last_residual() const noexcept { return last_residual_; }

  private:
    Vector last_iterate_;
    double last_residual_;
};

class DomainExitError : public Error {
  public:
    explicit DomainExitError(const std::string& what) : Error(ErrorCategory::domain_exit, what) {}
};

}  // namespace satrack

#endif  // SATRACK_ERRORS_HPP
