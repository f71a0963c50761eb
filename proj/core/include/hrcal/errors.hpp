#pragma once

#include <stdexcept>
#include <string>

namespace hrcal {

// Root of every error thrown by the library. Stage diagnostics in the CLI
// catch this type and prepend the stage name.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class ValidationError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class InsufficientDataError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class DegenerateFeatureError : public Error { using Error::Error; };
class DegenerateTargetError : public Error { using Error::Error; };
class TrainingError : public Error { using Error::Error; };
class LeakageError : public Error { using Error::Error; };

// Cholesky factorisation of K + alpha*I failed.
class NotPositiveDefiniteError : public Error { using Error::Error; };

}  // namespace hrcal
