#pragma once

#include <stdexcept>
#include <string>

namespace ventcel {

enum class ErrorKind {
    invalid_argument,
    invalid_mesh,
    unsupported_format,
    malformed_file,
    unsupported_degree,
    factorization_failed,
    solver_stalled,
    not_converged,
    degenerate_basis,
    unsupported,
    io_error,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` tells callers what went wrong.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Parse failures carry the 1-based line number of the offending input line.
class ParseError : public Error {
public:
    ParseError(ErrorKind kind, std::size_t line, const std::string& what)
        : Error(kind, "line " + std::to_string(line) + ": " + what), line_(line)
    {
    }

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

#define VENTCEL_REQUIRE(cond, kind, msg)                \
    do {                                                \
        if (!(cond)) {                                  \
            throw ::ventcel::Error((kind), (msg));      \
        }                                               \
    } while (false)

} // namespace ventcel
