#include "ventcel/error.hpp"

namespace ventcel {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_mesh: return "invalid-mesh";
    case ErrorKind::unsupported_format: return "unsupported-format";
    case ErrorKind::malformed_file: return "malformed-file";
    case ErrorKind::unsupported_degree: return "unsupported-degree";
    case ErrorKind::factorization_failed: return "factorization-failed";
    case ErrorKind::solver_stalled: return "solver-stalled";
    case ErrorKind::not_converged: return "not-converged";
    case ErrorKind::degenerate_basis: return "degenerate-basis";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::io_error: return "io-error";
    }
    return "unknown";
}

} // namespace ventcel
