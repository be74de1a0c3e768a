#include <cmath>
#include <cstdio>

#include "ventcel/error.hpp"
#include "ventcel/linalg.hpp"

namespace ventcel {

namespace {

// residual(x, r) writes r = b - A x and returns ||r||.
using ResidualFunction = std::function<double(std::span<const double>, std::span<double>)>;

CgResult cg_core(const LinearOperator& a, const ResidualFunction& residual, std::span<const double> b,
                 const Preconditioner& precond, const CgOptions& options, std::span<const double> x0)
{
    const std::size_t n = b.size();
    const long cap = options.max_iterations >= 0 ? options.max_iterations : static_cast<long>(10 * n);
    CgResult result;
    result.x.assign(n, 0.0);
    if (!x0.empty()) {
        VENTCEL_REQUIRE(x0.size() == n, ErrorKind::invalid_argument, "initial guess has wrong size");
        std::copy(x0.begin(), x0.end(), result.x.begin());
    }
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(result.x.begin(), result.x.end(), 0.0);
        result.converged = true;
        return result;
    }

    Vector r(n), z(n), p(n), q(n);
    const auto true_residual = [&]() { return residual(result.x, r) / bnorm; };

    double rel = true_residual();
    long it = 0;
    // Outer loop restarts from the true residual whenever the recurrence
    // claims convergence that the recomputed residual does not confirm.
    while (rel > options.tol && it < cap) {
        precond.apply(r, z);
        p = z;
        double rz = dot(r, z);
        while (it < cap) {
            a(p, q);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) {
                break;
            }
            const double alpha = rz / pq;
            for (std::size_t i = 0; i < n; ++i) {
                result.x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            ++it;
            if (norm2(r) / bnorm <= 0.5 * options.tol) {
                break;
            }
            precond.apply(r, z);
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = z[i] + beta * p[i];
            }
        }
        const double previous = rel;
        rel = true_residual();
        if (rel > options.tol && rel >= previous) {
            break;  // no progress from a fresh restart: stagnated at rounding level
        }
    }
    result.iterations = it;
    result.relative_residual = rel;
    result.converged = rel <= options.tol;
    if (!result.converged && options.throw_on_failure) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3e", rel);
        throw Error(ErrorKind::solver_stalled,
                    "CG stopped after " + std::to_string(it) + " iterations with relative residual " + buf);
    }
    return result;
}

} // namespace

CgResult cg_solve(const LinearOperator& a, std::span<const double> b, const Preconditioner& precond,
                  const CgOptions& options, std::span<const double> x0)
{
    Vector ax(b.size());
    const ResidualFunction residual = [&](std::span<const double> x, std::span<double> r) {
        a(x, ax);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = b[i] - ax[i];
        }
        return norm2(r);
    };
    return cg_core(a, residual, b, precond, options, x0);
}

CgResult cg_solve(const SparseSymMatrix& a, std::span<const double> b, const Preconditioner& precond,
                  const CgOptions& options, std::span<const double> x0)
{
    VENTCEL_REQUIRE(a.size() == b.size(), ErrorKind::invalid_argument, "CG dimension mismatch");
    const LinearOperator op = [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
    // The true residual is accumulated in extended precision, so each restart
    // is an iterative-refinement step and the floor is set by rounding x alone.
    const ResidualFunction residual = [&](std::span<const double> x, std::span<double> r) {
        long double total = 0.0L;
        for (std::size_t i = 0; i < a.size(); ++i) {
            long double s = b[i];
            for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
                s -= static_cast<long double>(a.values()[p]) * x[static_cast<std::size_t>(a.cols()[p])];
            }
            r[i] = static_cast<double>(s);
            total += s * s;
        }
        return static_cast<double>(std::sqrt(total));
    };
    return cg_core(op, residual, b, precond, options, x0);
}

} // namespace ventcel
