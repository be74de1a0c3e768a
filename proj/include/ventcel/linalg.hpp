#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ventcel {

using Vector = std::vector<double>;

/// Symmetric sparse matrix in CSR layout with both triangles stored and
/// column indices sorted within each row.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;
    /// Validates sortedness and symmetry of the pattern; throws invalid_argument.
    SparseSymMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<int> cols,
                    std::vector<double> values);

    struct Triplet {
        int row;
        int col;
        double value;
    };
    /// Duplicates are summed. Throws invalid_argument if the result is not symmetric.
    static SparseSymMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets);
    static SparseSymMatrix from_dense(const Eigen::MatrixXd& dense, double drop = 0.0);
    static SparseSymMatrix identity(std::size_t n);
    static SparseSymMatrix diagonal(std::span<const double> d);

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    [[nodiscard]] const std::vector<int>& cols() const noexcept { return cols_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::vector<double>& mutable_values() noexcept { return values_; }

    /// Stored entry or 0.
    [[nodiscard]] double operator()(int i, int j) const;
    /// Position of (i, j) in values(), or -1.
    [[nodiscard]] std::ptrdiff_t find(int i, int j) const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    [[nodiscard]] Vector diagonal_values() const;
    [[nodiscard]] bool is_symmetric(double rtol = 1e-14) const;
    [[nodiscard]] Eigen::MatrixXd to_dense() const;
    [[nodiscard]] double sum() const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> values_;
};

/// y = A x. Throws invalid_argument on dimension mismatch.
Vector spmv(const SparseSymMatrix& a, std::span<const double> x);

/// alpha * A + beta * B on the union pattern.
SparseSymMatrix add(const SparseSymMatrix& a, double alpha, const SparseSymMatrix& b, double beta);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// Preconditioning ----------------------------------------------------------

class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
public:
    void apply(std::span<const double> r, std::span<double> z) const override;
};

/// Level-of-fill incomplete Cholesky A ~ U^T U.
class IncompleteCholesky final : public Preconditioner {
public:
    /// Throws invalid_argument for a nonsymmetric input and factorization_failed
    /// when 30 doubling diagonal shifts do not remove pivot breakdown.
    static IncompleteCholesky factorize(const SparseSymMatrix& a, int fill_level = 3);
    /// Highest level <= max_fill_level whose factor holds at most
    /// max_factor_ratio * nnz(A) entries (level 0 always accepted).
    /// A nonpositive ratio means no cap.
    static IncompleteCholesky factorize_within(const SparseSymMatrix& a, int max_fill_level,
                                               double max_factor_ratio);

    void apply(std::span<const double> r, std::span<double> z) const override;

    [[nodiscard]] int fill_level() const noexcept { return fill_level_; }
    [[nodiscard]] double shift() const noexcept { return shift_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
    /// Dense U (tests only).
    [[nodiscard]] Eigen::MatrixXd upper_factor() const;

private:
    std::size_t n_ = 0;
    int fill_level_ = 0;
    double shift_ = 0.0;
    std::vector<std::size_t> row_ptr_;  // row i of U; diagonal first
    std::vector<int> cols_;
    std::vector<double> values_;
};

// Conjugate gradients ------------------------------------------------------

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct CgOptions {
    double tol = 1e-11;
    long max_iterations = -1;  // negative: 10 * N
    bool throw_on_failure = true;
};

struct CgResult {
    Vector x;
    long iterations = 0;
    double relative_residual = 0.0;  // true residual ||b - Ax|| / ||b||
    bool converged = false;
};

/// Preconditioned CG. Convergence is declared on the recomputed true residual.
/// Throws solver_stalled (unless disabled) when the iteration cap is hit.
CgResult cg_solve(const LinearOperator& a, std::span<const double> b, const Preconditioner& precond,
                  const CgOptions& options = {}, std::span<const double> x0 = {});
CgResult cg_solve(const SparseSymMatrix& a, std::span<const double> b, const Preconditioner& precond,
                  const CgOptions& options = {}, std::span<const double> x0 = {});

// Eigensolver --------------------------------------------------------------

struct EigenPair {
    double eigenvalue = 0.0;
    Vector vector;
    double algebraic_residual = 0.0;   // ||A U - lambda B U||_2 / ||U||_2, solver path
    double functional_residual = 0.0;  // same quotient recomputed by functional_residual()
    bool converged = false;
};

struct LanczosOptions {
    double sigma = -1.0;
    int nev = 1;
    double tol = 1e-10;
    double inner_tol = 1e-11;
    int fill_level = 3;
    double max_factor_ratio = 0.0;  // see IncompleteCholesky::factorize_within
    std::uint64_t seed = 0;
    long max_iterations = -1;  // negative: 5 * nev * sqrt(N)
    int max_basis = 160;
    /// Eigenvectors are normalized so that U^T M U = 1; B when null.
    const SparseSymMatrix* normalization = nullptr;
};

struct LanczosStats {
    long iterations = 0;  // operator applications inside Lanczos runs
    int runs = 0;
    long inner_solves = 0;
    long inner_iterations = 0;
    double max_inner_residual = 0.0;
    double max_orthogonality_drift = 0.0;
    int fill_level = 0;  // IC level actually used by the inner solves
};

struct LanczosResult {
    std::vector<EigenPair> pairs;  // ascending eigenvalues
    bool converged = false;        // nev pairs found, or every finite eigenvalue found
    bool exhausted = false;        // the pencil has fewer than nev finite eigenvalues
    LanczosStats stats;
};

/// Shift-invert Lanczos for A U = lambda B U (A, B symmetric PSD, A - sigma B SPD),
/// run on (A - sigma B)^{-1} B in the B inner product with full
/// reorthogonalization, locking and restarts. Returns the nev smallest finite
/// eigenvalues.
LanczosResult lanczos_shift_invert(const SparseSymMatrix& a, const SparseSymMatrix& b,
                                   const LanczosOptions& options);

/// ||A U - lambda B U||_2 / ||U||_2.
double functional_residual(const SparseSymMatrix& a, const SparseSymMatrix& b, const EigenPair& pair);
/// Same quotient measured in the M-norm (comparison only).
double mass_weighted_residual(const SparseSymMatrix& a, const SparseSymMatrix& b, const SparseSymMatrix& m,
                              const EigenPair& pair);

struct EigenCluster {
    std::size_t first = 0;
    std::size_t count = 0;
    double mean = 0.0;
};

/// Groups sorted eigenvalues whose consecutive relative gap is below rtol
/// (absolute for values near zero).
std::vector<EigenCluster> cluster_eigenvalues(std::span<const double> sorted, double rtol = 1e-3);

} // namespace ventcel
