#include <algorithm>
#include <cmath>
#include <limits>

#include "ventcel/error.hpp"
#include "ventcel/linalg.hpp"

namespace ventcel {

namespace {

struct SymbolicFactor {
    std::vector<std::size_t> row_ptr;
    std::vector<int> cols;
    // For every column j, the positions p (in row k < j) with cols[p] == j.
    std::vector<std::vector<std::size_t>> column_entries;
    std::vector<int> row_of;
};

// Level-of-fill pattern of U: lev(i, j) = min over k < i of
// lev(k, i) + lev(k, j) + 1, entries of A having level 0.
// Stops early (returns false) once the pattern would exceed max_entries.
bool symbolic_ic(const SparseSymMatrix& a, int fill_level, std::size_t max_entries, SymbolicFactor& s)
{
    const std::size_t n = a.size();
    s = SymbolicFactor{};
    s.row_ptr.assign(1, 0);
    s.column_entries.resize(n);
    std::vector<int> levels;
    std::vector<int> level_of(n, std::numeric_limits<int>::max());
    std::vector<int> row;

    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        level_of[i] = 0;
        row.push_back(static_cast<int>(i));
        for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
            const int j = a.cols()[p];
            if (static_cast<std::size_t>(j) > i) {
                level_of[j] = 0;
                row.push_back(j);
            }
        }
        for (std::size_t pos : s.column_entries[i]) {
            const int lev_ki = levels[pos];
            if (lev_ki >= fill_level) {
                continue;
            }
            // Row k entries after `pos` have columns > i.
            const std::size_t row_end = s.row_ptr[s.row_of[pos] + 1];
            for (std::size_t q = pos + 1; q < row_end; ++q) {
                const int j = s.cols[q];
                const int lev = lev_ki + levels[q] + 1;
                if (lev > fill_level) {
                    continue;
                }
                if (level_of[j] == std::numeric_limits<int>::max()) {
                    row.push_back(j);
                    level_of[j] = lev;
                } else if (lev < level_of[j]) {
                    level_of[j] = lev;
                }
            }
        }
        std::sort(row.begin() + 1, row.end());
        for (int j : row) {
            const std::size_t p = s.cols.size();
            s.cols.push_back(j);
            s.row_of.push_back(static_cast<int>(i));
            levels.push_back(level_of[j]);
            level_of[j] = std::numeric_limits<int>::max();
            if (static_cast<std::size_t>(j) > i) {
                s.column_entries[j].push_back(p);
            }
        }
        s.row_ptr.push_back(s.cols.size());
        if (s.cols.size() > max_entries) {
            return false;
        }
    }
    return true;
}

// Returns false on a nonpositive pivot.
bool numeric_ic(const SparseSymMatrix& a, const SymbolicFactor& s, double shift, std::vector<double>& values)
{
    const std::size_t n = a.size();
    values.assign(s.cols.size(), 0.0);
    std::vector<double> work(n, 0.0);
    std::vector<char> in_row(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t rb = s.row_ptr[i];
        const std::size_t re = s.row_ptr[i + 1];
        for (std::size_t p = rb; p < re; ++p) {
            in_row[s.cols[p]] = 1;
        }
        for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
            const int j = a.cols()[p];
            if (static_cast<std::size_t>(j) >= i) {
                work[j] = a.values()[p];
            }
        }
        work[i] += shift;
        for (std::size_t pos : s.column_entries[i]) {
            const double u_ki = values[pos];
            if (u_ki == 0.0) {
                continue;
            }
            const std::size_t k_end = s.row_ptr[s.row_of[pos] + 1];
            // Updates outside the row i pattern are dropped.
            for (std::size_t q = pos; q < k_end; ++q) {
                const int j = s.cols[q];
                if (in_row[j]) {
                    work[j] -= u_ki * values[q];
                }
            }
        }
        const double pivot = work[i];
        if (!(pivot > 0.0) || !std::isfinite(pivot)) {
            return false;
        }
        const double d = std::sqrt(pivot);
        values[rb] = d;
        work[i] = 0.0;
        for (std::size_t p = rb + 1; p < re; ++p) {
            values[p] = work[s.cols[p]] / d;
            work[s.cols[p]] = 0.0;
            in_row[s.cols[p]] = 0;
        }
        in_row[i] = 0;
    }
    return true;
}

} // namespace

IncompleteCholesky IncompleteCholesky::factorize(const SparseSymMatrix& a, int fill_level)
{
    return factorize_within(a, fill_level, 0.0);
}

IncompleteCholesky IncompleteCholesky::factorize_within(const SparseSymMatrix& a, int max_fill_level,
                                                        double max_factor_ratio)
{
    VENTCEL_REQUIRE(max_fill_level >= 0, ErrorKind::invalid_argument, "fill level must be nonnegative");
    VENTCEL_REQUIRE(a.is_symmetric(1e-12), ErrorKind::invalid_argument, "incomplete Cholesky needs a symmetric matrix");
    const std::size_t cap = max_factor_ratio > 0.0
                                ? static_cast<std::size_t>(max_factor_ratio * static_cast<double>(a.nnz()))
                                : std::numeric_limits<std::size_t>::max();
    SymbolicFactor s;
    int fill_level = max_fill_level;
    while (fill_level > 0 && !symbolic_ic(a, fill_level, cap, s)) {
        --fill_level;
    }
    if (fill_level == 0) {
        symbolic_ic(a, 0, std::numeric_limits<std::size_t>::max(), s);
    }

    IncompleteCholesky ic;
    ic.n_ = a.size();
    ic.fill_level_ = fill_level;
    ic.row_ptr_ = s.row_ptr;
    ic.cols_ = s.cols;

    double max_diag = 0.0;
    for (double d : a.diagonal_values()) {
        max_diag = std::max(max_diag, std::abs(d));
    }
    if (max_diag == 0.0) {
        max_diag = 1.0;
    }
    double shift = 0.0;
    if (numeric_ic(a, s, shift, ic.values_)) {
        return ic;
    }
    shift = 1e-8 * max_diag;
    for (int attempt = 0; attempt < 30; ++attempt, shift *= 2.0) {
        if (numeric_ic(a, s, shift, ic.values_)) {
            ic.shift_ = shift;
            return ic;
        }
    }
    throw Error(ErrorKind::factorization_failed, "incomplete Cholesky breakdown persists after 30 diagonal shifts");
}

void IncompleteCholesky::apply(std::span<const double> r, std::span<double> z) const
{
    VENTCEL_REQUIRE(r.size() == n_ && z.size() == n_, ErrorKind::invalid_argument, "preconditioner size mismatch");
    std::copy(r.begin(), r.end(), z.begin());
    // U^T y = r
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t rb = row_ptr_[i];
        const double yi = z[i] / values_[rb];
        z[i] = yi;
        for (std::size_t p = rb + 1; p < row_ptr_[i + 1]; ++p) {
            z[cols_[p]] -= values_[p] * yi;
        }
    }
    // U z = y
    for (std::size_t i = n_; i-- > 0;) {
        const std::size_t rb = row_ptr_[i];
        double s = z[i];
        for (std::size_t p = rb + 1; p < row_ptr_[i + 1]; ++p) {
            s -= values_[p] * z[cols_[p]];
        }
        z[i] = s / values_[rb];
    }
}

Eigen::MatrixXd IncompleteCholesky::upper_factor() const
{
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            u(static_cast<Eigen::Index>(i), cols_[p]) = values_[p];
        }
    }
    return u;
}

} // namespace ventcel
