#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ventcel/error.hpp"
#include "ventcel/linalg.hpp"

namespace ventcel {

SparseSymMatrix::SparseSymMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<int> cols,
                                 std::vector<double> values)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values))
{
    VENTCEL_REQUIRE(row_ptr_.size() == n_ + 1 && row_ptr_.front() == 0 && row_ptr_.back() == cols_.size() &&
                        cols_.size() == values_.size(),
                    ErrorKind::invalid_argument, "inconsistent CSR arrays");
    for (std::size_t i = 0; i < n_; ++i) {
        VENTCEL_REQUIRE(row_ptr_[i] <= row_ptr_[i + 1], ErrorKind::invalid_argument, "row_ptr not monotone");
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            VENTCEL_REQUIRE(cols_[p] >= 0 && static_cast<std::size_t>(cols_[p]) < n_, ErrorKind::invalid_argument,
                            "column index out of range");
            VENTCEL_REQUIRE(p == row_ptr_[i] || cols_[p - 1] < cols_[p], ErrorKind::invalid_argument,
                            "columns must be strictly increasing within a row");
        }
    }
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            VENTCEL_REQUIRE(find(cols_[p], static_cast<int>(i)) >= 0, ErrorKind::invalid_argument,
                            "pattern is not symmetric");
        }
    }
}

SparseSymMatrix SparseSymMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets)
{
    std::sort(triplets.begin(), triplets.end(),
              [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<int> cols;
    std::vector<double> values;
    for (std::size_t t = 0; t < triplets.size();) {
        const Triplet& head = triplets[t];
        VENTCEL_REQUIRE(head.row >= 0 && static_cast<std::size_t>(head.row) < n && head.col >= 0 &&
                            static_cast<std::size_t>(head.col) < n,
                        ErrorKind::invalid_argument, "triplet index out of range");
        double v = 0.0;
        std::size_t u = t;
        while (u < triplets.size() && triplets[u].row == head.row && triplets[u].col == head.col) {
            v += triplets[u].value;
            ++u;
        }
        cols.push_back(head.col);
        values.push_back(v);
        ++row_ptr[head.row + 1];
        t = u;
    }
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    SparseSymMatrix m(n, std::move(row_ptr), std::move(cols), std::move(values));
    VENTCEL_REQUIRE(m.is_symmetric(1e-12), ErrorKind::invalid_argument, "triplets are not symmetric");
    return m;
}

SparseSymMatrix SparseSymMatrix::from_dense(const Eigen::MatrixXd& dense, double drop)
{
    VENTCEL_REQUIRE(dense.rows() == dense.cols(), ErrorKind::invalid_argument, "matrix must be square");
    std::vector<Triplet> t;
    for (Eigen::Index i = 0; i < dense.rows(); ++i) {
        for (Eigen::Index j = 0; j < dense.cols(); ++j) {
            if (std::abs(dense(i, j)) > drop || (i == j && drop == 0.0 && dense(i, j) != 0.0)) {
                t.push_back({static_cast<int>(i), static_cast<int>(j), dense(i, j)});
            }
        }
    }
    return from_triplets(static_cast<std::size_t>(dense.rows()), std::move(t));
}

SparseSymMatrix SparseSymMatrix::identity(std::size_t n)
{
    const Vector ones(n, 1.0);
    return diagonal(ones);
}

SparseSymMatrix SparseSymMatrix::diagonal(std::span<const double> d)
{
    const std::size_t n = d.size();
    std::vector<std::size_t> row_ptr(n + 1);
    std::iota(row_ptr.begin(), row_ptr.end(), std::size_t{0});
    std::vector<int> cols(n);
    std::iota(cols.begin(), cols.end(), 0);
    return SparseSymMatrix(n, std::move(row_ptr), std::move(cols), Vector(d.begin(), d.end()));
}

std::ptrdiff_t SparseSymMatrix::find(int i, int j) const
{
    const auto begin = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto end = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) {
        return -1;
    }
    return it - cols_.begin();
}

double SparseSymMatrix::operator()(int i, int j) const
{
    const auto p = find(i, j);
    return p < 0 ? 0.0 : values_[static_cast<std::size_t>(p)];
}

void SparseSymMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    VENTCEL_REQUIRE(x.size() == n_ && y.size() == n_, ErrorKind::invalid_argument, "spmv dimension mismatch");
    const double* v = values_.data();
    const int* c = cols_.data();
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            s += v[p] * x[c[p]];
        }
        y[i] = s;
    }
}

Vector SparseSymMatrix::diagonal_values() const
{
    Vector d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        d[i] = (*this)(static_cast<int>(i), static_cast<int>(i));
    }
    return d;
}

bool SparseSymMatrix::is_symmetric(double rtol) const
{
    double scale = 0.0;
    for (double v : values_) {
        scale = std::max(scale, std::abs(v));
    }
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            const auto q = find(cols_[p], static_cast<int>(i));
            if (q < 0 || std::abs(values_[p] - values_[static_cast<std::size_t>(q)]) > rtol * scale) {
                return false;
            }
        }
    }
    return true;
}

Eigen::MatrixXd SparseSymMatrix::to_dense() const
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            d(static_cast<Eigen::Index>(i), cols_[p]) = values_[p];
        }
    }
    return d;
}

double SparseSymMatrix::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

Vector spmv(const SparseSymMatrix& a, std::span<const double> x)
{
    Vector y(a.size());
    a.multiply(x, y);
    return y;
}

SparseSymMatrix add(const SparseSymMatrix& a, double alpha, const SparseSymMatrix& b, double beta)
{
    VENTCEL_REQUIRE(a.size() == b.size(), ErrorKind::invalid_argument, "matrix sizes differ");
    const std::size_t n = a.size();
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<int> cols;
    std::vector<double> values;
    cols.reserve(std::max(a.nnz(), b.nnz()));
    values.reserve(cols.capacity());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t p = a.row_ptr()[i];
        std::size_t q = b.row_ptr()[i];
        const std::size_t pe = a.row_ptr()[i + 1];
        const std::size_t qe = b.row_ptr()[i + 1];
        while (p < pe || q < qe) {
            const int ca = p < pe ? a.cols()[p] : std::numeric_limits<int>::max();
            const int cb = q < qe ? b.cols()[q] : std::numeric_limits<int>::max();
            if (ca == cb) {
                cols.push_back(ca);
                values.push_back(alpha * a.values()[p++] + beta * b.values()[q++]);
            } else if (ca < cb) {
                cols.push_back(ca);
                values.push_back(alpha * a.values()[p++]);
            } else {
                cols.push_back(cb);
                values.push_back(beta * b.values()[q++]);
            }
        }
        row_ptr[i + 1] = cols.size();
    }
    return SparseSymMatrix(n, std::move(row_ptr), std::move(cols), std::move(values));
}

double dot(std::span<const double> a, std::span<const double> b)
{
    VENTCEL_REQUIRE(a.size() == b.size(), ErrorKind::invalid_argument, "dot dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void IdentityPreconditioner::apply(std::span<const double> r, std::span<double> z) const
{
    std::copy(r.begin(), r.end(), z.begin());
}

} // namespace ventcel
