#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include <Eigen/Eigenvalues>

#include "ventcel/error.hpp"
#include "ventcel/linalg.hpp"

namespace ventcel {

namespace {

// B-orthonormal vectors together with their images under B.
struct BBasis {
    std::vector<Vector> v;
    std::vector<Vector> bv;

    [[nodiscard]] std::size_t size() const { return v.size(); }

    void push(Vector x, Vector bx)
    {
        v.push_back(std::move(x));
        bv.push_back(std::move(bx));
    }

    // w -= sum_i (bv_i . w) v_i. Returns the largest coefficient removed.
    double project_out(Vector& w) const
    {
        double largest = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double c = dot(bv[i], w);
            largest = std::max(largest, std::abs(c));
            const Vector& vi = v[i];
            for (std::size_t k = 0; k < w.size(); ++k) {
                w[k] -= c * vi[k];
            }
        }
        return largest;
    }
};

class ShiftInvertOperator {
public:
    ShiftInvertOperator(const SparseSymMatrix& a, const SparseSymMatrix& b, const LanczosOptions& opt,
                        LanczosStats& stats)
        : b_(b), k_(add(a, 1.0, b, -opt.sigma)), ic_(IncompleteCholesky::factorize_within(k_, opt.fill_level, opt.max_factor_ratio)),
          stats_(stats)
    {
        cg_.tol = opt.inner_tol;
        stats_.fill_level = ic_.fill_level();
    }

    // (A - sigma B)^{-1} B x
    Vector apply(std::span<const double> x) const
    {
        const Vector bx = spmv(b_, x);
        CgResult r = cg_solve(k_, bx, ic_, cg_);
        ++stats_.inner_solves;
        stats_.inner_iterations += r.iterations;
        stats_.max_inner_residual = std::max(stats_.max_inner_residual, r.relative_residual);
        return std::move(r.x);
    }

private:
    const SparseSymMatrix& b_;
    SparseSymMatrix k_;
    IncompleteCholesky ic_;
    CgOptions cg_;
    LanczosStats& stats_;
};

double uniform(std::mt19937_64& rng) { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; }

struct Candidate {
    double lambda = 0.0;
    Vector u;   // B-normalized
    Vector bu;
    double residual = 0.0;
};

Candidate make_candidate(const SparseSymMatrix& a, const SparseSymMatrix& b, Vector u)
{
    Candidate c;
    c.bu = spmv(b, u);
    const double bnorm = std::sqrt(std::max(dot(u, c.bu), 0.0));
    for (std::size_t k = 0; k < u.size(); ++k) {
        u[k] /= bnorm;
        c.bu[k] /= bnorm;
    }
    const Vector au = spmv(a, u);
    c.lambda = dot(u, au);
    double r2 = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double rk = au[k] - c.lambda * c.bu[k];
        r2 += rk * rk;
    }
    c.residual = std::sqrt(r2) / norm2(u);
    c.u = std::move(u);
    return c;
}

Vector combine(const BBasis& q, const Eigen::VectorXd& s)
{
    Vector y(q.v.front().size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double c = s(static_cast<Eigen::Index>(i));
        for (std::size_t k = 0; k < y.size(); ++k) {
            y[k] += c * q.v[i][k];
        }
    }
    return y;
}

double orthogonality_drift(const BBasis& q)
{
    double drift = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double g = dot(q.v[i], q.bv[j]);
            drift = std::max(drift, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
    }
    return drift;
}

struct RitzSet {
    Eigen::VectorXd theta;  // descending
    Eigen::MatrixXd s;      // matching eigenvectors of T
};

RitzSet ritz(const std::vector<double>& alpha, const std::vector<double>& beta)
{
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd e(std::max<Eigen::Index>(m - 1, 0));
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        e(i) = beta[static_cast<std::size_t>(i)];
    }
    RitzSet out;
    if (m == 1) {
        out.theta = d;
        out.s = Eigen::MatrixXd::Ones(1, 1);
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    out.theta = es.eigenvalues().reverse();
    out.s = es.eigenvectors().rowwise().reverse();
    return out;
}

} // namespace

LanczosResult lanczos_shift_invert(const SparseSymMatrix& a, const SparseSymMatrix& b, const LanczosOptions& opt)
{
    VENTCEL_REQUIRE(a.size() == b.size() && a.size() > 0, ErrorKind::invalid_argument, "pencil size mismatch");
    VENTCEL_REQUIRE(opt.sigma < 0.0, ErrorKind::invalid_argument, "shift must be negative");
    VENTCEL_REQUIRE(opt.nev >= 1, ErrorKind::invalid_argument, "nev must be positive");
    VENTCEL_REQUIRE(opt.max_basis >= 2, ErrorKind::invalid_argument, "max_basis must be at least 2");
    if (opt.normalization != nullptr) {
        VENTCEL_REQUIRE(opt.normalization->size() == a.size(), ErrorKind::invalid_argument,
                        "normalization matrix size mismatch");
    }
    const std::size_t n = a.size();
    const long cap = opt.max_iterations >= 0
                         ? opt.max_iterations
                         : static_cast<long>(std::ceil(5.0 * opt.nev * std::sqrt(static_cast<double>(n))));
    LanczosResult result;
    LanczosStats& stats = result.stats;
    const ShiftInvertOperator op(a, b, opt, stats);
    std::mt19937_64 rng(opt.seed);

    BBasis locked;
    std::vector<Candidate> pairs;  // aligned with `locked`
    // Shift-invert values theta = 1 / (lambda - sigma); the wanted eigenvalues
    // have the largest theta.
    const auto theta_of = [&](double lambda) { return 1.0 / (lambda - opt.sigma); };

    int failed_starts = 0;
    while (stats.iterations < cap) {
        // Fresh start vector inside the range of the operator, deflated against locked pairs.
        Vector v(n);
        for (double& x : v) {
            x = uniform(rng);
        }
        v = op.apply(v);
        Vector bv = spmv(b, v);
        const double before = std::sqrt(std::max(dot(v, bv), 0.0));
        locked.project_out(v);
        locked.project_out(v);
        bv = spmv(b, v);
        const double after = std::sqrt(std::max(dot(v, bv), 0.0));
        if (!(before > 0.0) || after <= 1e-8 * before) {
            if (++failed_starts >= 3) {
                result.exhausted = true;
                break;
            }
            continue;
        }
        failed_starts = 0;
        ++stats.runs;
        for (std::size_t k = 0; k < n; ++k) {
            v[k] /= after;
            bv[k] /= after;
        }

        const std::size_t already = pairs.size();
        const std::size_t wanted =
            already >= static_cast<std::size_t>(opt.nev) ? 1 : static_cast<std::size_t>(opt.nev) - already;

        BBasis q;
        q.push(std::move(v), std::move(bv));
        std::vector<double> alpha;
        std::vector<double> beta;
        RitzSet rs;
        bool invariant = false;
        std::size_t last_verified_dim = 0;

        for (;;) {
            const std::size_t j = q.size() - 1;
            Vector w = op.apply(q.v[j]);
            ++stats.iterations;
            alpha.push_back(dot(q.bv[j], w));
            locked.project_out(w);
            q.project_out(w);
            locked.project_out(w);
            q.project_out(w);
            Vector bw = spmv(b, w);
            const double bnorm = std::sqrt(std::max(dot(w, bw), 0.0));
            rs = ritz(alpha, beta);
            const double theta_max = std::abs(rs.theta(0));
            invariant = bnorm <= 1e-14 * std::max(theta_max, 1e-300);

            // Leading Ritz values whose Lanczos estimate |beta_j s_j| is small.
            std::size_t settled = 0;
            for (Eigen::Index i = 0; i < rs.theta.size(); ++i) {
                const double th = rs.theta(i);
                if (th <= 1e-10 * theta_max) {
                    break;
                }
                const double estimate = bnorm * std::abs(rs.s(static_cast<Eigen::Index>(j), i));
                if (estimate > 1e-7 * th) {
                    break;
                }
                ++settled;
            }
            const bool full = q.size() >= static_cast<std::size_t>(opt.max_basis) || q.size() >= n;
            const bool out_of_budget = stats.iterations >= cap;
            bool done = invariant || full || out_of_budget;
            if (!done && settled >= wanted && q.size() >= last_verified_dim + 3) {
                // Confirm the wanted leading pairs with true residuals on the unpurified Ritz vectors.
                last_verified_dim = q.size();
                bool all_ok = true;
                for (std::size_t i = 0; i < wanted && all_ok; ++i) {
                    const Candidate c =
                        make_candidate(a, b, combine(q, rs.s.col(static_cast<Eigen::Index>(i))));
                    all_ok = c.residual <= 0.5 * opt.tol;
                }
                done = all_ok;
            }
            if (done) {
                break;
            }
            for (std::size_t k = 0; k < n; ++k) {
                w[k] /= bnorm;
                bw[k] /= bnorm;
            }
            beta.push_back(bnorm);
            q.push(std::move(w), std::move(bw));
        }
        stats.max_orthogonality_drift = std::max(stats.max_orthogonality_drift, orthogonality_drift(q));

        // Once nev pairs are locked a run only confirms: a pair is locked only
        // if it beats the current nev-th eigenvalue.
        std::optional<double> nev_theta;
        if (already >= static_cast<std::size_t>(opt.nev)) {
            std::vector<double> th;
            for (std::size_t i = 0; i < already; ++i) {
                th.push_back(theta_of(pairs[i].lambda));
            }
            std::sort(th.begin(), th.end(), std::greater<>());
            nev_theta = th[static_cast<std::size_t>(opt.nev) - 1] * (1.0 + 1e-9);
        }

        // Lock up to `wanted` leading Ritz pairs that verify, purified by one
        // more operator application. Pairs past the wanted count are left
        // alone: their looser residuals would pollute later deflation.
        const double theta_max = std::abs(rs.theta(0));
        std::optional<double> run_top;
        std::size_t locked_now = 0;
        for (Eigen::Index i = 0; i < rs.theta.size(); ++i) {
            const double th = rs.theta(i);
            if (th <= 1e-10 * theta_max) {
                break;
            }
            Vector y = combine(q, rs.s.col(i));
            Candidate raw = make_candidate(a, b, y);
            if (raw.residual > 1e3 * opt.tol) {
                break;
            }
            // The Rayleigh quotient is accurate to the squared residual, enough to rank.
            if (!run_top) {
                run_top = theta_of(raw.lambda);
            }
            if (nev_theta ? theta_of(raw.lambda) <= *nev_theta : locked_now >= wanted) {
                break;
            }
            Vector u = op.apply(raw.u);
            locked.project_out(u);
            locked.project_out(u);
            Candidate pure = make_candidate(a, b, std::move(u));
            Candidate& best = pure.residual <= raw.residual ? pure : raw;
            if (best.residual > opt.tol) {
                break;
            }
            locked.push(best.u, best.bu);
            pairs.push_back(std::move(best));
            ++locked_now;
        }

        if (nev_theta && run_top && *run_top <= *nev_theta) {
            // The dominant pair of the deflated complement does not beat the
            // current nev-th pair, so nothing wanted is missing.
            result.converged = true;
            break;
        }
    }
    if (result.exhausted) {
        result.converged = true;
    }
    stats.max_orthogonality_drift = std::max(stats.max_orthogonality_drift, orthogonality_drift(locked));

    std::sort(pairs.begin(), pairs.end(), [](const Candidate& x, const Candidate& y) { return x.lambda < y.lambda; });
    const std::size_t keep = std::min(pairs.size(), static_cast<std::size_t>(opt.nev));
    if (pairs.size() < static_cast<std::size_t>(opt.nev) && !result.exhausted) {
        result.converged = false;
    }
    for (std::size_t i = 0; i < keep; ++i) {
        EigenPair p;
        p.eigenvalue = pairs[i].lambda;
        p.vector = std::move(pairs[i].u);
        p.algebraic_residual = pairs[i].residual;
        p.converged = p.algebraic_residual <= opt.tol;
        if (opt.normalization != nullptr) {
            const Vector mu = spmv(*opt.normalization, p.vector);
            const double s = std::sqrt(dot(p.vector, mu));
            for (double& x : p.vector) {
                x /= s;
            }
        }
        p.functional_residual = functional_residual(a, b, p);
        result.pairs.push_back(std::move(p));
    }
    return result;
}

double functional_residual(const SparseSymMatrix& a, const SparseSymMatrix& b, const EigenPair& pair)
{
    const Vector au = spmv(a, pair.vector);
    const Vector bu = spmv(b, pair.vector);
    Vector r(au.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        r[k] = au[k] - pair.eigenvalue * bu[k];
    }
    return norm2(r) / norm2(pair.vector);
}

double mass_weighted_residual(const SparseSymMatrix& a, const SparseSymMatrix& b, const SparseSymMatrix& m,
                              const EigenPair& pair)
{
    const Vector au = spmv(a, pair.vector);
    const Vector bu = spmv(b, pair.vector);
    Vector r(au.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        r[k] = au[k] - pair.eigenvalue * bu[k];
    }
    const double rm = std::sqrt(std::max(dot(r, spmv(m, r)), 0.0));
    const double um = std::sqrt(std::max(dot(pair.vector, spmv(m, pair.vector)), 0.0));
    return rm / um;
}

std::vector<EigenCluster> cluster_eigenvalues(std::span<const double> sorted, double rtol)
{
    std::vector<EigenCluster> clusters;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const bool joins = !clusters.empty() &&
                           std::abs(sorted[i] - sorted[i - 1]) <= rtol * std::max(1.0, std::abs(sorted[i]));
        if (joins) {
            auto& c = clusters.back();
            c.mean = (c.mean * static_cast<double>(c.count) + sorted[i]) / static_cast<double>(c.count + 1);
            ++c.count;
        } else {
            clusters.push_back({i, 1, sorted[i]});
        }
    }
    return clusters;
}

} // namespace ventcel
