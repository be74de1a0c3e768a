#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "ventcel/error.hpp"
#include "ventcel/fem.hpp"
#include "ventcel/linalg.hpp"

using namespace ventcel;

namespace {

template <class F>
ErrorKind kind_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected a ventcel::Error";
    return ErrorKind::unsupported;
}

SparseSymMatrix laplacian_1d(int n)
{
    std::vector<SparseSymMatrix::Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i + 1 < n) {
            t.push_back({i, i + 1, -1.0});
            t.push_back({i + 1, i, -1.0});
        }
    }
    return SparseSymMatrix::from_triplets(n, t);
}

Eigen::MatrixXd random_sparse_symmetric(int n, double density, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            if (i == j || std::abs(u(rng)) < density) {
                m(i, j) = m(j, i) = u(rng);
            }
        }
    }
    return m;
}

Eigen::VectorXd as_eigen(const Vector& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

} // namespace

// Sparse matrices -----------------------------------------------------------------

TEST(Sparse, IdentityAndZero)
{
    const Vector x = {1.0, -2.0, 3.5};
    EXPECT_EQ(spmv(SparseSymMatrix::identity(3), x), x);
    EXPECT_EQ(spmv(SparseSymMatrix::from_dense(Eigen::MatrixXd::Zero(3, 3)), x), Vector(3, 0.0));
}

TEST(Sparse, RandomMatchesDense)
{
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd d = random_sparse_symmetric(20, 0.3, rng);
    const SparseSymMatrix s = SparseSymMatrix::from_dense(d);
    EXPECT_LT(s.nnz(), 400u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector x(20);
    for (double& v : x) {
        v = u(rng);
    }
    EXPECT_LT((as_eigen(spmv(s, x)) - d * as_eigen(x)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((s.to_dense() - d).cwiseAbs().maxCoeff(), 0.0 + 1e-300);
}

TEST(Sparse, DimensionMismatch)
{
    EXPECT_EQ(kind_of([] { spmv(SparseSymMatrix::identity(3), Vector(2, 1.0)); }), ErrorKind::invalid_argument);
}

TEST(Sparse, TripletsSumDuplicatesAndRejectAsymmetry)
{
    const SparseSymMatrix s = SparseSymMatrix::from_triplets(2, {{0, 0, 1.0}, {0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}});
    EXPECT_EQ(s(0, 0), 3.0);
    EXPECT_EQ(s.nnz(), 3u);
    EXPECT_EQ(s(1, 1), 0.0);
    EXPECT_EQ(s.find(1, 1), -1);
    EXPECT_EQ(kind_of([] { SparseSymMatrix::from_triplets(2, {{0, 1, 1.0}}); }), ErrorKind::invalid_argument);
}

TEST(Sparse, ConstructorValidatesPattern)
{
    // Unsorted row.
    EXPECT_EQ(kind_of([] { SparseSymMatrix(2, {0, 2, 4}, {1, 0, 0, 1}, {1, 1, 1, 1}); }), ErrorKind::invalid_argument);
    // Entry (0,1) without (1,0).
    EXPECT_EQ(kind_of([] { SparseSymMatrix(2, {0, 2, 3}, {0, 1, 1}, {1, 1, 1}); }), ErrorKind::invalid_argument);
}

TEST(Sparse, AssembledMatricesSymmetricWithoutDuplicates)
{
    const FESpacePtr space = build_fespace(generate_ball_mesh(1), 2);
    for (const SparseSymMatrix& m : {assemble_volume_stiffness(*space), assemble_surface_mass(*space)}) {
        EXPECT_TRUE(m.is_symmetric(1e-14));
        for (std::size_t i = 0; i < m.size(); ++i) {
            for (std::size_t p = m.row_ptr()[i] + 1; p < m.row_ptr()[i + 1]; ++p) {
                EXPECT_LT(m.cols()[p - 1], m.cols()[p]);
            }
        }
    }
}

TEST(Sparse, AddOnUnionPattern)
{
    const SparseSymMatrix a = SparseSymMatrix::diagonal(Vector{1.0, 2.0});
    const SparseSymMatrix b = SparseSymMatrix::from_dense((Eigen::Matrix2d() << 0, 1, 1, 0).finished());
    const SparseSymMatrix c = add(a, 2.0, b, -1.0);
    EXPECT_EQ(c.nnz(), 4u);
    EXPECT_EQ(c(0, 0), 2.0);
    EXPECT_EQ(c(1, 1), 4.0);
    EXPECT_EQ(c(0, 1), -1.0);
}

// Incomplete Cholesky ----------------------------------------------------------------

TEST(IncompleteCholesky, DiagonalIsExact)
{
    const SparseSymMatrix d = SparseSymMatrix::diagonal(Vector{4.0, 9.0, 0.25});
    const IncompleteCholesky ic = IncompleteCholesky::factorize(d);
    EXPECT_EQ(ic.shift(), 0.0);
    const CgResult r = cg_solve(d, Vector{1.0, 2.0, 3.0}, ic);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_NEAR(r.x[2], 12.0, 1e-14);
}

TEST(IncompleteCholesky, BandedLaplacianFactorIsExact)
{
    const SparseSymMatrix a = laplacian_1d(50);
    const IncompleteCholesky ic = IncompleteCholesky::factorize(a, 1);
    const Eigen::MatrixXd u = ic.upper_factor();
    const Eigen::MatrixXd exact = Eigen::LLT<Eigen::MatrixXd>(a.to_dense()).matrixU();
    EXPECT_LT((u - exact).cwiseAbs().maxCoeff(), 1e-14);
    const CgResult r = cg_solve(a, Vector(50, 1.0), ic);
    EXPECT_LE(r.iterations, 2);
    EXPECT_LE(r.relative_residual, 1e-11);
}

TEST(IncompleteCholesky, IndefiniteMatrixTakesShiftPath)
{
    const SparseSymMatrix a = SparseSymMatrix::from_dense((Eigen::Matrix2d() << 1, 2, 2, 1).finished());
    try {
        const IncompleteCholesky ic = IncompleteCholesky::factorize(a);
        EXPECT_GT(ic.shift(), 0.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::factorization_failed);
    }
}

TEST(IncompleteCholesky, RejectsNonsymmetricInput)
{
    EXPECT_EQ(kind_of([] { IncompleteCholesky::factorize(SparseSymMatrix(2, {0, 2, 4}, {0, 1, 0, 1}, {1, 0.5, 0.4, 1})); }),
              ErrorKind::invalid_argument);
}

TEST(IncompleteCholesky, FillGrowsWithLevelAndCapLimitsIt)
{
    const FESpacePtr space = build_fespace(generate_unit_cube_mesh(4), 2);
    const SparseSymMatrix a = add(assemble_volume_stiffness(*space), 1.0, assemble_volume_mass(*space), 1.0);
    std::size_t previous = 0;
    for (int level = 0; level <= 2; ++level) {
        const IncompleteCholesky ic = IncompleteCholesky::factorize(a, level);
        EXPECT_GT(ic.nnz(), previous);
        previous = ic.nnz();
    }
    const IncompleteCholesky capped = IncompleteCholesky::factorize_within(a, 3, 1.0);
    EXPECT_LE(capped.nnz(), a.nnz());
    EXPECT_LT(capped.fill_level(), 3);
    EXPECT_EQ(IncompleteCholesky::factorize_within(a, 3, 0.0).fill_level(), 3);
}

// CG ------------------------------------------------------------------------------

TEST(Cg, IdentityOneIteration)
{
    const Vector b = {1.0, 2.0, 3.0};
    const CgResult r = cg_solve(SparseSymMatrix::identity(3), b, IdentityPreconditioner{});
    EXPECT_EQ(r.x, b);
    EXPECT_EQ(r.iterations, 1);
}

TEST(Cg, TwoByTwoClosedForm)
{
    const SparseSymMatrix a = SparseSymMatrix::from_dense((Eigen::Matrix2d() << 4, 1, 1, 3).finished());
    const CgResult r = cg_solve(a, Vector{1.0, 2.0}, IdentityPreconditioner{});
    EXPECT_NEAR(r.x[0], 1.0 / 11.0, 1e-14);
    EXPECT_NEAR(r.x[1], 7.0 / 11.0, 1e-14);
    EXPECT_TRUE(r.converged);
}

TEST(Cg, ZeroRightHandSide)
{
    const CgResult r = cg_solve(laplacian_1d(10), Vector(10, 0.0), IdentityPreconditioner{});
    EXPECT_EQ(r.x, Vector(10, 0.0));
    EXPECT_EQ(r.iterations, 0);
    EXPECT_TRUE(r.converged);
}

TEST(Cg, StallReportsResidual)
{
    CgOptions opts;
    opts.max_iterations = 2;
    EXPECT_EQ(kind_of([&] { cg_solve(laplacian_1d(100), Vector(100, 1.0), IdentityPreconditioner{}, opts); }),
              ErrorKind::solver_stalled);
    opts.throw_on_failure = false;
    const CgResult r = cg_solve(laplacian_1d(100), Vector(100, 1.0), IdentityPreconditioner{}, opts);
    EXPECT_FALSE(r.converged);
    EXPECT_GT(r.relative_residual, 1e-11);
}

TEST(Cg, FemSystemReachesTolerance)
{
    const FESpacePtr space = build_fespace(generate_unit_cube_mesh(4), 3);
    const SparseSymMatrix a = add(assemble_volume_stiffness(*space), 1.0, assemble_volume_mass(*space), 1.0);
    const Vector b = assemble_load(*space, [](const Vec3& x) { return std::cos(x.x()) + x.y(); });
    const CgResult r = cg_solve(a, b, IncompleteCholesky::factorize(a));
    EXPECT_LE(r.relative_residual, 1e-11);
    const Vector ax = spmv(a, r.x);
    double res = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        res += (b[i] - ax[i]) * (b[i] - ax[i]);
    }
    EXPECT_LE(std::sqrt(res) / norm2(b), 1e-11);
}

// Lanczos ---------------------------------------------------------------------------

TEST(Lanczos, DiagonalPencil)
{
    LanczosOptions opts;
    opts.nev = 1;
    const LanczosResult r =
        lanczos_shift_invert(SparseSymMatrix::diagonal(Vector{1.0, 2.0, 3.0}), SparseSymMatrix::identity(3), opts);
    ASSERT_EQ(r.pairs.size(), 1u);
    EXPECT_NEAR(r.pairs[0].eigenvalue, 1.0, 1e-12);
    EXPECT_NEAR(std::abs(r.pairs[0].vector[0]), 1.0, 1e-10);
    EXPECT_LE(r.pairs[0].algebraic_residual, 1e-10);
}

TEST(Lanczos, InfiniteEigenvalueFiltered)
{
    LanczosOptions opts;
    opts.nev = 1;
    const LanczosResult r = lanczos_shift_invert(SparseSymMatrix::diagonal(Vector{1.0, 2.0}),
                                                 SparseSymMatrix::diagonal(Vector{1.0, 0.0}), opts);
    ASSERT_EQ(r.pairs.size(), 1u);
    EXPECT_NEAR(r.pairs[0].eigenvalue, 1.0, 1e-12);
    EXPECT_TRUE(r.converged);

    opts.nev = 2;
    const LanczosResult more = lanczos_shift_invert(SparseSymMatrix::diagonal(Vector{1.0, 2.0}),
                                                    SparseSymMatrix::diagonal(Vector{1.0, 0.0}), opts);
    EXPECT_EQ(more.pairs.size(), 1u);
    EXPECT_TRUE(more.exhausted);
}

TEST(Lanczos, SphereSpectrumZeroThenTriplet)
{
    const FESpacePtr space = build_fespace(generate_sphere_mesh(3), 1);
    LanczosOptions opts;
    opts.nev = 5;
    const LanczosResult r =
        lanczos_shift_invert(assemble_surface_stiffness(*space), assemble_surface_mass(*space), opts);
    ASSERT_TRUE(r.converged);
    ASSERT_EQ(r.pairs.size(), 5u);
    EXPECT_NEAR(r.pairs[0].eigenvalue, 0.0, 1e-10);
    for (int i = 1; i <= 3; ++i) {
        EXPECT_NEAR(r.pairs[i].eigenvalue, 2.0, 0.05);
    }
    EXPECT_LT(r.pairs[3].eigenvalue - r.pairs[1].eigenvalue, 1e-8);
    EXPECT_GT(r.pairs[4].eigenvalue, 5.0);
    for (const EigenPair& p : r.pairs) {
        EXPECT_LE(p.algebraic_residual, 1e-10);
        EXPECT_LE(p.functional_residual, 1e-9);
    }
    const auto clusters = cluster_eigenvalues(std::vector<double>{r.pairs[0].eigenvalue, r.pairs[1].eigenvalue,
                                                                  r.pairs[2].eigenvalue, r.pairs[3].eigenvalue,
                                                                  r.pairs[4].eigenvalue});
    ASSERT_EQ(clusters.size(), 3u);
    EXPECT_EQ(clusters[1].count, 3u);
}

TEST(Lanczos, MatchesDenseSolveAndNormalization)
{
    const FESpacePtr space = build_fespace(generate_unit_square_mesh(6), 2);
    const SparseSymMatrix a = assemble_stiffness(*space);
    const SparseSymMatrix b = assemble_mass(*space);
    LanczosOptions opts;
    opts.nev = 8;
    const LanczosResult r = lanczos_shift_invert(a, b, opts);
    ASSERT_TRUE(r.converged);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(a.to_dense(), b.to_dense());
    for (int i = 0; i < 8; ++i) {
        const double ref = dense.eigenvalues()[i];
        EXPECT_NEAR(r.pairs[i].eigenvalue, ref, 1e-8 * std::max(1.0, ref)) << i;
        const Vector bu = spmv(b, r.pairs[i].vector);
        EXPECT_NEAR(dot(r.pairs[i].vector, bu), 1.0, 1e-12);
        for (int j = 0; j < i; ++j) {
            EXPECT_LT(std::abs(dot(r.pairs[j].vector, bu)), 1e-9);
        }
    }
    EXPECT_LE(r.stats.max_orthogonality_drift, 1e-10);
}

TEST(Lanczos, DeterministicForFixedSeed)
{
    const FESpacePtr space = build_fespace(generate_sphere_mesh(2), 2);
    const SparseSymMatrix a = assemble_surface_stiffness(*space);
    const SparseSymMatrix b = assemble_surface_mass(*space);
    LanczosOptions opts;
    opts.nev = 4;
    opts.seed = 17;
    const LanczosResult r1 = lanczos_shift_invert(a, b, opts);
    const LanczosResult r2 = lanczos_shift_invert(a, b, opts);
    ASSERT_EQ(r1.pairs.size(), r2.pairs.size());
    for (std::size_t i = 0; i < r1.pairs.size(); ++i) {
        EXPECT_EQ(r1.pairs[i].eigenvalue, r2.pairs[i].eigenvalue);
        EXPECT_EQ(r1.pairs[i].vector, r2.pairs[i].vector);
    }
}

// Residuals ----------------------------------------------------------------------

TEST(FunctionalResidual, ExactPairIsZero)
{
    Eigen::Matrix3d ad;
    ad << 2, -1, 0, -1, 2, -1, 0, -1, 2;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(ad);
    EigenPair p;
    p.eigenvalue = es.eigenvalues()[0];
    p.vector = Vector(es.eigenvectors().col(0).data(), es.eigenvectors().col(0).data() + 3);
    EXPECT_LT(functional_residual(SparseSymMatrix::from_dense(ad), SparseSymMatrix::identity(3), p), 1e-14);
}

TEST(FunctionalResidual, HomogeneousInVectorScale)
{
    const SparseSymMatrix a = laplacian_1d(5);
    const SparseSymMatrix b = SparseSymMatrix::identity(5);
    EigenPair p;
    p.eigenvalue = 0.3;
    p.vector = {1.0, -0.5, 0.25, 2.0, 0.1};
    const double r1 = functional_residual(a, b, p);
    for (double& v : p.vector) {
        v *= -7.5;
    }
    EXPECT_NEAR(functional_residual(a, b, p), r1, 1e-14 * r1);
    EXPECT_GE(mass_weighted_residual(a, b, SparseSymMatrix::identity(5), p), 0.0);
}

TEST(Clusters, GroupsByRelativeGap)
{
    const auto c = cluster_eigenvalues(std::vector<double>{1e-15, 2.0, 2.0001, 2.0002, 6.0});
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c[0].count, 1u);
    EXPECT_EQ(c[1].first, 1u);
    EXPECT_EQ(c[1].count, 3u);
    EXPECT_NEAR(c[1].mean, 2.0001, 1e-12);
}
