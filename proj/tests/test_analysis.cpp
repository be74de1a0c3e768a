#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ventcel/analysis.hpp"
#include "ventcel/error.hpp"
#include "ventcel/fem.hpp"

using namespace ventcel;

namespace {

constexpr double kPi = std::numbers::pi;

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

std::vector<Vec3> points_in_ball(int count, double radius, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    std::vector<Vec3> out;
    while (static_cast<int>(out.size()) < count) {
        const Vec3 p(u(rng), u(rng), u(rng));
        if (p.norm() < radius && p.norm() > 0.1 * radius) {
            out.push_back(p);
        }
    }
    return out;
}

// The 7-point stencil error of a quartic is exactly c h^2, so one Richardson
// step leaves only rounding.
double richardson_laplacian(const AnalyticField& f, const Vec3& x)
{
    const double coarse = fd_laplacian(f, x, 0.02);
    const double fine = fd_laplacian(f, x, 0.01);
    return (4.0 * fine - coarse) / 3.0;
}

void expect_fd_consistent(const AnalyticField& f, std::span<const Vec3> points, const std::string& what)
{
    EXPECT_LE(gradient_fd_mismatch(f, points, 1e-5), 1e-6) << what;
}

} // namespace

// Analytic fields --------------------------------------------------------------------

TEST(AnalyticFields, GradientsMatchFiniteDifferences)
{
    const auto pts = points_in_ball(50, 1.0, 1);
    std::vector<Vec3> unit_cube;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        unit_cube.emplace_back(u(rng), u(rng), u(rng));
    }
    expect_fd_consistent(flat_cosine_solution(2), unit_cube, "cos2");
    expect_fd_consistent(flat_cosine_solution(3), unit_cube, "cos3");
    expect_fd_consistent(flat_cosine_source(3), unit_cube, "source3");
    expect_fd_consistent(exp_x_field(), pts, "exp");
    expect_fd_consistent(exp_x_sphere_source(), pts, "exp source");
    expect_fd_consistent(sphere_lift(exp_x_field()), pts, "lifted exp");
    for (const AnalyticField& f : lifted_sphere_eigenbasis().members) {
        expect_fd_consistent(f, pts, "lifted coordinate");
    }
    for (int n = 0; n <= 4; ++n) {
        for (const AnalyticField& f : harmonic_basis(n).members) {
            expect_fd_consistent(f, pts, "harmonic " + std::to_string(n));
        }
    }
    for (int d : {2, 3}) {
        for (const AnalyticField& f : flat_cosine_eigenbasis(d).members) {
            expect_fd_consistent(f, unit_cube, "cosine eigenbasis");
        }
    }
}

TEST(AnalyticFields, FlatSourceMatchesNegativeLaplacianPlusIdentity)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (int d : {2, 3}) {
        const AnalyticField sol = flat_cosine_solution(d);
        const AnalyticField src = flat_cosine_source(d);
        for (int i = 0; i < 10; ++i) {
            const Vec3 x(u(rng), u(rng), d == 3 ? u(rng) : 0.0);
            EXPECT_NEAR(-fd_laplacian(sol, x, 1e-3) + sol(x), src(x), 1e-4);
        }
    }
}

TEST(AnalyticFields, SphereSourceIsLaplaceBeltramiOfExp)
{
    // On the unit sphere, Delta_B u = Delta U - 2 dU/dr - d2U/dr2 for the ambient U = exp(x).
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    const AnalyticField u = exp_x_field();
    const AnalyticField f = exp_x_sphere_source();
    for (int i = 0; i < 10; ++i) {
        const Vec3 p = Vec3(g(rng), g(rng), g(rng)).normalized();
        const double du_dr = std::exp(p.x()) * p.x();
        const double d2u_dr2 = std::exp(p.x()) * p.x() * p.x();
        const double lb = std::exp(p.x()) - 2.0 * du_dr - d2u_dr2;
        EXPECT_NEAR(f(p), -lb + u(p), 1e-13);
    }
}

TEST(SphereLift, ValuesAndOrigin)
{
    const AnalyticField lifted = sphere_lift(exp_x_field());
    for (const Vec3& v : generate_sphere_mesh(1).vertices) {
        EXPECT_NEAR(lifted(v), std::exp(v.x() / v.norm()), 1e-15);
        EXPECT_NEAR(lifted(2.5 * v), std::exp(v.x() / v.norm()), 1e-14);
    }
    EXPECT_EQ(kind_of([&] { lifted(Vec3::Zero()); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([&] { lifted.gradient(Vec3::Zero()); }), ErrorKind::invalid_argument);
}

TEST(SphereLift, GradientIsTangentialOnSphere)
{
    const AnalyticField lifted = sphere_lift(exp_x_field());
    for (const Vec3& v : generate_sphere_mesh(1).vertices) {
        EXPECT_LT(std::abs(lifted.gradient(v).dot(v)), 1e-14);
    }
}

TEST(LiftedEigenbasis, ScaleInvariant)
{
    const EigenspaceBasis b = lifted_sphere_eigenbasis();
    ASSERT_EQ(b.dimension(), 3u);
    const Vec3 x(0.3, -0.4, 1.2);
    for (const AnalyticField& f : b.members) {
        EXPECT_NEAR(f(x), f(2.0 * x), 1e-15);
    }
}

// Harmonic basis ------------------------------------------------------------------

TEST(HarmonicBasis, DimensionsAndHarmonicity)
{
    EXPECT_EQ(harmonic_basis(0).dimension(), 1u);
    EXPECT_EQ(harmonic_basis(0).members[0](Vec3(0.3, 0.2, 0.1)), 1.0);
    const EigenspaceBasis b1 = harmonic_basis(1);
    ASSERT_EQ(b1.dimension(), 3u);
    const Vec3 x(0.3, -0.2, 0.7);
    EXPECT_EQ(b1.members[0](x), x.x());
    EXPECT_EQ(b1.members[1](x), x.y());
    EXPECT_EQ(b1.members[2](x), x.z());
    const auto pts = points_in_ball(20, 1.0, 9);
    for (int n = 0; n <= 4; ++n) {
        const EigenspaceBasis b = harmonic_basis(n);
        EXPECT_EQ(b.dimension(), static_cast<std::size_t>(2 * n + 1));
        for (const AnalyticField& f : b.members) {
            for (const Vec3& p : pts) {
                EXPECT_LE(std::abs(richardson_laplacian(f, p)), 1e-8) << n;
                // Homogeneous of degree n.
                EXPECT_NEAR(f(2.0 * p), std::pow(2.0, n) * f(p), 1e-12 * std::max(1.0, std::abs(f(2.0 * p))));
            }
        }
    }
    EXPECT_EQ(kind_of([] { harmonic_basis(5); }), ErrorKind::unsupported);
    EXPECT_EQ(kind_of([] { harmonic_basis(-1); }), ErrorKind::unsupported);
}

TEST(HarmonicBasis, GramNonsingularOnBall)
{
    const FESpacePtr space = build_fespace(generate_ball_mesh(1), 1);
    for (int n = 0; n <= 4; ++n) {
        const EigenspaceProjection p = project_onto_eigenspace(*space, constant_field(1.0), harmonic_basis(n));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.gram);
        EXPECT_GT(es.eigenvalues().minCoeff(), 1e-6 * es.eigenvalues().maxCoeff()) << n;
    }
}

// Error norms -------------------------------------------------------------------

TEST(ErrorNorms, ZeroForRepresentableField)
{
    for (int k = 1; k <= 3; ++k) {
        const AnalyticField p{[k](const Vec3& x) { return std::pow(x.x(), k) - x.y() * x.z() * (k >= 2) + 1.0; },
                              [k](const Vec3& x) {
                                  return Vec3(k * std::pow(x.x(), k - 1), -x.z() * (k >= 2), -x.y() * (k >= 2));
                              }};
        const FESpacePtr space = build_fespace(generate_unit_cube_mesh(2), k);
        const FEFunction uh = interpolate(space, p.value);
        EXPECT_LE(l2_error(uh, p), 1e-10);
        EXPECT_LE(h1_error(uh, p, false), 1e-10);
        EXPECT_LE(h1_error(uh, p, true, true), 1e-10);
    }
}

TEST(ErrorNorms, RelativeAndFullNormsConsistent)
{
    const FESpacePtr space = build_fespace(generate_unit_square_mesh(4), 1);
    const AnalyticField u = flat_cosine_solution(2);
    const FEFunction uh = interpolate(space, u.value);
    const ErrorNorms e = error_norms(uh, u);
    EXPECT_NEAR(e.h1(), std::sqrt(e.l2 * e.l2 + e.h1_semi * e.h1_semi), 1e-15);
    EXPECT_NEAR(l2_error(uh, u, true), e.l2 / e.exact_l2, 1e-15);
    EXPECT_NEAR(h1_error(uh, u, true, true), e.h1_semi / e.exact_h1_semi, 1e-15);
    // ||cos(pi x) cos(pi y)||^2 = 1/4 and ||grad||^2 = pi^2 / 2 over the unit square.
    EXPECT_NEAR(e.exact_l2, 0.5, 1e-12);
    EXPECT_NEAR(e.exact_h1_semi, kPi / std::sqrt(2.0), 1e-11);
    EXPECT_NEAR(l2_norm(interpolate(space, [](const Vec3&) { return 3.0; })), 3.0, 1e-14);
}

TEST(ErrorNorms, SurfaceUsesTangentialExactGradient)
{
    // u = r exp-free radial field: x -> |x| is 1 on the sphere, tangential gradient 0.
    const AnalyticField radius{[](const Vec3& x) { return x.norm(); }, [](const Vec3& x) { return Vec3(x / x.norm()); }};
    const FESpacePtr space = build_fespace(generate_sphere_mesh(3), 1);
    const FEFunction one = interpolate(space, [](const Vec3&) { return 1.0; });
    const ErrorNorms e = error_norms(one, radius);
    // Quadrature points sit inside the sphere, so |x| < 1 there; the gradient
    // error is the tangential part of x/|x| on flat triangles, which is small.
    EXPECT_LT(e.h1_semi, 0.2);
    EXPECT_LT(e.l2, 0.05);
}

// Eigenspace projection ----------------------------------------------------------------

TEST(Projection, RecoversBasisMember)
{
    const FESpacePtr space = build_fespace(generate_ball_mesh(1), 2);
    const EigenspaceBasis basis = harmonic_basis(1);
    const FEFunction uh = interpolate(space, [](const Vec3& x) { return 2.0 * x.y() - x.z(); });
    const EigenspaceProjection p = project_onto_eigenspace(uh, basis);
    EXPECT_NEAR(p.coefficients[0], 0.0, 1e-12);
    EXPECT_NEAR(p.coefficients[1], 2.0, 1e-12);
    EXPECT_NEAR(p.coefficients[2], -1.0, 1e-12);
    EXPECT_LT(error_norms(uh, p.field()).l2, 1e-12);
}

TEST(Projection, ConstantOrthogonalToCoordinatesOnSphere)
{
    const FESpacePtr space = build_fespace(generate_sphere_mesh(2), 1);
    const FEFunction one = interpolate(space, [](const Vec3&) { return 1.0; });
    const EigenspaceProjection p = project_onto_eigenspace(one, lifted_sphere_eigenbasis());
    EXPECT_LT(p.coefficients.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, QuadraticPartIntegratesAwayOverBall)
{
    const FESpacePtr space = build_fespace(generate_ball_mesh(1), 1);
    const AnalyticField u{[](const Vec3& x) { return x.x() + x.x() * x.x() - x.y() * x.y(); },
                          [](const Vec3& x) { return Vec3(1.0 + 2.0 * x.x(), -2.0 * x.y(), 0.0); }};
    const EigenspaceProjection p = project_onto_eigenspace(*space, u, harmonic_basis(1));
    EXPECT_NEAR(p.coefficients[0], 1.0, 1e-12);
    EXPECT_NEAR(p.coefficients[1], 0.0, 1e-12);
    EXPECT_NEAR(p.coefficients[2], 0.0, 1e-12);
}

TEST(Projection, Idempotent)
{
    const FESpacePtr space = build_fespace(generate_ball_mesh(1), 2);
    const FEFunction uh =
        interpolate(space, [](const Vec3& x) { return std::sin(x.x() + 2.0 * x.y()) + x.z() * x.z(); });
    for (int n = 1; n <= 3; ++n) {
        const EigenspaceProjection once = project_onto_eigenspace(uh, harmonic_basis(n));
        const EigenspaceProjection twice = project_onto_eigenspace(*space, once.field(), harmonic_basis(n));
        EXPECT_LT((once.coefficients - twice.coefficients).cwiseAbs().maxCoeff(), 1e-12) << n;
    }
}

TEST(Projection, ErrorInvariantUnderSignFlip)
{
    const FESpacePtr space = build_fespace(generate_ball_mesh(1), 2);
    const FEFunction uh = interpolate(space, [](const Vec3& x) { return x.x() + 0.1 * x.y() * x.z(); });
    FEFunction neg = uh;
    for (double& v : neg.coefficients) {
        v = -v;
    }
    const ErrorNorms a = error_norms(uh, project_onto_eigenspace(uh, harmonic_basis(1)).field());
    const ErrorNorms b = error_norms(neg, project_onto_eigenspace(neg, harmonic_basis(1)).field());
    EXPECT_NEAR(a.l2, b.l2, 1e-15);
    EXPECT_NEAR(a.h1_semi, b.h1_semi, 1e-15);
}

TEST(Projection, DegenerateBasisRejected)
{
    const FESpacePtr space = build_fespace(generate_ball_mesh(0), 1);
    EigenspaceBasis twice{"dup", {harmonic_basis(1).members[0], harmonic_basis(1).members[0]}};
    EXPECT_EQ(kind_of([&] { project_onto_eigenspace(*space, constant_field(1.0), twice); }),
              ErrorKind::degenerate_basis);
}

TEST(BallQuadrature, PointsInsideUnitBall)
{
    for (int level = 0; level <= 2; ++level) {
        const FESpacePtr space = build_fespace(generate_ball_mesh(level), 1);
        for (const QuadraturePoint& q : physical_quadrature(*space, kErrorQuadratureDegree)) {
            EXPECT_LE(q.x.norm(), 1.0 + 1e-12);
        }
    }
}

// Orders --------------------------------------------------------------------------

TEST(ConvergenceOrder, Examples)
{
    const std::vector<double> hs = {1.0, 0.5, 0.25};
    EXPECT_NEAR(convergence_order(hs, std::vector<double>{1.0, 0.25, 0.0625}), 2.0, 1e-14);
    EXPECT_NEAR(convergence_order(hs, std::vector<double>{0.3, 0.3, 0.3}), 0.0, 1e-14);
    const auto pw = pairwise_orders(hs, std::vector<double>{1.0, 0.25, 0.125});
    ASSERT_EQ(pw.size(), 2u);
    EXPECT_NEAR(pw[0], 2.0, 1e-14);
    EXPECT_NEAR(pw[1], 1.0, 1e-14);
}

TEST(ConvergenceOrder, Errors)
{
    EXPECT_EQ(kind_of([] { convergence_order(std::vector<double>{1.0}, std::vector<double>{1.0}); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { convergence_order(std::vector<double>{1.0, 0.5}, std::vector<double>{1.0, 0.0}); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { convergence_order(std::vector<double>{1.0, 0.5}, std::vector<double>{1.0}); }),
              ErrorKind::invalid_argument);
}

TEST(ConvergenceOrder, ScaleInvariant)
{
    const std::vector<double> hs = {0.4, 0.2, 0.1};
    const std::vector<double> e = {3.0, 0.8, 0.21};
    std::vector<double> h2, e2;
    for (int i = 0; i < 3; ++i) {
        h2.push_back(2.0 * hs[i]);
        e2.push_back(5.0 * e[i]);
    }
    EXPECT_NEAR(convergence_order(hs, e), convergence_order(h2, e2), 1e-13);
}
