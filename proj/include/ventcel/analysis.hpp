#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ventcel/fem.hpp"
#include "ventcel/mesh.hpp"

namespace ventcel {

/// Scalar field on R^3 with its analytic gradient.
struct AnalyticField {
    std::function<double(const Vec3&)> value;
    std::function<Vec3(const Vec3&)> gradient;

    double operator()(const Vec3& x) const { return value(x); }
};

AnalyticField constant_field(double c);

/// x -> f(x / |x|), gradient by the chain rule through the radial projection
/// (I - x x^T / |x|^2) / |x|. Evaluation at the origin throws invalid_argument.
AnalyticField sphere_lift(const AnalyticField& f);

/// Largest relative mismatch between the analytic gradient and central
/// differences of step `step`, scaled by max(1, |gradient|).
double gradient_fd_mismatch(const AnalyticField& f, std::span<const Vec3> points, double step = 1e-5);

/// Finite-difference Laplacian (7-point stencil).
double fd_laplacian(const AnalyticField& f, const Vec3& x, double step = 1e-3);

// Exact data of the validation problems ------------------------------------

/// cos(pi x) cos(pi y), and cos(pi x) cos(pi y) cos(pi z) when dim = 3.
AnalyticField flat_cosine_solution(int dim);
/// (dim pi^2 + 1) times the flat cosine solution.
AnalyticField flat_cosine_source(int dim);
/// exp(x).
AnalyticField exp_x_field();
/// x (2 + x) exp(x), the sphere source whose Laplace-Beltrami solution is exp(x).
AnalyticField exp_x_sphere_source();

// Error norms ------------------------------------------------------------------

inline constexpr int kErrorQuadratureDegree = 10;

struct ErrorNorms {
    double l2 = 0.0;       // ||u_h - u||
    double h1_semi = 0.0;  // ||grad u_h - grad u||, tangential on surfaces
    double exact_l2 = 0.0;
    double exact_h1_semi = 0.0;

    [[nodiscard]] double h1() const;
    [[nodiscard]] double exact_h1() const;
};

/// Norms of u_h - exact over the cells of the space. On surface cells the
/// exact gradient is projected onto the triangle plane.
ErrorNorms error_norms(const FEFunction& uh, const AnalyticField& exact, int degree = kErrorQuadratureDegree);

double l2_error(const FEFunction& uh, const AnalyticField& exact, bool relative = false);
/// Full H1 norm, or the gradient seminorm when `seminorm` is set.
double h1_error(const FEFunction& uh, const AnalyticField& exact, bool seminorm, bool relative = false);

double l2_norm(const FEFunction& uh);

// Eigenspaces --------------------------------------------------------------------

struct EigenspaceBasis {
    std::string name;
    std::vector<AnalyticField> members;

    [[nodiscard]] std::size_t dimension() const noexcept { return members.size(); }
};

/// The 2n + 1 real solid harmonics of degree n, n in 0..4. Throws unsupported otherwise.
EigenspaceBasis harmonic_basis(int n);
/// x / |X|, y / |X|, z / |X|.
EigenspaceBasis lifted_sphere_eigenbasis();
/// cos(pi x), cos(pi y) (, cos(pi z)): the first nonzero Neumann eigenspace of (0,1)^dim.
EigenspaceBasis flat_cosine_eigenbasis(int dim);

/// L2 projection onto an eigenspace: sum_i c_i phi_i.
struct EigenspaceProjection {
    EigenspaceBasis basis;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd gram;

    [[nodiscard]] AnalyticField field() const;
};

/// Projects u_h in the L2 inner product over the cells of its space.
/// Throws degenerate_basis when the Gram matrix is numerically singular.
EigenspaceProjection project_onto_eigenspace(const FEFunction& uh, const EigenspaceBasis& basis,
                                             int degree = kErrorQuadratureDegree);
/// Same projection for an analytic field, over the cells of `space`.
EigenspaceProjection project_onto_eigenspace(const FESpace& space, const AnalyticField& f,
                                             const EigenspaceBasis& basis, int degree = kErrorQuadratureDegree);

// Orders --------------------------------------------------------------------------

/// Least-squares slope of log(error) against log(h). Throws invalid_argument
/// for fewer than two levels or a nonpositive error.
double convergence_order(std::span<const double> hs, std::span<const double> errors);
/// log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for consecutive levels.
std::vector<double> pairwise_orders(std::span<const double> hs, std::span<const double> errors);

} // namespace ventcel
