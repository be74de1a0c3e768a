#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Dense>

#include "ventcel/analysis.hpp"
#include "ventcel/error.hpp"

namespace ventcel {

namespace {

constexpr double kPi = std::numbers::pi;

// Sparse polynomial in x, y, z; enough to write the solid harmonics symbolically.
class Polynomial {
public:
    using Exponents = std::array<int, 3>;

    Polynomial() = default;
    Polynomial(double c) { add_term({0, 0, 0}, c); }
    static Polynomial variable(int axis)
    {
        Polynomial p;
        Exponents e{0, 0, 0};
        e[static_cast<std::size_t>(axis)] = 1;
        p.add_term(e, 1.0);
        return p;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b)
    {
        for (const auto& [e, c] : b.terms_) {
            a.add_term(e, c);
        }
        return a;
    }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a + (-1.0) * b; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b)
    {
        Polynomial p;
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                p.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
            }
        }
        return p;
    }

    [[nodiscard]] AnalyticField field() const
    {
        const auto terms = terms_;
        AnalyticField f;
        f.value = [terms](const Vec3& x) {
            double s = 0.0;
            for (const auto& [e, c] : terms) {
                s += c * std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
            }
            return s;
        };
        f.gradient = [terms](const Vec3& x) {
            Vec3 g = Vec3::Zero();
            for (const auto& [e, c] : terms) {
                for (int a = 0; a < 3; ++a) {
                    if (e[a] == 0) {
                        continue;
                    }
                    double t = c * e[a];
                    for (int b = 0; b < 3; ++b) {
                        t *= std::pow(x[b], b == a ? e[b] - 1 : e[b]);
                    }
                    g[a] += t;
                }
            }
            return g;
        };
        return f;
    }

private:
    void add_term(const Exponents& e, double c)
    {
        const double v = (terms_[e] += c);
        if (v == 0.0) {
            terms_.erase(e);
        }
    }

    std::map<Exponents, double> terms_;
};

struct Tabulation {
    QuadratureRule rule;
    std::vector<Eigen::VectorXd> phi;
    std::vector<Eigen::MatrixXd> grads;
};

Tabulation tabulate(const ReferenceElement& el, int degree)
{
    Tabulation t;
    t.rule = quadrature_rule(el.simplex_dim(), degree);
    for (const Barycentric& p : t.rule.points) {
        Eigen::VectorXd phi(el.num_nodes());
        Eigen::MatrixXd g(el.num_nodes(), el.simplex_dim());
        el.eval_basis(p, std::span<double>(phi.data(), static_cast<std::size_t>(el.num_nodes())));
        el.eval_gradients(p, g);
        t.phi.push_back(std::move(phi));
        t.grads.push_back(std::move(g));
    }
    return t;
}

// Visits every physical quadrature point of the space's cells with the
// discrete value and ambient gradient of u_h there.
template <class Visit>
void for_each_quadrature_point(const FEFunction& uh, int degree, Visit&& visit)
{
    VENTCEL_REQUIRE(uh.space != nullptr, ErrorKind::invalid_argument, "function without a space");
    const FESpace& space = *uh.space;
    VENTCEL_REQUIRE(uh.coefficients.size() == space.num_dofs(), ErrorKind::invalid_argument,
                    "coefficient vector length does not match the space");
    const ReferenceElement& el = space.element();
    const Tabulation tab = tabulate(el, degree);
    const int dim = space.cell_dim();
    std::vector<Vec3> corners(static_cast<std::size_t>(dim + 1));
    Eigen::VectorXd u(el.num_nodes());
    for (std::size_t c = 0; c < space.num_cells(); ++c) {
        const auto verts = space.cell_vertices(c);
        for (std::size_t i = 0; i < verts.size(); ++i) {
            corners[i] = space.vertices()[static_cast<std::size_t>(verts[i])];
        }
        const CellGeometry g = cell_geometry(corners);
        const auto dofs = space.cell_dofs(c);
        for (int i = 0; i < el.num_nodes(); ++i) {
            u(i) = uh.coefficients[static_cast<std::size_t>(dofs[static_cast<std::size_t>(i)])];
        }
        const Eigen::MatrixXd tangent = g.frame * g.frame.transpose();
        for (std::size_t q = 0; q < tab.rule.points.size(); ++q) {
            const Vec3 x = g.map(tab.rule.points[q], dim);
            const double value = tab.phi[q].dot(u);
            const Vec3 grad = g.ambient_gradient(tab.grads[q].transpose() * u);
            visit(x, tab.rule.weights[q] * g.measure_factor, value, grad, tangent);
        }
    }
}

double sum_of_squares_root(double a, double b) { return std::sqrt(a * a + b * b); }

} // namespace

AnalyticField constant_field(double c)
{
    return {[c](const Vec3&) { return c; }, [](const Vec3&) { return Vec3::Zero().eval(); }};
}

AnalyticField sphere_lift(const AnalyticField& f)
{
    AnalyticField lifted;
    lifted.value = [f](const Vec3& x) {
        const double r = x.norm();
        VENTCEL_REQUIRE(r > 0.0, ErrorKind::invalid_argument, "radial projection undefined at the origin");
        return f.value(x / r);
    };
    lifted.gradient = [f](const Vec3& x) {
        const double r = x.norm();
        VENTCEL_REQUIRE(r > 0.0, ErrorKind::invalid_argument, "radial projection undefined at the origin");
        const Vec3 p = x / r;
        const Vec3 g = f.gradient(p);
        return ((g - p * p.dot(g)) / r).eval();
    };
    return lifted;
}

double gradient_fd_mismatch(const AnalyticField& f, std::span<const Vec3> points, double step)
{
    double worst = 0.0;
    for (const Vec3& x : points) {
        const Vec3 g = f.gradient(x);
        Vec3 fd;
        for (int a = 0; a < 3; ++a) {
            Vec3 e = Vec3::Zero();
            e[a] = step;
            fd[a] = (f.value(x + e) - f.value(x - e)) / (2.0 * step);
        }
        worst = std::max(worst, (fd - g).norm() / std::max(1.0, g.norm()));
    }
    return worst;
}

double fd_laplacian(const AnalyticField& f, const Vec3& x, double step)
{
    double s = -6.0 * f.value(x);
    for (int a = 0; a < 3; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = step;
        s += f.value(x + e) + f.value(x - e);
    }
    return s / (step * step);
}

AnalyticField flat_cosine_solution(int dim)
{
    VENTCEL_REQUIRE(dim == 2 || dim == 3, ErrorKind::invalid_argument, "flat problems are 2D or 3D");
    const auto factor = [dim](const Vec3& x, int a) { return a < dim ? std::cos(kPi * x[a]) : 1.0; };
    const auto dfactor = [dim](const Vec3& x, int a) { return a < dim ? -kPi * std::sin(kPi * x[a]) : 0.0; };
    AnalyticField f;
    f.value = [factor](const Vec3& x) { return factor(x, 0) * factor(x, 1) * factor(x, 2); };
    f.gradient = [factor, dfactor](const Vec3& x) {
        return Vec3(dfactor(x, 0) * factor(x, 1) * factor(x, 2), factor(x, 0) * dfactor(x, 1) * factor(x, 2),
                    factor(x, 0) * factor(x, 1) * dfactor(x, 2));
    };
    return f;
}

AnalyticField flat_cosine_source(int dim)
{
    const AnalyticField u = flat_cosine_solution(dim);
    const double scale = dim * kPi * kPi + 1.0;
    return {[u, scale](const Vec3& x) { return scale * u.value(x); },
            [u, scale](const Vec3& x) { return (scale * u.gradient(x)).eval(); }};
}

AnalyticField exp_x_field()
{
    return {[](const Vec3& x) { return std::exp(x[0]); },
            [](const Vec3& x) { return Vec3(std::exp(x[0]), 0.0, 0.0); }};
}

AnalyticField exp_x_sphere_source()
{
    return {[](const Vec3& x) { return x[0] * (2.0 + x[0]) * std::exp(x[0]); },
            [](const Vec3& x) { return Vec3((2.0 + 4.0 * x[0] + x[0] * x[0]) * std::exp(x[0]), 0.0, 0.0); }};
}

// Error norms ------------------------------------------------------------------

double ErrorNorms::h1() const { return sum_of_squares_root(l2, h1_semi); }
double ErrorNorms::exact_h1() const { return sum_of_squares_root(exact_l2, exact_h1_semi); }

ErrorNorms error_norms(const FEFunction& uh, const AnalyticField& exact, int degree)
{
    double e0 = 0.0, e1 = 0.0, u0 = 0.0, u1 = 0.0;
    const bool surface = uh.space != nullptr && !uh.space->is_volume();
    for_each_quadrature_point(uh, degree,
                              [&](const Vec3& x, double w, double value, const Vec3& grad, const Eigen::MatrixXd& tangent) {
                                  const double u = exact.value(x);
                                  Vec3 gu = exact.gradient(x);
                                  if (surface) {
                                      gu = tangent * gu;
                                  }
                                  e0 += w * (value - u) * (value - u);
                                  e1 += w * (grad - gu).squaredNorm();
                                  u0 += w * u * u;
                                  u1 += w * gu.squaredNorm();
                              });
    return {std::sqrt(e0), std::sqrt(e1), std::sqrt(u0), std::sqrt(u1)};
}

double l2_error(const FEFunction& uh, const AnalyticField& exact, bool relative)
{
    const ErrorNorms e = error_norms(uh, exact);
    return relative ? e.l2 / e.exact_l2 : e.l2;
}

double h1_error(const FEFunction& uh, const AnalyticField& exact, bool seminorm, bool relative)
{
    const ErrorNorms e = error_norms(uh, exact);
    if (seminorm) {
        return relative ? e.h1_semi / e.exact_h1_semi : e.h1_semi;
    }
    return relative ? e.h1() / e.exact_h1() : e.h1();
}

double l2_norm(const FEFunction& uh) { return error_norms(uh, constant_field(0.0)).l2; }

// Eigenspaces --------------------------------------------------------------------

EigenspaceBasis harmonic_basis(int n)
{
    const Polynomial x = Polynomial::variable(0);
    const Polynomial y = Polynomial::variable(1);
    const Polynomial z = Polynomial::variable(2);
    const Polynomial r2 = x * x + y * y + z * z;
    std::vector<Polynomial> polys;
    switch (n) {
    case 0:
        polys = {Polynomial(1.0)};
        break;
    case 1:
        polys = {x, y, z};
        break;
    case 2:
        polys = {x * y, y * z, x * z, x * x - y * y, 2.0 * z * z - x * x - y * y};
        break;
    case 3:
        polys = {x * (x * x - 3.0 * y * y),
                 y * (3.0 * x * x - y * y),
                 z * (x * x - y * y),
                 x * y * z,
                 x * (4.0 * z * z - x * x - y * y),
                 y * (4.0 * z * z - x * x - y * y),
                 z * (2.0 * z * z - 3.0 * x * x - 3.0 * y * y)};
        break;
    case 4:
        polys = {x * x * x * x - 6.0 * x * x * y * y + y * y * y * y,
                 x * y * (x * x - y * y),
                 z * x * (x * x - 3.0 * y * y),
                 z * y * (3.0 * x * x - y * y),
                 (x * x - y * y) * (6.0 * z * z - x * x - y * y),
                 x * y * (6.0 * z * z - x * x - y * y),
                 x * z * (4.0 * z * z - 3.0 * x * x - 3.0 * y * y),
                 y * z * (4.0 * z * z - 3.0 * x * x - 3.0 * y * y),
                 35.0 * z * z * z * z - 30.0 * z * z * r2 + 3.0 * r2 * r2};
        break;
    default:
        throw Error(ErrorKind::unsupported, "solid harmonics implemented for degrees 0..4, got " + std::to_string(n));
    }
    EigenspaceBasis basis;
    basis.name = "harmonic degree " + std::to_string(n);
    for (const Polynomial& p : polys) {
        basis.members.push_back(p.field());
    }
    return basis;
}

EigenspaceBasis lifted_sphere_eigenbasis()
{
    EigenspaceBasis basis;
    basis.name = "lifted coordinate functions";
    for (int a = 0; a < 3; ++a) {
        basis.members.push_back(sphere_lift(Polynomial::variable(a).field()));
    }
    return basis;
}

EigenspaceBasis flat_cosine_eigenbasis(int dim)
{
    VENTCEL_REQUIRE(dim == 2 || dim == 3, ErrorKind::invalid_argument, "flat problems are 2D or 3D");
    EigenspaceBasis basis;
    basis.name = "coordinate cosines";
    for (int a = 0; a < dim; ++a) {
        basis.members.push_back({[a](const Vec3& x) { return std::cos(kPi * x[a]); },
                                 [a](const Vec3& x) {
                                     Vec3 g = Vec3::Zero();
                                     g[a] = -kPi * std::sin(kPi * x[a]);
                                     return g;
                                 }});
    }
    return basis;
}

AnalyticField EigenspaceProjection::field() const
{
    const auto members = basis.members;
    const Eigen::VectorXd c = coefficients;
    AnalyticField f;
    f.value = [members, c](const Vec3& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i) {
            s += c(static_cast<Eigen::Index>(i)) * members[i].value(x);
        }
        return s;
    };
    f.gradient = [members, c](const Vec3& x) {
        Vec3 g = Vec3::Zero();
        for (std::size_t i = 0; i < members.size(); ++i) {
            g += c(static_cast<Eigen::Index>(i)) * members[i].gradient(x);
        }
        return g;
    };
    return f;
}

namespace {

EigenspaceProjection solve_projection(const EigenspaceBasis& basis, const Eigen::MatrixXd& gram,
                                      const Eigen::VectorXd& moments)
{
    VENTCEL_REQUIRE(basis.dimension() > 0, ErrorKind::degenerate_basis, "empty eigenspace basis");
    const Eigen::VectorXd d = gram.diagonal().cwiseMax(0.0).cwiseSqrt();
    VENTCEL_REQUIRE(d.minCoeff() > 0.0, ErrorKind::degenerate_basis, "basis member vanishes on the mesh");
    const Eigen::MatrixXd scaled = d.asDiagonal().inverse() * gram * d.asDiagonal().inverse();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
    VENTCEL_REQUIRE(es.eigenvalues().minCoeff() > 1e-12 * es.eigenvalues().maxCoeff(), ErrorKind::degenerate_basis,
                    "Gram matrix of the eigenspace basis is numerically singular");
    EigenspaceProjection p;
    p.basis = basis;
    p.gram = gram;
    p.coefficients = gram.ldlt().solve(moments);
    return p;
}

} // namespace

EigenspaceProjection project_onto_eigenspace(const FEFunction& uh, const EigenspaceBasis& basis, int degree)
{
    const auto m = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd moments = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd phi(m);
    for_each_quadrature_point(uh, degree, [&](const Vec3& x, double w, double value, const Vec3&, const Eigen::MatrixXd&) {
        for (Eigen::Index i = 0; i < m; ++i) {
            phi(i) = basis.members[static_cast<std::size_t>(i)].value(x);
        }
        gram.noalias() += w * phi * phi.transpose();
        moments += (w * value) * phi;
    });
    return solve_projection(basis, gram, moments);
}

EigenspaceProjection project_onto_eigenspace(const FESpace& space, const AnalyticField& f,
                                             const EigenspaceBasis& basis, int degree)
{
    const auto m = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd moments = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd phi(m);
    for (const QuadraturePoint& q : physical_quadrature(space, degree)) {
        for (Eigen::Index i = 0; i < m; ++i) {
            phi(i) = basis.members[static_cast<std::size_t>(i)].value(q.x);
        }
        gram.noalias() += q.weight * phi * phi.transpose();
        moments += (q.weight * f.value(q.x)) * phi;
    }
    return solve_projection(basis, gram, moments);
}

// Orders --------------------------------------------------------------------------

double convergence_order(std::span<const double> hs, std::span<const double> errors)
{
    VENTCEL_REQUIRE(hs.size() == errors.size(), ErrorKind::invalid_argument, "h and error lists differ in length");
    VENTCEL_REQUIRE(hs.size() >= 2, ErrorKind::invalid_argument, "an order needs at least two levels");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        VENTCEL_REQUIRE(hs[i] > 0.0, ErrorKind::invalid_argument, "mesh sizes must be positive");
        VENTCEL_REQUIRE(errors[i] > 0.0, ErrorKind::invalid_argument,
                        "nonpositive error (converged to the floor); no order defined");
        mx += std::log(hs[i]) / n;
        my += std::log(errors[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double dx = std::log(hs[i]) - mx;
        sxy += dx * (std::log(errors[i]) - my);
        sxx += dx * dx;
    }
    VENTCEL_REQUIRE(sxx > 0.0, ErrorKind::invalid_argument, "mesh sizes must differ");
    return sxy / sxx;
}

std::vector<double> pairwise_orders(std::span<const double> hs, std::span<const double> errors)
{
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < hs.size(); ++i) {
        out.push_back(convergence_order(hs.subspan(i, 2), errors.subspan(i, 2)));
    }
    return out;
}

} // namespace ventcel
