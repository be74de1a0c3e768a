#include <cmath>

#include <Eigen/Eigenvalues>

#include "ventcel/error.hpp"
#include "ventcel/fem.hpp"

namespace ventcel {

namespace {

struct GaussRule {
    std::vector<double> nodes;    // on [0, 1]
    std::vector<double> weights;  // for the weight (1 - t)^alpha on [0, 1]
};

// Golub-Welsch for Gauss-Jacobi with weight (1 - x)^alpha on [-1, 1], mapped to [0, 1].
GaussRule gauss_jacobi(int n, int alpha)
{
    const double a = alpha;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + a;
        t(k, k) = k == 0 ? -a / (a + 2.0) : -a * a / (s * (s + 2.0));
        if (k + 1 < n) {
            const double j = k + 1;
            const double sj = 2.0 * j + a;
            const double b = std::sqrt(4.0 * j * (j + a) * j * (j + a) / (sj * sj * (sj + 1.0) * (sj - 1.0)));
            t(k, k + 1) = b;
            t(k + 1, k) = b;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
    GaussRule rule;
    for (int i = 0; i < n; ++i) {
        const double x = es.eigenvalues()(i);
        const double v = es.eigenvectors()(0, i);
        rule.nodes.push_back(0.5 * (1.0 + x));
        rule.weights.push_back(mu0 * v * v / std::pow(2.0, a + 1.0));
    }
    return rule;
}

} // namespace

QuadratureRule quadrature_rule(int simplex_dim, int min_degree)
{
    VENTCEL_REQUIRE(simplex_dim == 2 || simplex_dim == 3, ErrorKind::invalid_argument,
                    "quadrature needs a triangle or a tetrahedron");
    VENTCEL_REQUIRE(min_degree <= kMaxQuadratureDegree, ErrorKind::unsupported_degree,
                    "quadrature degree " + std::to_string(min_degree) + " exceeds " +
                        std::to_string(kMaxQuadratureDegree));
    const int degree = std::max(min_degree, 1);
    const int n = (degree + 2) / 2;  // 2n - 1 >= degree

    QuadratureRule rule;
    rule.simplex_dim = simplex_dim;
    rule.exactness_degree = 2 * n - 1;
    const GaussRule g0 = gauss_jacobi(n, 0);
    const GaussRule g1 = gauss_jacobi(n, 1);
    if (simplex_dim == 2) {
        // xi1 = u (1 - v), xi2 = v; the Jacobian (1 - v) is carried by the v weight.
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double u = g0.nodes[i];
                const double v = g1.nodes[j];
                const double x1 = u * (1.0 - v);
                const double x2 = v;
                rule.points.push_back({1.0 - x1 - x2, x1, x2, 0.0});
                rule.weights.push_back(g0.weights[i] * g1.weights[j]);
            }
        }
        return rule;
    }
    const GaussRule g2 = gauss_jacobi(n, 2);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                const double u = g0.nodes[i];
                const double v = g1.nodes[j];
                const double w = g2.nodes[k];
                const double x1 = u * (1.0 - v) * (1.0 - w);
                const double x2 = v * (1.0 - w);
                const double x3 = w;
                rule.points.push_back({1.0 - x1 - x2 - x3, x1, x2, x3});
                rule.weights.push_back(g0.weights[i] * g1.weights[j] * g2.weights[k]);
            }
        }
    }
    return rule;
}

} // namespace ventcel
