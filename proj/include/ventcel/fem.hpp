#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ventcel/linalg.hpp"
#include "ventcel/mesh.hpp"

namespace ventcel {

/// Barycentric coordinates; entries past simplex_dim are zero.
using Barycentric = std::array<double, 4>;

struct QuadratureRule {
    int simplex_dim = 0;
    std::vector<Barycentric> points;
    std::vector<double> weights;  // sum to the reference measure (1/2 or 1/6)
    int exactness_degree = 0;
};

inline constexpr int kMaxQuadratureDegree = 30;

/// Collapsed (Stroud conical product) Gauss-Jacobi rule exact to degree
/// >= min_degree on the reference triangle or tetrahedron. Weights are positive.
QuadratureRule quadrature_rule(int simplex_dim, int min_degree);

/// Equispaced Lagrange P^k element on the reference triangle (dim 2) or tet (dim 3).
/// Nodes are ordered vertices first, then edge, face and cell nodes.
class ReferenceElement {
public:
    ReferenceElement(int simplex_dim, int degree);

    [[nodiscard]] int simplex_dim() const noexcept { return dim_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] int num_nodes() const noexcept { return static_cast<int>(multi_indices_.size()); }

    /// Integer barycentric multi-index of each node (entries sum to degree).
    [[nodiscard]] const std::vector<std::array<int, 4>>& multi_indices() const noexcept { return multi_indices_; }
    [[nodiscard]] Barycentric node_coords(int node) const;

    void eval_basis(const Barycentric& x, std::span<double> values) const;
    /// Gradients with respect to the reference coordinates (xi_c = lambda_c),
    /// one row per node, simplex_dim columns.
    void eval_gradients(const Barycentric& x, Eigen::Ref<Eigen::MatrixXd> grads) const;

    /// Reference tabulation: mass matrix and stiffness tensors
    /// K[i][j](a,b) = integral of d_a phi_i d_b phi_j over the reference simplex.
    [[nodiscard]] const Eigen::MatrixXd& reference_mass() const noexcept { return mass_; }
    [[nodiscard]] const std::vector<Eigen::MatrixXd>& reference_stiffness() const noexcept { return stiff_; }

private:
    int dim_;
    int degree_;
    std::vector<std::array<int, 4>> multi_indices_;
    Eigen::MatrixXd mass_;
    std::vector<Eigen::MatrixXd> stiff_;  // dim*dim blocks, each num_nodes x num_nodes
};

/// Lagrange P^k dof layout over a volume or surface mesh.
class FESpace {
public:
    [[nodiscard]] int cell_dim() const noexcept { return cell_dim_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] std::size_t num_dofs() const noexcept { return dof_coords_.size(); }
    [[nodiscard]] std::size_t num_cells() const noexcept { return cells_.size() / (cell_dim_ + 1); }
    [[nodiscard]] bool is_volume() const noexcept { return cell_dim_ == 3; }

    [[nodiscard]] const ReferenceElement& element() const noexcept { return *cell_element_; }
    [[nodiscard]] const ReferenceElement& surface_element() const noexcept { return *surface_element_; }

    [[nodiscard]] const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] std::span<const int> cell_vertices(std::size_t c) const;
    [[nodiscard]] std::span<const int> cell_dofs(std::size_t c) const;
    [[nodiscard]] const std::vector<Vec3>& dof_coords() const noexcept { return dof_coords_; }

    /// Triangles carrying the surface forms: the cells of a surface space, or
    /// the boundary faces of a volume space (dofs in volume numbering).
    [[nodiscard]] std::size_t num_surface_cells() const noexcept { return surface_cells_.size() / 3; }
    [[nodiscard]] std::span<const int> surface_cell_vertices(std::size_t f) const;
    [[nodiscard]] std::span<const int> surface_cell_dofs(std::size_t f) const;

    /// true for dofs lying on a surface cell (all dofs for a surface space).
    [[nodiscard]] const std::vector<char>& on_surface() const noexcept { return on_surface_; }

    friend std::shared_ptr<const FESpace> build_fespace(const VolumeMesh& mesh, int degree);
    friend std::shared_ptr<const FESpace> build_fespace(const SurfaceMesh& mesh, int degree);

private:
    FESpace() = default;
    void number_dofs();

    int cell_dim_ = 0;
    int degree_ = 0;
    std::shared_ptr<const ReferenceElement> cell_element_;
    std::shared_ptr<const ReferenceElement> surface_element_;
    std::vector<Vec3> vertices_;
    std::vector<int> cells_;
    std::vector<int> cell_dofs_;
    std::vector<int> surface_cells_;
    std::vector<int> surface_dofs_;
    std::vector<Vec3> dof_coords_;
    std::vector<char> on_surface_;
};

using FESpacePtr = std::shared_ptr<const FESpace>;

FESpacePtr build_fespace(const VolumeMesh& mesh, int degree);
FESpacePtr build_fespace(const SurfaceMesh& mesh, int degree);

struct FEFunction {
    FESpacePtr space;
    Vector coefficients;
};

struct PointValue {
    double value = 0.0;
    Vec3 gradient = Vec3::Zero();  // ambient; tangential on surface cells
};

/// Affine geometry of one simplex: x = origin + frame * (J * xi) with `frame`
/// orthonormal (3 x dim) and `jacobian` square (dim x dim).
struct CellGeometry {
    Vec3 origin;
    Eigen::Matrix<double, 3, Eigen::Dynamic> frame;
    Eigen::MatrixXd jacobian;
    Eigen::MatrixXd inverse_transpose;
    double measure_factor = 0.0;  // |det jacobian|

    [[nodiscard]] Vec3 map(const Barycentric& x, int dim) const;
    /// Ambient gradient from a reference gradient row.
    [[nodiscard]] Vec3 ambient_gradient(const Eigen::VectorXd& ref_grad) const;
};

/// Throws invalid_mesh for a degenerate simplex.
CellGeometry cell_geometry(std::span<const Vec3> corners);

/// Value and ambient gradient of `fun` at a barycentric point of a cell.
PointValue evaluate(const FEFunction& fun, std::size_t cell, const Barycentric& x);

FEFunction interpolate(const FESpacePtr& space, const std::function<double(const Vec3&)>& f);

struct QuadraturePoint {
    std::size_t cell;
    Vec3 x;
    double weight;  // physical measure
};

/// Physical quadrature points over the cells of the space.
std::vector<QuadraturePoint> physical_quadrature(const FESpace& space, int degree);

// Local matrices, exposed for element-level checks.
Eigen::MatrixXd local_stiffness(const ReferenceElement& el, std::span<const Vec3> corners);
Eigen::MatrixXd local_mass(const ReferenceElement& el, std::span<const Vec3> corners);

// Global assembly ----------------------------------------------------------

SparseSymMatrix assemble_volume_stiffness(const FESpace& space);
SparseSymMatrix assemble_volume_mass(const FESpace& space);

/// Tangential stiffness over the surface cells; N x N in the space's numbering.
SparseSymMatrix assemble_surface_stiffness(const FESpace& space);
SparseSymMatrix assemble_surface_mass(const FESpace& space);

/// The L2 mass of the space's own cells (volume mass or surface mass).
SparseSymMatrix assemble_mass(const FESpace& space);
SparseSymMatrix assemble_stiffness(const FESpace& space);

/// M * F with F the nodal interpolant of f.
Vector assemble_load(const FESpace& space, const std::function<double(const Vec3&)>& f);
/// Direct quadrature of the integrals of f * phi_i; used as a cross-check.
Vector assemble_load_quadrature(const FESpace& space, const std::function<double(const Vec3&)>& f,
                                int degree = 8);

} // namespace ventcel
