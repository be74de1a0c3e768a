#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "ventcel/error.hpp"
#include "ventcel/fem.hpp"

namespace ventcel {

namespace {

// Factor prod_{j < a} (k t - j) / (j + 1) of a Lagrange basis function and its derivative in t.
double lagrange_factor(int a, int k, double t)
{
    double p = 1.0;
    for (int j = 0; j < a; ++j) {
        p *= (k * t - j) / (j + 1);
    }
    return p;
}

double lagrange_factor_derivative(int a, int k, double t)
{
    double sum = 0.0;
    for (int j = 0; j < a; ++j) {
        double p = static_cast<double>(k) / (j + 1);
        for (int l = 0; l < a; ++l) {
            if (l != j) {
                p *= (k * t - l) / (l + 1);
            }
        }
        sum += p;
    }
    return sum;
}

std::vector<std::array<int, 4>> lagrange_multi_indices(int dim, int k)
{
    std::vector<std::array<int, 4>> all;
    std::array<int, 4> a{0, 0, 0, 0};
    // Enumerate alpha in N^{dim+1} with |alpha| = k.
    const auto recurse = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == dim) {
            a[pos] = remaining;
            all.push_back(a);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            a[pos] = v;
            self(self, pos + 1, remaining - v);
        }
        a[pos] = 0;
    };
    recurse(recurse, 0, k);
    // Vertices, then edges, faces and cells; within a class, by support then weights.
    const auto key = [dim](const std::array<int, 4>& m) {
        std::vector<int> out;
        int nnz = 0;
        std::vector<int> support;
        for (int i = 0; i <= dim; ++i) {
            if (m[i] > 0) {
                ++nnz;
                support.push_back(i);
            }
        }
        out.push_back(nnz);
        out.insert(out.end(), support.begin(), support.end());
        for (int i = 0; i <= dim; ++i) {
            out.push_back(-m[i]);
        }
        return out;
    };
    std::sort(all.begin(), all.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
    return all;
}

} // namespace

// Reference element ---------------------------------------------------------

ReferenceElement::ReferenceElement(int simplex_dim, int degree) : dim_(simplex_dim), degree_(degree)
{
    VENTCEL_REQUIRE(simplex_dim == 2 || simplex_dim == 3, ErrorKind::invalid_argument,
                    "reference element needs dimension 2 or 3");
    VENTCEL_REQUIRE(degree >= 1 && degree <= 3, ErrorKind::invalid_argument,
                    "Lagrange degree must be 1, 2 or 3, got " + std::to_string(degree));
    multi_indices_ = lagrange_multi_indices(dim_, degree_);

    const int n = num_nodes();
    const QuadratureRule rule = quadrature_rule(dim_, 2 * degree_);
    mass_ = Eigen::MatrixXd::Zero(n, n);
    stiff_.assign(static_cast<std::size_t>(dim_ * dim_), Eigen::MatrixXd::Zero(n, n));
    Eigen::VectorXd phi(n);
    Eigen::MatrixXd grad(n, dim_);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double w = rule.weights[q];
        eval_basis(rule.points[q], std::span<double>(phi.data(), static_cast<std::size_t>(n)));
        eval_gradients(rule.points[q], grad);
        mass_.noalias() += w * phi * phi.transpose();
        for (int a = 0; a < dim_; ++a) {
            for (int b = 0; b < dim_; ++b) {
                stiff_[static_cast<std::size_t>(a * dim_ + b)].noalias() += w * grad.col(a) * grad.col(b).transpose();
            }
        }
    }
}

Barycentric ReferenceElement::node_coords(int node) const
{
    Barycentric x{0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i <= dim_; ++i) {
        x[i] = static_cast<double>(multi_indices_.at(static_cast<std::size_t>(node))[i]) / degree_;
    }
    return x;
}

void ReferenceElement::eval_basis(const Barycentric& x, std::span<double> values) const
{
    VENTCEL_REQUIRE(values.size() == multi_indices_.size(), ErrorKind::invalid_argument, "basis buffer size");
    for (std::size_t i = 0; i < multi_indices_.size(); ++i) {
        double v = 1.0;
        for (int c = 0; c <= dim_; ++c) {
            v *= lagrange_factor(multi_indices_[i][c], degree_, x[c]);
        }
        values[i] = v;
    }
}

void ReferenceElement::eval_gradients(const Barycentric& x, Eigen::Ref<Eigen::MatrixXd> grads) const
{
    VENTCEL_REQUIRE(grads.rows() == num_nodes() && grads.cols() == dim_, ErrorKind::invalid_argument,
                    "gradient buffer size");
    std::array<double, 4> f{};
    std::array<double, 4> df{};
    for (std::size_t i = 0; i < multi_indices_.size(); ++i) {
        for (int c = 0; c <= dim_; ++c) {
            f[c] = lagrange_factor(multi_indices_[i][c], degree_, x[c]);
            df[c] = lagrange_factor_derivative(multi_indices_[i][c], degree_, x[c]);
        }
        // d/d lambda_c of the product, then chain rule with lambda_0 = 1 - sum xi.
        std::array<double, 4> dl{};
        for (int c = 0; c <= dim_; ++c) {
            double p = df[c];
            for (int o = 0; o <= dim_; ++o) {
                if (o != c) {
                    p *= f[o];
                }
            }
            dl[c] = p;
        }
        for (int c = 1; c <= dim_; ++c) {
            grads(static_cast<Eigen::Index>(i), c - 1) = dl[c] - dl[0];
        }
    }
}

// Geometry ------------------------------------------------------------------

Vec3 CellGeometry::map(const Barycentric& x, int dim) const
{
    Eigen::VectorXd xi(dim);
    for (int c = 0; c < dim; ++c) {
        xi(c) = x[c + 1];
    }
    return origin + frame * (jacobian * xi);
}

Vec3 CellGeometry::ambient_gradient(const Eigen::VectorXd& ref_grad) const
{
    return frame * (inverse_transpose * ref_grad);
}

CellGeometry cell_geometry(std::span<const Vec3> corners)
{
    const int dim = static_cast<int>(corners.size()) - 1;
    VENTCEL_REQUIRE(dim == 2 || dim == 3, ErrorKind::invalid_argument, "cell needs 3 or 4 corners");
    CellGeometry g;
    g.origin = corners[0];
    Eigen::Matrix<double, 3, Eigen::Dynamic> edges(3, dim);
    double h = 0.0;
    for (int c = 0; c < dim; ++c) {
        edges.col(c) = corners[c + 1] - corners[0];
        h = std::max(h, edges.col(c).norm());
    }
    VENTCEL_REQUIRE(h > 0.0, ErrorKind::invalid_mesh, "cell with coincident corners");
    if (dim == 3) {
        g.frame = Eigen::Matrix3d::Identity();
        g.jacobian = edges;
    } else {
        const Vec3 e1 = edges.col(0).normalized();
        Vec3 e2 = edges.col(1) - edges.col(1).dot(e1) * e1;
        VENTCEL_REQUIRE(e2.norm() > 1e-14 * h, ErrorKind::invalid_mesh, "zero-area triangle");
        e2.normalize();
        g.frame.resize(3, 2);
        g.frame.col(0) = e1;
        g.frame.col(1) = e2;
        g.jacobian = g.frame.transpose() * edges;
    }
    const double det = g.jacobian.determinant();
    VENTCEL_REQUIRE(std::abs(det) > 1e-14 * std::pow(h, dim), ErrorKind::invalid_mesh, "degenerate simplex");
    g.measure_factor = std::abs(det);
    g.inverse_transpose = g.jacobian.inverse().transpose();
    return g;
}

// Local matrices --------------------------------------------------------------

Eigen::MatrixXd local_stiffness(const ReferenceElement& el, std::span<const Vec3> corners)
{
    VENTCEL_REQUIRE(static_cast<int>(corners.size()) == el.simplex_dim() + 1, ErrorKind::invalid_argument,
                    "corner count does not match the element");
    const CellGeometry g = cell_geometry(corners);
    const Eigen::MatrixXd metric = g.inverse_transpose.transpose() * g.inverse_transpose;
    const int d = el.simplex_dim();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(el.num_nodes(), el.num_nodes());
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            k.noalias() += metric(a, b) * el.reference_stiffness()[static_cast<std::size_t>(a * d + b)];
        }
    }
    return g.measure_factor * k;
}

Eigen::MatrixXd local_mass(const ReferenceElement& el, std::span<const Vec3> corners)
{
    VENTCEL_REQUIRE(static_cast<int>(corners.size()) == el.simplex_dim() + 1, ErrorKind::invalid_argument,
                    "corner count does not match the element");
    return cell_geometry(corners).measure_factor * el.reference_mass();
}

// Dof layout ---------------------------------------------------------------------

namespace {

// A Lagrange node is identified globally by its sorted (vertex, weight) support.
using NodeKey = std::array<int, 8>;

struct NodeKeyHash {
    std::size_t operator()(const NodeKey& k) const noexcept
    {
        std::size_t h = 1469598103934665603ULL;
        for (int v : k) {
            h = (h ^ static_cast<std::size_t>(static_cast<unsigned>(v))) * 1099511628211ULL;
        }
        return h;
    }
};

NodeKey node_key(std::span<const int> vertices, const std::array<int, 4>& alpha)
{
    std::array<std::pair<int, int>, 4> s{};
    int m = 0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (alpha[i] > 0) {
            s[m++] = {vertices[i], alpha[i]};
        }
    }
    std::sort(s.begin(), s.begin() + m);
    NodeKey key;
    key.fill(-1);
    for (int i = 0; i < m; ++i) {
        key[2 * i] = s[i].first;
        key[2 * i + 1] = s[i].second;
    }
    return key;
}

} // namespace

std::span<const int> FESpace::cell_vertices(std::size_t c) const
{
    VENTCEL_REQUIRE(c < num_cells(), ErrorKind::invalid_argument, "cell index out of range");
    const std::size_t nv = static_cast<std::size_t>(cell_dim_ + 1);
    return {cells_.data() + c * nv, nv};
}

std::span<const int> FESpace::cell_dofs(std::size_t c) const
{
    VENTCEL_REQUIRE(c < num_cells(), ErrorKind::invalid_argument, "cell index out of range");
    const std::size_t nd = static_cast<std::size_t>(cell_element_->num_nodes());
    return {cell_dofs_.data() + c * nd, nd};
}

std::span<const int> FESpace::surface_cell_vertices(std::size_t f) const
{
    VENTCEL_REQUIRE(f < num_surface_cells(), ErrorKind::invalid_argument, "surface cell index out of range");
    return {surface_cells_.data() + f * 3, 3};
}

std::span<const int> FESpace::surface_cell_dofs(std::size_t f) const
{
    VENTCEL_REQUIRE(f < num_surface_cells(), ErrorKind::invalid_argument, "surface cell index out of range");
    const std::size_t nd = static_cast<std::size_t>(surface_element_->num_nodes());
    return {surface_dofs_.data() + f * nd, nd};
}

void FESpace::number_dofs()
{
    std::unordered_map<NodeKey, int, NodeKeyHash> index;
    const ReferenceElement& el = *cell_element_;
    const std::size_t nv = static_cast<std::size_t>(cell_dim_ + 1);
    const std::size_t nc = cells_.size() / nv;
    cell_dofs_.assign(nc * static_cast<std::size_t>(el.num_nodes()), -1);
    dof_coords_.clear();
    for (std::size_t c = 0; c < nc; ++c) {
        const std::span<const int> verts(cells_.data() + c * nv, nv);
        for (int i = 0; i < el.num_nodes(); ++i) {
            const auto& alpha = el.multi_indices()[static_cast<std::size_t>(i)];
            const NodeKey key = node_key(verts, alpha);
            auto [it, inserted] = index.try_emplace(key, static_cast<int>(dof_coords_.size()));
            if (inserted) {
                Vec3 x = Vec3::Zero();
                for (std::size_t v = 0; v < nv; ++v) {
                    x += (static_cast<double>(alpha[v]) / degree_) * vertices_[static_cast<std::size_t>(verts[v])];
                }
                dof_coords_.push_back(x);
            }
            cell_dofs_[c * static_cast<std::size_t>(el.num_nodes()) + static_cast<std::size_t>(i)] = it->second;
        }
    }

    const ReferenceElement& sel = *surface_element_;
    const std::size_t nf = surface_cells_.size() / 3;
    surface_dofs_.assign(nf * static_cast<std::size_t>(sel.num_nodes()), -1);
    on_surface_.assign(dof_coords_.size(), 0);
    for (std::size_t f = 0; f < nf; ++f) {
        const std::span<const int> verts(surface_cells_.data() + f * 3, 3);
        for (int i = 0; i < sel.num_nodes(); ++i) {
            const auto it = index.find(node_key(verts, sel.multi_indices()[static_cast<std::size_t>(i)]));
            VENTCEL_REQUIRE(it != index.end(), ErrorKind::invalid_mesh, "boundary face is not a face of any cell");
            surface_dofs_[f * static_cast<std::size_t>(sel.num_nodes()) + static_cast<std::size_t>(i)] = it->second;
            on_surface_[static_cast<std::size_t>(it->second)] = 1;
        }
    }
}

FESpacePtr build_fespace(const VolumeMesh& mesh, int degree)
{
    VENTCEL_REQUIRE(degree >= 1 && degree <= 3, ErrorKind::invalid_argument,
                    "Lagrange degree must be 1, 2 or 3, got " + std::to_string(degree));
    VENTCEL_REQUIRE(!mesh.tets.empty(), ErrorKind::invalid_argument, "empty volume mesh");
    auto space = std::shared_ptr<FESpace>(new FESpace());
    space->cell_dim_ = 3;
    space->degree_ = degree;
    space->cell_element_ = std::make_shared<const ReferenceElement>(3, degree);
    space->surface_element_ = std::make_shared<const ReferenceElement>(2, degree);
    space->vertices_ = mesh.vertices;
    for (const Tet& t : mesh.tets) {
        for (int v : t) {
            VENTCEL_REQUIRE(v >= 0 && static_cast<std::size_t>(v) < mesh.vertices.size(), ErrorKind::invalid_mesh,
                            "tet references a missing vertex");
        }
        space->cells_.insert(space->cells_.end(), t.begin(), t.end());
    }
    for (const BoundaryFace& f : mesh.boundary_faces) {
        space->surface_cells_.insert(space->surface_cells_.end(), f.vertices.begin(), f.vertices.end());
    }
    space->number_dofs();
    return space;
}

FESpacePtr build_fespace(const SurfaceMesh& mesh, int degree)
{
    VENTCEL_REQUIRE(degree >= 1 && degree <= 3, ErrorKind::invalid_argument,
                    "Lagrange degree must be 1, 2 or 3, got " + std::to_string(degree));
    VENTCEL_REQUIRE(!mesh.triangles.empty(), ErrorKind::invalid_argument, "empty surface mesh");
    auto space = std::shared_ptr<FESpace>(new FESpace());
    space->cell_dim_ = 2;
    space->degree_ = degree;
    space->cell_element_ = std::make_shared<const ReferenceElement>(2, degree);
    space->surface_element_ = space->cell_element_;
    space->vertices_ = mesh.vertices;
    for (const Tri& t : mesh.triangles) {
        for (int v : t) {
            VENTCEL_REQUIRE(v >= 0 && static_cast<std::size_t>(v) < mesh.vertices.size(), ErrorKind::invalid_mesh,
                            "triangle references a missing vertex");
        }
        space->cells_.insert(space->cells_.end(), t.begin(), t.end());
    }
    space->surface_cells_ = space->cells_;
    space->number_dofs();
    return space;
}

// Evaluation ---------------------------------------------------------------------

namespace {

std::vector<Vec3> corners_of(const std::vector<Vec3>& vertices, std::span<const int> verts)
{
    std::vector<Vec3> c;
    c.reserve(verts.size());
    for (int v : verts) {
        c.push_back(vertices[static_cast<std::size_t>(v)]);
    }
    return c;
}

} // namespace

PointValue evaluate(const FEFunction& fun, std::size_t cell, const Barycentric& x)
{
    VENTCEL_REQUIRE(fun.space != nullptr, ErrorKind::invalid_argument, "function without a space");
    const FESpace& space = *fun.space;
    VENTCEL_REQUIRE(fun.coefficients.size() == space.num_dofs(), ErrorKind::invalid_argument,
                    "coefficient vector length does not match the space");
    VENTCEL_REQUIRE(cell < space.num_cells(), ErrorKind::invalid_argument, "cell index out of range");
    const int dim = space.cell_dim();
    double sum = 0.0;
    for (int c = 0; c <= dim; ++c) {
        VENTCEL_REQUIRE(x[c] >= -1e-12, ErrorKind::invalid_argument, "negative barycentric coordinate");
        sum += x[c];
    }
    VENTCEL_REQUIRE(std::abs(sum - 1.0) <= 1e-12 && (dim == 3 || x[3] == 0.0), ErrorKind::invalid_argument,
                    "barycentric coordinates must sum to 1");

    const ReferenceElement& el = space.element();
    const auto corners = corners_of(space.vertices(), space.cell_vertices(cell));
    const CellGeometry g = cell_geometry(corners);
    Eigen::VectorXd phi(el.num_nodes());
    Eigen::MatrixXd grad(el.num_nodes(), dim);
    el.eval_basis(x, std::span<double>(phi.data(), static_cast<std::size_t>(el.num_nodes())));
    el.eval_gradients(x, grad);
    const auto dofs = space.cell_dofs(cell);
    Eigen::VectorXd u(el.num_nodes());
    for (int i = 0; i < el.num_nodes(); ++i) {
        u(i) = fun.coefficients[static_cast<std::size_t>(dofs[static_cast<std::size_t>(i)])];
    }
    PointValue pv;
    pv.value = phi.dot(u);
    pv.gradient = g.ambient_gradient(grad.transpose() * u);
    return pv;
}

FEFunction interpolate(const FESpacePtr& space, const std::function<double(const Vec3&)>& f)
{
    VENTCEL_REQUIRE(space != nullptr, ErrorKind::invalid_argument, "null space");
    FEFunction fun{space, Vector(space->num_dofs())};
    for (std::size_t i = 0; i < space->num_dofs(); ++i) {
        fun.coefficients[i] = f(space->dof_coords()[i]);
    }
    return fun;
}

std::vector<QuadraturePoint> physical_quadrature(const FESpace& space, int degree)
{
    const int dim = space.cell_dim();
    const QuadratureRule rule = quadrature_rule(dim, degree);
    std::vector<QuadraturePoint> out;
    out.reserve(space.num_cells() * rule.points.size());
    for (std::size_t c = 0; c < space.num_cells(); ++c) {
        const auto corners = corners_of(space.vertices(), space.cell_vertices(c));
        const CellGeometry g = cell_geometry(corners);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            out.push_back({c, g.map(rule.points[q], dim), rule.weights[q] * g.measure_factor});
        }
    }
    return out;
}

// Assembly -----------------------------------------------------------------------

namespace {

// CSR pattern of the union of element dof cliques.
SparseSymMatrix pattern_from_elements(std::size_t n, const std::vector<int>& table, std::size_t stride)
{
    const std::size_t ne = stride == 0 ? 0 : table.size() / stride;
    std::vector<std::size_t> count(n + 1, 0);
    for (int d : table) {
        ++count[static_cast<std::size_t>(d) + 1];
    }
    std::partial_sum(count.begin(), count.end(), count.begin());
    std::vector<std::size_t> incident(table.size());
    std::vector<std::size_t> fill(count.begin(), count.end() - 1);
    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t a = 0; a < stride; ++a) {
            incident[fill[static_cast<std::size_t>(table[e * stride + a])]++] = e;
        }
    }
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<int> cols;
    std::vector<int> row;
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        for (std::size_t p = count[i]; p < count[i + 1]; ++p) {
            const std::size_t e = incident[p];
            row.insert(row.end(), table.begin() + static_cast<std::ptrdiff_t>(e * stride),
                       table.begin() + static_cast<std::ptrdiff_t>((e + 1) * stride));
        }
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        cols.insert(cols.end(), row.begin(), row.end());
        row_ptr[i + 1] = cols.size();
    }
    Vector values(cols.size(), 0.0);
    return SparseSymMatrix(n, std::move(row_ptr), std::move(cols), std::move(values));
}

enum class Form { stiffness, mass };

SparseSymMatrix assemble(const FESpace& space, bool on_surface, Form form)
{
    const ReferenceElement& el = on_surface ? space.surface_element() : space.element();
    const std::size_t nd = static_cast<std::size_t>(el.num_nodes());
    const std::size_t ncell = on_surface ? space.num_surface_cells() : space.num_cells();
    std::vector<int> table;
    table.reserve(ncell * nd);
    for (std::size_t c = 0; c < ncell; ++c) {
        const auto dofs = on_surface ? space.surface_cell_dofs(c) : space.cell_dofs(c);
        table.insert(table.end(), dofs.begin(), dofs.end());
    }
    SparseSymMatrix m = pattern_from_elements(space.num_dofs(), table, nd);
    std::vector<double>& values = m.mutable_values();
    for (std::size_t c = 0; c < ncell; ++c) {
        const auto verts = on_surface ? space.surface_cell_vertices(c) : space.cell_vertices(c);
        const auto corners = corners_of(space.vertices(), verts);
        const Eigen::MatrixXd local = form == Form::stiffness ? local_stiffness(el, corners) : local_mass(el, corners);
        const int* dofs = table.data() + c * nd;
        for (std::size_t a = 0; a < nd; ++a) {
            for (std::size_t b = 0; b < nd; ++b) {
                const auto p = m.find(dofs[a], dofs[b]);
                values[static_cast<std::size_t>(p)] += local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
        }
    }
    return m;
}

} // namespace

SparseSymMatrix assemble_volume_stiffness(const FESpace& space)
{
    VENTCEL_REQUIRE(space.is_volume(), ErrorKind::invalid_argument, "volume stiffness needs a volume space");
    return assemble(space, false, Form::stiffness);
}

SparseSymMatrix assemble_volume_mass(const FESpace& space)
{
    VENTCEL_REQUIRE(space.is_volume(), ErrorKind::invalid_argument, "volume mass needs a volume space");
    return assemble(space, false, Form::mass);
}

SparseSymMatrix assemble_surface_stiffness(const FESpace& space) { return assemble(space, true, Form::stiffness); }

SparseSymMatrix assemble_surface_mass(const FESpace& space) { return assemble(space, true, Form::mass); }

SparseSymMatrix assemble_mass(const FESpace& space) { return assemble(space, false, Form::mass); }

SparseSymMatrix assemble_stiffness(const FESpace& space) { return assemble(space, false, Form::stiffness); }

Vector assemble_load(const FESpace& space, const std::function<double(const Vec3&)>& f)
{
    Vector nodal(space.num_dofs());
    for (std::size_t i = 0; i < nodal.size(); ++i) {
        nodal[i] = f(space.dof_coords()[i]);
    }
    return spmv(assemble_mass(space), nodal);
}

Vector assemble_load_quadrature(const FESpace& space, const std::function<double(const Vec3&)>& f, int degree)
{
    const int dim = space.cell_dim();
    const ReferenceElement& el = space.element();
    const QuadratureRule rule = quadrature_rule(dim, degree);
    Vector load(space.num_dofs(), 0.0);
    std::vector<double> phi(static_cast<std::size_t>(el.num_nodes()));
    for (std::size_t c = 0; c < space.num_cells(); ++c) {
        const auto corners = corners_of(space.vertices(), space.cell_vertices(c));
        const CellGeometry g = cell_geometry(corners);
        const auto dofs = space.cell_dofs(c);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double w = rule.weights[q] * g.measure_factor * f(g.map(rule.points[q], dim));
            el.eval_basis(rule.points[q], phi);
            for (std::size_t i = 0; i < phi.size(); ++i) {
                load[static_cast<std::size_t>(dofs[i])] += w * phi[i];
            }
        }
    }
    return load;
}

} // namespace ventcel
