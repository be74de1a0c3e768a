#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace ventcel {

using Vec3 = Eigen::Vector3d;
using Tet = std::array<int, 4>;
using Tri = std::array<int, 3>;

struct BoundaryFace {
    Tri vertices;  // ordered so the right-hand normal points out of `owner`
    int owner = -1;
};

/// Tetrahedral mesh with positively oriented tets and its outward boundary.
struct VolumeMesh {
    std::vector<Vec3> vertices;
    std::vector<Tet> tets;
    std::vector<BoundaryFace> boundary_faces;
};

/// Triangulated surface embedded in 3-space.
struct SurfaceMesh {
    std::vector<Vec3> vertices;
    std::vector<Tri> triangles;
    bool is_closed = false;
};

using AnyMesh = std::variant<VolumeMesh, SurfaceMesh>;

// Generators ---------------------------------------------------------------

/// (0,1)^2 at z = 0, n x n squares each cut along the (i,j)-(i+1,j+1) diagonal.
SurfaceMesh generate_unit_square_mesh(int n);

/// (0,1)^3 with every subcube split into the 6 Kuhn tets around its main diagonal.
VolumeMesh generate_unit_cube_mesh(int n);

/// Icosahedron with each face subdivided by the frequency-2^level lattice,
/// every vertex projected to the unit sphere.
SurfaceMesh generate_sphere_mesh(int level);

/// Unit ball built from the 20 center-to-face icosahedral cones, each cut into
/// 8^level lattice tets and mapped radially so that lattice shell j lands on
/// the sphere of radius j / 2^level. The outer shell is generate_sphere_mesh(level).
VolumeMesh generate_ball_mesh(int level);

// Topology -----------------------------------------------------------------

/// Recomputes `boundary_faces` from the tets. Throws invalid_mesh on a face
/// shared by more than two tets.
void rebuild_boundary(VolumeMesh& mesh);

/// Boundary surface with the volume mesh's vertex numbering preserved.
SurfaceMesh extract_boundary(const VolumeMesh& mesh);

/// Builds a VolumeMesh from raw data: fixes tet orientation, extracts the boundary.
VolumeMesh make_volume_mesh(std::vector<Vec3> vertices, std::vector<Tet> tets);

/// Builds a SurfaceMesh from raw data; `is_closed` is derived from edge counts.
SurfaceMesh make_surface_mesh(std::vector<Vec3> vertices, std::vector<Tri> triangles);

// Measurements -------------------------------------------------------------

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

/// Largest edge length over all elements.
double mesh_size(const VolumeMesh& mesh);
double mesh_size(const SurfaceMesh& mesh);

double total_volume(const VolumeMesh& mesh);
double total_area(const SurfaceMesh& mesh);

std::size_t count_edges(const SurfaceMesh& mesh);
std::size_t count_edges(const VolumeMesh& mesh);
long euler_characteristic(const SurfaceMesh& mesh);

struct MeshCheck {
    bool ok = true;
    std::vector<std::string> failures;
};

/// Orientation, boundary-closure and boundary-orientation checks.
MeshCheck check_invariants(const VolumeMesh& mesh);
/// Nonzero areas, edge manifoldness, and Euler characteristic 2 when closed.
MeshCheck check_invariants(const SurfaceMesh& mesh);

// Gmsh MSH 2.2 ASCII -------------------------------------------------------

/// Reads MSH 2.2 ASCII. Returns a VolumeMesh when any type-4 element is
/// present (triangles then ignored, boundary re-extracted), else a SurfaceMesh.
AnyMesh parse_gmsh_msh(std::istream& in);
AnyMesh parse_gmsh_msh(std::string_view text);
AnyMesh read_gmsh_file(const std::string& path);

/// Writes MSH 2.2 ASCII; volume meshes also emit their boundary triangles.
void write_gmsh_msh(std::ostream& out, const VolumeMesh& mesh);
void write_gmsh_msh(std::ostream& out, const SurfaceMesh& mesh);

} // namespace ventcel
