#include "ventcel/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <tuple>

#include <Eigen/Geometry>

#include "ventcel/error.hpp"

namespace ventcel {

namespace {

// Tet faces listed so that, for a positively oriented tet, the right-hand
// normal of each face points outward.
constexpr std::array<std::array<int, 3>, 4> kOutwardFaces{{
    {1, 2, 3},
    {0, 3, 2},
    {0, 1, 3},
    {0, 2, 1},
}};

// Points of a barycentric lattice over coarse vertices, deduplicated by their
// (coarse vertex, integer weight) support so that shared faces agree.
class LatticeIndexer {
public:
    using Key = std::array<int, 8>;

    int index(std::span<const int> coarse, std::span<const int> weights, const Vec3& position,
              std::vector<Vec3>& vertices)
    {
        std::array<std::pair<int, int>, 4> support{};
        int count = 0;
        for (std::size_t i = 0; i < coarse.size(); ++i) {
            if (weights[i] != 0) {
                support[count++] = {coarse[i], weights[i]};
            }
        }
        std::sort(support.begin(), support.begin() + count);
        Key key;
        key.fill(-1);
        for (int i = 0; i < count; ++i) {
            key[2 * i] = support[i].first;
            key[2 * i + 1] = support[i].second;
        }
        auto [it, inserted] = ids_.try_emplace(key, static_cast<int>(vertices.size()));
        if (inserted) {
            vertices.push_back(position);
        }
        return it->second;
    }

private:
    std::map<Key, int> ids_;
};

struct Icosahedron {
    std::vector<Vec3> vertices;
    std::vector<Tri> faces;
};

Icosahedron unit_icosahedron()
{
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    Icosahedron ico;
    ico.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                    {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : ico.vertices) {
        v.normalize();
    }
    ico.faces = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
                 {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                 {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
                 {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (auto& f : ico.faces) {
        const Vec3& a = ico.vertices[f[0]];
        const Vec3& b = ico.vertices[f[1]];
        const Vec3& c = ico.vertices[f[2]];
        if ((b - a).cross(c - a).dot(a + b + c) < 0.0) {
            std::swap(f[1], f[2]);
        }
    }
    return ico;
}

Vec3 lattice_point(std::span<const Vec3> corners, std::span<const int> weights, int m)
{
    Vec3 p = Vec3::Zero();
    for (std::size_t i = 0; i < corners.size(); ++i) {
        p += static_cast<double>(weights[i]) * corners[i];
    }
    return p / static_cast<double>(m);
}

template <std::size_t K>
std::array<int, K> sorted(std::array<int, K> a)
{
    std::sort(a.begin(), a.end());
    return a;
}

double max_edge(std::span<const Vec3> vertices, std::span<const int> element)
{
    double h = 0.0;
    for (std::size_t i = 0; i < element.size(); ++i) {
        for (std::size_t j = i + 1; j < element.size(); ++j) {
            h = std::max(h, (vertices[element[i]] - vertices[element[j]]).norm());
        }
    }
    return h;
}

struct FaceRecord {
    Tri key;
    int tet;
    int local;
};

} // namespace

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c)
{
    return 0.5 * (b - a).cross(c - a).norm();
}

SurfaceMesh generate_unit_square_mesh(int n)
{
    VENTCEL_REQUIRE(n >= 1, ErrorKind::invalid_argument, "square mesh needs n >= 1");
    SurfaceMesh mesh;
    const auto id = [n](int i, int j) { return j * (n + 1) + i; };
    mesh.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            mesh.vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n, 0.0);
        }
    }
    mesh.triangles.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    mesh.is_closed = false;
    return mesh;
}

VolumeMesh generate_unit_cube_mesh(int n)
{
    VENTCEL_REQUIRE(n >= 1, ErrorKind::invalid_argument, "cube mesh needs n >= 1");
    std::vector<Vec3> vertices;
    const auto id = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
    vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1) * (n + 1)));
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i <= n; ++i) {
                vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n,
                                      static_cast<double>(k) / n);
            }
        }
    }
    std::array<int, 3> perm{0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do {
        perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::vector<Tet> tets;
    tets.reserve(static_cast<std::size_t>(6 * n * n * n));
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                for (const auto& p : perms) {
                    std::array<int, 3> c{i, j, k};
                    Tet t{};
                    t[0] = id(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        ++c[p[s]];
                        t[s + 1] = id(c[0], c[1], c[2]);
                    }
                    tets.push_back(t);
                }
            }
        }
    }
    return make_volume_mesh(std::move(vertices), std::move(tets));
}

SurfaceMesh generate_sphere_mesh(int level)
{
    VENTCEL_REQUIRE(level >= 0 && level <= 10, ErrorKind::invalid_argument,
                    "sphere level must be in [0, 10]");
    const int m = 1 << level;
    const Icosahedron ico = unit_icosahedron();
    SurfaceMesh mesh;
    LatticeIndexer indexer;
    for (const Tri& face : ico.faces) {
        const std::array<Vec3, 3> corners{ico.vertices[face[0]], ico.vertices[face[1]],
                                          ico.vertices[face[2]]};
        const auto point = [&](int i, int j) {
            const std::array<int, 3> w{m - i - j, i, j};
            const Vec3 p = lattice_point(corners, w, m);
            return indexer.index(face, w, p / p.norm(), mesh.vertices);
        };
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i + j < m; ++i) {
                mesh.triangles.push_back({point(i, j), point(i + 1, j), point(i, j + 1)});
                if (i + j + 2 <= m) {
                    mesh.triangles.push_back({point(i + 1, j), point(i + 1, j + 1), point(i, j + 1)});
                }
            }
        }
    }
    mesh.is_closed = true;
    return mesh;
}

VolumeMesh generate_ball_mesh(int level)
{
    VENTCEL_REQUIRE(level >= 0 && level <= 7, ErrorKind::invalid_argument,
                    "ball level must be in [0, 7]");
    const int m = 1 << level;
    const Icosahedron ico = unit_icosahedron();
    const int center = static_cast<int>(ico.vertices.size());

    // Kuhn paths through a unit lattice cube; the ones inside {x >= y >= z}
    // tile the reference cone simplex.
    std::array<int, 3> perm{0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do {
        perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::vector<Vec3> vertices;
    std::vector<Tet> tets;
    tets.reserve(static_cast<std::size_t>(20) * m * m * m);
    LatticeIndexer indexer;

    for (const Tri& face : ico.faces) {
        const std::array<int, 4> coarse{center, face[0], face[1], face[2]};
        const std::array<Vec3, 4> corners{Vec3::Zero(), ico.vertices[face[0]],
                                          ico.vertices[face[1]], ico.vertices[face[2]]};
        const auto point = [&](const std::array<int, 3>& c) {
            const std::array<int, 4> w{m - c[0], c[0] - c[1], c[1] - c[2], c[2]};
            Vec3 p = lattice_point(std::span<const Vec3>(corners).subspan(1),
                                   std::span<const int>(w).subspan(1), m);
            if (c[0] > 0) {
                // Gauge map: the flat shell at lattice layer c[0] goes to radius c[0]/m.
                p *= (static_cast<double>(c[0]) / m) / p.norm();
            }
            return indexer.index(coarse, w, p, vertices);
        };
        const auto inside = [](const std::array<int, 3>& c) { return c[0] >= c[1] && c[1] >= c[2]; };
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b <= a; ++b) {
                for (int c = 0; c <= b; ++c) {
                    for (const auto& p : perms) {
                        std::array<std::array<int, 3>, 4> path;
                        path[0] = {a, b, c};
                        bool ok = inside(path[0]);
                        for (int s = 0; s < 3 && ok; ++s) {
                            path[s + 1] = path[s];
                            ++path[s + 1][p[s]];
                            ok = inside(path[s + 1]);
                        }
                        if (!ok) {
                            continue;
                        }
                        tets.push_back({point(path[0]), point(path[1]), point(path[2]), point(path[3])});
                    }
                }
            }
        }
    }
    return make_volume_mesh(std::move(vertices), std::move(tets));
}

void rebuild_boundary(VolumeMesh& mesh)
{
    std::vector<FaceRecord> faces;
    faces.reserve(mesh.tets.size() * 4);
    for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
        const Tet& tet = mesh.tets[t];
        for (int f = 0; f < 4; ++f) {
            const auto& lf = kOutwardFaces[f];
            faces.push_back({sorted(Tri{tet[lf[0]], tet[lf[1]], tet[lf[2]]}), static_cast<int>(t), f});
        }
    }
    std::sort(faces.begin(), faces.end(), [](const FaceRecord& a, const FaceRecord& b) {
        return std::tie(a.key, a.tet) < std::tie(b.key, b.tet);
    });
    mesh.boundary_faces.clear();
    for (std::size_t i = 0; i < faces.size();) {
        std::size_t j = i + 1;
        while (j < faces.size() && faces[j].key == faces[i].key) {
            ++j;
        }
        if (j - i > 2) {
            throw Error(ErrorKind::invalid_mesh,
                        "face shared by " + std::to_string(j - i) + " tets (non-manifold)");
        }
        if (j - i == 1) {
            const Tet& tet = mesh.tets[faces[i].tet];
            const auto& lf = kOutwardFaces[faces[i].local];
            mesh.boundary_faces.push_back({Tri{tet[lf[0]], tet[lf[1]], tet[lf[2]]}, faces[i].tet});
        }
        i = j;
    }
}

SurfaceMesh extract_boundary(const VolumeMesh& mesh)
{
    SurfaceMesh surface;
    surface.vertices = mesh.vertices;
    surface.triangles.reserve(mesh.boundary_faces.size());
    for (const auto& f : mesh.boundary_faces) {
        surface.triangles.push_back(f.vertices);
    }
    surface.is_closed = true;
    return surface;
}

VolumeMesh make_volume_mesh(std::vector<Vec3> vertices, std::vector<Tet> tets)
{
    VolumeMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.tets = std::move(tets);
    const int nv = static_cast<int>(mesh.vertices.size());
    for (Tet& t : mesh.tets) {
        for (int v : t) {
            VENTCEL_REQUIRE(v >= 0 && v < nv, ErrorKind::invalid_mesh, "tet references unknown vertex");
        }
        const auto& x = mesh.vertices;
        double vol = signed_volume(x[t[0]], x[t[1]], x[t[2]], x[t[3]]);
        const double h = max_edge(x, t);
        if (std::abs(vol) <= 1e-14 * h * h * h) {
            throw Error(ErrorKind::invalid_mesh, "degenerate tet");
        }
        if (vol < 0.0) {
            std::swap(t[2], t[3]);
        }
    }
    rebuild_boundary(mesh);
    return mesh;
}

SurfaceMesh make_surface_mesh(std::vector<Vec3> vertices, std::vector<Tri> triangles)
{
    SurfaceMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.triangles = std::move(triangles);
    const int nv = static_cast<int>(mesh.vertices.size());
    std::vector<std::array<int, 2>> edges;
    edges.reserve(mesh.triangles.size() * 3);
    for (const Tri& t : mesh.triangles) {
        for (int v : t) {
            VENTCEL_REQUIRE(v >= 0 && v < nv, ErrorKind::invalid_mesh, "triangle references unknown vertex");
        }
        for (int e = 0; e < 3; ++e) {
            edges.push_back(sorted(std::array<int, 2>{t[e], t[(e + 1) % 3]}));
        }
    }
    std::sort(edges.begin(), edges.end());
    bool closed = !edges.empty();
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j] == edges[i]) {
            ++j;
        }
        closed = closed && (j - i == 2);
        i = j;
    }
    mesh.is_closed = closed;
    return mesh;
}

double mesh_size(const VolumeMesh& mesh)
{
    VENTCEL_REQUIRE(!mesh.tets.empty(), ErrorKind::invalid_argument, "mesh_size of empty mesh");
    double h = 0.0;
    for (const Tet& t : mesh.tets) {
        h = std::max(h, max_edge(mesh.vertices, t));
    }
    return h;
}

double mesh_size(const SurfaceMesh& mesh)
{
    VENTCEL_REQUIRE(!mesh.triangles.empty(), ErrorKind::invalid_argument, "mesh_size of empty mesh");
    double h = 0.0;
    for (const Tri& t : mesh.triangles) {
        h = std::max(h, max_edge(mesh.vertices, t));
    }
    return h;
}

double total_volume(const VolumeMesh& mesh)
{
    double v = 0.0;
    for (const Tet& t : mesh.tets) {
        const auto& x = mesh.vertices;
        v += signed_volume(x[t[0]], x[t[1]], x[t[2]], x[t[3]]);
    }
    return v;
}

double total_area(const SurfaceMesh& mesh)
{
    double a = 0.0;
    for (const Tri& t : mesh.triangles) {
        a += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    }
    return a;
}

namespace {

template <std::size_t K>
std::vector<std::array<int, 2>> unique_edges(const std::vector<std::array<int, K>>& elements)
{
    std::vector<std::array<int, 2>> edges;
    edges.reserve(elements.size() * K * (K - 1) / 2);
    for (const auto& el : elements) {
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = i + 1; j < K; ++j) {
                edges.push_back(sorted(std::array<int, 2>{el[i], el[j]}));
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

} // namespace

std::size_t count_edges(const SurfaceMesh& mesh) { return unique_edges(mesh.triangles).size(); }
std::size_t count_edges(const VolumeMesh& mesh) { return unique_edges(mesh.tets).size(); }

long euler_characteristic(const SurfaceMesh& mesh)
{
    std::vector<char> used(mesh.vertices.size(), 0);
    for (const Tri& t : mesh.triangles) {
        for (int v : t) {
            used[v] = 1;
        }
    }
    const long v = std::count(used.begin(), used.end(), 1);
    return v - static_cast<long>(count_edges(mesh)) + static_cast<long>(mesh.triangles.size());
}

MeshCheck check_invariants(const VolumeMesh& mesh)
{
    MeshCheck check;
    const auto fail = [&](std::string msg) {
        check.ok = false;
        check.failures.push_back(std::move(msg));
    };
    const auto& x = mesh.vertices;
    std::size_t inverted = 0;
    for (const Tet& t : mesh.tets) {
        if (signed_volume(x[t[0]], x[t[1]], x[t[2]], x[t[3]]) <= 0.0) {
            ++inverted;
        }
    }
    if (inverted > 0) {
        fail(std::to_string(inverted) + " tets with nonpositive signed volume");
    }

    VolumeMesh rebuilt;
    rebuilt.vertices = mesh.vertices;
    rebuilt.tets = mesh.tets;
    try {
        rebuild_boundary(rebuilt);
    } catch (const Error& e) {
        fail(e.what());
        return check;
    }
    std::vector<Tri> expected;
    std::vector<Tri> actual;
    for (const auto& f : rebuilt.boundary_faces) {
        expected.push_back(sorted(f.vertices));
    }
    for (const auto& f : mesh.boundary_faces) {
        actual.push_back(sorted(f.vertices));
    }
    std::sort(expected.begin(), expected.end());
    std::sort(actual.begin(), actual.end());
    if (expected != actual) {
        fail("boundary faces differ from faces incident to exactly one tet");
    }

    std::size_t inward = 0;
    for (const auto& f : mesh.boundary_faces) {
        const Tet& t = mesh.tets[f.owner];
        const Vec3 tc = (x[t[0]] + x[t[1]] + x[t[2]] + x[t[3]]) / 4.0;
        const Vec3& a = x[f.vertices[0]];
        const Vec3& b = x[f.vertices[1]];
        const Vec3& c = x[f.vertices[2]];
        const Vec3 fc = (a + b + c) / 3.0;
        if ((b - a).cross(c - a).dot(fc - tc) <= 0.0) {
            ++inward;
        }
    }
    if (inward > 0) {
        fail(std::to_string(inward) + " boundary faces not oriented outward");
    }

    SurfaceMesh surface = extract_boundary(mesh);
    std::vector<std::array<int, 2>> edges;
    for (const Tri& t : surface.triangles) {
        for (int e = 0; e < 3; ++e) {
            edges.push_back(sorted(std::array<int, 2>{t[e], t[(e + 1) % 3]}));
        }
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j] == edges[i]) {
            ++j;
        }
        if (j - i != 2) {
            fail("boundary edge shared by " + std::to_string(j - i) + " faces");
            break;
        }
        i = j;
    }
    return check;
}

MeshCheck check_invariants(const SurfaceMesh& mesh)
{
    MeshCheck check;
    const auto fail = [&](std::string msg) {
        check.ok = false;
        check.failures.push_back(std::move(msg));
    };
    for (const Tri& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        const double h = max_edge(mesh.vertices, t);
        if (triangle_area(a, b, c) <= 1e-14 * h * h) {
            fail("zero-area triangle");
            break;
        }
    }
    std::vector<std::array<int, 2>> edges;
    for (const Tri& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            edges.push_back(sorted(std::array<int, 2>{t[e], t[(e + 1) % 3]}));
        }
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j] == edges[i]) {
            ++j;
        }
        if (j - i > 2 || (mesh.is_closed && j - i != 2)) {
            fail("edge shared by " + std::to_string(j - i) + " triangles");
            break;
        }
        i = j;
    }
    if (mesh.is_closed && euler_characteristic(mesh) != 2) {
        fail("closed surface with Euler characteristic " + std::to_string(euler_characteristic(mesh)));
    }
    return check;
}

} // namespace ventcel
