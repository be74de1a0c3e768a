#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "ventcel/error.hpp"
#include "ventcel/mesh.hpp"

namespace ventcel {

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line)
    {
        if (!std::getline(in_, line)) {
            return false;
        }
        ++line_no_;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        return true;
    }

    std::string require(const char* context)
    {
        std::string line;
        if (!next(line)) {
            throw ParseError(ErrorKind::malformed_file, line_no_ + 1,
                             std::string("unexpected end of file in ") + context);
        }
        return line;
    }

    [[nodiscard]] std::size_t line() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

template <class T>
std::vector<T> tokens(const std::string& line, std::size_t line_no)
{
    std::istringstream is(line);
    std::vector<T> out;
    T v;
    while (is >> v) {
        out.push_back(v);
    }
    if (!is.eof()) {
        throw ParseError(ErrorKind::malformed_file, line_no, "non-numeric token in '" + line + "'");
    }
    return out;
}

long parse_count(const std::string& line, std::size_t line_no)
{
    const auto t = tokens<long>(line, line_no);
    if (t.size() != 1 || t[0] < 0) {
        throw ParseError(ErrorKind::malformed_file, line_no, "expected a single count, got '" + line + "'");
    }
    return t[0];
}

void expect_end(LineReader& reader, const std::string& tag)
{
    const std::string line = trim(reader.require(tag.c_str()));
    if (line != tag) {
        throw ParseError(ErrorKind::malformed_file, reader.line(),
                         "expected " + tag + ", got '" + line + "'");
    }
}

} // namespace

AnyMesh parse_gmsh_msh(std::istream& in)
{
    LineReader reader(in);
    bool have_format = false;
    bool have_nodes = false;
    std::vector<Vec3> vertices;
    std::unordered_map<long, int> node_index;
    std::vector<Tet> tets;
    std::vector<Tri> triangles;
    std::string line;

    while (reader.next(line)) {
        const std::string section = trim(line);
        if (section.empty()) {
            continue;
        }
        if (section == "$MeshFormat") {
            const std::string fmt = trim(reader.require("$MeshFormat"));
            std::istringstream is(fmt);
            std::string version;
            int file_type = -1;
            int data_size = -1;
            is >> version >> file_type >> data_size;
            if (version != "2.2" || file_type != 0 || data_size != 8) {
                throw ParseError(ErrorKind::unsupported_format, reader.line(),
                                 "only MSH 2.2 ASCII ('2.2 0 8') is supported, got '" + fmt + "'");
            }
            expect_end(reader, "$EndMeshFormat");
            have_format = true;
        } else if (section == "$Nodes") {
            if (!have_format) {
                throw ParseError(ErrorKind::malformed_file, reader.line(), "$Nodes before $MeshFormat");
            }
            const long count = parse_count(reader.require("$Nodes"), reader.line());
            vertices.reserve(static_cast<std::size_t>(count));
            for (long i = 0; i < count; ++i) {
                const std::string node = reader.require("$Nodes");
                if (trim(node) == "$EndNodes") {
                    throw ParseError(ErrorKind::malformed_file, reader.line(),
                                     "node count mismatch: declared " + std::to_string(count) + ", found " +
                                         std::to_string(i));
                }
                const auto t = tokens<double>(node, reader.line());
                if (t.size() != 4) {
                    throw ParseError(ErrorKind::malformed_file, reader.line(), "node line needs 'id x y z'");
                }
                const long id = static_cast<long>(t[0]);
                if (!node_index.emplace(id, static_cast<int>(vertices.size())).second) {
                    throw ParseError(ErrorKind::malformed_file, reader.line(),
                                     "duplicate node id " + std::to_string(id));
                }
                vertices.emplace_back(t[1], t[2], t[3]);
            }
            const std::string end = trim(reader.require("$Nodes"));
            if (end != "$EndNodes") {
                throw ParseError(ErrorKind::malformed_file, reader.line(),
                                 "node count mismatch: more than " + std::to_string(count) + " nodes");
            }
            have_nodes = true;
        } else if (section == "$Elements") {
            if (!have_nodes) {
                throw ParseError(ErrorKind::malformed_file, reader.line(), "$Elements before $Nodes");
            }
            const long count = parse_count(reader.require("$Elements"), reader.line());
            for (long i = 0; i < count; ++i) {
                const std::string el = reader.require("$Elements");
                if (trim(el) == "$EndElements") {
                    throw ParseError(ErrorKind::malformed_file, reader.line(),
                                     "element count mismatch: declared " + std::to_string(count) +
                                         ", found " + std::to_string(i));
                }
                const auto t = tokens<long>(el, reader.line());
                if (t.size() < 3) {
                    throw ParseError(ErrorKind::malformed_file, reader.line(), "truncated element line");
                }
                const long type = t[1];
                const long ntags = t[2];
                const std::size_t first = 3 + static_cast<std::size_t>(ntags);
                std::size_t nnodes = 0;
                if (type == 2) {
                    nnodes = 3;
                } else if (type == 4) {
                    nnodes = 4;
                }
                if (ntags < 0 || (nnodes > 0 && t.size() != first + nnodes)) {
                    throw ParseError(ErrorKind::malformed_file, reader.line(),
                                     "element line has wrong number of entries");
                }
                if (nnodes == 0) {
                    continue;
                }
                std::array<int, 4> local{};
                for (std::size_t k = 0; k < nnodes; ++k) {
                    const auto it = node_index.find(t[first + k]);
                    if (it == node_index.end()) {
                        throw ParseError(ErrorKind::malformed_file, reader.line(),
                                         "reference to unknown node id " + std::to_string(t[first + k]));
                    }
                    local[k] = it->second;
                }
                if (type == 4) {
                    tets.push_back(local);
                } else {
                    triangles.push_back({local[0], local[1], local[2]});
                }
            }
            const std::string end = trim(reader.require("$Elements"));
            if (end != "$EndElements") {
                throw ParseError(ErrorKind::malformed_file, reader.line(),
                                 "element count mismatch: more than " + std::to_string(count) + " elements");
            }
        } else if (section.front() == '$') {
            // Unknown section (e.g. $PhysicalNames): skip to its end marker.
            const std::string end = "$End" + section.substr(1);
            for (;;) {
                const std::string skip = trim(reader.require(section.c_str()));
                if (skip == end) {
                    break;
                }
            }
        } else {
            throw ParseError(ErrorKind::malformed_file, reader.line(), "unexpected content '" + section + "'");
        }
    }
    if (!have_format) {
        throw ParseError(ErrorKind::malformed_file, reader.line(), "missing $MeshFormat section");
    }
    if (!tets.empty()) {
        return make_volume_mesh(std::move(vertices), std::move(tets));
    }
    VENTCEL_REQUIRE(!triangles.empty(), ErrorKind::malformed_file, "file contains no tets or triangles");
    return make_surface_mesh(std::move(vertices), std::move(triangles));
}

AnyMesh parse_gmsh_msh(std::string_view text)
{
    std::istringstream in{std::string(text)};
    return parse_gmsh_msh(in);
}

AnyMesh read_gmsh_file(const std::string& path)
{
    std::ifstream in(path);
    VENTCEL_REQUIRE(in.good(), ErrorKind::io_error, "cannot open '" + path + "'");
    return parse_gmsh_msh(in);
}

namespace {

void write_header_and_nodes(std::ostream& out, const std::vector<Vec3>& vertices)
{
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$Nodes\n" << vertices.size() << '\n';
    char buf[128];
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g\n", i + 1, vertices[i].x(), vertices[i].y(),
                      vertices[i].z());
        out << buf;
    }
    out << "$EndNodes\n";
}

} // namespace

void write_gmsh_msh(std::ostream& out, const VolumeMesh& mesh)
{
    write_header_and_nodes(out, mesh.vertices);
    out << "$Elements\n" << mesh.boundary_faces.size() + mesh.tets.size() << '\n';
    std::size_t id = 1;
    for (const auto& f : mesh.boundary_faces) {
        out << id++ << " 2 2 2 2 " << f.vertices[0] + 1 << ' ' << f.vertices[1] + 1 << ' '
            << f.vertices[2] + 1 << '\n';
    }
    for (const Tet& t : mesh.tets) {
        out << id++ << " 4 2 1 1 " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << ' ' << t[3] + 1
            << '\n';
    }
    out << "$EndElements\n";
}

void write_gmsh_msh(std::ostream& out, const SurfaceMesh& mesh)
{
    write_header_and_nodes(out, mesh.vertices);
    out << "$Elements\n" << mesh.triangles.size() << '\n';
    std::size_t id = 1;
    for (const Tri& t : mesh.triangles) {
        out << id++ << " 2 2 1 1 " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
    out << "$EndElements\n";
}

} // namespace ventcel
