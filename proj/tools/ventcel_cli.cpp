#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "ventcel/error.hpp"
#include "ventcel/fem.hpp"
#include "ventcel/linalg.hpp"
#include "ventcel/mesh.hpp"
#include "ventcel/study.hpp"

namespace {

using namespace ventcel;

constexpr double kFunctionalResidualLimit = 1e-9;

AnyMesh generate(const std::string& kind, int res)
{
    if (kind == "square") {
        return generate_unit_square_mesh(res);
    }
    if (kind == "cube") {
        return generate_unit_cube_mesh(res);
    }
    if (kind == "sphere") {
        return generate_sphere_mesh(res);
    }
    if (kind == "ball") {
        return generate_ball_mesh(res);
    }
    throw Error(ErrorKind::invalid_argument, "unknown mesh kind '" + kind + "'");
}

void print_checks(const MeshCheck& check)
{
    std::printf("invariants: %s\n", check.ok ? "ok" : "FAILED");
    for (const std::string& f : check.failures) {
        std::printf("  %s\n", f.c_str());
    }
}

int mesh_info(const std::string& path)
{
    const AnyMesh mesh = read_gmsh_file(path);
    if (const auto* v = std::get_if<VolumeMesh>(&mesh)) {
        const SurfaceMesh boundary = extract_boundary(*v);
        std::printf("volume mesh\nvertices: %zu\ntets: %zu\nboundary faces: %zu\n", v->vertices.size(), v->tets.size(),
                    v->boundary_faces.size());
        std::printf("h: %.12g\nvolume: %.12g\nboundary area: %.12g\nboundary closed: %s\n", mesh_size(*v),
                    total_volume(*v), total_area(boundary), boundary.is_closed ? "yes" : "no");
        print_checks(check_invariants(*v));
        return check_invariants(*v).ok ? 0 : 1;
    }
    const auto& s = std::get<SurfaceMesh>(mesh);
    std::printf("surface mesh\nvertices: %zu\ntriangles: %zu\n", s.vertices.size(), s.triangles.size());
    std::printf("h: %.12g\narea: %.12g\nclosed: %s\n", mesh_size(s), total_area(s), s.is_closed ? "yes" : "no");
    if (s.is_closed) {
        std::printf("euler characteristic: %ld\n", euler_characteristic(s));
    }
    const MeshCheck check = check_invariants(s);
    print_checks(check);
    return check.ok ? 0 : 1;
}

int mesh_gen(const std::string& kind, int res, const std::string& out)
{
    const AnyMesh mesh = generate(kind, res);
    std::ofstream file(out);
    if (!file) {
        throw Error(ErrorKind::io_error, "cannot open '" + out + "' for writing");
    }
    std::visit([&file](const auto& m) { write_gmsh_msh(file, m); }, mesh);
    if (!file) {
        throw Error(ErrorKind::io_error, "write to '" + out + "' failed");
    }
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, VolumeMesh>) {
                std::printf("wrote %s: %zu vertices, %zu tets\n", out.c_str(), m.vertices.size(), m.tets.size());
            } else {
                std::printf("wrote %s: %zu vertices, %zu triangles\n", out.c_str(), m.vertices.size(),
                            m.triangles.size());
            }
        },
        mesh);
    return 0;
}

std::vector<int> parse_levels(const std::string& text)
{
    std::vector<int> levels;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) {
            continue;
        }
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        VENTCEL_REQUIRE(used == item.size(), ErrorKind::invalid_argument, "bad level '" + item + "'");
        levels.push_back(v);
    }
    VENTCEL_REQUIRE(!levels.empty(), ErrorKind::invalid_argument, "empty level list");
    return levels;
}

int study(const StudyOptions& base, const std::vector<int>& degrees, const std::string& out)
{
    std::ostringstream csv;
    write_csv_header(csv);
    bool ok = true;
    for (int degree : degrees) {
        StudyOptions options = base;
        options.degree = degree;
        const ConvergenceReport report = run_study(options);
        write_csv_rows(csv, report);
        std::cout << format_order_table(report) << std::flush;
        ok = ok && report.all_ok();
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream file(out);
        if (!file) {
            throw Error(ErrorKind::io_error, "cannot open '" + out + "' for writing");
        }
        file << csv.str();
    }
    return ok ? 0 : 1;
}

int solve(const std::string& path, const std::string& problem, int degree, int nev, std::uint64_t seed)
{
    const EigenProblem p = build_mesh_eigen_problem(read_gmsh_file(path), problem, degree);

    LanczosOptions options;
    options.nev = nev;
    options.seed = seed;
    options.max_factor_ratio = kStudyFactorRatio;
    options.normalization = &p.normalization;
    const LanczosResult r = lanczos_shift_invert(p.a, p.b, options);
    std::printf("problem %s, P%d, %zu dofs, IC(%d)\n", problem.c_str(), degree, p.space->num_dofs(), r.stats.fill_level);
    std::printf("%4s  %20s  %12s  %12s\n", "i", "lambda", "algebraic", "functional");
    bool ok = r.converged;
    for (std::size_t i = 0; i < r.pairs.size(); ++i) {
        const EigenPair& pair = r.pairs[i];
        std::printf("%4zu  %20.12f  %12.3e  %12.3e\n", i, pair.eigenvalue, pair.algebraic_residual,
                    pair.functional_residual);
        ok = ok && pair.functional_residual <= kFunctionalResidualLimit;
    }
    if (!r.converged) {
        std::printf("eigensolver did not converge (%zu of %d pairs)\n", r.pairs.size(), nev);
    }
    if (r.exhausted) {
        std::printf("pencil has only %zu finite eigenvalues\n", r.pairs.size());
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Lagrange FEM and shift-invert Lanczos for Ventcel eigenproblems"};
    app.require_subcommand(1);

    auto* mesh = app.add_subcommand("mesh", "generate or inspect meshes");
    mesh->require_subcommand(1);
    std::string kind;
    int res = 1;
    std::string out;
    std::string mesh_path;
    auto* gen = mesh->add_subcommand("gen", "write a generated mesh as MSH 2.2");
    gen->add_option("--kind", kind, "square, cube, sphere or ball")
        ->required()
        ->check(CLI::IsMember({"square", "cube", "sphere", "ball"}));
    gen->add_option("--res", res, "subdivisions per side (square, cube) or refinement level (sphere, ball)")
        ->required();
    gen->add_option("--out", out, "output path")->required();
    auto* info = mesh->add_subcommand("info", "print counts, size, measure and invariant checks");
    info->add_option("--mesh", mesh_path, "MSH 2.2 file")->required();

    auto* study_cmd = app.add_subcommand("study", "run a convergence study");
    StudyOptions study_options;
    std::vector<int> degrees{1};
    std::string levels_text;
    study_cmd->add_option("--study", study_options.study, "study id")->required()->check(CLI::IsMember(study_ids()));
    study_cmd->add_option("--degree", degrees, "Lagrange degrees (1, 2, 3)")->delimiter(',');
    study_cmd->add_option("--levels", levels_text, "mesh resolutions, comma separated");
    study_cmd->add_option("--n", study_options.n, "target eigenvalue index for ventcel_ball");
    study_cmd->add_option("--nev", study_options.nev, "number of eigenpairs (0: automatic)");
    study_cmd->add_option("--seed", study_options.seed, "Lanczos start-vector seed");
    study_cmd->add_option("--out", out, "CSV output path (stdout when omitted)");

    auto* solve_cmd = app.add_subcommand("solve", "solve an eigenproblem on an imported mesh");
    std::string problem = "ventcel";
    int degree = 1;
    int nev = 5;
    std::uint64_t seed = 0;
    solve_cmd->add_option("--mesh", mesh_path, "MSH 2.2 file")->required();
    solve_cmd->add_option("--problem", problem, "ventcel, lb_eig or flat_eig")
        ->check(CLI::IsMember({"ventcel", "lb_eig", "flat_eig"}));
    solve_cmd->add_option("--degree", degree, "Lagrange degree");
    solve_cmd->add_option("--nev", nev, "number of eigenpairs");
    solve_cmd->add_option("--seed", seed, "Lanczos start-vector seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return mesh_gen(kind, res, out);
        }
        if (info->parsed()) {
            return mesh_info(mesh_path);
        }
        if (study_cmd->parsed()) {
            if (study_cmd->count("--levels") > 0) {
                study_options.levels = parse_levels(levels_text);
            }
            return study(study_options, degrees, out);
        }
        if (solve_cmd->parsed()) {
            return solve(mesh_path, problem, degree, nev, seed);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
