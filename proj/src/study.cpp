#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ventcel/error.hpp"
#include "ventcel/mesh.hpp"
#include "ventcel/study.hpp"

namespace ventcel {

namespace {

enum class Geometry { square, cube, sphere, ball };

struct StudyEntry {
    std::string id;
    Geometry geometry;
    bool eigen;
};

const std::vector<StudyEntry>& registry()
{
    static const std::vector<StudyEntry> entries = {
        {"flat2d_source", Geometry::square, false}, {"flat3d_source", Geometry::cube, false},
        {"flat2d_eig", Geometry::square, true},     {"flat3d_eig", Geometry::cube, true},
        {"lb_sphere_source", Geometry::sphere, false}, {"lb_sphere_eig", Geometry::sphere, true},
        {"ventcel_ball", Geometry::ball, true},
    };
    return entries;
}

const StudyEntry& lookup(const std::string& study)
{
    for (const StudyEntry& e : registry()) {
        if (e.id == study) {
            return e;
        }
    }
    throw Error(ErrorKind::invalid_argument, "unknown study '" + study + "'");
}

struct LevelGeometry {
    FESpacePtr space;
    double h = 0.0;
};

LevelGeometry build_level(const StudyEntry& entry, int degree, int level)
{
    switch (entry.geometry) {
    case Geometry::square: {
        const SurfaceMesh m = generate_unit_square_mesh(level);
        return {build_fespace(m, degree), mesh_size(m)};
    }
    case Geometry::cube: {
        const VolumeMesh m = generate_unit_cube_mesh(level);
        return {build_fespace(m, degree), mesh_size(m)};
    }
    case Geometry::sphere: {
        const SurfaceMesh m = generate_sphere_mesh(level);
        return {build_fespace(m, degree), mesh_size(m)};
    }
    case Geometry::ball: {
        const VolumeMesh m = generate_ball_mesh(level);
        return {build_fespace(m, degree), mesh_size(m)};
    }
    }
    throw Error(ErrorKind::invalid_argument, "unhandled geometry");
}

int flat_dim(const StudyEntry& e) { return e.geometry == Geometry::square ? 2 : 3; }

void validate(const StudyOptions& options)
{
    lookup(options.study);
    VENTCEL_REQUIRE(options.degree >= 1 && options.degree <= 3, ErrorKind::invalid_argument,
                    "degree must be 1, 2 or 3");
    VENTCEL_REQUIRE(options.nev >= 0, ErrorKind::invalid_argument, "nev must be nonnegative");
    if (options.study == "ventcel_ball") {
        VENTCEL_REQUIRE(options.n >= 1 && options.n <= 4, ErrorKind::invalid_argument,
                        "ventcel_ball targets eigenvalue index n in 1..4");
    }
}

LevelResult run_source_level(const StudyEntry& entry, const StudyOptions& options, int level)
{
    LevelResult row;
    row.level = level;
    const LevelGeometry g = build_level(entry, options.degree, level);
    row.h = g.h;
    row.ndof = g.space->num_dofs();
    const FESpace& space = *g.space;

    AnalyticField source;
    AnalyticField exact;
    if (entry.geometry == Geometry::sphere) {
        source = sphere_lift(exp_x_sphere_source());
        exact = sphere_lift(exp_x_field());
    } else {
        source = flat_cosine_source(flat_dim(entry));
        exact = flat_cosine_solution(flat_dim(entry));
    }
    const SparseSymMatrix mass = assemble_mass(space);
    const SparseSymMatrix system = add(assemble_stiffness(space), 1.0, mass, 1.0);
    Vector nodal(space.num_dofs());
    for (std::size_t i = 0; i < nodal.size(); ++i) {
        nodal[i] = source.value(space.dof_coords()[i]);
    }
    const Vector rhs = spmv(mass, nodal);
    const IncompleteCholesky ic = IncompleteCholesky::factorize_within(system, options.fill_level, options.max_factor_ratio);
    row.fill_level = ic.fill_level();
    const CgResult cg = cg_solve(system, rhs, ic);
    row.max_cg_residual = cg.relative_residual;

    const ErrorNorms e = error_norms(FEFunction{g.space, cg.x}, exact);
    if (entry.geometry == Geometry::sphere) {
        row.e_l2 = e.l2;
        row.e_h1 = e.h1();
    } else {
        row.e_l2 = e.l2 / e.exact_l2;
        row.e_h1 = e.h1_semi / e.exact_h1_semi;
    }
    return row;
}

LevelResult run_eigen_level(const StudyEntry& entry, const StudyOptions& options, int level)
{
    LevelResult row;
    row.level = level;
    const EigenProblem p = build_eigen_problem(options, level);
    row.h = p.h;
    row.ndof = p.space->num_dofs();

    LanczosOptions lo;
    lo.nev = p.nev;
    lo.seed = options.seed;
    lo.fill_level = options.fill_level;
    lo.max_factor_ratio = options.max_factor_ratio;
    lo.normalization = &p.normalization;
    const LanczosResult r = lanczos_shift_invert(p.a, p.b, lo);
    row.fill_level = r.stats.fill_level;
    row.max_cg_residual = r.stats.max_inner_residual;
    for (const EigenPair& pair : r.pairs) {
        row.eigenvalues.push_back(pair.eigenvalue);
        row.max_algebraic_residual = std::max(row.max_algebraic_residual, pair.algebraic_residual);
        row.max_functional_residual = std::max(row.max_functional_residual, pair.functional_residual);
    }
    if (!r.converged) {
        row.failure = "eigensolver returned " + std::to_string(r.pairs.size()) + " of " + std::to_string(p.nev) +
                      " requested pairs";
    }
    if (r.pairs.size() <= p.target_index) {
        if (row.failure.empty()) {
            row.failure = "pencil has no eigenvalue at the target position";
        }
        return row;
    }

    const EigenPair& target = r.pairs[p.target_index];
    row.lambda_h = target.eigenvalue;
    row.e_lambda = std::abs(target.eigenvalue - p.exact_lambda) / p.exact_lambda;
    for (const EigenCluster& c : cluster_eigenvalues(row.eigenvalues)) {
        if (p.target_index >= c.first && p.target_index < c.first + c.count) {
            row.cluster_size = c.count;
        }
    }

    const FEFunction uh{p.space, target.vector};
    const EigenspaceProjection proj = project_onto_eigenspace(uh, p.basis);
    const ErrorNorms e = error_norms(uh, proj.field());
    if (entry.geometry == Geometry::ball) {
        row.e_l2 = e.l2;
        row.e_h1 = e.h1_semi;
    } else if (entry.geometry == Geometry::sphere) {
        const double norm = l2_norm(uh);
        row.e_l2 = e.l2 / norm;
        row.e_h1 = e.h1() / norm;
    } else {
        row.e_l2 = e.l2;
        row.e_h1 = e.h1();
    }
    return row;
}

void fit_column(const ConvergenceReport& report, std::optional<double> LevelResult::*column, FittedOrder& out)
{
    std::vector<double> hs;
    std::vector<double> es;
    bool floor_hit = false;
    for (const LevelResult& row : report.rows) {
        const auto& v = row.*column;
        if (!row.ok() || !v) {
            continue;
        }
        // Same values as the CSV text.
        const double e = std::strtod(format_csv_number(*v).c_str(), nullptr);
        if (!(e > 0.0)) {
            floor_hit = true;
            continue;
        }
        hs.push_back(std::strtod(format_csv_number(row.h).c_str(), nullptr));
        es.push_back(e);
    }
    out = FittedOrder{};
    if (hs.size() < 2) {
        out.note = floor_hit ? "converged to the floor" : "fewer than two levels";
        return;
    }
    out.least_squares = convergence_order(hs, es);
    out.pairwise = pairwise_orders(hs, es);
}

} // namespace

const std::vector<std::string>& study_ids()
{
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (const StudyEntry& e : registry()) {
            v.push_back(e.id);
        }
        return v;
    }();
    return ids;
}

bool is_eigen_study(const std::string& study) { return lookup(study).eigen; }

std::vector<int> default_levels(const std::string& study, int degree)
{
    const StudyEntry& e = lookup(study);
    switch (e.geometry) {
    case Geometry::square:
        // P3 eigen error reaches the rounding floor of the CG solves past n = 32.
        return degree == 3 && e.eigen ? std::vector<int>{4, 8, 16, 32} : std::vector<int>{8, 16, 32, 64};
    case Geometry::cube:
        return degree == 3 && e.eigen ? std::vector<int>{2, 4, 8} : std::vector<int>{4, 8, 16};
    case Geometry::sphere:
        return {2, 3, 4, 5};
    case Geometry::ball:
        return {1, 2, 3};
    }
    return {};
}

EigenProblem build_eigen_problem(const StudyOptions& options, int level)
{
    validate(options);
    const StudyEntry& entry = lookup(options.study);
    VENTCEL_REQUIRE(entry.eigen, ErrorKind::invalid_argument, options.study + " is not an eigen study");
    const LevelGeometry g = build_level(entry, options.degree, level);
    const FESpace& space = *g.space;
    EigenProblem p;
    p.space = g.space;
    p.h = g.h;
    switch (entry.geometry) {
    case Geometry::square:
    case Geometry::cube: {
        const int d = flat_dim(entry);
        p.a = assemble_stiffness(space);
        p.b = assemble_mass(space);
        p.normalization = p.b;
        p.exact_lambda = std::numbers::pi * std::numbers::pi;
        p.target_index = 1;
        p.nev = 1 + d + 3;
        p.basis = flat_cosine_eigenbasis(d);
        break;
    }
    case Geometry::sphere:
        p.a = assemble_surface_stiffness(space);
        p.b = assemble_surface_mass(space);
        p.normalization = p.b;
        p.exact_lambda = 2.0;
        p.target_index = 1;
        p.nev = 1 + 3 + 3;
        p.basis = lifted_sphere_eigenbasis();
        break;
    case Geometry::ball: {
        const int n = options.n;
        p.a = add(assemble_volume_stiffness(space), 1.0, assemble_surface_stiffness(space), 1.0);
        p.b = assemble_surface_mass(space);
        p.normalization = assemble_volume_mass(space);
        p.exact_lambda = n * n + 2.0 * n;
        p.target_index = static_cast<std::size_t>(n * n);
        p.nev = (n + 1) * (n + 1) + 3;
        p.basis = harmonic_basis(n);
        break;
    }
    }
    if (options.nev > 0) {
        VENTCEL_REQUIRE(static_cast<std::size_t>(options.nev) > p.target_index, ErrorKind::invalid_argument,
                        "nev must reach past the target eigenvalue");
        p.nev = options.nev;
    }
    return p;
}

EigenProblem build_mesh_eigen_problem(const AnyMesh& mesh, const std::string& problem, int degree)
{
    const auto* volume = std::get_if<VolumeMesh>(&mesh);
    EigenProblem p;
    if (problem == "ventcel") {
        VENTCEL_REQUIRE(volume != nullptr, ErrorKind::invalid_argument, "ventcel needs a tetrahedral mesh");
        p.space = build_fespace(*volume, degree);
        p.a = add(assemble_volume_stiffness(*p.space), 1.0, assemble_surface_stiffness(*p.space), 1.0);
        p.b = assemble_surface_mass(*p.space);
        p.normalization = assemble_volume_mass(*p.space);
        p.h = mesh_size(*volume);
        return p;
    }
    VENTCEL_REQUIRE(problem == "lb_eig" || problem == "flat_eig", ErrorKind::invalid_argument,
                    "unknown problem '" + problem + "'");
    if (problem == "lb_eig") {
        VENTCEL_REQUIRE(volume == nullptr, ErrorKind::invalid_argument, "lb_eig needs a surface mesh");
    }
    if (volume != nullptr) {
        p.space = build_fespace(*volume, degree);
        p.h = mesh_size(*volume);
    } else {
        const auto& surface = std::get<SurfaceMesh>(mesh);
        p.space = build_fespace(surface, degree);
        p.h = mesh_size(surface);
    }
    p.a = assemble_stiffness(*p.space);
    p.b = assemble_mass(*p.space);
    p.normalization = p.b;
    return p;
}

LevelResult run_level(const StudyOptions& options, int level)
{
    validate(options);
    const StudyEntry& entry = lookup(options.study);
    const auto start = std::chrono::steady_clock::now();
    LevelResult row;
    try {
        row = entry.eigen ? run_eigen_level(entry, options, level) : run_source_level(entry, options, level);
    } catch (const std::exception& e) {
        row = LevelResult{};
        row.level = level;
        row.failure = e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

bool ConvergenceReport::all_ok() const
{
    return std::all_of(rows.begin(), rows.end(), [](const LevelResult& r) { return r.ok(); });
}

void fit_orders(ConvergenceReport& report)
{
    fit_column(report, &LevelResult::e_h1, report.order_h1);
    fit_column(report, &LevelResult::e_l2, report.order_l2);
    fit_column(report, &LevelResult::e_lambda, report.order_lambda);
}

ConvergenceReport run_study(const StudyOptions& options)
{
    validate(options);
    const std::vector<int> levels = options.levels.empty() ? default_levels(options.study, options.degree) : options.levels;
    VENTCEL_REQUIRE(!levels.empty(), ErrorKind::invalid_argument, "empty level list");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        VENTCEL_REQUIRE(levels[i] >= 0, ErrorKind::invalid_argument, "levels must be nonnegative");
        VENTCEL_REQUIRE(i == 0 || levels[i] > levels[i - 1], ErrorKind::invalid_argument,
                        "levels must be strictly increasing");
    }
    ConvergenceReport report;
    report.study = options.study;
    report.degree = options.degree;
    report.n = options.n;
    for (int level : levels) {
        report.rows.push_back(run_level(options, level));
    }
    fit_orders(report);
    return report;
}

// Output ---------------------------------------------------------------------------

std::string format_csv_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

void write_csv_header(std::ostream& out) { out << "study,degree,level,h,ndof,e_h1,e_l2,e_lambda\n"; }

void write_csv_rows(std::ostream& out, const ConvergenceReport& report)
{
    const auto cell = [](const std::optional<double>& v, bool ok) { return ok && v ? format_csv_number(*v) : "NA"; };
    for (const LevelResult& r : report.rows) {
        std::string study = report.study;
        if (report.study == "ventcel_ball") {
            study += "_n" + std::to_string(report.n);
        }
        out << study << ',' << report.degree << ',' << r.level << ',' << format_csv_number(r.h) << ',' << r.ndof << ','
            << cell(r.e_h1, r.ok()) << ',' << cell(r.e_l2, r.ok()) << ',' << cell(r.e_lambda, r.ok()) << '\n';
    }
}

std::string format_order_table(const ConvergenceReport& report)
{
    std::ostringstream s;
    char buf[256];
    const auto num = [](const std::optional<double>& v, const char* fmt) {
        if (!v) {
            return std::string("NA");
        }
        char b[40];
        std::snprintf(b, sizeof b, fmt, *v);
        return std::string(b);
    };
    s << report.study;
    if (report.study == "ventcel_ball") {
        s << " (n = " << report.n << ")";
    }
    s << ", P" << report.degree << "\n";
    std::snprintf(buf, sizeof buf, "  %5s  %11s  %8s  %11s  %11s  %11s  %s\n", "level", "h", "ndof", "e_h1", "e_l2",
                  "e_lambda", "lambda_h");
    s << buf;
    for (const LevelResult& r : report.rows) {
        if (!r.ok()) {
            s << "  " << r.level << "  failed: " << r.failure << "\n";
            continue;
        }
        std::snprintf(buf, sizeof buf, "  %5d  %11.4e  %8zu  %11s  %11s  %11s  %s\n", r.level, r.h, r.ndof,
                      num(r.e_h1, "%.4e").c_str(), num(r.e_l2, "%.4e").c_str(), num(r.e_lambda, "%.4e").c_str(),
                      num(r.lambda_h, "%.10f").c_str());
        s << buf;
    }
    const auto order_line = [&](const char* name, const FittedOrder& o) {
        s << "  order " << name << ": ";
        if (!o.least_squares) {
            s << "NA" << (o.note.empty() ? "" : " (" + o.note + ")") << "\n";
            return;
        }
        s << num(o.least_squares, "%.2f") << "  pairwise";
        for (double p : o.pairwise) {
            s << ' ' << num(p, "%.2f");
        }
        s << "\n";
    };
    order_line("e_h1    ", report.order_h1);
    order_line("e_l2    ", report.order_l2);
    order_line("e_lambda", report.order_lambda);
    return s.str();
}

} // namespace ventcel
