#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ventcel/analysis.hpp"
#include "ventcel/fem.hpp"
#include "ventcel/linalg.hpp"

namespace ventcel {

/// Registered convergence studies, in registry order.
const std::vector<std::string>& study_ids();
bool is_eigen_study(const std::string& study);
/// Mesh resolutions used when none are given: n for the flat meshes,
/// refinement level for the sphere and the ball.
std::vector<int> default_levels(const std::string& study, int degree);

/// IC fill cap used by the studies, see IncompleteCholesky::factorize_within.
inline constexpr double kStudyFactorRatio = 4.0;

struct StudyOptions {
    std::string study;
    int degree = 1;
    std::vector<int> levels;  // empty: default_levels
    int n = 1;                // target eigenvalue index (ventcel_ball only)
    int nev = 0;              // 0: automatic
    std::uint64_t seed = 0;
    int fill_level = 3;
    double max_factor_ratio = kStudyFactorRatio;
};

/// One level of an eigen study: the pencil A U = lambda B U, the mass matrix
/// used for L2 normalization, and what the study compares against.
struct EigenProblem {
    FESpacePtr space;
    SparseSymMatrix a;
    SparseSymMatrix b;
    SparseSymMatrix normalization;
    double h = 0.0;
    double exact_lambda = 0.0;
    std::size_t target_index = 0;  // position of the target eigenvalue in the ascending spectrum
    int nev = 0;
    EigenspaceBasis basis;
};

/// Throws invalid_argument for a source study or an unknown id.
EigenProblem build_eigen_problem(const StudyOptions& options, int level);

/// Pencil of `problem` on an arbitrary mesh: "ventcel" (tetrahedral mesh,
/// A = S3 + S2, B = M2, normalized in M3), "lb_eig" (surface mesh, S2 / M2) or
/// "flat_eig" (S / M on the mesh's own cells). Only a, b, normalization,
/// space and h are set. Throws invalid_argument for an unknown problem or an
/// incompatible mesh.
EigenProblem build_mesh_eigen_problem(const AnyMesh& mesh, const std::string& problem, int degree);

struct LevelResult {
    int level = 0;
    double h = 0.0;
    std::size_t ndof = 0;
    std::optional<double> e_h1;
    std::optional<double> e_l2;
    std::optional<double> e_lambda;
    std::optional<double> lambda_h;
    std::vector<double> eigenvalues;
    std::size_t cluster_size = 0;  // computed eigenvalues in the target's cluster
    double max_algebraic_residual = 0.0;
    double max_functional_residual = 0.0;
    double max_cg_residual = 0.0;
    int fill_level = 0;
    double seconds = 0.0;
    std::string failure;  // empty on success

    [[nodiscard]] bool ok() const noexcept { return failure.empty(); }
};

struct FittedOrder {
    std::optional<double> least_squares;
    std::vector<double> pairwise;
    std::string note;  // why no order is available
};

struct ConvergenceReport {
    std::string study;
    int degree = 1;
    int n = 1;
    std::vector<LevelResult> rows;
    FittedOrder order_h1;
    FittedOrder order_l2;
    FittedOrder order_lambda;

    [[nodiscard]] bool all_ok() const;
};

/// Runs every level, then fits orders over the successful rows. Level
/// failures are recorded in the row instead of thrown. Throws invalid_argument
/// for an unknown study, an unsupported degree or an empty level list.
ConvergenceReport run_study(const StudyOptions& options);
LevelResult run_level(const StudyOptions& options, int level);

/// Orders from the rows exactly as they are written to CSV.
void fit_orders(ConvergenceReport& report);

/// Header study,degree,level,h,ndof,e_h1,e_l2,e_lambda; NA for missing values.
void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, const ConvergenceReport& report);
/// Human-readable table of the rows and fitted orders.
std::string format_order_table(const ConvergenceReport& report);

/// Decimal form used in the CSV (17 significant digits).
std::string format_csv_number(double v);

} // namespace ventcel
