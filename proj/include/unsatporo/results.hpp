/// @file results.hpp
/// @brief Result rows and their CSV, JSON and table renderings.

#ifndef UNSATPORO_RESULTS_HPP
#define UNSATPORO_RESULTS_HPP

#include "unsatporo/mesh.hpp"
#include "unsatporo/time_integration.hpp"

#include <json.hpp>

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace unsatporo {

struct ResultRow {
    std::string experiment;
    std::string grid;      ///< "NxN"
    std::string scheme;    ///< Im, sIm, ImEx
    std::string smoother;  ///< direct, Jacobi, GS, V, VK, VK1, ...
    int colors = 1;
    int sweeps = 0;
    int M = 0;
    double iters_mean = 0.0;
    bool converged = true;
    int iters_cap = 0;  ///< printed as ">cap" when not converged
    double solve_s = 0.0;
    double total_s = 0.0;
    double e_p = std::numeric_limits<double>::quiet_NaN();
    double e_u = std::numeric_limits<double>::quiet_NaN();

    bool operator==(const ResultRow& o) const;
};

inline constexpr const char* kResultsHeader =
    "experiment,grid,scheme,smoother,colors,sweeps,M,iters_mean,solve_s,total_s,e_p,e_u";

/// Canonical order: experiment, grid, scheme, smoother, colors, sweeps, M.
bool row_less(const ResultRow& a, const ResultRow& b);
void sort_rows(std::vector<ResultRow>& rows);

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& os);
void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path);

nlohmann::json results_to_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> results_from_json(const nlohmann::json& j);
void write_results_json(const std::vector<ResultRow>& rows, const std::string& path);

/// Appendix-B layout for one grid: blocks per M, rows per sweeps, columns
/// Jacobi, GS, then V/VK/VK<n> per color count. Cells "iters(solve_s)" or ">cap(-)".
std::string format_solver_table(const std::vector<ResultRow>& rows, const std::string& grid);

/// One line per vertex: x,y,p,u_x,u_y.
void write_state_csv(const StructuredTriMesh& mesh, const State& s, const std::string& path);

nlohmann::json step_report_json(const StepReport& r);
/// One JSON object per line.
void write_step_reports(const std::vector<StepReport>& reports, const std::string& path);

}  // namespace unsatporo

#endif  // UNSATPORO_RESULTS_HPP
