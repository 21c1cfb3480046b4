/// @file studies.hpp
/// @brief Experiment drivers behind the command-line tool: problem setup from a
/// configuration, the time-scheme study, the solver study, the splitting check
/// and a plain simulation.

#ifndef UNSATPORO_STUDIES_HPP
#define UNSATPORO_STUDIES_HPP

#include "unsatporo/config.hpp"
#include "unsatporo/results.hpp"

#include <functional>
#include <string>
#include <vector>

namespace unsatporo {

using LogFn = std::function<void(const std::string&)>;

/// Everything a run needs on one mesh. Not copyable across threads by
/// reference: discretizations carry assembly counters.
struct Problem {
    Discretization disc;
    HeterogeneityFields fields;
    CoefficientBounds bounds;
    State initial;
};

MaterialModel material_from_config(const ExperimentConfig& c, const HeterogeneityFields& f);
/// Generated fields, or the configured field file when set (its cell count must match N).
HeterogeneityFields fields_for(const ExperimentConfig& c, const StructuredTriMesh& mesh);
Problem make_problem(const ExperimentConfig& c, int N);

/// Transient options for one scheme and step count, direct linear solves.
TransientOptions transient_options(const ExperimentConfig& c, const Problem& problem,
                                   SchemeKind scheme, int N_t);

std::string grid_label(int N);

struct PicardCount {
    int N_t = 0;
    int step = 0;
    int iterations = 0;
};

struct TimeStudyResult {
    std::vector<ResultRow> rows;
    std::vector<PicardCount> picard_counts;  ///< every Im run, steps in order
    int reference_N_t = 0;
};

/// Im, sIm and ImEx over the configured N_t list against an implicit reference
/// at time.reference_N_t. Rows use experiment "time-study:Nt=<N_t>".
TimeStudyResult run_time_scheme_study(const ExperimentConfig& c, const LogFn& log = {});

/// Header "N_t,step,picard_iterations".
void write_picard_counts_csv(const std::vector<PicardCount>& counts, const std::string& path);

struct SolverCell {
    int N = 0;
    std::string smoother;
    int colors = 1;
    int sweeps = 0;
    int M = 0;
};

struct CellCounters {
    SolverCell cell;
    int imex_matrix_assemblies = 0;
    int coarse_factorizations = 0;
    int vanka_setups = 0;
    int imex_solver_setups = 0;
    std::vector<int> iterations;  ///< per ImEx step
};

struct SolverStudyResult {
    std::vector<ResultRow> rows;
    std::vector<CellCounters> counters;  ///< same order as rows
    std::vector<std::string> tables;     ///< one per grid
};

/// Expands the solver grid. Pointwise smoothers ignore colors and get one cell
/// per (sweeps, M, grid).
std::vector<SolverCell> solver_cells(const SolverGridConfig& s);

/// ImEx transient per cell with the two-grid solver on the fixed system. Cells
/// run concurrently up to c.workers; rows come back canonically sorted.
/// e_p, e_u compare the final state with a direct-solver ImEx run on the same grid.
SolverStudyResult run_solver_study(const ExperimentConfig& c, const LogFn& log = {});

/// Header "experiment,grid,smoother,colors,sweeps,M,imex_matrix_assemblies,
/// coarse_factorizations,vanka_setups,imex_solver_setups".
void write_counters_csv(const std::vector<CellCounters>& counters, const std::string& path);

struct SplittingCheck {
    int state_index = 0;  ///< trajectory index
    std::string block;    ///< M, A or K
    double margin = 0.0;
    double scale = 0.0;
    bool pass = false;
};

/// Samples splitting.states states evenly from a semi-implicit trajectory on
/// splitting.N with splitting.N_t steps and checks the M, A, K blocks.
std::vector<SplittingCheck> validate_splitting(const ExperimentConfig& c, const LogFn& log = {});
void write_splitting_csv(const std::vector<SplittingCheck>& checks, const std::string& path);

struct SimulationResult {
    TransientResult transient;
    ResultRow row;
};

/// One transient on mesh.N; states are written to directory as state_<step>.csv
/// when directory is non-empty.
SimulationResult simulate(const ExperimentConfig& c, SchemeKind scheme, int N_t,
                          const std::string& directory, const LogFn& log = {});

/// Runs fn(0..n-1) on up to workers threads; the first exception is rethrown.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace unsatporo

#endif  // UNSATPORO_STUDIES_HPP
