/// @file time_integration.hpp
/// @brief Implicit Picard, semi-implicit and ImEx time stepping, the initial
/// displacement solve, the transient driver and the splitting-dominance check.

#ifndef UNSATPORO_TIME_INTEGRATION_HPP
#define UNSATPORO_TIME_INTEGRATION_HPP

#include "unsatporo/assembly.hpp"
#include "unsatporo/two_grid.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace unsatporo {

struct TimeGrid {
    double T_max = 172800.0;
    int N_t = 20;

    double tau() const { return T_max / N_t; }
    void validate() const;
};

struct PicardSettings {
    int max_iters = 10;
    double rel_tol_p = 1e-3;
    double rel_tol_u = 1e-3;
};

struct State {
    Vector p;
    Vector u;  ///< displacement block, interleaved (ux, uy) per vertex
};

Vector pack(const State& s);
State unpack(const Vector& x, int n_pressure);

struct StepReport {
    int step = 0;
    int picard_iterations = 0;
    int solver_iterations = 0;
    bool solver_converged = true;
    std::vector<double> solver_residuals;
    double dp_norm = 0.0;
    double du_norm = 0.0;
    double solve_seconds = 0.0;
};

enum class SchemeKind { implicit_picard, semi_implicit, imex };
/// incremental: time-differenced mechanics row with F_u^n - F_u^{n-1};
/// equilibrium: mechanics row F_u^n - alpha G^nl p^n - K^nl u^n.
enum class ImexMechanicsForm { incremental, equilibrium };

const char* scheme_name(SchemeKind s);
SchemeKind parse_scheme(const std::string& s);

/// Builds a solver for a matrix that changes every solve.
using SolverFactory = std::function<std::unique_ptr<FixedSystemSolver>(SparseMatrix)>;
SolverFactory direct_solver_factory();

/// Solves K(p0) u0 = F_u(p0) - alpha G(p0) p0.
Vector initial_displacement(const Discretization& disc, const Vector& p0);
/// compatible_boundary sets the Robin-side nodes to p1 before the displacement solve.
State initial_state(const Discretization& disc, double p0, bool compatible_boundary = false);

State step_semi_implicit(const Discretization& disc, const State& sn, double tau,
                         const SolverFactory& solver, StepReport& report);
State step_implicit_picard(const Discretization& disc, const State& sn, double tau,
                           const PicardSettings& settings, const SolverFactory& solver,
                           StepReport& report);

/// Frozen linear part from coefficient bounds and its fixed system matrix.
class SplitOperators {
public:
    SplitOperators(const Discretization& disc, CoefficientBounds bounds, double tau);

    const Discretization& discretization() const { return *disc_; }
    const CoefficientBounds& bounds() const { return bounds_; }
    const AssembledOperators& linear() const { return linear_; }
    /// [[M + tau A, alpha D], [alpha G, K]] of the linear part.
    const SparseMatrix& system() const { return system_; }
    double tau() const { return tau_; }
    int system_assemblies() const { return system_assemblies_; }

    /// Returns the state operators and their residual X(p) - X^lin.
    AssembledOperators residual_at(const Vector& p, AssembledOperators* at_state = nullptr) const;

private:
    const Discretization* disc_;
    CoefficientBounds bounds_;
    double tau_;
    AssembledOperators linear_;
    SparseMatrix system_;
    int system_assemblies_ = 0;
};

struct ImexOutcome {
    State next;
    Vector F_u_n;  ///< F_u at state n, needed by the next step
};

/// One ImEx step. solver must have been built on split.system().
ImexOutcome step_imex(const SplitOperators& split, const FixedSystemSolver& solver,
                      const State& sn, const State& snm1, const Vector& F_u_nm1,
                      ImexMechanicsForm form, bool warm_start, StepReport& report);

struct TransientOptions {
    SchemeKind scheme = SchemeKind::imex;
    TimeGrid time;
    PicardSettings picard;
    ImexMechanicsForm mechanics_form = ImexMechanicsForm::equilibrium;
    bool warm_start = true;
    /// First ImEx step after the semi-implicit bootstrap takes p^{n-1} = p^n,
    /// u^{n-1} = u^n, so the boundary-layer jump of step one is not replayed.
    bool reset_history_after_bootstrap = true;
    bool store_trajectory = true;
    SolverFactory step_solver = direct_solver_factory();
    /// Builds the fixed ImEx solver on the linear system; defaults to direct.
    SolverFactory imex_solver;
    /// Bounds used by ImEx; required for that scheme.
    const CoefficientBounds* bounds = nullptr;
    /// Called after every step.
    std::function<void(const StepReport&, const State&)> on_step;
};

struct TransientResult {
    std::vector<State> trajectory;  ///< N_t + 1 states when stored
    State final_state;
    std::vector<StepReport> reports;
    bool completed = true;
    int failed_step = -1;
    int imex_matrix_assemblies = 0;
    int coarse_factorizations = 0;
    int vanka_setups = 0;
    int imex_solver_setups = 0;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
    double total_seconds = 0.0;
};

/// Runs N_t steps from the initial state. ImEx starts with one semi-implicit step.
/// Stops at the first step whose linear solve does not converge.
TransientResult run_transient(const Discretization& disc, const State& initial,
                              const TransientOptions& options);

/// Relative discrete L2 error ||a - b|| / ||b||.
double relative_error(const Vector& a, const Vector& ref);

struct DominanceResult {
    bool pass = false;
    double margin = 0.0;  ///< smallest eigenvalue of sym((1 - rho) lin - nl)
    double scale = 0.0;   ///< max |lin|
};

/// Tests (1 - rho) lin - nl >= 0 on the symmetric part by a dense eigensolve.
DominanceResult verify_splitting_dominance(const SparseMatrix& lin, const SparseMatrix& nl,
                                           double rho);

}  // namespace unsatporo

#endif  // UNSATPORO_TIME_INTEGRATION_HPP
