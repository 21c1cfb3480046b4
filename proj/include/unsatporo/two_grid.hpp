/// @file two_grid.hpp
/// @brief Stationary two-grid solver: Galerkin coarse correction followed by
/// post-smoothing, set up once against a fixed matrix.

#ifndef UNSATPORO_TWO_GRID_HPP
#define UNSATPORO_TWO_GRID_HPP

#include "unsatporo/coarse_space.hpp"
#include "unsatporo/linalg.hpp"
#include "unsatporo/smoothers.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace unsatporo {

/// euclidean: ||r||; diagonal_scaled: ||D^{-1/2} r|| with D = |diag L|.
enum class ResidualNorm { euclidean, diagonal_scaled };
/// Denominator of the relative residual.
enum class ResidualReference { rhs, initial };

struct SolveReport {
    int iterations = 0;
    std::vector<double> residuals;  ///< relative residual, iterations + 1 entries
    bool converged = false;
    bool diverged = false;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
};

/// Solver for repeated right-hand sides against one matrix.
class FixedSystemSolver {
public:
    virtual ~FixedSystemSolver() = default;
    virtual Vector solve(const Vector& b, const Vector& x0, SolveReport& report) const = 0;
    virtual const SparseMatrix& matrix() const = 0;
    virtual std::string name() const = 0;
};

/// Sparse LU, factorized at construction.
class DirectSolver final : public FixedSystemSolver {
public:
    explicit DirectSolver(SparseMatrix L);
    Vector solve(const Vector& b, const Vector& x0, SolveReport& report) const override;
    const SparseMatrix& matrix() const override { return L_; }
    std::string name() const override { return "direct"; }

private:
    SparseMatrix L_;
    SparseLU lu_;
};

struct TwoGridConfig {
    SmootherConfig smoother;
    int count_p = 8;  ///< basis vectors per patch, pressure
    int count_u = 8;  ///< basis vectors per patch, displacement
    int N_H = 8;
    /// Do not cut a degenerate eigenvalue cluster (e.g. the rigid modes).
    bool close_clusters = true;
    double rel_tol = 1e-8;
    int max_iters = 500;
    ResidualNorm norm = ResidualNorm::diagonal_scaled;
    ResidualReference reference = ResidualReference::initial;
    double divergence_ratio = 1e12;

    void validate() const;
};

/// Setup counters for offline-reuse checks.
struct SetupCounters {
    int coarse_factorizations = 0;
    int vanka_setups = 0;
};

class TwoGridSolver final : public FixedSystemSolver {
public:
    /// patches are only used by Vanka smoothers.
    TwoGridSolver(SparseMatrix L, const Prolongation& P, std::vector<Patch> patches,
                  const TwoGridConfig& config);

    Vector solve(const Vector& b, const Vector& x0, SolveReport& report) const override;
    const SparseMatrix& matrix() const override { return L_; }
    std::string name() const override { return "two-grid/" + config_.smoother.label(); }

    const TwoGridConfig& config() const { return config_; }
    const CoarseOperator& coarse() const { return coarse_; }
    const SetupCounters& counters() const { return counters_; }
    double setup_seconds() const { return setup_seconds_; }
    int n_coarse() const { return P_.cols(); }
    int solve_calls() const { return solve_calls_; }

    /// One cycle: coarse correction then post-smoothing.
    void cycle(Vector& x, const Vector& b) const;

private:
    double residual_norm(const Vector& r) const;

    SparseMatrix L_;
    SparseMatrix P_;
    SparseMatrix Pt_;
    TwoGridConfig config_;
    CoarseOperator coarse_;
    std::optional<VankaSmoother> vanka_;
    Vector inv_sqrt_diag_;
    SetupCounters counters_;
    double setup_seconds_ = 0.0;
    mutable int solve_calls_ = 0;
};

/// Prolongation from the first config.count_p / count_u basis vectors, Vanka
/// patches from the mesh, then the solver.
std::unique_ptr<TwoGridSolver> build_two_grid(SparseMatrix L, const StructuredTriMesh& mesh,
                                              const DofMap& dofs, const CoarseGrid& coarse,
                                              const SpectralBasis& basis,
                                              const TwoGridConfig& config);

}  // namespace unsatporo

#endif  // UNSATPORO_TWO_GRID_HPP
