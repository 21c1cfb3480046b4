#include "unsatporo/two_grid.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace unsatporo {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

DirectSolver::DirectSolver(SparseMatrix L) : L_(std::move(L)), lu_(L_) {}

Vector DirectSolver::solve(const Vector& b, const Vector& /*x0*/, SolveReport& report) const {
    const auto t0 = std::chrono::steady_clock::now();
    Vector x = lu_.solve(b);
    const Vector r = b - spmv(L_, x);
    const double nb = b.norm();
    report = SolveReport{};
    report.iterations = 1;
    report.residuals = {1.0, nb > 0.0 ? r.norm() / nb : r.norm()};
    report.converged = std::isfinite(report.residuals.back());
    report.solve_seconds = seconds_since(t0);
    return x;
}

void TwoGridConfig::validate() const {
    smoother.validate();
    if (!(rel_tol > 0.0)) throw std::invalid_argument("two-grid: rel_tol must be > 0");
    if (max_iters < 1) throw std::invalid_argument("two-grid: max_iters must be >= 1");
    if (count_p < 0 || count_u < 0)
        throw std::invalid_argument("two-grid: basis counts must be non-negative");
    if (count_p + count_u < 1) throw std::invalid_argument("two-grid: empty coarse space");
    if (N_H < 1) throw std::invalid_argument("two-grid: N_H must be >= 1");
}

TwoGridSolver::TwoGridSolver(SparseMatrix L, const Prolongation& P, std::vector<Patch> patches,
                             const TwoGridConfig& config)
    : L_(std::move(L)), P_(P.P), Pt_(P.P.transpose()), config_(config) {
    config_.validate();
    if (L_.rows() != L_.cols() || P_.rows() != L_.rows())
        throw DimensionError("TwoGridSolver: dimension mismatch");
    const auto t0 = std::chrono::steady_clock::now();
    coarse_ = coarse_operator(L_, P_);
    ++counters_.coarse_factorizations;
    if (config_.smoother.type == SmootherType::vanka) {
        std::vector<int> colors = color_patches(patches, config_.smoother.colors);
        vanka_.emplace(L_, std::move(patches), std::move(colors), config_.smoother.colors);
        ++counters_.vanka_setups;
    }
    const Vector d = L_.diagonal();
    inv_sqrt_diag_.resize(d.size());
    for (int i = 0; i < d.size(); ++i)
        inv_sqrt_diag_[i] = d[i] != 0.0 ? 1.0 / std::sqrt(std::abs(d[i])) : 1.0;
    setup_seconds_ = seconds_since(t0);
}

double TwoGridSolver::residual_norm(const Vector& r) const {
    if (config_.norm == ResidualNorm::euclidean) return r.norm();
    return r.cwiseProduct(inv_sqrt_diag_).norm();
}

void TwoGridSolver::cycle(Vector& x, const Vector& b) const {
    Vector r = b - spmv(L_, x);
    Vector e_h = spmv(Pt_, r);
    coarse_.solve_in_place(e_h);
    P_.multiply_add(e_h, x);
    const SmootherConfig& s = config_.smoother;
    if (s.type == SmootherType::vanka)
        vanka_->apply(L_, x, b, s.sweeps);
    else
        apply_pointwise(s.type, L_, x, b, s.sweeps,
                        s.type == SmootherType::jacobi ? s.jacobi_damping : 1.0);
}

Vector TwoGridSolver::solve(const Vector& b, const Vector& x0, SolveReport& report) const {
    if (b.size() != L_.rows() || x0.size() != L_.rows())
        throw DimensionError("TwoGridSolver::solve: dimension mismatch");
    ++solve_calls_;
    const auto t0 = std::chrono::steady_clock::now();
    report = SolveReport{};
    report.setup_seconds = setup_seconds_;

    Vector x = x0;
    const double nb = residual_norm(b);
    double nr = residual_norm(b - spmv(L_, x));
    double ref = config_.reference == ResidualReference::rhs ? nb : nr;
    if (ref == 0.0) ref = 1.0;
    const double floor = std::numeric_limits<double>::epsilon() * nb;
    report.residuals.push_back(nr / ref);
    if (nr <= config_.rel_tol * ref || nr <= floor) {
        report.converged = true;
        report.solve_seconds = seconds_since(t0);
        return x;
    }
    for (int it = 1; it <= config_.max_iters; ++it) {
        cycle(x, b);
        nr = residual_norm(b - spmv(L_, x));
        report.iterations = it;
        report.residuals.push_back(nr / ref);
        if (!std::isfinite(nr) || nr / ref > config_.divergence_ratio) {
            report.diverged = true;
            break;
        }
        if (nr <= config_.rel_tol * ref || nr <= floor) {
            report.converged = true;
            break;
        }
    }
    report.solve_seconds = seconds_since(t0);
    return x;
}

std::unique_ptr<TwoGridSolver> build_two_grid(SparseMatrix L, const StructuredTriMesh& mesh,
                                              const DofMap& dofs, const CoarseGrid& coarse,
                                              const SpectralBasis& basis,
                                              const TwoGridConfig& config) {
    const Prolongation P =
        assemble_prolongation(mesh, dofs, coarse, basis, config.count_p, config.count_u,
                              config.close_clusters);
    std::vector<Patch> patches;
    if (config.smoother.type == SmootherType::vanka)
        patches = build_patches(mesh, dofs, coarse, config.smoother.patch, config.smoother.overlap);
    return std::make_unique<TwoGridSolver>(std::move(L), P, std::move(patches), config);
}

}  // namespace unsatporo
