#include "unsatporo/time_integration.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace unsatporo {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double relative_change(const Vector& next, const Vector& prev) {
    const double n = next.norm();
    const double d = (next - prev).norm();
    return n > 0.0 ? d / n : d;
}

State solve_system(const FixedSystemSolver& solver, const Vector& b, const Vector& x0,
                   int n_pressure, StepReport& report) {
    SolveReport sr;
    const Vector x = solver.solve(b, x0, sr);
    report.solver_iterations += sr.iterations;
    report.solver_converged = report.solver_converged && sr.converged;
    report.solver_residuals = sr.residuals;
    report.solve_seconds += sr.solve_seconds;
    return unpack(x, n_pressure);
}

}  // namespace

void TimeGrid::validate() const {
    if (N_t < 1) throw std::invalid_argument("time grid: N_t must be >= 1");
    if (!(T_max > 0.0)) throw std::invalid_argument("time grid: T_max must be > 0");
}

Vector pack(const State& s) {
    Vector x(s.p.size() + s.u.size());
    x << s.p, s.u;
    return x;
}

State unpack(const Vector& x, int n_pressure) {
    return {x.head(n_pressure), x.tail(x.size() - n_pressure)};
}

const char* scheme_name(SchemeKind s) {
    switch (s) {
        case SchemeKind::implicit_picard: return "Im";
        case SchemeKind::semi_implicit: return "sIm";
        case SchemeKind::imex: return "ImEx";
    }
    return "?";
}

SchemeKind parse_scheme(const std::string& s) {
    if (s == "Im" || s == "implicit" || s == "picard") return SchemeKind::implicit_picard;
    if (s == "sIm" || s == "semi_implicit") return SchemeKind::semi_implicit;
    if (s == "ImEx" || s == "imex") return SchemeKind::imex;
    throw std::invalid_argument("unknown scheme: " + s);
}

SolverFactory direct_solver_factory() {
    return [](SparseMatrix L) { return std::make_unique<DirectSolver>(std::move(L)); };
}

Vector initial_displacement(const Discretization& disc, const Vector& p0) {
    const AssembledOperators ops = disc.assemble_at_state(p0);
    const double alpha = disc.material().fluid.alpha;
    Vector rhs = ops.F_u;
    ops.G.multiply_add(p0, rhs, -alpha);
    const SparseLU lu(ops.K);
    return lu.solve(rhs);
}

State initial_state(const Discretization& disc, double p0, bool compatible_boundary) {
    State s;
    s.p = Vector::Constant(disc.dofs().n_pressure(), p0);
    if (compatible_boundary)
        for (const auto& e : disc.mesh().boundary_edges(disc.bc().robin_side)) {
            s.p[e[0]] = disc.bc().p1;
            s.p[e[1]] = disc.bc().p1;
        }
    s.u = initial_displacement(disc, s.p);
    return s;
}

namespace {

/// Right-hand side of the linearized backward Euler step with operators ops.
Vector euler_rhs(const AssembledOperators& ops, const State& sn, double tau, double alpha) {
    Vector bp = tau * ops.F_p;
    ops.M.multiply_add(sn.p, bp);
    ops.D.multiply_add(sn.u, bp, alpha);
    Vector b(bp.size() + ops.F_u.size());
    b << bp, ops.F_u;
    return b;
}

}  // namespace

State step_semi_implicit(const Discretization& disc, const State& sn, double tau,
                         const SolverFactory& solver, StepReport& report) {
    const double alpha = disc.material().fluid.alpha;
    const AssembledOperators ops = disc.assemble_at_state(sn.p);
    const auto s = solver(system_matrix(ops, tau, alpha));
    State next = solve_system(*s, euler_rhs(ops, sn, tau, alpha), pack(sn),
                              disc.dofs().n_pressure(), report);
    report.dp_norm = (next.p - sn.p).norm();
    report.du_norm = (next.u - sn.u).norm();
    return next;
}

State step_implicit_picard(const Discretization& disc, const State& sn, double tau,
                           const PicardSettings& settings, const SolverFactory& solver,
                           StepReport& report) {
    const double alpha = disc.material().fluid.alpha;
    State iterate = sn;
    for (int m = 0; m < settings.max_iters; ++m) {
        const AssembledOperators ops = disc.assemble_at_state(iterate.p);
        const auto s = solver(system_matrix(ops, tau, alpha));
        State next = solve_system(*s, euler_rhs(ops, sn, tau, alpha), pack(iterate),
                                  disc.dofs().n_pressure(), report);
        report.picard_iterations = m + 1;
        const bool done = relative_change(next.p, iterate.p) <= settings.rel_tol_p &&
                          relative_change(next.u, iterate.u) <= settings.rel_tol_u;
        iterate = std::move(next);
        if (done || !report.solver_converged) break;
    }
    report.dp_norm = (iterate.p - sn.p).norm();
    report.du_norm = (iterate.u - sn.u).norm();
    return iterate;
}

SplitOperators::SplitOperators(const Discretization& disc, CoefficientBounds bounds, double tau)
    : disc_(&disc), bounds_(std::move(bounds)), tau_(tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("SplitOperators: tau must be > 0");
    linear_ = disc.assemble_linear_part(bounds_);
    system_ = system_matrix(linear_, tau_, disc.material().fluid.alpha);
    ++system_assemblies_;
}

AssembledOperators SplitOperators::residual_at(const Vector& p,
                                               AssembledOperators* at_state) const {
    AssembledOperators ops = disc_->assemble_at_state(p);
    AssembledOperators nl = nonlinear_residual(ops, linear_);
    if (at_state) *at_state = std::move(ops);
    return nl;
}

ImexOutcome step_imex(const SplitOperators& split, const FixedSystemSolver& solver,
                      const State& sn, const State& snm1, const Vector& F_u_nm1,
                      ImexMechanicsForm form, bool warm_start, StepReport& report) {
    const Discretization& disc = split.discretization();
    const double alpha = disc.material().fluid.alpha;
    const double tau = split.tau();
    const AssembledOperators& lin = split.linear();
    const AssembledOperators nl = split.residual_at(sn.p);
    const Vector dp = sn.p - snm1.p;
    const Vector du = sn.u - snm1.u;

    Vector bp = tau * nl.F_p;
    lin.M.multiply_add(sn.p, bp);
    lin.D.multiply_add(sn.u, bp, alpha);
    nl.M.multiply_add(dp, bp, -1.0);
    nl.D.multiply_add(du, bp, -alpha);
    nl.A.multiply_add(sn.p, bp, -tau);

    Vector bu;
    if (form == ImexMechanicsForm::incremental) {
        bu = nl.F_u - F_u_nm1;
        lin.G.multiply_add(sn.p, bu, alpha);
        lin.K.multiply_add(sn.u, bu);
        nl.G.multiply_add(dp, bu, -alpha);
        nl.K.multiply_add(du, bu, -1.0);
    } else {
        bu = nl.F_u;
        nl.G.multiply_add(sn.p, bu, -alpha);
        nl.K.multiply_add(sn.u, bu, -1.0);
    }
    Vector b(bp.size() + bu.size());
    b << bp, bu;
    const Vector x0 = warm_start ? pack(sn) : Vector::Zero(b.size());
    ImexOutcome out;
    out.next = solve_system(solver, b, x0, disc.dofs().n_pressure(), report);
    out.F_u_n = nl.F_u;
    report.dp_norm = (out.next.p - sn.p).norm();
    report.du_norm = (out.next.u - sn.u).norm();
    return out;
}

TransientResult run_transient(const Discretization& disc, const State& initial,
                              const TransientOptions& options) {
    options.time.validate();
    const auto t_start = std::chrono::steady_clock::now();
    const double tau = options.time.tau();
    TransientResult result;
    if (options.store_trajectory) result.trajectory.push_back(initial);

    std::unique_ptr<SplitOperators> split;
    std::unique_ptr<FixedSystemSolver> imex_solver;
    if (options.scheme == SchemeKind::imex) {
        if (!options.bounds) throw std::invalid_argument("run_transient: ImEx requires bounds");
        const auto t0 = std::chrono::steady_clock::now();
        split = std::make_unique<SplitOperators>(disc, *options.bounds, tau);
        const SolverFactory& make =
            options.imex_solver ? options.imex_solver : options.step_solver;
        imex_solver = make(split->system());
        ++result.imex_solver_setups;
        result.setup_seconds = seconds_since(t0);
    }

    State prev = initial;
    State current = initial;
    Vector F_u_prev;
    for (int n = 0; n < options.time.N_t; ++n) {
        StepReport report;
        report.step = n + 1;
        State next;
        switch (options.scheme) {
            case SchemeKind::implicit_picard:
                next = step_implicit_picard(disc, current, tau, options.picard,
                                            options.step_solver, report);
                break;
            case SchemeKind::semi_implicit:
                next = step_semi_implicit(disc, current, tau, options.step_solver, report);
                break;
            case SchemeKind::imex:
                if (n == 0) {
                    next = step_semi_implicit(disc, current, tau, options.step_solver, report);
                    F_u_prev = disc.assemble_at_state(current.p).F_u;
                } else {
                    const bool reset = n == 1 && options.reset_history_after_bootstrap;
                    if (reset) F_u_prev = disc.assemble_at_state(current.p).F_u;
                    ImexOutcome o = step_imex(*split, *imex_solver, current, reset ? current : prev,
                                              F_u_prev, options.mechanics_form,
                                              options.warm_start, report);
                    next = std::move(o.next);
                    F_u_prev = std::move(o.F_u_n);
                }
                break;
        }
        result.solve_seconds += report.solve_seconds;
        result.reports.push_back(report);
        if (options.on_step) options.on_step(report, next);
        const bool finite = next.p.allFinite() && next.u.allFinite();
        if (!report.solver_converged || !finite) {
            result.completed = false;
            result.failed_step = n + 1;
            current = std::move(next);
            break;
        }
        prev = std::move(current);
        current = std::move(next);
        if (options.store_trajectory) result.trajectory.push_back(current);
    }
    result.final_state = current;
    if (split) result.imex_matrix_assemblies = split->system_assemblies();
    if (const auto* tg = dynamic_cast<const TwoGridSolver*>(imex_solver.get())) {
        result.coarse_factorizations = tg->counters().coarse_factorizations;
        result.vanka_setups = tg->counters().vanka_setups;
        result.setup_seconds += tg->setup_seconds();
    }
    result.total_seconds = seconds_since(t_start);
    return result;
}

double relative_error(const Vector& a, const Vector& ref) {
    if (a.size() != ref.size()) throw DimensionError("relative_error: length mismatch");
    const double n = ref.norm();
    return n > 0.0 ? (a - ref).norm() / n : (a - ref).norm();
}

DominanceResult verify_splitting_dominance(const SparseMatrix& lin, const SparseMatrix& nl,
                                           double rho) {
    if (lin.rows() != nl.rows() || lin.cols() != nl.cols() || lin.rows() != lin.cols())
        throw DimensionError("verify_splitting_dominance: dimension mismatch");
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("verify_splitting_dominance: rho must lie in (0, 1)");
    const DenseMatrix x = (1.0 - rho) * lin.to_dense() - nl.to_dense();
    DominanceResult r;
    r.margin = smallest_symmetric_eigenvalue(x);
    r.scale = lin.max_abs();
    r.pass = r.margin >= -1e-10 * r.scale;
    return r;
}

}  // namespace unsatporo
