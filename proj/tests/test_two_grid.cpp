#include "unsatporo/studies.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>

using namespace unsatporo;

namespace {

struct Setup {
    Problem problem;
    SplitOperators split;
    CoarseGrid coarse;
    SpectralBasis basis;

    explicit Setup(int N = 16, int N_H = 4, int M = 4)
        : problem(make_problem(config(N, N_H), N)),
          split(problem.disc, problem.bounds, 8640.0),
          coarse(problem.disc.mesh(), N_H),
          basis(compute_spectral_basis(problem.disc.mesh(), coarse, problem.bounds, M, M)) {}

    static ExperimentConfig config(int N, int N_H) {
        ExperimentConfig c;
        c.mesh.N = N;
        c.mesh.N_H = N_H;
        return c;
    }

    std::unique_ptr<TwoGridSolver> solver(const std::string& smoother, int M, int colors = 4,
                                          ResidualReference reference = ResidualReference::initial) const {
        TwoGridConfig tg;
        tg.reference = reference;
        tg.smoother = SmootherConfig::from_label(smoother);
        tg.smoother.colors = colors;
        tg.count_p = tg.count_u = M;
        tg.N_H = coarse.N_H();
        return build_two_grid(split.system(), problem.disc.mesh(), problem.disc.dofs(), coarse, basis, tg);
    }

    Vector rhs(std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const int n = problem.disc.dofs().n_total();
        Vector x(n);
        for (int i = 0; i < n; ++i) x[i] = problem.disc.dofs().is_constrained(i) ? 0.0 : u(rng);
        return spmv(split.system(), x);
    }
};

}  // namespace

TEST_CASE("two-grid configuration validation") {
    TwoGridConfig c;
    CHECK_NOTHROW(c.validate());
    c.count_p = 0;
    CHECK_NOTHROW(c.validate());
    c.count_u = 0;
    CHECK_THROWS(c.validate());
    c = {};
    c.rel_tol = 0.0;
    CHECK_THROWS(c.validate());
    c = {};
    c.max_iters = 0;
    CHECK_THROWS(c.validate());
}

TEST_CASE("direct solver") {
    const Setup s(8, 2, 2);
    const DirectSolver d(s.split.system());
    const Vector b = s.rhs(1);
    SolveReport rep;
    const Vector x = d.solve(b, Vector::Zero(b.size()), rep);
    CHECK(rep.converged);
    CHECK((spmv(s.split.system(), x) - b).norm() <= 1e-10 * b.norm());
}

TEST_CASE("two-grid solver") {
    const Setup s;
    const Vector b = s.rhs(3);
    const SparseLU lu(s.split.system());
    const Vector exact = lu.solve(b);
    // The coupled system mixes pressure and displacement scales, so accuracy is
    // judged by the Euclidean residual rather than the forward error.
    auto residual = [&](const Vector& x) { return (spmv(s.split.system(), x) - b).norm() / b.norm(); };

    SUBCASE("converges and reports a full history") {
        for (const char* sm : {"VK2", "VK", "V", "GS"}) {
            const auto solver = s.solver(sm, 4);
            SolveReport rep;
            const Vector x = solver->solve(b, Vector::Zero(b.size()), rep);
            CHECK(rep.converged);
            CHECK(rep.residuals.size() == static_cast<std::size_t>(rep.iterations + 1));
            CHECK(rep.residuals.front() == 1.0);
            CHECK(rep.residuals.back() <= 1e-8);
            CHECK(residual(x) <= 1e-6);
        }
    }
    SUBCASE("exact initial guess needs no iterations") {
        const auto solver = s.solver("VK2", 4, 4, ResidualReference::rhs);
        SolveReport rep;
        solver->solve(b, exact, rep);
        CHECK(rep.iterations == 0);
        CHECK(rep.converged);
    }
    SUBCASE("setup is deterministic") {
        const auto a = s.solver("VK2", 4);
        const auto c = s.solver("VK2", 4);
        SolveReport ra, rc;
        const Vector xa = a->solve(b, Vector::Zero(b.size()), ra);
        const Vector xc = c->solve(b, Vector::Zero(b.size()), rc);
        CHECK(ra.iterations == rc.iterations);
        CHECK(xa == xc);
    }
    SUBCASE("one setup serves many right-hand sides") {
        const auto solver = s.solver("VK2", 4);
        for (int k = 0; k < 20; ++k) {
            SolveReport rep;
            solver->solve(s.rhs(100 + k), Vector::Zero(b.size()), rep);
            CHECK(rep.converged);
        }
        CHECK(solver->counters().coarse_factorizations == 1);
        CHECK(solver->counters().vanka_setups == 1);
        CHECK(solver->solve_calls() == 20);
    }
    SUBCASE("coarse dimension equals the prolongation column count") {
        const auto solver = s.solver("GS", 4);
        const Prolongation p = assemble_prolongation(s.problem.disc.mesh(), s.problem.disc.dofs(), s.coarse, s.basis, 4, 4);
        CHECK(solver->n_coarse() == p.n_coarse());
        CHECK(solver->coarse().L_H.rows() == p.n_coarse());
        CHECK(solver->counters().vanka_setups == 0);
    }
    SUBCASE("error in the coarse range is removed by one cycle") {
        const auto solver = s.solver("VK2", 4);
        const Prolongation p = assemble_prolongation(s.problem.disc.mesh(), s.problem.disc.dofs(), s.coarse, s.basis, 4, 4);
        const Vector xc = spmv(p.P, Vector::LinSpaced(p.n_coarse(), -1.0, 1.0));
        SolveReport rep;
        solver->solve(spmv(s.split.system(), xc), Vector::Zero(b.size()), rep);
        CHECK(rep.iterations == 1);
    }
    SUBCASE("more coarse vectors do not slow Vanka down") {
        SolveReport r1, r4;
        s.solver("VK2", 1)->solve(b, Vector::Zero(b.size()), r1);
        s.solver("VK2", 4)->solve(b, Vector::Zero(b.size()), r4);
        CHECK(r4.iterations <= r1.iterations);
    }
}
