#include "unsatporo/time_integration.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace unsatporo;

namespace {

MaterialModel silt(int n_cells, bool gravity = true) {
    MaterialModel m = MaterialModel::homogeneous(n_cells, 1e-8, 3e6, 2.0);
    for (int e = 0; e < n_cells; ++e) m.fluid.k_s[e] *= 1.0 + 0.5 * std::sin(0.7 * e);
    if (!gravity) m.fluid.g_vec = {0.0, 0.0};
    return m;
}

double rel(const Vector& a, const Vector& b) { return relative_error(a, b); }

}  // namespace

TEST_CASE("time grid and scheme names") {
    TimeGrid g{100.0, 4};
    CHECK(g.tau() == 25.0);
    CHECK_NOTHROW(g.validate());
    g.N_t = 0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    for (SchemeKind k : {SchemeKind::implicit_picard, SchemeKind::semi_implicit, SchemeKind::imex})
        CHECK(parse_scheme(scheme_name(k)) == k);
    CHECK_THROWS(parse_scheme("RK4"));
}

TEST_CASE("initial displacement") {
    const StructuredTriMesh mesh(4, 10.0);
    SUBCASE("zero pressure and zero gravity give zero displacement") {
        const Discretization disc(mesh, silt(mesh.n_triangles(), false));
        CHECK(initial_displacement(disc, Vector::Zero(mesh.n_vertices())).norm() == 0.0);
    }
    SUBCASE("dense LU cross-check on N = 4") {
        const Discretization disc(mesh, silt(mesh.n_triangles()));
        Vector p0(mesh.n_vertices());
        for (int v = 0; v < p0.size(); ++v) p0[v] = 2e5 + 1e4 * mesh.coord(v)[1];
        const Vector u0 = initial_displacement(disc, p0);
        const AssembledOperators ops = disc.assemble_at_state(p0);
        const Vector rhs = ops.F_u - disc.material().fluid.alpha * spmv(ops.G, p0);
        const Vector ref = ops.K.to_dense().fullPivLu().solve(rhs);
        CHECK(rel(u0, ref) < 1e-10);
    }
    SUBCASE("constant pressure without gravity: equilibrium residual") {
        const Discretization disc(mesh, silt(mesh.n_triangles(), false));
        const Vector p0 = Vector::Constant(mesh.n_vertices(), 602700.0);
        const Vector u0 = initial_displacement(disc, p0);
        const AssembledOperators ops = disc.assemble_at_state(p0);
        const Vector g = disc.material().fluid.alpha * spmv(ops.G, p0);
        const Vector r = spmv(ops.K, u0) + g - ops.F_u;
        CHECK(r.norm() <= 1e-10 * g.norm());
    }
}

TEST_CASE("steady compatible data stays put") {
    const StructuredTriMesh mesh(6, 10.0);
    const MaterialModel mat = silt(mesh.n_triangles(), false);
    const Discretization disc(mesh, mat);
    const BoundaryConfig& bc = disc.bc();
    const State s0 = initial_state(disc, bc.p1);
    const CoefficientBounds bounds = coefficient_bounds(bc.p1, 602700.0, 64, mat);
    for (SchemeKind k : {SchemeKind::implicit_picard, SchemeKind::semi_implicit, SchemeKind::imex}) {
        TransientOptions o;
        o.scheme = k;
        o.time = {4000.0, 4};
        o.bounds = &bounds;
        const TransientResult r = run_transient(disc, s0, o);
        REQUIRE(r.trajectory.size() == 5);
        // the displacement stays at roundoff level, so compare it in meters
        for (const State& s : r.trajectory) {
            CHECK(rel(s.p, s0.p) <= 1e-10);
            CHECK((s.u - s0.u).lpNorm<Eigen::Infinity>() <= 1e-12);
        }
    }
}

TEST_CASE("linear problem: Picard, semi-implicit and ImEx coincide") {
    const StructuredTriMesh mesh(6, 10.0);
    MaterialModel mat = silt(mesh.n_triangles());
    mat.frozen_pressure = 4e5;
    const Discretization disc(mesh, mat);
    const State s0 = initial_state(disc, 602700.0);
    const double tau = 8640.0;

    StepReport rs;
    const State semi = step_semi_implicit(disc, s0, tau, direct_solver_factory(), rs);
    StepReport rp;
    const State picard = step_implicit_picard(disc, s0, tau, PicardSettings{}, direct_solver_factory(), rp);
    CHECK(rp.picard_iterations == 2);
    CHECK(rel(picard.p, semi.p) <= 1e-12);
    CHECK(rel(picard.u, semi.u) <= 1e-12);

    // Coefficients sit at their bounds, so the explicit residual vanishes.
    const CoefficientBounds bounds = coefficient_bounds(202860.0, 602700.0, 64, mat);
    const SplitOperators split(disc, bounds, tau);
    const DirectSolver direct(split.system());
    StepReport ri;
    const ImexOutcome imex = step_imex(split, direct, s0, s0, disc.assemble_at_state(s0.p).F_u,
                                       ImexMechanicsForm::equilibrium, true, ri);
    CHECK(rel(imex.next.p, semi.p) <= 1e-12);
    CHECK(rel(imex.next.u, semi.u) <= 1e-12);
}

TEST_CASE("transient driver bookkeeping") {
    const StructuredTriMesh mesh(6, 10.0);
    const MaterialModel mat = silt(mesh.n_triangles());
    const Discretization disc(mesh, mat);
    const State s0 = initial_state(disc, 602700.0);
    const CoefficientBounds bounds = coefficient_bounds(202860.0, 602700.0, 64, mat);

    SUBCASE("one semi-implicit step equals a direct step call") {
        TransientOptions o;
        o.scheme = SchemeKind::semi_implicit;
        o.time = {172800.0, 1};
        const TransientResult r = run_transient(disc, s0, o);
        StepReport rep;
        const State s1 = step_semi_implicit(disc, s0, 172800.0, direct_solver_factory(), rep);
        CHECK(r.trajectory.size() == 2);
        CHECK(rel(r.final_state.p, s1.p) == 0.0);
        CHECK(rel(r.final_state.u, s1.u) == 0.0);
    }
    SUBCASE("trajectory length and ImEx setup counters") {
        TransientOptions o;
        o.scheme = SchemeKind::imex;
        o.time = {172800.0, 7};
        o.bounds = &bounds;
        int calls = 0;
        o.on_step = [&](const StepReport&, const State&) { ++calls; };
        const TransientResult r = run_transient(disc, s0, o);
        CHECK(r.completed);
        CHECK(r.trajectory.size() == 8);
        CHECK(r.reports.size() == 7);
        CHECK(calls == 7);
        CHECK(r.imex_matrix_assemblies == 1);
        CHECK(r.imex_solver_setups == 1);
    }
    SUBCASE("ImEx without bounds is rejected") {
        TransientOptions o;
        o.scheme = SchemeKind::imex;
        CHECK_THROWS(run_transient(disc, s0, o));
    }
}

TEST_CASE("Picard counts at the silt configuration start above two") {
    const StructuredTriMesh mesh(16, 10.0);
    const MaterialModel mat = silt(mesh.n_triangles());
    const Discretization disc(mesh, mat);
    TransientOptions o;
    o.scheme = SchemeKind::implicit_picard;
    o.time = {172800.0, 20};
    const TransientResult r = run_transient(disc, initial_state(disc, 602700.0), o);
    CHECK(r.reports.front().picard_iterations > 2);
    for (const StepReport& rep : r.reports) {
        CHECK(rep.picard_iterations >= 2);
        CHECK(rep.picard_iterations <= 10);
    }
    CHECK(r.reports.back().picard_iterations <= r.reports.front().picard_iterations);
}

TEST_CASE("splitting dominance on diagonal blocks") {
    const SparseMatrix I = SparseMatrix::identity(4);
    const SparseMatrix half = scaled(I, 0.5);
    const SparseMatrix zero = scaled(I, 0.0);
    for (double rho : {0.05, 0.5, 0.95}) CHECK(verify_splitting_dominance(I, zero, rho).pass);
    const DominanceResult ok = verify_splitting_dominance(I, half, 0.4);
    CHECK(ok.pass);
    CHECK(ok.margin == doctest::Approx(0.1));
    const DominanceResult bad = verify_splitting_dominance(I, half, 0.6);
    CHECK_FALSE(bad.pass);
    CHECK(bad.margin == doctest::Approx(-0.1));
    CHECK_THROWS_AS(verify_splitting_dominance(I, SparseMatrix::identity(3), 0.5), DimensionError);
    CHECK_THROWS_AS(verify_splitting_dominance(I, half, 1.0), std::invalid_argument);
}

TEST_CASE("relative error") {
    Vector a(2), b(2);
    a << 1.0, 1.0;
    b << 1.0, 2.0;
    CHECK(relative_error(a, b) == doctest::Approx(1.0 / std::sqrt(5.0)));
    CHECK(relative_error(b, b) == 0.0);
}
