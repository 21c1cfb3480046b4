#include "unsatporo/smoothers.hpp"
#include "unsatporo/time_integration.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

using namespace unsatporo;

namespace {

SparseMatrix dense_to_sparse(const DenseMatrix& d) {
    TripletAccumulator acc(static_cast<int>(d.rows()), static_cast<int>(d.cols()));
    for (int i = 0; i < d.rows(); ++i)
        for (int j = 0; j < d.cols(); ++j)
            if (d(i, j) != 0.0) acc.add(i, j, d(i, j));
    return acc.finalize();
}

/// Block-diagonal SPD system diag(M + tau A, K) on the coupled numbering.
SparseMatrix spd_system(const Discretization& disc) {
    const AssembledOperators ops = disc.assemble_at_state(Vector::Constant(disc.dofs().n_pressure(), 4e5));
    return block_2x2(add(ops.M, ops.A, 1.0, 8640.0), std::nullopt, std::nullopt, ops.K);
}

Vector random_vector(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

}  // namespace

TEST_CASE("smoother labels") {
    for (const char* l : {"Jacobi", "GS", "V", "VK", "VK1", "VK2", "VK3"})
        CHECK(SmootherConfig::from_label(l).label() == l);
    CHECK(SmootherConfig::from_label("V").patch == PatchKind::omega);
    CHECK(SmootherConfig::from_label("VK2").overlap == 2);
    CHECK_THROWS(SmootherConfig::from_label("SOR"));
    CHECK_THROWS(SmootherConfig::from_label("VKx"));
}

TEST_CASE("patch construction") {
    const StructuredTriMesh mesh(8, 10.0);
    const DofMap dofs(mesh);
    const CoarseGrid c(mesh, 2);

    const auto cells = build_patches(mesh, dofs, c, PatchKind::cell, 0);
    CHECK(cells.size() == 4);
    // interface vertex multiplicity: 2 on coarse edges, 4 at the center
    auto count = [&](int v) {
        int k = 0;
        for (const Patch& p : cells) k += std::binary_search(p.dofs.begin(), p.dofs.end(), dofs.p(v));
        return k;
    };
    CHECK(count(mesh.vertex(4, 4)) == 4);
    CHECK(count(mesh.vertex(4, 1)) == 2);
    CHECK(count(mesh.vertex(1, 4)) == 2);
    CHECK(count(mesh.vertex(1, 1)) == 1);

    CHECK(build_patches(mesh, dofs, c, PatchKind::omega, 0).size() == 9);

    const auto o1 = build_patches(mesh, dofs, c, PatchKind::cell, 1);
    for (std::size_t k = 0; k < cells.size(); ++k)
        CHECK(std::includes(o1[k].dofs.begin(), o1[k].dofs.end(), cells[k].dofs.begin(), cells[k].dofs.end()));

    for (const Patch& p : cells)
        for (int d : p.dofs) CHECK_FALSE(dofs.is_constrained(d));
}

TEST_CASE("patch coloring") {
    const StructuredTriMesh mesh(16, 10.0);
    const DofMap dofs(mesh);
    const CoarseGrid c(mesh, 8);
    const auto patches = build_patches(mesh, dofs, c, PatchKind::cell, 0);
    const auto four = color_patches(patches, 4);
    for (int k = 0; k < 4; ++k) CHECK(std::count(four.begin(), four.end(), k) == 16);
    const auto one = color_patches(patches, 1);
    CHECK(std::all_of(one.begin(), one.end(), [](int k) { return k == 0; }));
    for (std::size_t a = 0; a < patches.size(); ++a)
        for (std::size_t b = a + 1; b < patches.size(); ++b) {
            if (four[a] != four[b]) continue;
            std::vector<int> common;
            std::set_intersection(patches[a].dofs.begin(), patches[a].dofs.end(), patches[b].dofs.begin(),
                                  patches[b].dofs.end(), std::back_inserter(common));
            CHECK(common.empty());
        }
    CHECK_THROWS(color_patches(patches, 3));
}

TEST_CASE("Vanka weights") {
    const StructuredTriMesh mesh(8, 10.0);
    const MaterialModel mat = MaterialModel::homogeneous(mesh.n_triangles(), 1e-8, 3e6, 2.0);
    const Discretization disc(mesh, mat);
    const SparseMatrix L = spd_system(disc);
    const DofMap& dofs = disc.dofs();
    const CoarseGrid c(mesh, 2);
    auto patches = build_patches(mesh, dofs, c, PatchKind::cell, 0);
    const VankaSmoother v(L, patches, color_patches(patches, 4), 4);
    CHECK(v.weights()[dofs.p(mesh.vertex(4, 4))] == doctest::Approx(0.25));
    CHECK(v.weights()[dofs.p(mesh.vertex(4, 2))] == doctest::Approx(0.5));
    CHECK(v.weights()[dofs.p(mesh.vertex(2, 2))] == doctest::Approx(1.0));
    CHECK(v.factorizations() == 4);
    for (int d = 0; d < dofs.n_total(); ++d)
        if (dofs.is_constrained(d)) CHECK(v.weights()[d] == 0.0);
}

TEST_CASE("Vanka sweeps") {
    const StructuredTriMesh mesh(8, 10.0);
    const MaterialModel mat = MaterialModel::homogeneous(mesh.n_triangles(), 1e-8, 3e6, 2.0);
    const Discretization disc(mesh, mat);
    const SparseMatrix L = spd_system(disc);
    const DofMap& dofs = disc.dofs();
    const int n = dofs.n_total();
    Vector b = random_vector(n, 2);
    for (int d = 0; d < n; ++d)
        if (dofs.is_constrained(d)) b[d] = 0.0;

    SUBCASE("exact input is a fixed point") {
        const Vector exact = SparseLU(L).solve(b);
        const CoarseGrid c(mesh, 2);
        auto patches = build_patches(mesh, dofs, c, PatchKind::cell, 1);
        const VankaSmoother v(L, patches, color_patches(patches, 4), 4);
        Vector x = exact;
        v.apply(L, x, b, 2);
        CHECK((x - exact).norm() <= 1e-12 * exact.norm());
    }
    SUBCASE("one patch covering everything solves in one sweep") {
        const Vector exact = SparseLU(L).solve(b);
        const CoarseGrid c(mesh, 1);
        auto patches = build_patches(mesh, dofs, c, PatchKind::cell, 0);
        REQUIRE(patches.size() == 1);
        const VankaSmoother v(L, patches, color_patches(patches, 1), 1);
        Vector x = Vector::Zero(n);
        v.apply(L, x, b, 1);
        CHECK((x - exact).norm() <= 1e-10 * exact.norm());
    }
    SUBCASE("multicoloring reduces the residual faster") {
        const CoarseGrid c(mesh, 4);
        auto patches = build_patches(mesh, dofs, c, PatchKind::cell, 1);
        const double r0 = b.norm();
        auto factor = [&](int colors) {
            const VankaSmoother v(L, patches, color_patches(patches, colors), colors);
            Vector x = Vector::Zero(n);
            v.apply(L, x, b, 1);
            return (b - spmv(L, x)).norm() / r0;
        };
        const double f1 = factor(1), f4 = factor(4);
        CHECK(f1 < 1.0);
        CHECK(f4 < 1.0);
        CHECK(f4 <= f1);
    }
}

TEST_CASE("pointwise smoothers") {
    SUBCASE("Jacobi solves a diagonal system in one sweep") {
        DenseMatrix d = DenseMatrix::Zero(3, 3);
        d.diagonal() << 2.0, 5.0, 0.5;
        const SparseMatrix L = dense_to_sparse(d);
        Vector b(3);
        b << 1.0, 2.0, 3.0;
        Vector x = Vector::Zero(3);
        apply_pointwise(SmootherType::jacobi, L, x, b, 1, 1.0);
        CHECK(x[0] == 0.5);
        CHECK(x[1] == 0.4);
        CHECK(x[2] == 6.0);
    }
    SUBCASE("Gauss-Seidel solves a lower-triangular system in one sweep") {
        DenseMatrix d(3, 3);
        d << 2, 0, 0, 1, 3, 0, -1, 2, 4;
        const SparseMatrix L = dense_to_sparse(d);
        const Vector exact = Vector::LinSpaced(3, 1.0, 3.0);
        const Vector b = d * exact;
        Vector x = Vector::Zero(3);
        apply_pointwise(SmootherType::gauss_seidel, L, x, b, 1);
        CHECK((x - exact).norm() < 1e-15);
    }
    SUBCASE("Gauss-Seidel contraction on [[2,1],[1,2]]") {
        DenseMatrix d(2, 2);
        d << 2, 1, 1, 2;
        const SparseMatrix L = dense_to_sparse(d);
        const Vector b = Vector::Zero(2);
        Vector x(2);
        x << 1.0, 1.0;
        double prev = x[1];
        for (int s = 0; s < 4; ++s) {
            apply_pointwise(SmootherType::gauss_seidel, L, x, b, 1);
            if (s > 0) CHECK(x[1] / prev == doctest::Approx(0.25));
            prev = x[1];
        }
    }
    SUBCASE("damped Jacobi") {
        DenseMatrix d = DenseMatrix::Identity(2, 2) * 4.0;
        const SparseMatrix L = dense_to_sparse(d);
        Vector b = Vector::Constant(2, 4.0);
        Vector x = Vector::Zero(2);
        apply_pointwise(SmootherType::jacobi, L, x, b, 1, 0.5);
        CHECK(x[0] == doctest::Approx(0.5));
    }
}
