#include "properties.hpp"

#include "unsatporo/studies.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace unsatporo::props {

namespace {

PropertyResult make(std::string name, double value, double tol) {
    return {std::move(name), value, tol, value <= tol};
}

ExperimentConfig small_config(int N, int N_H) {
    ExperimentConfig c;
    c.mesh.N = N;
    c.mesh.N_H = N_H;
    return c;
}

}  // namespace

PropertyResult partition_of_unity() {
    double worst = 0.0;
    for (auto [N, N_H] : {std::pair{8, 2}, std::pair{16, 4}, std::pair{32, 8}, std::pair{24, 3}}) {
        const StructuredTriMesh mesh(N, 10.0);
        const CoarseGrid coarse(mesh, N_H);
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            double s = 0.0;
            for (int l = 0; l < coarse.n_vertices(); ++l) s += coarse.pou(l, v);
            worst = std::max(worst, std::abs(s - 1.0));
        }
    }
    return make("partition of unity |sum chi - 1|", worst, 1e-12);
}

PropertyResult vanka_weight_identity() {
    const ExperimentConfig c = small_config(16, 4);
    const Problem problem = make_problem(c, 16);
    const SplitOperators split(problem.disc, problem.bounds, 8640.0);
    const DofMap& dofs = problem.disc.dofs();
    const CoarseGrid coarse(problem.disc.mesh(), 4);
    double worst = 0.0;
    for (const char* label : {"V", "VK", "VK2"}) {
        const SmootherConfig sc = SmootherConfig::from_label(label);
        std::vector<Patch> patches = build_patches(problem.disc.mesh(), dofs, coarse, sc.patch, sc.overlap);
        const std::vector<int> colors = color_patches(patches, 4);
        const VankaSmoother vanka(split.system(), patches, colors, 4);
        Vector sum = Vector::Zero(dofs.n_total());
        for (const Patch& p : vanka.patches())
            for (int d : p.dofs) sum[d] += vanka.weights()[d];
        for (int d = 0; d < dofs.n_total(); ++d)
            if (!dofs.is_constrained(d)) worst = std::max(worst, std::abs(sum[d] - 1.0));
    }
    return make("sum R^T W R = I", worst, 1e-12);
}

PropertyResult eigenresidual() {
    const ExperimentConfig c = small_config(16, 4);
    const Problem problem = make_problem(c, 16);
    const StructuredTriMesh& mesh = problem.disc.mesh();
    const CoarseGrid coarse(mesh, 4);
    const CoefficientBounds& b = problem.bounds;
    double worst = 0.0;
    for (int l = 0; l < coarse.n_vertices(); ++l) {
        const std::vector<int> verts = coarse.patch_vertices(l);
        const int n = static_cast<int>(verts.size());
        auto local = [&](int v) {
            return static_cast<int>(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
        };
        // Local matrices assembled here, independently of the library's routine.
        DenseMatrix ap = DenseMatrix::Zero(n, n), sp = DenseMatrix::Zero(n, n);
        DenseMatrix au = DenseMatrix::Zero(2 * n, 2 * n), su = DenseMatrix::Zero(2 * n, 2 * n);
        for (int t : coarse.patch_triangles(l)) {
            const auto& tri = mesh.triangle(t);
            const auto& x0 = mesh.coord(tri[0]);
            const auto& x1 = mesh.coord(tri[1]);
            const auto& x2 = mesh.coord(tri[2]);
            const double det = (x1[0] - x0[0]) * (x2[1] - x0[1]) - (x2[0] - x0[0]) * (x1[1] - x0[1]);
            const double area = 0.5 * std::abs(det);
            const double gx[3] = {(x1[1] - x2[1]) / det, (x2[1] - x0[1]) / det, (x0[1] - x1[1]) / det};
            const double gy[3] = {(x2[0] - x1[0]) / det, (x0[0] - x2[0]) / det, (x1[0] - x0[0]) / det};
            const double k = b.kappa[t], lam = b.lambda[t], mu = b.mu[t];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const int I = local(tri[i]), J = local(tri[j]);
                    const double mass = area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0);
                    ap(I, J) += k * area * (gx[i] * gx[j] + gy[i] * gy[j]);
                    sp(I, J) += k * mass;
                    for (int comp = 0; comp < 2; ++comp)
                        su(2 * I + comp, 2 * J + comp) += (lam + 2.0 * mu) * mass;
                    // sigma(phi_j e_b) : eps(phi_i e_a)
                    const double gi[2] = {gx[i], gy[i]}, gj[2] = {gx[j], gy[j]};
                    for (int a = 0; a < 2; ++a)
                        for (int bb = 0; bb < 2; ++bb) {
                            double v = lam * gi[a] * gj[bb] + mu * gi[bb] * gj[a];
                            if (a == bb) v += mu * (gi[0] * gj[0] + gi[1] * gj[1]);
                            au(2 * I + a, 2 * J + bb) += area * v;
                        }
                }
        }
        const EigenPairs ep = pressure_basis(mesh, coarse, l, b, 6);
        const EigenPairs eu = displacement_basis(mesh, coarse, l, b, 6);
        for (int k = 0; k < ep.count(); ++k) {
            const Vector v = ep.eigenvectors.col(k);
            const double r = (ap * v - ep.eigenvalues[k] * (sp * v)).norm() / (ap.norm() * v.norm());
            worst = std::max(worst, r);
        }
        for (int k = 0; k < eu.count(); ++k) {
            const Vector v = eu.eigenvectors.col(k);
            const double r = (au * v - eu.eigenvalues[k] * (su * v)).norm() / (au.norm() * v.norm());
            worst = std::max(worst, r);
        }
    }
    return make("local eigenresidual", worst, 1e-8);
}

PropertyResult analytic_derivative() {
    const MaterialModel mat = MaterialModel::homogeneous(1, 1e-8, 3e6, 2.0);
    double worst = 0.0;
    for (int k = 0; k <= 200; ++k) {
        // Heads from -1 cm to -1e4 cm, log spaced.
        const double h = -std::pow(10.0, 4.0 * k / 200.0);
        const double dh = 1e-5 * std::abs(h);
        const double fd = (water_content(h + dh, mat.vg).theta - water_content(h - dh, mat.vg).theta) / (2.0 * dh);
        const double an = water_content(h, mat.vg).dtheta_dh;
        worst = std::max(worst, std::abs(an - fd) / std::abs(an));
    }
    for (int k = 0; k <= 200; ++k) {
        const double p = 202860.0 + (602700.0 - 202860.0) * k / 200.0;
        const double fd = (storage_and_mobility(p + 1.0, 0, mat).S - storage_and_mobility(p - 1.0, 0, mat).S) / 2.0;
        const double an = storage_and_mobility(p, 0, mat).dS_dp;
        worst = std::max(worst, std::abs(an - fd) / std::abs(an));
    }
    return make("analytic vs finite-difference derivative", worst, 1e-6);
}

PropertyResult galerkin_triple_product() {
    const ExperimentConfig c = small_config(8, 2);
    const Problem problem = make_problem(c, 8);
    const SplitOperators split(problem.disc, problem.bounds, 8640.0);
    const CoarseGrid coarse(problem.disc.mesh(), 2);
    const SpectralBasis basis = compute_spectral_basis(problem.disc.mesh(), coarse, problem.bounds, 2, 2);
    const Prolongation pr = assemble_prolongation(problem.disc.mesh(), problem.disc.dofs(), coarse, basis, 2, 2);
    const DenseMatrix L = split.system().to_dense();
    const DenseMatrix P = pr.P.to_dense();
    const int n = static_cast<int>(L.rows()), m = static_cast<int>(P.cols());
    DenseMatrix naive = DenseMatrix::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                if (P(i, a) == 0.0) continue;
                for (int j = 0; j < n; ++j) s += P(i, a) * L(i, j) * P(j, b);
            }
            naive(a, b) = s;
        }
    const DenseMatrix lib = galerkin_product(split.system(), pr.P);
    const double rel = (lib - naive).cwiseAbs().maxCoeff() / naive.cwiseAbs().maxCoeff();
    return make("Galerkin triple product vs explicit loop", rel, 1e-12);
}

PropertyResult coarse_range_one_iteration() {
    const ExperimentConfig c = small_config(16, 4);
    const Problem problem = make_problem(c, 16);
    const SplitOperators split(problem.disc, problem.bounds, 8640.0);
    const CoarseGrid coarse(problem.disc.mesh(), 4);
    const SpectralBasis basis = compute_spectral_basis(problem.disc.mesh(), coarse, problem.bounds, 4, 4);
    TwoGridConfig tg;
    tg.smoother = SmootherConfig::from_label("VK2");
    tg.count_p = tg.count_u = 4;
    tg.N_H = 4;
    const auto solver = build_two_grid(split.system(), problem.disc.mesh(), problem.disc.dofs(), coarse, basis, tg);
    const Prolongation pr = assemble_prolongation(problem.disc.mesh(), problem.disc.dofs(), coarse, basis, 4, 4);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    int worst = 0;
    for (int trial = 0; trial < 5; ++trial) {
        Vector coeffs(pr.P.cols());
        for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = normal(rng);
        const Vector x = spmv(pr.P, coeffs);
        const Vector b = spmv(split.system(), x);
        SolveReport rep;
        solver->solve(b, Vector::Zero(b.size()), rep);
        worst = std::max(worst, rep.converged ? rep.iterations : 1000);
    }
    return make("coarse-range error: two-grid iterations", worst, 1.0);
}

PropertyResult constants_representable() {
    double worst = 0.0;
    for (auto [N, N_H] : {std::pair{8, 2}, std::pair{16, 4}, std::pair{32, 8}}) {
        const StructuredTriMesh mesh(N, 10.0);
        const MaterialModel mat = MaterialModel::homogeneous(mesh.n_triangles(), 1e-8, 3e6, 2.0);
        const CoefficientBounds b = coefficient_bounds(202860.0, 602700.0, 64, mat);
        const DofMap dofs(mesh);
        const CoarseGrid coarse(mesh, N_H);
        const SpectralBasis basis = compute_spectral_basis(mesh, coarse, b, 1, 1);
        const Prolongation pr = assemble_prolongation(mesh, dofs, coarse, basis, 1, 1);
        const DenseMatrix P = pr.P_p.to_dense();
        const Vector one = Vector::Ones(P.rows());
        const Vector c = P.colPivHouseholderQr().solve(one);
        worst = std::max(worst, (P * c - one).norm() / one.norm());
    }
    return make("constants representable at M = 1", worst, 1e-10);
}

std::vector<PropertyResult> run_all() {
    return {partition_of_unity(),    vanka_weight_identity(),      eigenresidual(),
            analytic_derivative(),   galerkin_triple_product(),    coarse_range_one_iteration(),
            constants_representable()};
}

}  // namespace unsatporo::props
