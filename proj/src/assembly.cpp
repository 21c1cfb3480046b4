#include "unsatporo/assembly.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace unsatporo {

QuadratureCoefficients QuadratureCoefficients::constant(int n_triangles,
                                                        const PointCoefficients& pc) {
    QuadratureCoefficients qc;
    auto fill = [&](std::vector<Triple>& v, double x) { v.assign(n_triangles, {x, x, x}); };
    fill(qc.c, pc.c);
    fill(qc.kappa, pc.kappa);
    fill(qc.S, pc.S);
    fill(qc.lambda, pc.lambda);
    fill(qc.mu, pc.mu);
    fill(qc.rho_b, pc.rho_b);
    qc.grad_S.assign(n_triangles, {});
    return qc;
}

namespace {

QuadratureCoefficients allocate(int n) {
    QuadratureCoefficients qc;
    qc.c.resize(n);
    qc.kappa.resize(n);
    qc.S.resize(n);
    qc.lambda.resize(n);
    qc.mu.resize(n);
    qc.rho_b.resize(n);
    qc.grad_S.assign(n, {});
    return qc;
}

std::vector<int> loop_order(std::span<const int> order, int n) {
    if (order.empty()) {
        std::vector<int> id(n);
        std::iota(id.begin(), id.end(), 0);
        return id;
    }
    if (static_cast<int>(order.size()) != n)
        throw DimensionError("element_order must list every element once");
    return {order.begin(), order.end()};
}

}  // namespace

QuadratureCoefficients coefficients_at_state(const StructuredTriMesh& mesh,
                                             const MaterialModel& mat, const Vector& p_nodal) {
    if (p_nodal.size() != mesh.n_vertices())
        throw DimensionError("coefficients_at_state: pressure length must equal vertex count");
    const int nt = mesh.n_triangles();
    QuadratureCoefficients qc = allocate(nt);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangle(t);
        const ElementGeometry g = element_geometry(mesh, t);
        std::array<double, 2> grad_p{0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            grad_p[0] += p_nodal[tri[k]] * g.grad[k][0];
            grad_p[1] += p_nodal[tri[k]] * g.grad[k][1];
        }
        for (int q = 0; q < 3; ++q) {
            double pq = 0.0;
            for (int k = 0; k < 3; ++k) pq += quad_shape(k, q) * p_nodal[tri[k]];
            const PointCoefficients pc = storage_and_mobility(pq, t, mat);
            qc.c[t][q] = pc.c;
            qc.kappa[t][q] = pc.kappa;
            qc.S[t][q] = pc.S;
            qc.lambda[t][q] = pc.lambda;
            qc.mu[t][q] = pc.mu;
            qc.rho_b[t][q] = pc.rho_b;
            qc.grad_S[t][q] = {pc.dS_dp * grad_p[0], pc.dS_dp * grad_p[1]};
        }
    }
    return qc;
}

QuadratureCoefficients coefficients_from_bounds(const StructuredTriMesh& mesh,
                                                const CoefficientBounds& bounds,
                                                const MaterialModel& mat) {
    const int nt = mesh.n_triangles();
    if (static_cast<int>(bounds.c.size()) != nt)
        throw DimensionError("coefficients_from_bounds: bounds must have one value per cell");
    QuadratureCoefficients qc = allocate(nt);
    const FluidSolidParams& f = mat.fluid;
    for (int t = 0; t < nt; ++t) {
        const double rho_b = f.phi * bounds.S[t] * f.rho_w + (1.0 - f.phi) * f.rho_s;
        qc.c[t].fill(bounds.c[t]);
        qc.kappa[t].fill(bounds.kappa[t]);
        qc.S[t].fill(bounds.S[t]);
        qc.lambda[t].fill(bounds.lambda[t]);
        qc.mu[t].fill(bounds.mu[t]);
        qc.rho_b[t].fill(rho_b);
    }
    return qc;
}

ElementGeometry element_geometry(const StructuredTriMesh& mesh, int t) {
    const auto& tri = mesh.triangle(t);
    const auto& a = mesh.coord(tri[0]);
    const auto& b = mesh.coord(tri[1]);
    const auto& c = mesh.coord(tri[2]);
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    ElementGeometry g;
    g.area = 0.5 * det;
    g.grad[0] = {(b[1] - c[1]) / det, (c[0] - b[0]) / det};
    g.grad[1] = {(c[1] - a[1]) / det, (a[0] - c[0]) / det};
    g.grad[2] = {(a[1] - b[1]) / det, (b[0] - a[0]) / det};
    return g;
}

std::array<std::array<double, 3>, 3> element_stiffness(const ElementGeometry& g, double weight) {
    std::array<std::array<double, 3>, 3> k{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            k[i][j] = weight * g.area *
                      (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1]);
    return k;
}

std::array<std::array<double, 3>, 3> element_mass(const ElementGeometry& g, double weight) {
    std::array<std::array<double, 3>, 3> m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = weight * g.area * (i == j ? 2.0 : 1.0) / 12.0;
    return m;
}

std::array<std::array<double, 6>, 6> element_elasticity(const ElementGeometry& g, double lambda,
                                                        double mu) {
    // Strain rows (e_xx, e_yy, 2 e_xy) against local DOFs (ux0, uy0, ux1, ...).
    double B[3][6] = {};
    for (int k = 0; k < 3; ++k) {
        B[0][2 * k] = g.grad[k][0];
        B[1][2 * k + 1] = g.grad[k][1];
        B[2][2 * k] = g.grad[k][1];
        B[2][2 * k + 1] = g.grad[k][0];
    }
    const double C[3][3] = {{lambda + 2.0 * mu, lambda, 0.0},
                            {lambda, lambda + 2.0 * mu, 0.0},
                            {0.0, 0.0, mu}};
    std::array<std::array<double, 6>, 6> ke{};
    for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
            double s = 0.0;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) s += B[r][a] * C[r][c] * B[c][b];
            ke[a][b] = g.area * s;
        }
    }
    return ke;
}

FlowOperators assemble_flow(const StructuredTriMesh& mesh, const QuadratureCoefficients& qc,
                            const BoundaryConfig& bc, const SourceConfig& source,
                            const FluidSolidParams& fluid, std::span<const int> element_order) {
    const int nv = mesh.n_vertices();
    const int nt = mesh.n_triangles();
    if (qc.n_triangles() != nt) throw DimensionError("assemble_flow: coefficient count mismatch");
    TripletAccumulator m_acc(nv, nv);
    TripletAccumulator a_acc(nv, nv);
    m_acc.reserve(9 * static_cast<std::size_t>(nt));
    a_acc.reserve(9 * static_cast<std::size_t>(nt) + 4 * mesh.N());
    Vector f = Vector::Zero(nv);

    for (int t : loop_order(element_order, nt)) {
        const auto& tri = mesh.triangle(t);
        const ElementGeometry g = element_geometry(mesh, t);
        const double w = g.area / 3.0;
        const double kappa_mean = (qc.kappa[t][0] + qc.kappa[t][1] + qc.kappa[t][2]) / 3.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double m = 0.0;
                for (int q = 0; q < 3; ++q) m += w * qc.c[t][q] * quad_shape(i, q) * quad_shape(j, q);
                m_acc.add(tri[i], tri[j], m);
                a_acc.add(tri[i], tri[j],
                          kappa_mean * g.area *
                              (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1]));
            }
            f[tri[i]] += source.f * w;
            if (source.elevation_term)
                f[tri[i]] -= kappa_mean * g.area * fluid.rho_w * fluid.g_scalar * g.grad[i][1];
        }
    }

    for (const auto& e : mesh.boundary_edges(bc.robin_side)) {
        const auto& a = mesh.coord(e[0]);
        const auto& b = mesh.coord(e[1]);
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        const double d = bc.gamma * len / 3.0;
        const double o = bc.gamma * len / 6.0;
        a_acc.add(e[0], e[0], d);
        a_acc.add(e[1], e[1], d);
        a_acc.add(e[0], e[1], o);
        a_acc.add(e[1], e[0], o);
        f[e[0]] += bc.gamma * bc.p1 * len / 2.0;
        f[e[1]] += bc.gamma * bc.p1 * len / 2.0;
    }
    return {m_acc.finalize(), a_acc.finalize(), std::move(f)};
}

MechanicsOperators assemble_mechanics(const StructuredTriMesh& mesh, const DofMap& dofs,
                                      const QuadratureCoefficients& qc,
                                      const FluidSolidParams& fluid,
                                      std::span<const int> element_order) {
    const int np = dofs.n_pressure();
    const int nu = dofs.n_displacement();
    const int nt = mesh.n_triangles();
    if (qc.n_triangles() != nt)
        throw DimensionError("assemble_mechanics: coefficient count mismatch");
    TripletAccumulator k_acc(nu, nu);
    TripletAccumulator d_acc(np, nu);
    TripletAccumulator g_acc(nu, np);
    k_acc.reserve(36 * static_cast<std::size_t>(nt));
    d_acc.reserve(18 * static_cast<std::size_t>(nt));
    g_acc.reserve(18 * static_cast<std::size_t>(nt));
    Vector f = Vector::Zero(nu);

    for (int t : loop_order(element_order, nt)) {
        const auto& tri = mesh.triangle(t);
        const ElementGeometry g = element_geometry(mesh, t);
        const double w = g.area / 3.0;
        const double lam = (qc.lambda[t][0] + qc.lambda[t][1] + qc.lambda[t][2]) / 3.0;
        const double mu = (qc.mu[t][0] + qc.mu[t][1] + qc.mu[t][2]) / 3.0;
        const auto ke = element_elasticity(g, lam, mu);
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b)
                k_acc.add(dofs.u_local(tri[a / 2], a % 2), dofs.u_local(tri[b / 2], b % 2), ke[a][b]);

        for (int i = 0; i < 3; ++i) {      // pressure hat
            for (int v = 0; v < 3; ++v) {  // displacement hat
                for (int comp = 0; comp < 2; ++comp) {
                    double d = 0.0;
                    double gl = 0.0;
                    for (int q = 0; q < 3; ++q) {
                        d += w * qc.S[t][q] * quad_shape(i, q) * g.grad[v][comp];
                        gl += w * (qc.S[t][q] * g.grad[i][comp] +
                                   quad_shape(i, q) * qc.grad_S[t][q][comp]) *
                              quad_shape(v, q);
                    }
                    const int ul = dofs.u_local(tri[v], comp);
                    d_acc.add(tri[i], ul, d);
                    g_acc.add(ul, tri[i], gl);
                }
            }
        }
        for (int v = 0; v < 3; ++v) {
            for (int comp = 0; comp < 2; ++comp) {
                double s = 0.0;
                for (int q = 0; q < 3; ++q)
                    s += w * qc.rho_b[t][q] * fluid.g_vec[comp] * quad_shape(v, q);
                f[dofs.u_local(tri[v], comp)] += s;
            }
        }
    }
    return {k_acc.finalize(), d_acc.finalize(), g_acc.finalize(), std::move(f)};
}

void apply_displacement_bc(AssembledOperators& ops, const DofMap& dofs) {
    const auto& mask = dofs.constrained_u();
    {
        const auto o = ops.K.row_offsets();
        const auto c = ops.K.col_indices();
        auto v = ops.K.values();
        for (int r = 0; r < ops.K.rows(); ++r) {
            for (int k = o[r]; k < o[r + 1]; ++k) {
                if (mask[r] || mask[c[k]]) v[k] = (r == c[k] && mask[r]) ? 1.0 : 0.0;
            }
        }
    }
    {
        const auto o = ops.G.row_offsets();
        auto v = ops.G.values();
        for (int r = 0; r < ops.G.rows(); ++r)
            if (mask[r])
                for (int k = o[r]; k < o[r + 1]; ++k) v[k] = 0.0;
    }
    {
        const auto c = ops.D.col_indices();
        auto v = ops.D.values();
        for (int k = 0; k < ops.D.nnz(); ++k)
            if (mask[c[k]]) v[k] = 0.0;
    }
    for (int r = 0; r < ops.F_u.size(); ++r)
        if (mask[r]) ops.F_u[r] = 0.0;
}

namespace {

SparseMatrix subtract_same_pattern(const SparseMatrix& a, const SparseMatrix& b) {
    if (!a.same_pattern(b)) throw DimensionError("nonlinear_residual: sparsity patterns differ");
    SparseMatrix out = a;
    auto ov = out.values();
    const auto bv = b.values();
    for (std::size_t k = 0; k < ov.size(); ++k) ov[k] -= bv[k];
    return out;
}

}  // namespace

AssembledOperators nonlinear_residual(const AssembledOperators& at_state,
                                      const AssembledOperators& linear) {
    AssembledOperators nl;
    nl.M = subtract_same_pattern(at_state.M, linear.M);
    nl.A = subtract_same_pattern(at_state.A, linear.A);
    nl.K = subtract_same_pattern(at_state.K, linear.K);
    nl.D = subtract_same_pattern(at_state.D, linear.D);
    nl.G = subtract_same_pattern(at_state.G, linear.G);
    nl.F_p = at_state.F_p;
    nl.F_u = at_state.F_u;
    nl.tag = OperatorTag::at_state;
    return nl;
}

SparseMatrix system_matrix(const AssembledOperators& ops, double tau, double alpha) {
    return block_2x2(add(ops.M, ops.A, 1.0, tau), scaled(ops.D, alpha), scaled(ops.G, alpha),
                     ops.K);
}

Discretization::Discretization(StructuredTriMesh mesh, MaterialModel material, BoundaryConfig bc,
                               SourceConfig source)
    : mesh_(std::move(mesh)),
      dofs_(mesh_, bc.constrain_left_ux, bc.constrain_bottom_uy),
      material_(std::move(material)),
      bc_(bc),
      source_(source) {
    if (material_.n_cells() != mesh_.n_triangles())
        throw DimensionError("Discretization: material fields must have one value per triangle");
    material_.validate();
    if (bc_.gamma < 0.0) throw std::invalid_argument("Discretization: gamma must be >= 0");
}

AssembledOperators Discretization::assemble_with(const QuadratureCoefficients& qc,
                                                 OperatorTag tag) const {
    FlowOperators flow = assemble_flow(mesh_, qc, bc_, source_, material_.fluid);
    MechanicsOperators mech = assemble_mechanics(mesh_, dofs_, qc, material_.fluid);
    AssembledOperators ops{std::move(flow.M), std::move(flow.A), std::move(mech.K),
                           std::move(mech.D), std::move(mech.G), std::move(flow.F_p),
                           std::move(mech.F_u), tag};
    apply_displacement_bc(ops, dofs_);
    return ops;
}

AssembledOperators Discretization::assemble_at_state(const Vector& p_nodal) const {
    ++state_assemblies_;
    return assemble_with(coefficients_at_state(mesh_, material_, p_nodal), OperatorTag::at_state);
}

AssembledOperators Discretization::assemble_linear_part(const CoefficientBounds& bounds) const {
    ++linear_assemblies_;
    return assemble_with(coefficients_from_bounds(mesh_, bounds, material_),
                         OperatorTag::linear_part);
}

}  // namespace unsatporo
