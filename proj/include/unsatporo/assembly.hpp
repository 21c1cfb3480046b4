/// @file assembly.hpp
/// @brief P1 assembly of the pressure/displacement block operators and their
/// right-hand sides, displacement constraints and the coupled system matrix.

#ifndef UNSATPORO_ASSEMBLY_HPP
#define UNSATPORO_ASSEMBLY_HPP

#include "unsatporo/constitutive.hpp"
#include "unsatporo/linalg.hpp"
#include "unsatporo/mesh.hpp"

#include <array>
#include <span>
#include <vector>

namespace unsatporo {

struct BoundaryConfig {
    double gamma = 1e6;
    double p1 = 202860.0;
    Side robin_side = Side::top;
    bool constrain_left_ux = true;
    bool constrain_bottom_uy = true;
};

struct SourceConfig {
    double f = 0.0;               ///< volumetric source, constant
    bool elevation_term = false;  ///< adds the gravity potential under the divergence
};

/// Coefficient values at the three quadrature points of every triangle.
struct QuadratureCoefficients {
    using Triple = std::array<double, 3>;
    std::vector<Triple> c, kappa, S, lambda, mu, rho_b;
    std::vector<std::array<std::array<double, 2>, 3>> grad_S;

    int n_triangles() const { return static_cast<int>(c.size()); }
    static QuadratureCoefficients constant(int n_triangles, const PointCoefficients& pc);
};

/// Barycentric weight of vertex k at quadrature point q.
inline double quad_shape(int k, int q) { return k == q ? 2.0 / 3.0 : 1.0 / 6.0; }

QuadratureCoefficients coefficients_at_state(const StructuredTriMesh& mesh,
                                             const MaterialModel& mat, const Vector& p_nodal);
/// Per-cell bound values at every quadrature point, with zero saturation gradient.
QuadratureCoefficients coefficients_from_bounds(const StructuredTriMesh& mesh,
                                                const CoefficientBounds& bounds,
                                                const MaterialModel& mat);

struct ElementGeometry {
    double area;
    std::array<std::array<double, 2>, 3> grad;  ///< gradients of the three hats
};

ElementGeometry element_geometry(const StructuredTriMesh& mesh, int t);
/// weight * int grad phi_i . grad phi_j
std::array<std::array<double, 3>, 3> element_stiffness(const ElementGeometry& g, double weight);
/// weight * int phi_i phi_j (exact for constant weight)
std::array<std::array<double, 3>, 3> element_mass(const ElementGeometry& g, double weight);
/// Elasticity matrix over local displacement order (ux0, uy0, ux1, uy1, ux2, uy2).
std::array<std::array<double, 6>, 6> element_elasticity(const ElementGeometry& g, double lambda,
                                                        double mu);

enum class OperatorTag { linear_part, at_state };

struct FlowOperators {
    SparseMatrix M;
    SparseMatrix A;
    Vector F_p;
};

struct MechanicsOperators {
    SparseMatrix K;  ///< displacement x displacement
    SparseMatrix D;  ///< pressure x displacement
    SparseMatrix G;  ///< displacement x pressure
    Vector F_u;
};

struct AssembledOperators {
    SparseMatrix M, A, K, D, G;
    Vector F_p, F_u;
    OperatorTag tag = OperatorTag::at_state;
};

/// Optional element_order permutes the element loop; the result does not depend on it.
FlowOperators assemble_flow(const StructuredTriMesh& mesh, const QuadratureCoefficients& qc,
                            const BoundaryConfig& bc, const SourceConfig& source,
                            const FluidSolidParams& fluid, std::span<const int> element_order = {});

MechanicsOperators assemble_mechanics(const StructuredTriMesh& mesh, const DofMap& dofs,
                                      const QuadratureCoefficients& qc,
                                      const FluidSolidParams& fluid,
                                      std::span<const int> element_order = {});

/// Eliminates constrained displacement DOFs symmetrically: unit diagonal in K,
/// zero rows of G and F_u, zero columns of D. Patterns are preserved.
void apply_displacement_bc(AssembledOperators& ops, const DofMap& dofs);

/// Value-wise difference at_state - linear on identical patterns; F is taken from at_state.
AssembledOperators nonlinear_residual(const AssembledOperators& at_state,
                                      const AssembledOperators& linear);

/// [[M + tau A, alpha D], [alpha G, K]]
SparseMatrix system_matrix(const AssembledOperators& ops, double tau, double alpha);

/// Mesh, numbering, material and boundary data bundled for repeated assembly.
class Discretization {
public:
    Discretization(StructuredTriMesh mesh, MaterialModel material, BoundaryConfig bc = {},
                   SourceConfig source = {});

    const StructuredTriMesh& mesh() const { return mesh_; }
    const DofMap& dofs() const { return dofs_; }
    const MaterialModel& material() const { return material_; }
    const BoundaryConfig& bc() const { return bc_; }
    const SourceConfig& source() const { return source_; }

    AssembledOperators assemble_at_state(const Vector& p_nodal) const;
    AssembledOperators assemble_linear_part(const CoefficientBounds& bounds) const;
    AssembledOperators assemble_with(const QuadratureCoefficients& qc, OperatorTag tag) const;

    int state_assemblies() const { return state_assemblies_; }
    int linear_assemblies() const { return linear_assemblies_; }

private:
    StructuredTriMesh mesh_;
    DofMap dofs_;
    MaterialModel material_;
    BoundaryConfig bc_;
    SourceConfig source_;
    mutable int state_assemblies_ = 0;
    mutable int linear_assemblies_ = 0;
};

}  // namespace unsatporo

#endif  // UNSATPORO_ASSEMBLY_HPP
