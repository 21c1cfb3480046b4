/// @file coarse_space.hpp
/// @brief Coarse grid, vertex patches, local spectral bases, partition of unity,
/// prolongation and the Galerkin coarse operator.

#ifndef UNSATPORO_COARSE_SPACE_HPP
#define UNSATPORO_COARSE_SPACE_HPP

#include "unsatporo/constitutive.hpp"
#include "unsatporo/linalg.hpp"
#include "unsatporo/mesh.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace unsatporo {

/// Uniform N_H x N_H coarse grid aligned with the fine squares.
///
/// Coarse cell (I, J) has index J N_H + I; coarse vertex (I, J) has index
/// J (N_H + 1) + I. Fine vertex ranges below are inclusive.
class CoarseGrid {
public:
    CoarseGrid(const StructuredTriMesh& mesh, int n_coarse);

    int N() const { return n_fine_; }
    int N_H() const { return n_coarse_; }
    int ratio() const { return ratio_; }
    int n_cells() const { return n_coarse_ * n_coarse_; }
    int n_vertices() const { return (n_coarse_ + 1) * (n_coarse_ + 1); }
    int cell_index(int I, int J) const { return J * n_coarse_ + I; }
    int vertex_index(int I, int J) const { return J * (n_coarse_ + 1) + I; }

    /// Fine triangles of coarse cell c.
    std::vector<int> cell_triangles(int c) const;
    /// Coarse cells sharing coarse vertex l.
    std::vector<int> patch_cells(int l) const;
    /// Fine triangles of the vertex patch omega_l.
    std::vector<int> patch_triangles(int l) const;
    /// Fine vertices of omega_l in increasing index order.
    std::vector<int> patch_vertices(int l) const;
    /// Fine-vertex box {i0, i1, j0, j1} of omega_l.
    std::array<int, 4> patch_box(int l) const;

    /// Bilinear coarse hat of vertex l at fine vertex v.
    double pou(int l, int v) const;

private:
    int n_fine_;
    int n_coarse_;
    int ratio_;
};

/// Per-vertex-patch eigenpairs of the pressure and displacement problems.
struct LocalBasis {
    std::vector<int> vertices;  ///< fine vertices of omega_l
    EigenPairs pressure;        ///< over vertices
    EigenPairs displacement;    ///< over (vertex, component) interleaved
};

struct SpectralBasis {
    int N = 0;
    int N_H = 0;
    int count_p = 0;
    int count_u = 0;
    std::vector<LocalBasis> patches;
};

/// Smallest eigenpairs of the kappa-bar stiffness against the kappa-bar mass on omega_l.
EigenPairs pressure_basis(const StructuredTriMesh& mesh, const CoarseGrid& coarse, int l,
                          const CoefficientBounds& bounds, int count);
/// Smallest eigenpairs of the bar elasticity matrix against the
/// (lambda-bar + 2 mu-bar) vector mass on omega_l, free boundary.
EigenPairs displacement_basis(const StructuredTriMesh& mesh, const CoarseGrid& coarse, int l,
                              const CoefficientBounds& bounds, int count);

/// Extra eigenpairs stored per patch so a cut inside a degenerate cluster can be closed.
inline constexpr int kClusterSlack = 3;

/// Stores count_p + kClusterSlack and count_u + kClusterSlack eigenpairs per patch
/// (capped by the patch size).
SpectralBasis compute_spectral_basis(const StructuredTriMesh& mesh, const CoarseGrid& coarse,
                                     const CoefficientBounds& bounds, int count_p, int count_u);

/// Smallest m >= count such that eigenvalue m lies outside the cluster of
/// eigenvalue count - 1, or the stored count. Cluster: difference at most
/// 1e-8 times the largest stored magnitude.
int cluster_closed_count(const Vector& eigenvalues, int count);

/// Block prolongation diag(P_p, P_u) in the coupled numbering.
struct Prolongation {
    SparseMatrix P_p;
    SparseMatrix P_u;
    SparseMatrix P;
    int n_coarse_p = 0;
    int n_coarse_u = 0;
    /// Candidate columns removed as linearly dependent, in candidate numbering
    /// (patch-major, then eigenvector index).
    std::vector<int> dropped_p;
    std::vector<int> dropped_u;

    int n_coarse() const { return n_coarse_p + n_coarse_u; }
};

/// Uses the first count_p / count_u eigenvectors of every patch, which must not
/// exceed the counts stored in the basis. Rows of constrained DOFs are zero.
/// Columns are scaled to unit norm; linearly dependent ones are dropped.
/// close_clusters extends each patch's count with cluster_closed_count.
Prolongation assemble_prolongation(const StructuredTriMesh& mesh, const DofMap& dofs,
                                   const CoarseGrid& coarse, const SpectralBasis& basis,
                                   int count_p, int count_u, bool close_clusters = true);

/// L_H = P^T L P and an LU factorization of S L_H S with S = |diag L_H|^{-1/2}.
struct CoarseOperator {
    DenseMatrix L_H;
    Vector scale;
    DenseLU lu;

    /// Overwrites r with L_H^{-1} r.
    void solve_in_place(Vector& r) const;
};

DenseMatrix galerkin_product(const SparseMatrix& L, const SparseMatrix& P);
CoarseOperator coarse_operator(const SparseMatrix& L, const SparseMatrix& P);

/// Versioned binary cache of a spectral basis. key identifies the field and bounds.
void save_basis(const SpectralBasis& basis, std::uint64_t key, const std::string& path);
/// Returns false when the file is missing, has another version, or another key.
bool load_basis(const std::string& path, std::uint64_t key, SpectralBasis& basis);

/// FNV-1a hash over the bound arrays and grid sizes.
std::uint64_t basis_key(const CoefficientBounds& bounds, int N, int N_H, int count_p,
                        int count_u);

}  // namespace unsatporo

#endif  // UNSATPORO_COARSE_SPACE_HPP
