/// @file smoothers.hpp
/// @brief Pointwise Jacobi / Gauss-Seidel and the overlapping Vanka family with
/// reciprocal-multiplicity weights and multicolor fractional stepping.

#ifndef UNSATPORO_SMOOTHERS_HPP
#define UNSATPORO_SMOOTHERS_HPP

#include "unsatporo/coarse_space.hpp"
#include "unsatporo/linalg.hpp"
#include "unsatporo/mesh.hpp"

#include <string>
#include <vector>

namespace unsatporo {

enum class SmootherType { jacobi, gauss_seidel, vanka };
enum class PatchKind { omega, cell };

struct SmootherConfig {
    SmootherType type = SmootherType::vanka;
    PatchKind patch = PatchKind::cell;
    int overlap = 2;
    int colors = 4;
    int sweeps = 3;
    double jacobi_damping = 2.0 / 3.0;

    /// Short name: Jacobi, GS, V, VK, VK1, VK2, ...
    std::string label() const;
    /// Parses a label back into type, patch kind and overlap; colors and
    /// sweeps keep their defaults.
    static SmootherConfig from_label(const std::string& label);
    void validate() const;
};

struct Patch {
    PatchKind kind = PatchKind::cell;
    int coarse_i = 0;  ///< coarse cell or coarse vertex coordinates
    int coarse_j = 0;
    int overlap = 0;
    std::vector<int> dofs;  ///< sorted coupled DOFs, constrained DOFs excluded
};

/// Cell patches grow the coarse cell by overlap fine layers; omega patches are
/// vertex patches and ignore overlap.
std::vector<Patch> build_patches(const StructuredTriMesh& mesh, const DofMap& dofs,
                                 const CoarseGrid& coarse, PatchKind kind, int overlap);

/// 4 colors by (I mod 2, J mod 2), 2 colors by (I + J) mod 2, 1 color otherwise.
std::vector<int> color_patches(const std::vector<Patch>& patches, int colors);

/// Pre-factorized local matrices, weights and colors built once from L.
class VankaSmoother {
public:
    VankaSmoother(const SparseMatrix& L, std::vector<Patch> patches, std::vector<int> colors,
                  int n_colors);

    /// Sweeps of multicolor additive Vanka against the matrix given at setup.
    void apply(const SparseMatrix& L, Vector& x, const Vector& b, int sweeps) const;

    const std::vector<Patch>& patches() const { return patches_; }
    const std::vector<int>& colors() const { return colors_; }
    int n_colors() const { return n_colors_; }
    /// Reciprocal patch multiplicity per DOF; zero on uncovered DOFs.
    const Vector& weights() const { return weights_; }
    int factorizations() const { return static_cast<int>(lus_.size()); }

private:
    std::vector<Patch> patches_;
    std::vector<int> colors_;
    int n_colors_;
    std::vector<std::vector<int>> by_color_;
    std::vector<DenseLU> lus_;
    Vector weights_;
};

/// Jacobi (with damping) or forward lexicographic Gauss-Seidel sweeps.
void apply_pointwise(SmootherType type, const SparseMatrix& L, Vector& x, const Vector& b,
                     int sweeps, double damping = 1.0);

}  // namespace unsatporo

#endif  // UNSATPORO_SMOOTHERS_HPP
