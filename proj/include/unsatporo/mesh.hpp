/// @file mesh.hpp
/// @brief Structured right-triangle mesh of the square [0,L]^2 and the coupled
/// pressure/displacement DOF numbering.

#ifndef UNSATPORO_MESH_HPP
#define UNSATPORO_MESH_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace unsatporo {

enum class Side { bottom = 0, right = 1, top = 2, left = 3 };

const char* side_name(Side s);

/// N x N squares, each split along the bottom-left to top-right diagonal.
///
/// Vertex (i, j) has index j (N+1) + i. Square (i, j) holds triangles
/// 2 (j N + i) = (v00, v10, v11) and 2 (j N + i) + 1 = (v00, v11, v01).
class StructuredTriMesh {
public:
    StructuredTriMesh(int n, double length);

    int N() const { return n_; }
    double L() const { return length_; }
    double h() const { return length_ / n_; }

    int n_vertices() const { return (n_ + 1) * (n_ + 1); }
    int n_triangles() const { return 2 * n_ * n_; }
    int vertex(int i, int j) const { return j * (n_ + 1) + i; }
    int vertex_i(int v) const { return v % (n_ + 1); }
    int vertex_j(int v) const { return v / (n_ + 1); }
    /// Square (i, j) that owns triangle t.
    int triangle_square_i(int t) const { return (t / 2) % n_; }
    int triangle_square_j(int t) const { return (t / 2) / n_; }

    const std::array<double, 2>& coord(int v) const { return coords_[v]; }
    const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
    double triangle_area(int t) const;
    std::array<double, 2> centroid(int t) const;

    /// Boundary edges of one side as vertex pairs in increasing coordinate order.
    const std::vector<std::array<int, 2>>& boundary_edges(Side s) const {
        return boundary_[static_cast<int>(s)];
    }

private:
    int n_;
    double length_;
    std::vector<std::array<double, 2>> coords_;
    std::vector<std::array<int, 3>> triangles_;
    std::array<std::vector<std::array<int, 2>>, 4> boundary_;
};

/// Coupled ordering [p_0..p_{nv-1}, ux_0, uy_0, ux_1, uy_1, ...].
class DofMap {
public:
    DofMap(const StructuredTriMesh& mesh, bool constrain_left_ux = true,
           bool constrain_bottom_uy = true);

    int n_vertices() const { return nv_; }
    int n_pressure() const { return nv_; }
    int n_displacement() const { return 2 * nv_; }
    int n_total() const { return 3 * nv_; }

    int p(int v) const { return v; }
    /// Displacement index inside the displacement block.
    int u_local(int v, int comp) const { return 2 * v + comp; }
    /// Displacement index in the coupled numbering.
    int u(int v, int comp) const { return nv_ + 2 * v + comp; }

    /// Mask over the coupled numbering.
    const std::vector<std::uint8_t>& constrained() const { return constrained_; }
    /// Mask over the displacement block.
    const std::vector<std::uint8_t>& constrained_u() const { return constrained_u_; }
    bool is_constrained(int dof) const { return constrained_[dof] != 0; }

private:
    int nv_;
    std::vector<std::uint8_t> constrained_;
    std::vector<std::uint8_t> constrained_u_;
};

}  // namespace unsatporo

#endif  // UNSATPORO_MESH_HPP
