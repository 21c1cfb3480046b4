#include "unsatporo/mesh.hpp"

#include <stdexcept>

namespace unsatporo {

const char* side_name(Side s) {
    switch (s) {
        case Side::bottom: return "bottom";
        case Side::right: return "right";
        case Side::top: return "top";
        case Side::left: return "left";
    }
    return "?";
}

StructuredTriMesh::StructuredTriMesh(int n, double length) : n_(n), length_(length) {
    if (n < 2) throw std::invalid_argument("build_mesh: N must be at least 2");
    if (!(length > 0.0)) throw std::invalid_argument("build_mesh: L must be positive");
    const double h = length / n;
    coords_.resize(n_vertices());
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            coords_[vertex(i, j)] = {i == n ? length : i * h, j == n ? length : j * h};

    triangles_.resize(n_triangles());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = vertex(i, j);
            const int v10 = vertex(i + 1, j);
            const int v01 = vertex(i, j + 1);
            const int v11 = vertex(i + 1, j + 1);
            const int sq = j * n + i;
            triangles_[2 * sq] = {v00, v10, v11};
            triangles_[2 * sq + 1] = {v00, v11, v01};
        }
    }

    for (int k = 0; k < n; ++k) {
        boundary_[static_cast<int>(Side::bottom)].push_back({vertex(k, 0), vertex(k + 1, 0)});
        boundary_[static_cast<int>(Side::top)].push_back({vertex(k, n), vertex(k + 1, n)});
        boundary_[static_cast<int>(Side::left)].push_back({vertex(0, k), vertex(0, k + 1)});
        boundary_[static_cast<int>(Side::right)].push_back({vertex(n, k), vertex(n, k + 1)});
    }
}

double StructuredTriMesh::triangle_area(int t) const {
    const auto& tri = triangles_[t];
    const auto& a = coords_[tri[0]];
    const auto& b = coords_[tri[1]];
    const auto& c = coords_[tri[2]];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

std::array<double, 2> StructuredTriMesh::centroid(int t) const {
    const auto& tri = triangles_[t];
    std::array<double, 2> c{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
        c[0] += coords_[tri[k]][0] / 3.0;
        c[1] += coords_[tri[k]][1] / 3.0;
    }
    return c;
}

DofMap::DofMap(const StructuredTriMesh& mesh, bool constrain_left_ux, bool constrain_bottom_uy)
    : nv_(mesh.n_vertices()),
      constrained_(3 * mesh.n_vertices(), 0),
      constrained_u_(2 * mesh.n_vertices(), 0) {
    const int n = mesh.N();
    for (int k = 0; k <= n; ++k) {
        if (constrain_left_ux) constrained_u_[u_local(mesh.vertex(0, k), 0)] = 1;
        if (constrain_bottom_uy) constrained_u_[u_local(mesh.vertex(k, 0), 1)] = 1;
    }
    for (int d = 0; d < 2 * nv_; ++d) constrained_[nv_ + d] = constrained_u_[d];
}

}  // namespace unsatporo
