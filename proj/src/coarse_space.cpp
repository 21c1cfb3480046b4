#include "unsatporo/coarse_space.hpp"

#include "unsatporo/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace unsatporo {

CoarseGrid::CoarseGrid(const StructuredTriMesh& mesh, int n_coarse)
    : n_fine_(mesh.N()), n_coarse_(n_coarse), ratio_(0) {
    if (n_coarse < 1 || n_fine_ % n_coarse != 0)
        throw std::invalid_argument("build_coarse_grid: N must be divisible by N_H");
    ratio_ = n_fine_ / n_coarse_;
}

std::vector<int> CoarseGrid::cell_triangles(int c) const {
    const int I = c % n_coarse_;
    const int J = c / n_coarse_;
    std::vector<int> tris;
    tris.reserve(2 * ratio_ * ratio_);
    for (int j = J * ratio_; j < (J + 1) * ratio_; ++j)
        for (int i = I * ratio_; i < (I + 1) * ratio_; ++i) {
            const int sq = j * n_fine_ + i;
            tris.push_back(2 * sq);
            tris.push_back(2 * sq + 1);
        }
    return tris;
}

std::vector<int> CoarseGrid::patch_cells(int l) const {
    const int I = l % (n_coarse_ + 1);
    const int J = l / (n_coarse_ + 1);
    std::vector<int> cells;
    for (int cj = J - 1; cj <= J; ++cj)
        for (int ci = I - 1; ci <= I; ++ci)
            if (ci >= 0 && ci < n_coarse_ && cj >= 0 && cj < n_coarse_)
                cells.push_back(cell_index(ci, cj));
    return cells;
}

std::vector<int> CoarseGrid::patch_triangles(int l) const {
    std::vector<int> tris;
    for (int c : patch_cells(l)) {
        const auto ct = cell_triangles(c);
        tris.insert(tris.end(), ct.begin(), ct.end());
    }
    std::sort(tris.begin(), tris.end());
    return tris;
}

std::array<int, 4> CoarseGrid::patch_box(int l) const {
    const int I = l % (n_coarse_ + 1);
    const int J = l / (n_coarse_ + 1);
    return {std::max(0, (I - 1) * ratio_), std::min(n_fine_, (I + 1) * ratio_),
            std::max(0, (J - 1) * ratio_), std::min(n_fine_, (J + 1) * ratio_)};
}

std::vector<int> CoarseGrid::patch_vertices(int l) const {
    const auto [i0, i1, j0, j1] = patch_box(l);
    std::vector<int> verts;
    verts.reserve((i1 - i0 + 1) * (j1 - j0 + 1));
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) verts.push_back(j * (n_fine_ + 1) + i);
    return verts;
}

double CoarseGrid::pou(int l, int v) const {
    const int I = l % (n_coarse_ + 1);
    const int J = l / (n_coarse_ + 1);
    const double x = static_cast<double>(v % (n_fine_ + 1)) / ratio_;
    const double y = static_cast<double>(v / (n_fine_ + 1)) / ratio_;
    return std::max(0.0, 1.0 - std::abs(x - I)) * std::max(0.0, 1.0 - std::abs(y - J));
}

namespace {

/// Local index of fine vertex v inside the box of a patch.
struct BoxIndex {
    int i0, j0, width, n_fine;
    int operator()(int v) const {
        return (v / (n_fine + 1) - j0) * width + (v % (n_fine + 1) - i0);
    }
};

BoxIndex box_index(const CoarseGrid& coarse, int l) {
    const auto box = coarse.patch_box(l);
    return {box[0], box[2], box[1] - box[0] + 1, coarse.N()};
}

}  // namespace

EigenPairs pressure_basis(const StructuredTriMesh& mesh, const CoarseGrid& coarse, int l,
                          const CoefficientBounds& bounds, int count) {
    const BoxIndex local = box_index(coarse, l);
    const int n = static_cast<int>(coarse.patch_vertices(l).size());
    DenseMatrix a = DenseMatrix::Zero(n, n);
    DenseMatrix s = DenseMatrix::Zero(n, n);
    for (int t : coarse.patch_triangles(l)) {
        const ElementGeometry g = element_geometry(mesh, t);
        const auto ke = element_stiffness(g, bounds.kappa[t]);
        const auto me = element_mass(g, bounds.kappa[t]);
        const auto& tri = mesh.triangle(t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                a(local(tri[i]), local(tri[j])) += ke[i][j];
                s(local(tri[i]), local(tri[j])) += me[i][j];
            }
    }
    return generalized_sym_eig(a, s, std::min(count, n));
}

EigenPairs displacement_basis(const StructuredTriMesh& mesh, const CoarseGrid& coarse, int l,
                              const CoefficientBounds& bounds, int count) {
    const BoxIndex local = box_index(coarse, l);
    const int n = 2 * static_cast<int>(coarse.patch_vertices(l).size());
    DenseMatrix a = DenseMatrix::Zero(n, n);
    DenseMatrix s = DenseMatrix::Zero(n, n);
    for (int t : coarse.patch_triangles(l)) {
        const ElementGeometry g = element_geometry(mesh, t);
        const auto ke = element_elasticity(g, bounds.lambda[t], bounds.mu[t]);
        const auto me = element_mass(g, bounds.lambda[t] + 2.0 * bounds.mu[t]);
        const auto& tri = mesh.triangle(t);
        for (int x = 0; x < 6; ++x)
            for (int y = 0; y < 6; ++y)
                a(2 * local(tri[x / 2]) + x % 2, 2 * local(tri[y / 2]) + y % 2) += ke[x][y];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int comp = 0; comp < 2; ++comp)
                    s(2 * local(tri[i]) + comp, 2 * local(tri[j]) + comp) += me[i][j];
    }
    return generalized_sym_eig(a, s, std::min(count, n));
}

SpectralBasis compute_spectral_basis(const StructuredTriMesh& mesh, const CoarseGrid& coarse,
                                     const CoefficientBounds& bounds, int count_p, int count_u) {
    if (count_p < 0 || count_u < 0)
        throw std::invalid_argument("compute_spectral_basis: counts must be non-negative");
    SpectralBasis basis;
    basis.N = mesh.N();
    basis.N_H = coarse.N_H();
    basis.count_p = count_p;
    basis.count_u = count_u;
    basis.patches.resize(coarse.n_vertices());
    for (int l = 0; l < coarse.n_vertices(); ++l) {
        LocalBasis& lb = basis.patches[l];
        lb.vertices = coarse.patch_vertices(l);
        lb.pressure = pressure_basis(mesh, coarse, l, bounds, count_p + kClusterSlack);
        lb.displacement = displacement_basis(mesh, coarse, l, bounds, count_u + kClusterSlack);
    }
    return basis;
}

namespace {

/// Scales columns to unit norm and removes columns that are linearly dependent
/// on the others (pivoted Cholesky of the Gram matrix). The span is unchanged.
SparseMatrix independent_columns(int rows, int cols,
                                 const std::vector<std::array<double, 3>>& entries,
                                 std::vector<int>& dropped) {
    std::vector<double> norm2(cols, 0.0);
    for (const auto& e : entries) norm2[static_cast<int>(e[1])] += e[2] * e[2];
    TripletAccumulator acc(rows, cols);
    acc.reserve(entries.size());
    for (const auto& e : entries) {
        const int c = static_cast<int>(e[1]);
        acc.add(static_cast<int>(e[0]), c, e[2] / std::sqrt(norm2[c]));
    }
    const SparseMatrix scaled_p = acc.finalize();
    const EigenCsr pe = scaled_p.to_eigen();
    const EigenCsr pt = pe.transpose();
    DenseMatrix g = DenseMatrix(EigenCsr(pt * pe));

    // Greedy pivoted Cholesky: keep a column while its residual after
    // projection onto the kept ones stays above the tolerance.
    constexpr double kTol = 1e-10;
    std::vector<int> kept;
    std::vector<char> used(cols, 0);
    Vector d = g.diagonal();
    DenseMatrix l = DenseMatrix::Zero(cols, cols);
    for (int k = 0; k < cols; ++k) {
        int piv = -1;
        for (int j = 0; j < cols; ++j)
            if (!used[j] && (piv < 0 || d[j] > d[piv])) piv = j;
        if (piv < 0 || d[piv] <= kTol) break;
        used[piv] = 1;
        const double root = std::sqrt(d[piv]);
        for (int j = 0; j < cols; ++j) {
            if (used[j] && j != piv) continue;
            double s = g(j, piv);
            for (int q = 0; q < k; ++q) s -= l(j, q) * l(piv, q);
            l(j, k) = s / root;
            if (j != piv) d[j] -= l(j, k) * l(j, k);
        }
        kept.push_back(piv);
    }
    if (static_cast<int>(kept.size()) == cols) return scaled_p;
    std::sort(kept.begin(), kept.end());
    std::vector<int> new_col(cols, -1);
    for (std::size_t k = 0; k < kept.size(); ++k) new_col[kept[k]] = static_cast<int>(k);
    for (int c = 0; c < cols; ++c)
        if (new_col[c] < 0) dropped.push_back(c);
    TripletAccumulator out(rows, static_cast<int>(kept.size()));
    out.reserve(entries.size());
    for (int r = 0; r < scaled_p.rows(); ++r)
        for (int k = scaled_p.row_offsets()[r]; k < scaled_p.row_offsets()[r + 1]; ++k) {
            const int c = new_col[scaled_p.col_indices()[k]];
            if (c >= 0) out.add(r, c, scaled_p.values()[k]);
        }
    return out.finalize();
}

}  // namespace

int cluster_closed_count(const Vector& eigenvalues, int count) {
    const int n = static_cast<int>(eigenvalues.size());
    if (count <= 0 || count >= n) return std::min(std::max(count, 0), n);
    const double tol = 1e-8 * eigenvalues.cwiseAbs().maxCoeff();
    int m = count;
    while (m < n && eigenvalues[m] - eigenvalues[count - 1] <= tol) ++m;
    return m;
}

Prolongation assemble_prolongation(const StructuredTriMesh& mesh, const DofMap& dofs,
                                   const CoarseGrid& coarse, const SpectralBasis& basis,
                                   int count_p, int count_u, bool close_clusters) {
    if (basis.N != mesh.N() || basis.N_H != coarse.N_H() ||
        static_cast<int>(basis.patches.size()) != coarse.n_vertices())
        throw DimensionError("assemble_prolongation: basis does not match the grids");
    const int nv = mesh.n_vertices();
    std::vector<std::array<double, 3>> p_entries;  // (row, col, value)
    std::vector<std::array<double, 3>> u_entries;
    int col_p = 0;
    int col_u = 0;
    for (int l = 0; l < coarse.n_vertices(); ++l) {
        const LocalBasis& lb = basis.patches[l];
        if (count_p > lb.pressure.count() || count_u > lb.displacement.count())
            throw DimensionError("assemble_prolongation: requested more vectors than stored");
        const int m_p = close_clusters ? cluster_closed_count(lb.pressure.eigenvalues, count_p)
                                       : count_p;
        const int m_u = close_clusters
                            ? cluster_closed_count(lb.displacement.eigenvalues, count_u)
                            : count_u;
        for (int j = 0; j < m_p; ++j, ++col_p) {
            for (std::size_t k = 0; k < lb.vertices.size(); ++k) {
                const double chi = coarse.pou(l, lb.vertices[k]);
                if (chi == 0.0) continue;
                p_entries.push_back({static_cast<double>(lb.vertices[k]),
                                     static_cast<double>(col_p),
                                     chi * lb.pressure.eigenvectors(k, j)});
            }
        }
        for (int j = 0; j < m_u; ++j, ++col_u) {
            for (std::size_t k = 0; k < lb.vertices.size(); ++k) {
                const double chi = coarse.pou(l, lb.vertices[k]);
                if (chi == 0.0) continue;
                for (int comp = 0; comp < 2; ++comp) {
                    const int row = dofs.u_local(lb.vertices[k], comp);
                    if (dofs.constrained_u()[row]) continue;
                    u_entries.push_back({static_cast<double>(row), static_cast<double>(col_u),
                                         chi * lb.displacement.eigenvectors(2 * k + comp, j)});
                }
            }
        }
    }
    Prolongation pr;
    pr.P_p = independent_columns(nv, col_p, p_entries, pr.dropped_p);
    pr.P_u = independent_columns(2 * nv, col_u, u_entries, pr.dropped_u);
    pr.n_coarse_p = pr.P_p.cols();
    pr.n_coarse_u = pr.P_u.cols();
    pr.P = block_2x2(pr.P_p, std::nullopt, std::nullopt, pr.P_u);
    return pr;
}

DenseMatrix galerkin_product(const SparseMatrix& L, const SparseMatrix& P) {
    if (L.rows() != L.cols() || L.cols() != P.rows())
        throw DimensionError("coarse_operator: dimension mismatch");
    const EigenCsr p = P.to_eigen();
    const EigenCsr lp = L.to_eigen() * p;
    const EigenCsr pt = p.transpose();
    const EigenCsr lh = pt * lp;
    return DenseMatrix(lh);
}

CoarseOperator coarse_operator(const SparseMatrix& L, const SparseMatrix& P) {
    CoarseOperator op;
    op.L_H = galerkin_product(L, P);
    op.scale = op.L_H.diagonal().cwiseAbs().cwiseSqrt().cwiseInverse();
    for (double& s : op.scale)
        if (!std::isfinite(s)) s = 1.0;
    op.lu = DenseLU(op.scale.asDiagonal() * op.L_H * op.scale.asDiagonal());
    return op;
}

void CoarseOperator::solve_in_place(Vector& r) const {
    r = r.cwiseProduct(scale);
    lu.solve_in_place(r);
    r = r.cwiseProduct(scale);
}

namespace {

constexpr char kMagic[8] = {'U', 'P', 'B', 'A', 'S', 'I', 'S', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& is, T& v) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

void put_pairs(std::ostream& os, const EigenPairs& e) {
    put(os, static_cast<std::int32_t>(e.eigenvectors.rows()));
    put(os, static_cast<std::int32_t>(e.count()));
    os.write(reinterpret_cast<const char*>(e.eigenvalues.data()),
             static_cast<std::streamsize>(sizeof(double) * e.eigenvalues.size()));
    os.write(reinterpret_cast<const char*>(e.eigenvectors.data()),
             static_cast<std::streamsize>(sizeof(double) * e.eigenvectors.size()));
}

bool get_pairs(std::istream& is, EigenPairs& e) {
    std::int32_t rows = 0;
    std::int32_t cols = 0;
    if (!get(is, rows) || !get(is, cols) || rows < 0 || cols < 0) return false;
    e.eigenvalues.resize(cols);
    e.eigenvectors.resize(rows, cols);
    is.read(reinterpret_cast<char*>(e.eigenvalues.data()),
            static_cast<std::streamsize>(sizeof(double) * cols));
    is.read(reinterpret_cast<char*>(e.eigenvectors.data()),
            static_cast<std::streamsize>(sizeof(double) * rows * cols));
    return static_cast<bool>(is);
}

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ULL;
    }
}

}  // namespace

std::uint64_t basis_key(const CoefficientBounds& bounds, int N, int N_H, int count_p,
                        int count_u) {
    std::uint64_t h = 14695981039346656037ULL;
    const int dims[4] = {N, N_H, count_p, count_u};
    fnv(h, dims, sizeof(dims));
    for (const auto* v : {&bounds.kappa, &bounds.lambda, &bounds.mu})
        fnv(h, v->data(), sizeof(double) * v->size());
    return h;
}

void save_basis(const SpectralBasis& basis, std::uint64_t key, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write(kMagic, sizeof(kMagic));
    put(os, kVersion);
    put(os, key);
    for (int v : {basis.N, basis.N_H, basis.count_p, basis.count_u,
                  static_cast<int>(basis.patches.size())})
        put(os, static_cast<std::int32_t>(v));
    for (const LocalBasis& lb : basis.patches) {
        put(os, static_cast<std::int32_t>(lb.vertices.size()));
        for (int v : lb.vertices) put(os, static_cast<std::int32_t>(v));
        put_pairs(os, lb.pressure);
        put_pairs(os, lb.displacement);
    }
    if (!os) throw std::runtime_error("failed writing " + path);
}

bool load_basis(const std::string& path, std::uint64_t key, SpectralBasis& basis) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    char magic[8];
    std::uint32_t version = 0;
    std::uint64_t stored_key = 0;
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        return false;
    if (!get(is, version) || version != kVersion) return false;
    if (!get(is, stored_key) || stored_key != key) return false;
    std::int32_t hdr[5];
    for (auto& h : hdr)
        if (!get(is, h)) return false;
    SpectralBasis out;
    out.N = hdr[0];
    out.N_H = hdr[1];
    out.count_p = hdr[2];
    out.count_u = hdr[3];
    if (hdr[4] < 0) return false;
    out.patches.resize(hdr[4]);
    for (LocalBasis& lb : out.patches) {
        std::int32_t n = 0;
        if (!get(is, n) || n < 0) return false;
        lb.vertices.resize(n);
        for (int& v : lb.vertices) {
            std::int32_t x = 0;
            if (!get(is, x)) return false;
            v = x;
        }
        if (!get_pairs(is, lb.pressure) || !get_pairs(is, lb.displacement)) return false;
    }
    basis = std::move(out);
    return true;
}

}  // namespace unsatporo
