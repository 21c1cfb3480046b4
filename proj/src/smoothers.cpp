#include "unsatporo/smoothers.hpp"

#include <algorithm>
#include <stdexcept>

namespace unsatporo {

std::string SmootherConfig::label() const {
    switch (type) {
        case SmootherType::jacobi: return "Jacobi";
        case SmootherType::gauss_seidel: return "GS";
        case SmootherType::vanka:
            if (patch == PatchKind::omega) return "V";
            return overlap == 0 ? "VK" : "VK" + std::to_string(overlap);
    }
    return "?";
}

SmootherConfig SmootherConfig::from_label(const std::string& label) {
    SmootherConfig c;
    if (label == "Jacobi" || label == "jacobi") {
        c.type = SmootherType::jacobi;
    } else if (label == "GS" || label == "gs" || label == "gauss_seidel") {
        c.type = SmootherType::gauss_seidel;
    } else if (label == "V") {
        c.type = SmootherType::vanka;
        c.patch = PatchKind::omega;
        c.overlap = 0;
    } else if (label.rfind("VK", 0) == 0) {
        c.type = SmootherType::vanka;
        c.patch = PatchKind::cell;
        const std::string rest = label.substr(2);
        if (rest.empty()) {
            c.overlap = 0;
        } else {
            if (!std::all_of(rest.begin(), rest.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
                throw std::invalid_argument("unknown smoother label: " + label);
            c.overlap = std::stoi(rest);
        }
    } else {
        throw std::invalid_argument("unknown smoother label: " + label);
    }
    return c;
}

void SmootherConfig::validate() const {
    if (sweeps < 1) throw std::invalid_argument("smoother: sweeps must be >= 1");
    if (colors != 1 && colors != 2 && colors != 4)
        throw std::invalid_argument("smoother: colors must be 1, 2 or 4");
    if (overlap < 0) throw std::invalid_argument("smoother: overlap must be >= 0");
    if (!(jacobi_damping > 0.0)) throw std::invalid_argument("smoother: damping must be > 0");
}

std::vector<Patch> build_patches(const StructuredTriMesh& mesh, const DofMap& dofs,
                                 const CoarseGrid& coarse, PatchKind kind, int overlap) {
    if (overlap < 0) throw std::invalid_argument("build_patches: overlap must be >= 0");
    const int n = mesh.N();
    const int r = coarse.ratio();
    std::vector<Patch> patches;
    auto collect = [&](Patch& p, int i0, int i1, int j0, int j1) {
        i0 = std::max(i0, 0);
        j0 = std::max(j0, 0);
        i1 = std::min(i1, n);
        j1 = std::min(j1, n);
        std::vector<int> verts;
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) verts.push_back(mesh.vertex(i, j));
        for (int v : verts) p.dofs.push_back(dofs.p(v));
        for (int v : verts)
            for (int comp = 0; comp < 2; ++comp) {
                const int d = dofs.u(v, comp);
                if (!dofs.is_constrained(d)) p.dofs.push_back(d);
            }
        std::sort(p.dofs.begin(), p.dofs.end());
    };
    if (kind == PatchKind::cell) {
        for (int J = 0; J < coarse.N_H(); ++J)
            for (int I = 0; I < coarse.N_H(); ++I) {
                Patch p{kind, I, J, overlap, {}};
                collect(p, I * r - overlap, (I + 1) * r + overlap, J * r - overlap,
                        (J + 1) * r + overlap);
                patches.push_back(std::move(p));
            }
    } else {
        for (int J = 0; J <= coarse.N_H(); ++J)
            for (int I = 0; I <= coarse.N_H(); ++I) {
                Patch p{kind, I, J, 0, {}};
                collect(p, (I - 1) * r, (I + 1) * r, (J - 1) * r, (J + 1) * r);
                patches.push_back(std::move(p));
            }
    }
    return patches;
}

std::vector<int> color_patches(const std::vector<Patch>& patches, int colors) {
    if (colors != 1 && colors != 2 && colors != 4)
        throw std::invalid_argument("color_patches: colors must be 1, 2 or 4");
    std::vector<int> out(patches.size(), 0);
    for (std::size_t k = 0; k < patches.size(); ++k) {
        const int I = patches[k].coarse_i;
        const int J = patches[k].coarse_j;
        if (colors == 4) out[k] = (I % 2) + 2 * (J % 2);
        else if (colors == 2) out[k] = (I + J) % 2;
    }
    return out;
}

VankaSmoother::VankaSmoother(const SparseMatrix& L, std::vector<Patch> patches,
                             std::vector<int> colors, int n_colors)
    : patches_(std::move(patches)), colors_(std::move(colors)), n_colors_(n_colors) {
    if (colors_.size() != patches_.size())
        throw DimensionError("VankaSmoother: one color per patch required");
    if (L.rows() != L.cols()) throw DimensionError("VankaSmoother: matrix must be square");
    by_color_.assign(n_colors_, {});
    for (std::size_t k = 0; k < patches_.size(); ++k) {
        if (colors_[k] < 0 || colors_[k] >= n_colors_)
            throw DimensionError("VankaSmoother: color out of range");
        by_color_[colors_[k]].push_back(static_cast<int>(k));
    }
    Vector mult = Vector::Zero(L.rows());
    lus_.reserve(patches_.size());
    for (const Patch& p : patches_) {
        if (p.dofs.empty()) throw DimensionError("VankaSmoother: empty patch");
        for (int d : p.dofs) mult[d] += 1.0;
        lus_.emplace_back(submatrix(L, p.dofs, p.dofs));
    }
    weights_ = Vector::Zero(L.rows());
    for (int d = 0; d < L.rows(); ++d)
        if (mult[d] > 0.0) weights_[d] = 1.0 / mult[d];
}

void VankaSmoother::apply(const SparseMatrix& L, Vector& x, const Vector& b, int sweeps) const {
    if (x.size() != L.rows() || b.size() != L.rows())
        throw DimensionError("VankaSmoother::apply: dimension mismatch");
    Vector r(L.rows());
    Vector local;
    for (int s = 0; s < sweeps; ++s) {
        for (int c = 0; c < n_colors_; ++c) {
            L.multiply(x, r);
            r = b - r;
            for (int k : by_color_[c]) {
                const auto& idx = patches_[k].dofs;
                local.resize(static_cast<Eigen::Index>(idx.size()));
                for (std::size_t i = 0; i < idx.size(); ++i) local[i] = r[idx[i]];
                lus_[k].solve_in_place(local);
                for (std::size_t i = 0; i < idx.size(); ++i)
                    x[idx[i]] += weights_[idx[i]] * local[i];
            }
        }
    }
}

void apply_pointwise(SmootherType type, const SparseMatrix& L, Vector& x, const Vector& b,
                     int sweeps, double damping) {
    if (type == SmootherType::vanka)
        throw std::invalid_argument("apply_pointwise: Vanka is not a pointwise smoother");
    if (x.size() != L.rows() || b.size() != L.rows() || L.rows() != L.cols())
        throw DimensionError("apply_pointwise: dimension mismatch");
    const Vector diag = L.diagonal();
    for (int i = 0; i < diag.size(); ++i)
        if (diag[i] == 0.0) throw std::domain_error("apply_pointwise: zero diagonal entry");
    const auto o = L.row_offsets();
    const auto c = L.col_indices();
    const auto v = L.values();
    if (type == SmootherType::jacobi) {
        Vector r(L.rows());
        for (int s = 0; s < sweeps; ++s) {
            L.multiply(x, r);
            x.array() += damping * (b - r).array() / diag.array();
        }
        return;
    }
    for (int s = 0; s < sweeps; ++s) {
        for (int i = 0; i < L.rows(); ++i) {
            double sum = b[i];
            for (int k = o[i]; k < o[i + 1]; ++k)
                if (c[k] != i) sum -= v[k] * x[c[k]];
            x[i] = sum / diag[i];
        }
    }
}

}  // namespace unsatporo
