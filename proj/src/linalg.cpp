#include "unsatporo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

namespace unsatporo {

SparseMatrix::SparseMatrix(int n_rows, int n_cols, std::vector<int> row_offsets,
                           std::vector<int> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (n_rows_ < 0 || n_cols_ < 0)
        throw DimensionError("SparseMatrix: negative dimension");
    if (static_cast<int>(row_offsets_.size()) != n_rows_ + 1 || row_offsets_.front() != 0)
        throw DimensionError("SparseMatrix: row offsets must have n_rows + 1 entries starting at 0");
    if (col_indices_.size() != values_.size() ||
        row_offsets_.back() != static_cast<int>(values_.size()))
        throw DimensionError("SparseMatrix: inconsistent storage lengths");
    for (int r = 0; r < n_rows_; ++r) {
        if (row_offsets_[r + 1] < row_offsets_[r])
            throw DimensionError("SparseMatrix: row offsets must be monotone");
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            if (col_indices_[k] < 0 || col_indices_[k] >= n_cols_)
                throw DimensionError("SparseMatrix: column index out of range");
            if (k > row_offsets_[r] && col_indices_[k] <= col_indices_[k - 1])
                throw DimensionError("SparseMatrix: column indices must increase within a row");
        }
    }
}

SparseMatrix SparseMatrix::identity(int n) {
    std::vector<int> offsets(n + 1);
    std::iota(offsets.begin(), offsets.end(), 0);
    std::vector<int> cols(n);
    std::iota(cols.begin(), cols.end(), 0);
    return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::zero(int n_rows, int n_cols) {
    return SparseMatrix(n_rows, n_cols, std::vector<int>(n_rows + 1, 0), {}, {});
}

SparseMatrix SparseMatrix::from_eigen(const EigenCsr& m_in) {
    EigenCsr m = m_in;
    m.makeCompressed();
    std::vector<int> offsets(m.rows() + 1, 0);
    std::vector<int> cols;
    std::vector<double> vals;
    cols.reserve(m.nonZeros());
    vals.reserve(m.nonZeros());
    std::vector<std::pair<int, double>> row;
    for (int r = 0; r < m.rows(); ++r) {
        row.clear();
        for (EigenCsr::InnerIterator it(m, r); it; ++it) row.emplace_back(it.col(), it.value());
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [c, v] : row) {
            if (!cols.empty() && static_cast<int>(cols.size()) > offsets[r] && cols.back() == c) {
                vals.back() += v;
            } else {
                cols.push_back(c);
                vals.push_back(v);
            }
        }
        offsets[r + 1] = static_cast<int>(cols.size());
    }
    return SparseMatrix(static_cast<int>(m.rows()), static_cast<int>(m.cols()),
                        std::move(offsets), std::move(cols), std::move(vals));
}

int SparseMatrix::find(int r, int c) const {
    if (r < 0 || r >= n_rows_) return -1;
    const auto begin = col_indices_.begin() + row_offsets_[r];
    const auto end = col_indices_.begin() + row_offsets_[r + 1];
    const auto it = std::lower_bound(begin, end, c);
    if (it == end || *it != c) return -1;
    return static_cast<int>(it - col_indices_.begin());
}

double SparseMatrix::coeff(int r, int c) const {
    const int k = find(r, c);
    return k < 0 ? 0.0 : values_[k];
}

void SparseMatrix::multiply(const Vector& x, Vector& y) const {
    if (x.size() != n_cols_) throw DimensionError("spmv: x length must equal n_cols");
    y.resize(n_rows_);
    for (int r = 0; r < n_rows_; ++r) {
        double sum = 0.0;
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            sum += values_[k] * x[col_indices_[k]];
        y[r] = sum;
    }
}

void SparseMatrix::multiply_add(const Vector& x, Vector& y, double alpha) const {
    if (x.size() != n_cols_ || y.size() != n_rows_)
        throw DimensionError("spmv: dimension mismatch");
    for (int r = 0; r < n_rows_; ++r) {
        double sum = 0.0;
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            sum += values_[k] * x[col_indices_[k]];
        y[r] += alpha * sum;
    }
}

Vector SparseMatrix::diagonal() const {
    Vector d = Vector::Zero(std::min(n_rows_, n_cols_));
    for (int r = 0; r < d.size(); ++r) d[r] = coeff(r, r);
    return d;
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<int> offsets(n_cols_ + 1, 0);
    for (int c : col_indices_) ++offsets[c + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<int> cols(values_.size());
    std::vector<double> vals(values_.size());
    std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
    for (int r = 0; r < n_rows_; ++r) {
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            const int dst = cursor[col_indices_[k]]++;
            cols[dst] = r;
            vals[dst] = values_[k];
        }
    }
    return SparseMatrix(n_cols_, n_rows_, std::move(offsets), std::move(cols), std::move(vals));
}

EigenCsr SparseMatrix::to_eigen() const {
    EigenCsr m(n_rows_, n_cols_);
    std::vector<Eigen::Triplet<double, int>> trips;
    trips.reserve(values_.size());
    for (int r = 0; r < n_rows_; ++r)
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            trips.emplace_back(r, col_indices_[k], values_[k]);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d = DenseMatrix::Zero(n_rows_, n_cols_);
    for (int r = 0; r < n_rows_; ++r)
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            d(r, col_indices_[k]) = values_[k];
    return d;
}

double SparseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const {
    return n_rows_ == other.n_rows_ && n_cols_ == other.n_cols_ &&
           row_offsets_ == other.row_offsets_ && col_indices_ == other.col_indices_;
}

TripletAccumulator::TripletAccumulator(int n_rows, int n_cols)
    : n_rows_(n_rows), n_cols_(n_cols) {}

void TripletAccumulator::add(int r, int c, double v) {
    if (r < 0 || r >= n_rows_ || c < 0 || c >= n_cols_)
        throw DimensionError("TripletAccumulator: index out of range");
    entries_.push_back({r, c, v});
}

SparseMatrix TripletAccumulator::finalize() const {
    std::vector<Entry> sorted = entries_;
    std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
        if (a.r != b.r) return a.r < b.r;
        if (a.c != b.c) return a.c < b.c;
        return a.v < b.v;
    });
    std::vector<int> offsets(n_rows_ + 1, 0);
    std::vector<int> cols;
    std::vector<double> vals;
    for (std::size_t k = 0; k < sorted.size();) {
        const int r = sorted[k].r;
        const int c = sorted[k].c;
        double sum = 0.0;
        for (; k < sorted.size() && sorted[k].r == r && sorted[k].c == c; ++k) sum += sorted[k].v;
        cols.push_back(c);
        vals.push_back(sum);
        ++offsets[r + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    return SparseMatrix(n_rows_, n_cols_, std::move(offsets), std::move(cols), std::move(vals));
}

Vector spmv(const SparseMatrix& m, const Vector& x) {
    Vector y;
    m.multiply(x, y);
    return y;
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("add: dimension mismatch");
    const auto ao = a.row_offsets();
    const auto ac = a.col_indices();
    const auto av = a.values();
    const auto bo = b.row_offsets();
    const auto bc = b.col_indices();
    const auto bv = b.values();
    std::vector<int> offsets(a.rows() + 1, 0);
    std::vector<int> cols;
    std::vector<double> vals;
    cols.reserve(a.nnz() + b.nnz());
    vals.reserve(a.nnz() + b.nnz());
    for (int r = 0; r < a.rows(); ++r) {
        int i = ao[r];
        int j = bo[r];
        while (i < ao[r + 1] || j < bo[r + 1]) {
            if (j >= bo[r + 1] || (i < ao[r + 1] && ac[i] < bc[j])) {
                cols.push_back(ac[i]);
                vals.push_back(alpha * av[i]);
                ++i;
            } else if (i >= ao[r + 1] || bc[j] < ac[i]) {
                cols.push_back(bc[j]);
                vals.push_back(beta * bv[j]);
                ++j;
            } else {
                cols.push_back(ac[i]);
                vals.push_back(alpha * av[i] + beta * bv[j]);
                ++i;
                ++j;
            }
        }
        offsets[r + 1] = static_cast<int>(cols.size());
    }
    return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix scaled(const SparseMatrix& a, double alpha) {
    SparseMatrix s = a;
    for (double& v : s.values()) v *= alpha;
    return s;
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimension mismatch");
    const EigenCsr prod = a.to_eigen() * b.to_eigen();
    return SparseMatrix::from_eigen(prod);
}

SparseMatrix block_2x2(const SparseMatrix& a00, const std::optional<SparseMatrix>& a01,
                       const std::optional<SparseMatrix>& a10, const SparseMatrix& a11) {
    const int r0 = a00.rows();
    const int r1 = a11.rows();
    const int c0 = a00.cols();
    const int c1 = a11.cols();
    if (a01 && (a01->rows() != r0 || a01->cols() != c1))
        throw DimensionError("block_2x2: upper-right block has wrong shape");
    if (a10 && (a10->rows() != r1 || a10->cols() != c0))
        throw DimensionError("block_2x2: lower-left block has wrong shape");

    std::vector<int> offsets(r0 + r1 + 1, 0);
    std::vector<int> cols;
    std::vector<double> vals;
    auto append_row = [&](const SparseMatrix& m, int r, int col_shift) {
        const auto o = m.row_offsets();
        const auto c = m.col_indices();
        const auto v = m.values();
        for (int k = o[r]; k < o[r + 1]; ++k) {
            cols.push_back(c[k] + col_shift);
            vals.push_back(v[k]);
        }
    };
    for (int r = 0; r < r0; ++r) {
        append_row(a00, r, 0);
        if (a01) append_row(*a01, r, c0);
        offsets[r + 1] = static_cast<int>(cols.size());
    }
    for (int r = 0; r < r1; ++r) {
        if (a10) append_row(*a10, r, 0);
        append_row(a11, r, c0);
        offsets[r0 + r + 1] = static_cast<int>(cols.size());
    }
    return SparseMatrix(r0 + r1, c0 + c1, std::move(offsets), std::move(cols), std::move(vals));
}

namespace {

void check_index_set(std::span<const int> idx, int bound, const char* what) {
    std::vector<int> sorted(idx.begin(), idx.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw DimensionError(std::string("submatrix: duplicate ") + what + " index");
    if (!sorted.empty() && (sorted.front() < 0 || sorted.back() >= bound))
        throw DimensionError(std::string("submatrix: ") + what + " index out of range");
}

}  // namespace

DenseMatrix submatrix(const SparseMatrix& m, std::span<const int> rows,
                      std::span<const int> cols) {
    check_index_set(rows, m.rows(), "row");
    check_index_set(cols, m.cols(), "column");
    std::vector<int> local_col(m.cols(), -1);
    for (std::size_t j = 0; j < cols.size(); ++j) local_col[cols[j]] = static_cast<int>(j);

    DenseMatrix d = DenseMatrix::Zero(static_cast<Eigen::Index>(rows.size()),
                                      static_cast<Eigen::Index>(cols.size()));
    const auto o = m.row_offsets();
    const auto c = m.col_indices();
    const auto v = m.values();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int r = rows[i];
        for (int k = o[r]; k < o[r + 1]; ++k) {
            const int j = local_col[c[k]];
            if (j >= 0) d(static_cast<Eigen::Index>(i), j) = v[k];
        }
    }
    return d;
}

void write_matrix_market(const SparseMatrix& m, std::ostream& os) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    os << std::setprecision(17);
    const auto o = m.row_offsets();
    const auto c = m.col_indices();
    const auto v = m.values();
    for (int r = 0; r < m.rows(); ++r)
        for (int k = o[r]; k < o[r + 1]; ++k) os << r + 1 << ' ' << c[k] + 1 << ' ' << v[k] << '\n';
}

void write_matrix_market(const SparseMatrix& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_matrix_market(m, os);
}

DenseLU::DenseLU(const DenseMatrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw DimensionError("DenseLU: matrix must be square and nonempty");
    lu_.compute(a);
    // Pivot test relative to the magnitude of the pivot row of P*A.
    const DenseMatrix pa = lu_.permutationP() * a;
    const auto& lu = lu_.matrixLU();
    const double eps = std::numeric_limits<double>::epsilon();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double row_scale = pa.row(i).cwiseAbs().maxCoeff();
        if (!(std::abs(lu(i, i)) > static_cast<double>(a.rows()) * eps * row_scale))
            throw SingularMatrixError("DenseLU: pivot " + std::to_string(i) +
                                      " is zero to working precision");
    }
}

Vector DenseLU::solve(const Vector& b) const {
    if (b.size() != lu_.rows()) throw DimensionError("DenseLU::solve: rhs length mismatch");
    return lu_.solve(b);
}

void DenseLU::solve_in_place(Vector& b) const {
    if (b.size() != lu_.rows()) throw DimensionError("DenseLU::solve: rhs length mismatch");
    b = lu_.solve(b);
}

SparseLU::SparseLU(const SparseMatrix& a) : n_(a.rows()) {
    if (a.rows() != a.cols()) throw DimensionError("SparseLU: matrix must be square");
    Eigen::SparseMatrix<double, Eigen::ColMajor, int> cm = a.to_eigen();
    cm.makeCompressed();
    lu_.analyzePattern(cm);
    lu_.factorize(cm);
    if (lu_.info() != Eigen::Success)
        throw SingularMatrixError("SparseLU: factorization failed: " + lu_.lastErrorMessage());
}

Vector SparseLU::solve(const Vector& b) const {
    if (b.size() != n_) throw DimensionError("SparseLU::solve: rhs length mismatch");
    // Eigen's solve is logically const but not declared so.
    auto& lu = const_cast<Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>>&>(lu_);
    Vector x = lu.solve(b);
    return x;
}

EigenPairs generalized_sym_eig(const DenseMatrix& a, const DenseMatrix& s, int count) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || s.rows() != n || s.cols() != n)
        throw DimensionError("generalized_sym_eig: matrices must be square and equally sized");
    if (count < 0 || count > n)
        throw DimensionError("generalized_sym_eig: count must lie in [0, dimension]");

    const DenseMatrix a_sym = 0.5 * (a + a.transpose());
    const DenseMatrix s_sym = 0.5 * (s + s.transpose());
    Eigen::LLT<DenseMatrix> llt(s_sym);
    if (llt.info() != Eigen::Success)
        throw SingularMatrixError("generalized_sym_eig: s is not positive definite");

    // Standard form: L^{-1} A L^{-T} y = lambda y, v = L^{-T} y.
    const auto l = llt.matrixL();
    DenseMatrix c = l.solve(a_sym);
    c = l.solve(c.transpose()).transpose();
    c = 0.5 * (c + c.transpose());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(c);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("generalized_sym_eig: eigensolver did not converge");

    EigenPairs out;
    out.eigenvalues = es.eigenvalues().head(count);
    out.eigenvectors = llt.matrixU().solve(es.eigenvectors().leftCols(count));
    for (int j = 0; j < count; ++j) {
        auto v = out.eigenvectors.col(j);
        const double snorm = std::sqrt(v.dot(s_sym * v));
        v /= snorm;
        Eigen::Index imax = 0;
        double vmax = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(v[i]) > vmax * (1.0 + 1e-12)) {
                vmax = std::abs(v[i]);
                imax = i;
            }
        }
        if (v[imax] < 0.0) v = -v;
    }
    return out;
}

double smallest_symmetric_eigenvalue(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("smallest_symmetric_eigenvalue: not square");
    const DenseMatrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace unsatporo
