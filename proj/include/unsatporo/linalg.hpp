/// @file linalg.hpp
/// @brief Compressed-row sparse matrices, dense LU and the dense symmetric
/// generalized eigensolver used for patch-local spectral problems.

#ifndef UNSATPORO_LINALG_HPP
#define UNSATPORO_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace unsatporo {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using EigenCsr = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// Raised for dimension mismatches and invalid index sets.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a factorization meets a pivot that is zero to working precision.
class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Compressed-row sparse matrix.
///
/// Column indices are strictly increasing inside every row. Explicit zeros
/// produced by assembly are kept so the sparsity pattern stays structural.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(int n_rows, int n_cols, std::vector<int> row_offsets,
                 std::vector<int> col_indices, std::vector<double> values);

    static SparseMatrix identity(int n);
    static SparseMatrix zero(int n_rows, int n_cols);
    static SparseMatrix from_eigen(const EigenCsr& m);

    int rows() const { return n_rows_; }
    int cols() const { return n_cols_; }
    int nnz() const { return static_cast<int>(values_.size()); }

    std::span<const int> row_offsets() const { return row_offsets_; }
    std::span<const int> col_indices() const { return col_indices_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    /// Entry (r, c), zero when not stored.
    double coeff(int r, int c) const;
    /// Position of (r, c) in values(), or -1.
    int find(int r, int c) const;

    /// y = A x
    void multiply(const Vector& x, Vector& y) const;
    /// y += alpha A x
    void multiply_add(const Vector& x, Vector& y, double alpha = 1.0) const;

    Vector diagonal() const;
    SparseMatrix transpose() const;
    EigenCsr to_eigen() const;
    DenseMatrix to_dense() const;

    /// Largest absolute stored value.
    double max_abs() const;

    bool same_pattern(const SparseMatrix& other) const;

private:
    int n_rows_ = 0;
    int n_cols_ = 0;
    std::vector<int> row_offsets_{0};
    std::vector<int> col_indices_;
    std::vector<double> values_;
};

/// Coordinate accumulator finalized into compressed-row storage.
///
/// Duplicates are summed in (row, col, value) order, so the finalized matrix is
/// bit-identical for any insertion order of the same contributions.
class TripletAccumulator {
public:
    TripletAccumulator(int n_rows, int n_cols);

    void reserve(std::size_t n) { entries_.reserve(n); }
    void add(int r, int c, double v);
    SparseMatrix finalize() const;

private:
    struct Entry {
        int r;
        int c;
        double v;
    };
    int n_rows_;
    int n_cols_;
    std::vector<Entry> entries_;
};

/// y = m x
Vector spmv(const SparseMatrix& m, const Vector& x);

/// alpha a + beta b on the union of both patterns.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0,
                 double beta = 1.0);
SparseMatrix scaled(const SparseMatrix& a, double alpha);
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// Stacks a 2x2 block layout. Empty optionals are zero blocks; the row count of
/// each block row and the column count of each block column must agree.
SparseMatrix block_2x2(const SparseMatrix& a00, const std::optional<SparseMatrix>& a01,
                       const std::optional<SparseMatrix>& a10, const SparseMatrix& a11);

/// Dense extraction of m(rows, cols) preserving index order.
DenseMatrix submatrix(const SparseMatrix& m, std::span<const int> rows,
                      std::span<const int> cols);

/// Writes "%%MatrixMarket matrix coordinate real general" with 1-based indices.
void write_matrix_market(const SparseMatrix& m, std::ostream& os);
void write_matrix_market(const SparseMatrix& m, const std::string& path);

/// LU with partial pivoting, created once and reused for many right-hand sides.
class DenseLU {
public:
    DenseLU() = default;
    explicit DenseLU(const DenseMatrix& a);

    int size() const { return static_cast<int>(lu_.rows()); }
    Vector solve(const Vector& b) const;
    void solve_in_place(Vector& b) const;

private:
    Eigen::PartialPivLU<DenseMatrix> lu_;
};

inline Vector dense_factor_solve(const DenseMatrix& a, const Vector& b) {
    return DenseLU(a).solve(b);
}

/// Sparse direct factorization for desk-scale fine systems.
class SparseLU {
public:
    explicit SparseLU(const SparseMatrix& a);
    Vector solve(const Vector& b) const;
    int size() const { return n_; }

private:
    int n_ = 0;
    Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>> lu_;
};

/// Smallest eigenpairs of a v = lambda s v.
///
/// Eigenvalues ascend, vectors are s-orthonormal, and every vector is signed so
/// that its first entry of largest magnitude is positive.
struct EigenPairs {
    Vector eigenvalues;
    DenseMatrix eigenvectors;

    int count() const { return static_cast<int>(eigenvalues.size()); }
};

EigenPairs generalized_sym_eig(const DenseMatrix& a, const DenseMatrix& s, int count);

/// Smallest eigenvalue of the symmetric part of a (dense).
double smallest_symmetric_eigenvalue(const DenseMatrix& a);

}  // namespace unsatporo

#endif  // UNSATPORO_LINALG_HPP
