// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "rkrylov/scalar.hpp"

namespace rkrylov {

template <Scalar S>
struct Triplet
{
  Index row;
  Index col;
  S value;
};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row and there are no
/// structural duplicates. Instances are immutable; copies share the lazily
/// built conjugate transpose.
template <Scalar S>
class SparseMatrix
{
public:
  SparseMatrix() = default;

  /// Takes ownership of CSR arrays. Throws std::invalid_argument if they
  /// violate the CSR invariants.
  SparseMatrix(Index nrows, Index ncols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
               std::vector<S> values);

  /// Duplicates are summed. Explicit zeros are kept.
  static SparseMatrix from_triplets(Index nrows, Index ncols, std::span<const Triplet<S>> entries);
  static SparseMatrix identity(Index n);
  static SparseMatrix from_dense(const DenseMatrix<S> &dense, Real<S> drop = 0.0);

  std::vector<Triplet<S>> to_triplets() const;
  DenseMatrix<S> to_dense() const;

  Index rows() const { return nrows_; }
  Index cols() const { return ncols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_ptr() const { return row_ptr_; }
  std::span<const Index> col_idx() const { return col_idx_; }
  std::span<const S> values() const { return values_; }

  /// Stored value at (i, j), zero when not in the pattern.
  S coeff(Index i, Index j) const;

  Real<S> frobenius_norm() const;

  /// Explicit conjugate transpose, built once and cached.
  const SparseMatrix &conj_transpose() const;

private:
  struct TransposeCache
  {
    std::once_flag once;
    std::unique_ptr<const SparseMatrix> matrix;
  };

  SparseMatrix build_conj_transpose() const;

  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<S> values_;
  std::shared_ptr<TransposeCache> transpose_ = std::make_shared<TransposeCache>();
};

/// y = A x
template <Scalar S>
Vector<S> matvec(const SparseMatrix<S> &a, const Vector<S> &x);

/// y = A* x, through the cached transpose.
template <Scalar S>
Vector<S> matvec_conj_transpose(const SparseMatrix<S> &a, const Vector<S> &x);

/// Writes A x into y (resized as needed).
template <Scalar S>
void multiply(const SparseMatrix<S> &a, const Vector<S> &x, Vector<S> &y);

/// (x, y) = x* y, first argument conjugated.
template <Scalar S>
S dot(const Vector<S> &x, const Vector<S> &y);

/// alpha x + y
template <Scalar S>
Vector<S> axpy(S alpha, const Vector<S> &x, const Vector<S> &y);

/// alpha A + beta B on the union pattern.
template <Scalar S>
SparseMatrix<S> linear_combination(S alpha, const SparseMatrix<S> &a, S beta, const SparseMatrix<S> &b);

template <Scalar S>
SparseMatrix<S> scaled(const SparseMatrix<S> &a, S alpha);

extern template class SparseMatrix<double>;
extern template class SparseMatrix<std::complex<double>>;

} // namespace rkrylov
