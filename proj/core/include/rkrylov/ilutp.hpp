// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rkrylov/operator.hpp"

namespace rkrylov {

struct IlutpOptions
{
  /// Entries below drop_tol times the 2-norm of the current row of A are discarded.
  double drop_tol = 1e-4;
  /// Columns are swapped when |candidate| * pivot_tol > |diagonal|. Zero disables pivoting.
  double pivot_tol = 0.1;
  /// Largest number of off-diagonal entries kept per row in each of L and U; negative means unlimited.
  Index max_fill = -1;
};

class FactorizationError : public std::runtime_error
{
public:
  FactorizationError(Index row, const std::string &what) : std::runtime_error(what), row_(row) {}
  Index row() const { return row_; }

private:
  Index row_;
};

/// Incomplete factorization A P ~ L U with column permutation P.
///
/// L is unit lower triangular (diagonal stored), U is upper triangular in
/// permuted column order. permutation()[j] is the column of A that ended up
/// in position j.
template <Scalar S>
class IlutpFactors
{
public:
  IlutpFactors(SparseMatrix<S> lower, SparseMatrix<S> upper, std::vector<Index> perm, IlutpOptions options);

  const SparseMatrix<S> &lower() const { return lower_; }
  const SparseMatrix<S> &upper() const { return upper_; }
  const std::vector<Index> &permutation() const { return perm_; }
  const IlutpOptions &options() const { return options_; }
  Index size() const { return lower_.rows(); }

  /// L^{-1} x
  Vector<S> apply_left(const Vector<S> &x) const;
  /// P U^{-1} x
  Vector<S> apply_right(const Vector<S> &x) const;
  /// L^{-*} x
  Vector<S> apply_left_adjoint(const Vector<S> &x) const;
  /// U^{-*} P^T x
  Vector<S> apply_right_adjoint(const Vector<S> &x) const;

  /// L x, the inverse of apply_left.
  Vector<S> multiply_left(const Vector<S> &x) const;
  /// U P^T x, the inverse of apply_right.
  Vector<S> multiply_right(const Vector<S> &x) const;
  /// L* x, the inverse of apply_left_adjoint.
  Vector<S> multiply_left_adjoint(const Vector<S> &x) const;

  void apply_left(const Vector<S> &x, Vector<S> &y) const;
  void apply_right(const Vector<S> &x, Vector<S> &y) const;
  void apply_left_adjoint(const Vector<S> &x, Vector<S> &y) const;
  void apply_right_adjoint(const Vector<S> &x, Vector<S> &y) const;

private:
  void check(const Vector<S> &x) const;

  SparseMatrix<S> lower_;
  SparseMatrix<S> upper_;
  std::vector<Index> perm_;
  IlutpOptions options_;
};

/// Row-wise (IKJ) threshold ILU with column pivoting.
/// Throws FactorizationError when a row has no usable pivot.
template <Scalar S>
IlutpFactors<S> ilutp_factor(const SparseMatrix<S> &a, const IlutpOptions &options = {});

/// L^{-1} A P U^{-1}: the operator a split-preconditioned solver iterates on.
template <Scalar S>
class SplitPreconditionedOperator final : public LinearOperator<S>
{
public:
  SplitPreconditionedOperator(const SparseMatrix<S> &a, const IlutpFactors<S> &factors);

  Index size() const override { return a_->rows(); }
  void apply(const Vector<S> &x, Vector<S> &y) const override;
  void apply_adjoint(const Vector<S> &x, Vector<S> &y) const override;

  const SparseMatrix<S> &matrix() const { return *a_; }
  const IlutpFactors<S> &factors() const { return *factors_; }

private:
  const SparseMatrix<S> *a_;
  const IlutpFactors<S> *factors_;
};

extern template class IlutpFactors<double>;
extern template class IlutpFactors<std::complex<double>>;

} // namespace rkrylov
