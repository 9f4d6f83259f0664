// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>

#include "rkrylov/sparse.hpp"

namespace rkrylov {

/// Square operator with forward and adjoint action. Solvers only see this.
template <Scalar S>
class LinearOperator
{
public:
  virtual ~LinearOperator() = default;

  virtual Index size() const = 0;
  virtual void apply(const Vector<S> &x, Vector<S> &y) const = 0;
  virtual void apply_adjoint(const Vector<S> &x, Vector<S> &y) const = 0;

  Vector<S> operator()(const Vector<S> &x) const
  {
    Vector<S> y;
    apply(x, y);
    return y;
  }
  Vector<S> adjoint(const Vector<S> &x) const
  {
    Vector<S> y;
    apply_adjoint(x, y);
    return y;
  }

  /// Applies the operator column by column.
  DenseMatrix<S> apply_block(const DenseMatrix<S> &x) const;
  DenseMatrix<S> apply_adjoint_block(const DenseMatrix<S> &x) const;
};

/// Non-owning view of a square sparse matrix.
template <Scalar S>
class MatrixOperator final : public LinearOperator<S>
{
public:
  explicit MatrixOperator(const SparseMatrix<S> &a);

  Index size() const override { return a_->rows(); }
  void apply(const Vector<S> &x, Vector<S> &y) const override { multiply(*a_, x, y); }
  void apply_adjoint(const Vector<S> &x, Vector<S> &y) const override { multiply(a_->conj_transpose(), x, y); }

  const SparseMatrix<S> &matrix() const { return *a_; }

private:
  const SparseMatrix<S> *a_;
};

/// Dense operator, used by small harnesses and oracles.
template <Scalar S>
class DenseOperator final : public LinearOperator<S>
{
public:
  explicit DenseOperator(DenseMatrix<S> a) : a_(std::move(a)) {}

  Index size() const override { return a_.rows(); }
  void apply(const Vector<S> &x, Vector<S> &y) const override { y = a_ * x; }
  void apply_adjoint(const Vector<S> &x, Vector<S> &y) const override { y = a_.adjoint() * x; }

  const DenseMatrix<S> &matrix() const { return a_; }

private:
  DenseMatrix<S> a_;
};

/// Forwards to another operator and counts applications.
template <Scalar S>
class CountingOperator final : public LinearOperator<S>
{
public:
  explicit CountingOperator(const LinearOperator<S> &inner) : inner_(&inner) {}

  Index size() const override { return inner_->size(); }
  void apply(const Vector<S> &x, Vector<S> &y) const override
  {
    ++forward_;
    inner_->apply(x, y);
  }
  void apply_adjoint(const Vector<S> &x, Vector<S> &y) const override
  {
    ++adjoint_;
    inner_->apply_adjoint(x, y);
  }

  long forward_count() const { return forward_; }
  long adjoint_count() const { return adjoint_; }
  void reset()
  {
    forward_ = 0;
    adjoint_ = 0;
  }

private:
  const LinearOperator<S> *inner_;
  mutable std::atomic<long> forward_{0};
  mutable std::atomic<long> adjoint_{0};
};

extern template class LinearOperator<double>;
extern template class LinearOperator<std::complex<double>>;

} // namespace rkrylov
