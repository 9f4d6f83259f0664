// SPDX-License-Identifier: Apache-2.0

#include "rkrylov/operator.hpp"

#include <stdexcept>

namespace rkrylov {

template <Scalar S>
DenseMatrix<S> LinearOperator<S>::apply_block(const DenseMatrix<S> &x) const
{
  DenseMatrix<S> out(size(), x.cols());
  Vector<S> in, y;
  for (Index j = 0; j < x.cols(); ++j) {
    in = x.col(j);
    apply(in, y);
    out.col(j) = y;
  }
  return out;
}

template <Scalar S>
DenseMatrix<S> LinearOperator<S>::apply_adjoint_block(const DenseMatrix<S> &x) const
{
  DenseMatrix<S> out(size(), x.cols());
  Vector<S> in, y;
  for (Index j = 0; j < x.cols(); ++j) {
    in = x.col(j);
    apply_adjoint(in, y);
    out.col(j) = y;
  }
  return out;
}

template <Scalar S>
MatrixOperator<S>::MatrixOperator(const SparseMatrix<S> &a) : a_(&a)
{
  if (a.rows() != a.cols())
    throw std::invalid_argument("MatrixOperator: matrix must be square");
}

template class LinearOperator<double>;
template class LinearOperator<std::complex<double>>;
template class MatrixOperator<double>;
template class MatrixOperator<std::complex<double>>;

} // namespace rkrylov
