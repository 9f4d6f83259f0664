// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>

#include "rkrylov/operator.hpp"

namespace rkrylov {

/// Selected eigenpairs of a dense matrix, ordered by increasing |lambda|.
///
/// right(:, j) satisfies A x = lambda_j x and left(:, j) satisfies
/// A* y = conj(lambda_j) y. Both are normalized to unit 2-norm.
struct EigenPairs
{
  Eigen::VectorXcd values;
  Eigen::MatrixXcd right, left;
};

/// All eigenpairs via LAPACK ?geev, sorted by increasing magnitude.
template <Scalar S>
EigenPairs dense_eigenpairs(const DenseMatrix<S> &a);

/// The `count` eigenpairs of smallest magnitude. For real matrices the
/// selection is widened by one when it would split a complex-conjugate pair.
template <Scalar S>
EigenPairs smallest_eigenpairs(const DenseMatrix<S> &a, Index count);

/// Densifies an operator column by column (n applications) and calls smallest_eigenpairs.
template <Scalar S>
EigenPairs smallest_eigenpairs(const LinearOperator<S> &op, Index count);

/// Basis of span{v_j, conj(v_j)} in the scalar type S. For real S, conjugate
/// pairs become their real and imaginary parts; a real eigenvector keeps its real part.
template <Scalar S>
DenseMatrix<S> eigenbasis(const Eigen::MatrixXcd &vectors, const Eigen::VectorXcd &values);

} // namespace rkrylov
