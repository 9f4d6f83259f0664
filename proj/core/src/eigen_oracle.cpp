// SPDX-License-Identifier: Apache-2.0

#include "rkrylov/eigen_oracle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <lapacke.h>

namespace rkrylov {

namespace {

// Pair tolerance for recognizing conjugate eigenvalues from ?geev output.
bool conjugates(std::complex<double> a, std::complex<double> b)
{
  return std::abs(a - std::conj(b)) <= 1e-10 * std::max(std::abs(a), 1.0);
}

EigenPairs sorted(Eigen::VectorXcd values, Eigen::MatrixXcd right, Eigen::MatrixXcd left)
{
  const Index n = values.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  // ties by magnitude keep the ?geev order, which keeps conjugate pairs adjacent
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return std::abs(values[i]) < std::abs(values[j]); });
  EigenPairs out;
  out.values.resize(n);
  out.right.resize(right.rows(), n);
  out.left.resize(left.rows(), n);
  for (Index k = 0; k < n; ++k) {
    out.values[k] = values[order[k]];
    out.right.col(k) = right.col(order[k]).normalized();
    out.left.col(k) = left.col(order[k]).normalized();
  }
  return out;
}

} // namespace

template <Scalar S>
EigenPairs dense_eigenpairs(const DenseMatrix<S> &a)
{
  if (a.rows() != a.cols())
    throw std::invalid_argument("dense_eigenpairs: matrix is not square");
  const Index n = a.rows();
  const lapack_int ln = static_cast<lapack_int>(n);
  if (n == 0)
    return {};
  if constexpr (is_complex_v<S>) {
    Eigen::MatrixXcd work = a;
    Eigen::VectorXcd w(n);
    Eigen::MatrixXcd vl(n, n), vr(n, n);
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'V', 'V', ln, reinterpret_cast<lapack_complex_double *>(work.data()), ln,
                                          reinterpret_cast<lapack_complex_double *>(w.data()),
                                          reinterpret_cast<lapack_complex_double *>(vl.data()), ln,
                                          reinterpret_cast<lapack_complex_double *>(vr.data()), ln);
    if (info != 0)
      throw std::runtime_error("dense_eigenpairs: zgeev failed with info " + std::to_string(info));
    return sorted(std::move(w), std::move(vr), std::move(vl));
  } else {
    Eigen::MatrixXd work = a;
    Eigen::VectorXd wr(n), wi(n);
    Eigen::MatrixXd vl(n, n), vr(n, n);
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'V', 'V', ln, work.data(), ln, wr.data(), wi.data(),
                                          vl.data(), ln, vr.data(), ln);
    if (info != 0)
      throw std::runtime_error("dense_eigenpairs: dgeev failed with info " + std::to_string(info));
    Eigen::VectorXcd w(n);
    Eigen::MatrixXcd right(n, n), left(n, n);
    const std::complex<double> i1(0.0, 1.0);
    for (Index j = 0; j < n; ++j) {
      w[j] = {wr[j], wi[j]};
      if (wi[j] == 0.0) {
        right.col(j) = vr.col(j).cast<std::complex<double>>();
        left.col(j) = vl.col(j).cast<std::complex<double>>();
      } else if (wi[j] > 0.0 && j + 1 < n) {
        // columns j, j+1 hold the real and imaginary parts of the pair
        right.col(j) = vr.col(j).cast<std::complex<double>>() + i1 * vr.col(j + 1).cast<std::complex<double>>();
        right.col(j + 1) = right.col(j).conjugate();
        left.col(j) = vl.col(j).cast<std::complex<double>>() + i1 * vl.col(j + 1).cast<std::complex<double>>();
        left.col(j + 1) = left.col(j).conjugate();
        w[j + 1] = {wr[j + 1], wi[j + 1]};
        ++j;
      }
    }
    return sorted(std::move(w), std::move(right), std::move(left));
  }
}

template <Scalar S>
EigenPairs smallest_eigenpairs(const DenseMatrix<S> &a, Index count)
{
  if (count < 0 || count > a.rows())
    throw std::invalid_argument("smallest_eigenpairs: count out of range");
  EigenPairs all = dense_eigenpairs<S>(a);
  Index keep = count;
  if constexpr (!is_complex_v<S>) {
    if (keep > 0 && keep < all.values.size() && all.values[keep - 1].imag() != 0.0 &&
        conjugates(all.values[keep - 1], all.values[keep])) {
      // the partner follows unless it was already taken
      const bool partner_inside = keep >= 2 && conjugates(all.values[keep - 2], all.values[keep - 1]);
      if (!partner_inside)
        ++keep;
    }
  }
  EigenPairs out;
  out.values = all.values.head(keep);
  out.right = all.right.leftCols(keep);
  out.left = all.left.leftCols(keep);
  return out;
}

template <Scalar S>
EigenPairs smallest_eigenpairs(const LinearOperator<S> &op, Index count)
{
  const DenseMatrix<S> dense = op.apply_block(DenseMatrix<S>::Identity(op.size(), op.size()));
  return smallest_eigenpairs<S>(dense, count);
}

template <Scalar S>
DenseMatrix<S> eigenbasis(const Eigen::MatrixXcd &vectors, const Eigen::VectorXcd &values)
{
  if constexpr (is_complex_v<S>) {
    (void)values;
    return vectors;
  } else {
    const Index n = vectors.rows();
    DenseMatrix<S> out(n, vectors.cols());
    Index used = 0;
    for (Index j = 0; j < vectors.cols(); ++j) {
      if (values[j].imag() == 0.0) {
        out.col(used++) = vectors.col(j).real();
      } else if (j + 1 < vectors.cols() && conjugates(values[j], values[j + 1])) {
        out.col(used++) = vectors.col(j).real();
        out.col(used++) = vectors.col(j).imag();
        ++j;
      } else {
        // lone member of a pair: its real part alone does not span an invariant subspace
        out.col(used++) = vectors.col(j).real();
      }
    }
    return out.leftCols(used);
  }
}

#define RKRYLOV_INSTANTIATE(S)                                                                \
  template EigenPairs dense_eigenpairs<S>(const DenseMatrix<S> &);                            \
  template EigenPairs smallest_eigenpairs<S>(const DenseMatrix<S> &, Index);                  \
  template EigenPairs smallest_eigenpairs<S>(const LinearOperator<S> &, Index);               \
  template DenseMatrix<S> eigenbasis<S>(const Eigen::MatrixXcd &, const Eigen::VectorXcd &);

RKRYLOV_INSTANTIATE(double)
RKRYLOV_INSTANTIATE(std::complex<double>)

#undef RKRYLOV_INSTANTIATE

} // namespace rkrylov
