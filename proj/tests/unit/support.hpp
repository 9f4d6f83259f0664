// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <random>
#include <vector>

#include "rkrylov/sparse.hpp"

namespace testing {

using rkrylov::DenseMatrix;
using rkrylov::Index;
using rkrylov::SparseMatrix;
using rkrylov::Triplet;
using rkrylov::Vector;
using cplx = std::complex<double>;

template <class S>
S draw(std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  if constexpr (std::is_same_v<S, cplx>) {
    const double re = u(rng);
    return {re, u(rng)};
  } else {
    return u(rng);
  }
}

template <class S>
DenseMatrix<S> dense_random(Index rows, Index cols, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  DenseMatrix<S> a(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      a(i, j) = draw<S>(rng);
  return a;
}

template <class S>
Vector<S> vector_random(Index n, std::uint64_t seed)
{
  return dense_random<S>(n, 1, seed).col(0);
}

/// Random sparse matrix with about `per_row` off-diagonal entries per row and
/// the diagonal shifted by `shift` (diagonal dominance when shift > per_row).
template <class S>
SparseMatrix<S> sparse_random(Index n, int per_row, double shift, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> col(0, n - 1);
  std::vector<Triplet<S>> t;
  for (Index i = 0; i < n; ++i) {
    t.push_back({i, i, draw<S>(rng) + S(shift)});
    for (int e = 0; e < per_row; ++e)
      t.push_back({i, col(rng), draw<S>(rng)});
  }
  return SparseMatrix<S>::from_triplets(n, n, t);
}

template <class A, class B>
double rel_diff(const A &x, const B &y)
{
  const double scale = std::max(y.norm(), 1e-300);
  return (x - y).norm() / scale;
}

} // namespace testing
