// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "support.hpp"

using namespace rkrylov;
using namespace testing;

namespace {

template <class S>
Vector<S> naive_matvec(const DenseMatrix<S> &a, const Vector<S> &x)
{
  Vector<S> y = Vector<S>::Zero(a.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      y[i] += a(i, j) * x[j];
  return y;
}

template <class S>
S naive_dot(const Vector<S> &x, const Vector<S> &y)
{
  S sum{};
  for (Index i = 0; i < x.size(); ++i)
    sum += rkrylov::conj(x[i]) * y[i];
  return sum;
}

} // namespace

TEST_CASE("matvec: identity and diagonal")
{
  const Vector<double> x{{1.0, 2.0, 3.0}};
  CHECK(matvec(SparseMatrix<double>::identity(3), x) == x);

  const std::vector<Triplet<double>> t{{0, 0, 2.0}, {1, 1, 3.0}};
  const auto d = SparseMatrix<double>::from_triplets(2, 2, t);
  CHECK(matvec(d, Vector<double>(Vector<double>::Ones(2))) == Vector<double>{{2.0, 3.0}});
}

TEST_CASE("matvec: random 8x8 against dense product")
{
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = sparse_random<double>(8, 3, 0.0, seed);
    const auto x = vector_random<double>(8, seed + 100);
    CHECK(rel_diff(matvec(a, x), naive_matvec(a.to_dense(), x)) <= 1e-14);
  }
}

TEST_CASE("matvec: dimension mismatch throws")
{
  const auto a = sparse_random<double>(4, 2, 0.0, 1);
  CHECK_THROWS_AS(matvec(a, Vector<double>(Vector<double>::Ones(5))), std::invalid_argument);
  CHECK_THROWS_AS(matvec_conj_transpose(a, Vector<double>(Vector<double>::Ones(3))), std::invalid_argument);
}

TEST_CASE("matvec_conj_transpose: identity, nilpotent and complex oracle")
{
  const Vector<double> x{{1.0, 2.0, 3.0}};
  CHECK(matvec_conj_transpose(SparseMatrix<double>::identity(3), x) == x);

  const std::vector<Triplet<double>> t{{0, 1, 1.0}};
  const auto n = SparseMatrix<double>::from_triplets(2, 2, t);
  CHECK(matvec_conj_transpose(n, Vector<double>{{1.0, 0.0}}) == Vector<double>{{0.0, 1.0}});

  const auto a = sparse_random<cplx>(6, 3, 0.0, 7);
  const auto y = vector_random<cplx>(6, 8);
  const DenseMatrix<cplx> dense_adjoint = a.to_dense().adjoint();
  CHECK(rel_diff(matvec_conj_transpose(a, y), naive_matvec(dense_adjoint, y)) <= 1e-14);
}

TEST_CASE("dot conjugates its first argument")
{
  CHECK(dot(Vector<double>{{1.0, 0.0}}, Vector<double>{{0.0, 1.0}}) == 0.0);
  const Vector<cplx> i{{cplx(0, 1), cplx(0, 0)}};
  CHECK(dot(i, i) == cplx(1.0, 0.0));
  const auto x = vector_random<cplx>(30, 1), y = vector_random<cplx>(30, 2);
  CHECK(std::abs(dot(x, y) - naive_dot(x, y)) <= 1e-14 * x.norm() * y.norm());
  CHECK_THROWS_AS(dot(x, Vector<cplx>(Vector<cplx>::Ones(3))), std::invalid_argument);
}

TEST_CASE("axpy")
{
  const auto x = vector_random<double>(10, 1), y = vector_random<double>(10, 2);
  CHECK(axpy(0.0, x, y) == y);
  CHECK(axpy(1.0, x, Vector<double>(Vector<double>::Zero(10))) == x);
  Vector<double> naive(10);
  for (Index i = 0; i < 10; ++i)
    naive[i] = -2.5 * x[i] + y[i];
  CHECK(rel_diff(axpy(-2.5, x, y), naive) <= 1e-15);
  CHECK_THROWS_AS(axpy(1.0, x, Vector<double>(Vector<double>::Ones(3))), std::invalid_argument);
}

TEST_CASE("from_triplets: empty, duplicates, random against dense accumulation")
{
  const auto z = SparseMatrix<double>::from_triplets(3, 4, {});
  CHECK(z.nnz() == 0);
  CHECK(z.to_dense().isZero());

  const std::vector<Triplet<double>> dup{{0, 0, 1.0}, {0, 0, 2.0}};
  const auto d = SparseMatrix<double>::from_triplets(1, 1, dup);
  CHECK(d.nnz() == 1);
  CHECK(d.coeff(0, 0) == 3.0);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Index> idx(0, 9);
  std::vector<Triplet<cplx>> t;
  DenseMatrix<cplx> oracle = DenseMatrix<cplx>::Zero(10, 10);
  for (int e = 0; e < 60; ++e) {
    const Index i = idx(rng), j = idx(rng);
    const cplx v = draw<cplx>(rng);
    t.push_back({i, j, v});
    oracle(i, j) += v;
  }
  const auto a = SparseMatrix<cplx>::from_triplets(10, 10, t);
  CHECK((a.to_dense() - oracle).norm() <= 1e-14 * oracle.norm());

  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  CHECK(rp.front() == 0);
  CHECK(rp.back() == a.nnz());
  for (Index i = 0; i < 10; ++i) {
    CHECK(rp[i] <= rp[i + 1]);
    for (Index p = rp[i] + 1; p < rp[i + 1]; ++p)
      CHECK(ci[p - 1] < ci[p]);
  }

  const std::vector<Triplet<double>> bad{{0, 5, 1.0}};
  CHECK_THROWS_AS(SparseMatrix<double>::from_triplets(2, 2, bad), std::out_of_range);
}

TEST_CASE("CSR constructor rejects broken invariants")
{
  CHECK_THROWS_AS(SparseMatrix<double>(2, 2, {0, 2, 1}, {0, 1}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SparseMatrix<double>(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SparseMatrix<double>(1, 2, {0, 2}, {1, 1}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SparseMatrix<double>(1, 2, {0, 1}, {2}, {1.0}), std::invalid_argument);
}

TEST_CASE_TEMPLATE("linearity and the adjoint identity", S, double, cplx)
{
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 5 + static_cast<Index>(seed) * 4;
    const auto a = sparse_random<S>(n, 4, 0.0, seed);
    const auto x = vector_random<S>(n, seed + 50), y = vector_random<S>(n, seed + 60);
    const S alpha = draw<S>(rng);
    const Vector<S> lhs = matvec(a, Vector<S>(alpha * x + y));
    const Vector<S> rhs = alpha * matvec(a, x) + matvec(a, y);
    CHECK(rel_diff(lhs, rhs) <= 1e-13);

    const S left = dot(matvec_conj_transpose(a, x), y);
    const S right = dot(x, matvec(a, y));
    CHECK(std::abs(left - right) <= 1e-13 * std::max(std::abs(right), 1.0));
  }
}

TEST_CASE_TEMPLATE("to_triplets then from_triplets is the identity", S, double, cplx)
{
  const auto a = sparse_random<S>(25, 4, 1.0, 9);
  const auto t = a.to_triplets();
  const auto b = SparseMatrix<S>::from_triplets(a.rows(), a.cols(), t);
  CHECK(std::ranges::equal(a.row_ptr(), b.row_ptr()));
  CHECK(std::ranges::equal(a.col_idx(), b.col_idx()));
  CHECK(std::ranges::equal(a.values(), b.values()));
}

TEST_CASE("conjugation is an involution")
{
  const auto a = sparse_random<cplx>(12, 3, 0.0, 4);
  const auto &tt = a.conj_transpose().conj_transpose();
  CHECK((tt.to_dense() - a.to_dense()).norm() == 0.0);
  CHECK(rkrylov::conj(rkrylov::conj(cplx(1, 2))) == cplx(1, 2));
  CHECK(rkrylov::conj(3.0) == 3.0);
}

TEST_CASE("linear_combination and scaled")
{
  const auto a = sparse_random<double>(15, 3, 0.0, 1), b = sparse_random<double>(15, 3, 0.0, 2);
  const DenseMatrix<double> oracle = 2.0 * a.to_dense() - 0.5 * b.to_dense();
  CHECK((linear_combination(2.0, a, -0.5, b).to_dense() - oracle).norm() <= 1e-14 * oracle.norm());
  CHECK((scaled(a, 3.0).to_dense() - 3.0 * a.to_dense()).norm() <= 1e-14 * a.frobenius_norm());
  CHECK(std::abs(a.frobenius_norm() - a.to_dense().norm()) <= 1e-14 * a.frobenius_norm());
}
