// SPDX-License-Identifier: Apache-2.0

#include "rkrylov/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rkrylov {

namespace {

void require(bool ok, const std::string &msg)
{
  if (!ok)
    throw std::invalid_argument(msg);
}

} // namespace

template <Scalar S>
SparseMatrix<S>::SparseMatrix(Index nrows, Index ncols, std::vector<Index> row_ptr,
                              std::vector<Index> col_idx, std::vector<S> values)
    : nrows_(nrows), ncols_(ncols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values))
{
  require(nrows >= 0 && ncols >= 0, "SparseMatrix: negative dimension");
  require(static_cast<Index>(row_ptr_.size()) == nrows + 1, "SparseMatrix: row_ptr length must be nrows+1");
  require(row_ptr_.front() == 0, "SparseMatrix: row_ptr[0] must be 0");
  require(col_idx_.size() == values_.size(), "SparseMatrix: col_idx/values length mismatch");
  require(row_ptr_.back() == static_cast<Index>(values_.size()), "SparseMatrix: row_ptr[nrows] must equal nnz");
  for (Index i = 0; i < nrows_; ++i) {
    require(row_ptr_[i] <= row_ptr_[i + 1], "SparseMatrix: row_ptr must be nondecreasing");
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      require(col_idx_[p] >= 0 && col_idx_[p] < ncols_,
              "SparseMatrix: column index out of range in row " + std::to_string(i));
      require(p == row_ptr_[i] || col_idx_[p - 1] < col_idx_[p],
              "SparseMatrix: column indices must be strictly increasing in row " + std::to_string(i));
    }
  }
}

template <Scalar S>
SparseMatrix<S> SparseMatrix<S>::from_triplets(Index nrows, Index ncols, std::span<const Triplet<S>> entries)
{
  require(nrows >= 0 && ncols >= 0, "from_triplets: negative dimension");
  std::vector<Index> counts(nrows + 1, 0);
  for (const auto &t : entries) {
    if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
      throw std::out_of_range("from_triplets: entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                              ") outside " + std::to_string(nrows) + "x" + std::to_string(ncols));
    ++counts[t.row + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());

  // bucket by row, then sort and merge each row
  std::vector<Index> cols(entries.size());
  std::vector<S> vals(entries.size());
  std::vector<Index> next(counts.begin(), counts.end() - 1);
  for (const auto &t : entries) {
    const Index p = next[t.row]++;
    cols[p] = t.col;
    vals[p] = t.value;
  }

  std::vector<Index> row_ptr(nrows + 1, 0);
  std::vector<Index> col_idx;
  std::vector<S> values;
  col_idx.reserve(entries.size());
  values.reserve(entries.size());
  std::vector<Index> order;
  for (Index i = 0; i < nrows; ++i) {
    const Index begin = counts[i], end = counts[i + 1];
    order.resize(end - begin);
    std::iota(order.begin(), order.end(), begin);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return cols[a] < cols[b]; });
    for (Index p : order) {
      if (!col_idx.empty() && static_cast<Index>(col_idx.size()) > row_ptr[i] && col_idx.back() == cols[p])
        values.back() += vals[p];
      else {
        col_idx.push_back(cols[p]);
        values.push_back(vals[p]);
      }
    }
    row_ptr[i + 1] = static_cast<Index>(col_idx.size());
  }
  return SparseMatrix(nrows, ncols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

template <Scalar S>
SparseMatrix<S> SparseMatrix<S>::identity(Index n)
{
  std::vector<Index> row_ptr(n + 1), col_idx(n);
  std::iota(row_ptr.begin(), row_ptr.end(), Index{0});
  std::iota(col_idx.begin(), col_idx.end(), Index{0});
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), std::vector<S>(n, S(1)));
}

template <Scalar S>
SparseMatrix<S> SparseMatrix<S>::from_dense(const DenseMatrix<S> &dense, Real<S> drop)
{
  std::vector<Triplet<S>> entries;
  for (Index i = 0; i < dense.rows(); ++i)
    for (Index j = 0; j < dense.cols(); ++j)
      if (std::abs(dense(i, j)) > drop)
        entries.push_back({i, j, dense(i, j)});
  return from_triplets(dense.rows(), dense.cols(), entries);
}

template <Scalar S>
std::vector<Triplet<S>> SparseMatrix<S>::to_triplets() const
{
  std::vector<Triplet<S>> out;
  out.reserve(values_.size());
  for (Index i = 0; i < nrows_; ++i)
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      out.push_back({i, col_idx_[p], values_[p]});
  return out;
}

template <Scalar S>
DenseMatrix<S> SparseMatrix<S>::to_dense() const
{
  DenseMatrix<S> out = DenseMatrix<S>::Zero(nrows_, ncols_);
  for (Index i = 0; i < nrows_; ++i)
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      out(i, col_idx_[p]) = values_[p];
  return out;
}

template <Scalar S>
S SparseMatrix<S>::coeff(Index i, Index j) const
{
  const auto begin = col_idx_.begin() + row_ptr_[i];
  const auto end = col_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  return (it != end && *it == j) ? values_[it - col_idx_.begin()] : S(0);
}

template <Scalar S>
Real<S> SparseMatrix<S>::frobenius_norm() const
{
  Real<S> sum = 0;
  for (const S &v : values_)
    sum += std::norm(v);
  return std::sqrt(sum);
}

template <Scalar S>
SparseMatrix<S> SparseMatrix<S>::build_conj_transpose() const
{
  std::vector<Index> row_ptr(ncols_ + 1, 0);
  for (Index c : col_idx_)
    ++row_ptr[c + 1];
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::vector<Index> next(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<Index> col_idx(values_.size());
  std::vector<S> values(values_.size());
  // rows visited in order, so each transposed row comes out sorted
  for (Index i = 0; i < nrows_; ++i)
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const Index q = next[col_idx_[p]]++;
      col_idx[q] = i;
      values[q] = conj(values_[p]);
    }
  return SparseMatrix(ncols_, nrows_, std::move(row_ptr), std::move(col_idx), std::move(values));
}

template <Scalar S>
const SparseMatrix<S> &SparseMatrix<S>::conj_transpose() const
{
  std::call_once(transpose_->once,
                 [this] { transpose_->matrix = std::make_unique<const SparseMatrix>(build_conj_transpose()); });
  return *transpose_->matrix;
}

template <Scalar S>
void multiply(const SparseMatrix<S> &a, const Vector<S> &x, Vector<S> &y)
{
  if (a.cols() != x.size())
    throw std::invalid_argument("matvec: matrix has " + std::to_string(a.cols()) + " columns, vector has " +
                                std::to_string(x.size()) + " entries");
  y.resize(a.rows());
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (Index i = 0; i < a.rows(); ++i) {
    S sum(0);
    for (Index p = rp[i]; p < rp[i + 1]; ++p)
      sum += v[p] * x[ci[p]];
    y[i] = sum;
  }
}

template <Scalar S>
Vector<S> matvec(const SparseMatrix<S> &a, const Vector<S> &x)
{
  Vector<S> y;
  multiply(a, x, y);
  return y;
}

template <Scalar S>
Vector<S> matvec_conj_transpose(const SparseMatrix<S> &a, const Vector<S> &x)
{
  if (a.rows() != x.size())
    throw std::invalid_argument("matvec_conj_transpose: matrix has " + std::to_string(a.rows()) +
                                " rows, vector has " + std::to_string(x.size()) + " entries");
  return matvec(a.conj_transpose(), x);
}

template <Scalar S>
S dot(const Vector<S> &x, const Vector<S> &y)
{
  if (x.size() != y.size())
    throw std::invalid_argument("dot: length mismatch");
  return x.dot(y);
}

template <Scalar S>
Vector<S> axpy(S alpha, const Vector<S> &x, const Vector<S> &y)
{
  if (x.size() != y.size())
    throw std::invalid_argument("axpy: length mismatch");
  return alpha * x + y;
}

template <Scalar S>
SparseMatrix<S> linear_combination(S alpha, const SparseMatrix<S> &a, S beta, const SparseMatrix<S> &b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("linear_combination: shape mismatch");
  std::vector<Triplet<S>> entries;
  entries.reserve(a.nnz() + b.nnz());
  for (auto t : a.to_triplets()) {
    t.value *= alpha;
    entries.push_back(t);
  }
  for (auto t : b.to_triplets()) {
    t.value *= beta;
    entries.push_back(t);
  }
  return SparseMatrix<S>::from_triplets(a.rows(), a.cols(), entries);
}

template <Scalar S>
SparseMatrix<S> scaled(const SparseMatrix<S> &a, S alpha)
{
  const auto v = a.values();
  std::vector<S> values(v.begin(), v.end());
  for (S &x : values)
    x *= alpha;
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  return SparseMatrix<S>(a.rows(), a.cols(), {rp.begin(), rp.end()}, {ci.begin(), ci.end()}, std::move(values));
}

#define RKRYLOV_INSTANTIATE(S)                                                                            \
  template class SparseMatrix<S>;                                                                          \
  template Vector<S> matvec(const SparseMatrix<S> &, const Vector<S> &);                                  \
  template Vector<S> matvec_conj_transpose(const SparseMatrix<S> &, const Vector<S> &);                   \
  template void multiply(const SparseMatrix<S> &, const Vector<S> &, Vector<S> &);                        \
  template S dot(const Vector<S> &, const Vector<S> &);                                                   \
  template Vector<S> axpy(S, const Vector<S> &, const Vector<S> &);                                       \
  template SparseMatrix<S> linear_combination(S, const SparseMatrix<S> &, S, const SparseMatrix<S> &);    \
  template SparseMatrix<S> scaled(const SparseMatrix<S> &, S);

RKRYLOV_INSTANTIATE(double)
RKRYLOV_INSTANTIATE(std::complex<double>)

#undef RKRYLOV_INSTANTIATE

} // namespace rkrylov
