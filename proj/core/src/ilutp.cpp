// SPDX-License-Identifier: Apache-2.0

#include "rkrylov/ilutp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <queue>

namespace rkrylov {

template <Scalar S>
IlutpFactors<S>::IlutpFactors(SparseMatrix<S> lower, SparseMatrix<S> upper, std::vector<Index> perm,
                              IlutpOptions options)
    : lower_(std::move(lower)), upper_(std::move(upper)), perm_(std::move(perm)), options_(options)
{
  const Index n = lower_.rows();
  if (lower_.cols() != n || upper_.rows() != n || upper_.cols() != n || static_cast<Index>(perm_.size()) != n)
    throw std::invalid_argument("IlutpFactors: inconsistent dimensions");
  std::vector<char> seen(n, 0);
  for (Index p : perm_) {
    if (p < 0 || p >= n || seen[p])
      throw std::invalid_argument("IlutpFactors: perm is not a permutation");
    seen[p] = 1;
  }
}

template <Scalar S>
void IlutpFactors<S>::check(const Vector<S> &x) const
{
  if (x.size() != size())
    throw std::invalid_argument("IlutpFactors: vector length " + std::to_string(x.size()) +
                                " does not match factor size " + std::to_string(size()));
}

template <Scalar S>
void IlutpFactors<S>::apply_left(const Vector<S> &x, Vector<S> &y) const
{
  check(x);
  y = x;
  const auto rp = lower_.row_ptr();
  const auto ci = lower_.col_idx();
  const auto v = lower_.values();
  for (Index i = 0; i < size(); ++i) {
    S sum = y[i];
    for (Index p = rp[i]; p < rp[i + 1] && ci[p] < i; ++p)
      sum -= v[p] * y[ci[p]];
    y[i] = sum;
  }
}

template <Scalar S>
void IlutpFactors<S>::apply_left_adjoint(const Vector<S> &x, Vector<S> &y) const
{
  check(x);
  y = x;
  const auto rp = lower_.row_ptr();
  const auto ci = lower_.col_idx();
  const auto v = lower_.values();
  for (Index i = size() - 1; i >= 0; --i) {
    const S yi = y[i];
    for (Index p = rp[i]; p < rp[i + 1] && ci[p] < i; ++p)
      y[ci[p]] -= conj(v[p]) * yi;
  }
}

template <Scalar S>
void IlutpFactors<S>::apply_right(const Vector<S> &x, Vector<S> &y) const
{
  check(x);
  const auto rp = upper_.row_ptr();
  const auto ci = upper_.col_idx();
  const auto v = upper_.values();
  Vector<S> z = x;
  for (Index i = size() - 1; i >= 0; --i) {
    // diagonal is the first stored entry of each row
    S sum = z[i];
    for (Index p = rp[i] + 1; p < rp[i + 1]; ++p)
      sum -= v[p] * z[ci[p]];
    z[i] = sum / v[rp[i]];
  }
  y.resize(size());
  for (Index j = 0; j < size(); ++j)
    y[perm_[j]] = z[j];
}

template <Scalar S>
void IlutpFactors<S>::apply_right_adjoint(const Vector<S> &x, Vector<S> &y) const
{
  check(x);
  const auto rp = upper_.row_ptr();
  const auto ci = upper_.col_idx();
  const auto v = upper_.values();
  y.resize(size());
  for (Index j = 0; j < size(); ++j)
    y[j] = x[perm_[j]];
  for (Index i = 0; i < size(); ++i) {
    y[i] /= conj(v[rp[i]]);
    const S yi = y[i];
    for (Index p = rp[i] + 1; p < rp[i + 1]; ++p)
      y[ci[p]] -= conj(v[p]) * yi;
  }
}

template <Scalar S>
Vector<S> IlutpFactors<S>::apply_left(const Vector<S> &x) const
{
  Vector<S> y;
  apply_left(x, y);
  return y;
}

template <Scalar S>
Vector<S> IlutpFactors<S>::apply_right(const Vector<S> &x) const
{
  Vector<S> y;
  apply_right(x, y);
  return y;
}

template <Scalar S>
Vector<S> IlutpFactors<S>::apply_left_adjoint(const Vector<S> &x) const
{
  Vector<S> y;
  apply_left_adjoint(x, y);
  return y;
}

template <Scalar S>
Vector<S> IlutpFactors<S>::apply_right_adjoint(const Vector<S> &x) const
{
  Vector<S> y;
  apply_right_adjoint(x, y);
  return y;
}

template <Scalar S>
Vector<S> IlutpFactors<S>::multiply_left(const Vector<S> &x) const
{
  check(x);
  return matvec(lower_, x);
}

template <Scalar S>
Vector<S> IlutpFactors<S>::multiply_right(const Vector<S> &x) const
{
  check(x);
  Vector<S> w(size());
  for (Index j = 0; j < size(); ++j)
    w[j] = x[perm_[j]];
  return matvec(upper_, w);
}

template <Scalar S>
Vector<S> IlutpFactors<S>::multiply_left_adjoint(const Vector<S> &x) const
{
  check(x);
  return matvec_conj_transpose(lower_, x);
}

namespace {

template <Scalar S>
struct Entry
{
  Index col; // original column of A
  S value;
};

// Keeps at most `limit` entries of largest magnitude; `keep` is never removed.
template <Scalar S>
void cap_fill(std::vector<Entry<S>> &entries, Index limit, Index keep)
{
  if (limit < 0)
    return;
  auto pinned = std::find_if(entries.begin(), entries.end(), [&](const Entry<S> &e) { return e.col == keep; });
  std::optional<Entry<S>> saved;
  if (pinned != entries.end()) {
    saved = *pinned;
    entries.erase(pinned);
  }
  if (static_cast<Index>(entries.size()) > limit) {
    std::nth_element(entries.begin(), entries.begin() + limit, entries.end(),
                     [](const Entry<S> &a, const Entry<S> &b) { return std::abs(a.value) > std::abs(b.value); });
    entries.resize(limit);
  }
  if (saved)
    entries.push_back(*saved);
}

} // namespace

template <Scalar S>
IlutpFactors<S> ilutp_factor(const SparseMatrix<S> &a, const IlutpOptions &options)
{
  if (a.rows() != a.cols())
    throw std::invalid_argument("ilutp_factor: matrix must be square");
  if (options.drop_tol < 0 || options.pivot_tol < 0 || options.pivot_tol > 1)
    throw std::invalid_argument("ilutp_factor: drop_tol must be >= 0 and pivot_tol in [0, 1]");

  const Index n = a.rows();
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto av = a.values();

  std::vector<Index> perm(n), iperm(n);
  for (Index j = 0; j < n; ++j)
    perm[j] = iperm[j] = j;

  std::vector<std::vector<Entry<S>>> u_rows(n); // diagonal first, original column ids
  std::vector<std::vector<Triplet<S>>> l_rows(n);

  std::vector<S> w(n, S(0));
  std::vector<char> in_row(n, 0);
  std::vector<Index> pattern;
  std::priority_queue<Index, std::vector<Index>, std::greater<>> pending; // positions < i

  for (Index i = 0; i < n; ++i) {
    Real<S> row_norm = 0;
    pattern.clear();
    for (Index p = rp[i]; p < rp[i + 1]; ++p) {
      const Index c = ci[p];
      w[c] = av[p];
      in_row[c] = 1;
      pattern.push_back(c);
      row_norm += std::norm(av[p]);
      if (iperm[c] < i)
        pending.push(iperm[c]);
    }
    row_norm = std::sqrt(row_norm);
    if (row_norm == 0)
      throw FactorizationError(i, "ilutp_factor: row " + std::to_string(i) + " is zero");
    const Real<S> threshold = options.drop_tol * row_norm;

    std::vector<Entry<S>> lower_part;
    Index last = -1;
    while (!pending.empty()) {
      const Index k = pending.top();
      pending.pop();
      if (k == last)
        continue;
      last = k;
      const Index c = perm[k];
      const S factor = w[c] / u_rows[k].front().value;
      w[c] = S(0);
      if (std::abs(factor) < threshold)
        continue;
      lower_part.push_back({c, factor});
      for (auto it = u_rows[k].begin() + 1; it != u_rows[k].end(); ++it) {
        if (!in_row[it->col]) {
          in_row[it->col] = 1;
          pattern.push_back(it->col);
          if (iperm[it->col] < i)
            pending.push(iperm[it->col]);
        }
        w[it->col] -= factor * it->value;
      }
    }

    std::vector<Entry<S>> upper_part;
    for (Index c : pattern)
      if (iperm[c] >= i && (c == perm[i] || std::abs(w[c]) >= threshold))
        upper_part.push_back({c, w[c]});

    Index diag = perm[i];
    if (options.pivot_tol > 0) {
      Real<S> diag_mag = std::abs(w[diag]);
      Index best = diag;
      Real<S> best_mag = diag_mag;
      for (const auto &e : upper_part)
        if (std::abs(e.value) > best_mag) {
          best = e.col;
          best_mag = std::abs(e.value);
        }
      if (best != diag && best_mag * options.pivot_tol > diag_mag) {
        const Index pos = iperm[best];
        std::swap(perm[i], perm[pos]);
        iperm[perm[i]] = i;
        iperm[perm[pos]] = pos;
        diag = best;
      }
    }
    if (w[diag] == S(0))
      throw FactorizationError(i, "ilutp_factor: zero pivot in row " + std::to_string(i));

    // the old diagonal may now be a tiny off-diagonal entry
    std::erase_if(upper_part, [&](const Entry<S> &e) { return e.col != diag && std::abs(e.value) < threshold; });
    cap_fill(lower_part, options.max_fill, -1);
    cap_fill(upper_part, options.max_fill, diag);

    auto d = std::find_if(upper_part.begin(), upper_part.end(), [&](const Entry<S> &e) { return e.col == diag; });
    if (d == upper_part.end()) {
      upper_part.push_back({diag, w[diag]});
      d = upper_part.end() - 1;
    }
    std::iter_swap(upper_part.begin(), d);

    for (const auto &e : lower_part)
      l_rows[i].push_back({i, iperm[e.col], e.value});
    u_rows[i] = std::move(upper_part);

    for (Index c : pattern) {
      w[c] = S(0);
      in_row[c] = 0;
    }
  }

  std::vector<Triplet<S>> l_entries, u_entries;
  for (Index i = 0; i < n; ++i) {
    l_entries.insert(l_entries.end(), l_rows[i].begin(), l_rows[i].end());
    l_entries.push_back({i, i, S(1)});
    for (const auto &e : u_rows[i])
      u_entries.push_back({i, iperm[e.col], e.value});
  }
  return IlutpFactors<S>(SparseMatrix<S>::from_triplets(n, n, l_entries),
                         SparseMatrix<S>::from_triplets(n, n, u_entries), std::move(perm), options);
}

template <Scalar S>
SplitPreconditionedOperator<S>::SplitPreconditionedOperator(const SparseMatrix<S> &a, const IlutpFactors<S> &factors)
    : a_(&a), factors_(&factors)
{
  if (a.rows() != a.cols() || a.rows() != factors.size())
    throw std::invalid_argument("SplitPreconditionedOperator: size mismatch");
}

template <Scalar S>
void SplitPreconditionedOperator<S>::apply(const Vector<S> &x, Vector<S> &y) const
{
  Vector<S> z, az;
  factors_->apply_right(x, z);
  multiply(*a_, z, az);
  factors_->apply_left(az, y);
}

template <Scalar S>
void SplitPreconditionedOperator<S>::apply_adjoint(const Vector<S> &x, Vector<S> &y) const
{
  Vector<S> z, az;
  factors_->apply_left_adjoint(x, z);
  multiply(a_->conj_transpose(), z, az);
  factors_->apply_right_adjoint(az, y);
}

template class IlutpFactors<double>;
template class IlutpFactors<std::complex<double>>;
template class SplitPreconditionedOperator<double>;
template class SplitPreconditionedOperator<std::complex<double>>;
template IlutpFactors<double> ilutp_factor(const SparseMatrix<double> &, const IlutpOptions &);
template IlutpFactors<std::complex<double>> ilutp_factor(const SparseMatrix<std::complex<double>> &,
                                                         const IlutpOptions &);

} // namespace rkrylov
