// SPDX-License-Identifier: Apache-2.0

#include "rkrylov/gen_bilanczos.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rkrylov/solvers.hpp"

namespace rkrylov {

template <Scalar S>
ProjectedOperator<S>::ProjectedOperator(const LinearOperator<S> &op, DenseMatrix<S> x, DenseMatrix<S> y, bool dual)
    : op_(&op), x_(std::move(x)), y_(std::move(y)), dual_(dual)
{
  if (x_.rows() != op.size() || y_.rows() != op.size() || x_.cols() != y_.cols())
    throw std::invalid_argument("ProjectedOperator: projector blocks do not conform");
}

template <Scalar S>
void ProjectedOperator<S>::apply(const Vector<S> &v, Vector<S> &out) const
{
  if (dual_)
    op_->apply_adjoint(v, out);
  else
    op_->apply(v, out);
  if (x_.cols() > 0)
    out.noalias() -= x_ * (y_.adjoint() * out);
}

template <Scalar S>
void ProjectedOperator<S>::apply_adjoint(const Vector<S> &v, Vector<S> &out) const
{
  Vector<S> w = v;
  if (x_.cols() > 0)
    w.noalias() -= y_ * (x_.adjoint() * v);
  if (dual_)
    op_->apply(w, out);
  else
    op_->apply_adjoint(w, out);
}

template <Scalar S>
GenBiLanczosHarness<S> augmented_harness(const LinearOperator<S> &op, const RecycleSpace<S> &space)
{
  if (!space.empty() && space.n() != op.size())
    throw std::invalid_argument("augmented_harness: recycle space does not match the operator");
  GenBiLanczosHarness<S> h;
  h.b = std::make_shared<ProjectedOperator<S>>(op, space.c, space.chat, false);
  h.bt = std::make_shared<ProjectedOperator<S>>(op, space.ct, space.ccheck, true);
  h.c = space.c;
  h.ct = space.ct;
  h.f = op.apply_adjoint_block(space.chat);
  h.ft = op.apply_block(space.ccheck);
  return h;
}

template <Scalar S>
GenBiLanczosHarness<S> classical_harness(const LinearOperator<S> &op)
{
  const Index n = op.size();
  GenBiLanczosHarness<S> h;
  h.b = std::make_shared<ProjectedOperator<S>>(op, DenseMatrix<S>(n, 0), DenseMatrix<S>(n, 0), false);
  h.bt = std::make_shared<ProjectedOperator<S>>(op, DenseMatrix<S>(n, 0), DenseMatrix<S>(n, 0), true);
  h.c = h.ct = h.f = h.ft = DenseMatrix<S>(n, 0);
  return h;
}

template <Scalar S>
HarnessConditions check_conditions(const GenBiLanczosHarness<S> &h, const Vector<S> &v1, const Vector<S> &vt1,
                                   int probes, std::uint64_t seed)
{
  HarnessConditions out;
  const bool has_c = h.c.cols() > 0;
  for (int i = 0; i < probes; ++i) {
    const Vector<S> x = random_vector<S>(h.b->size(), seed + static_cast<std::uint64_t>(i));
    const Vector<S> bx = (*h.b)(x);
    const Vector<S> btx = h.bt->adjoint(x);
    Vector<S> diff = bx - btx;
    if (has_c)
      diff -= h.ft * (h.ct.adjoint() * x) - h.c * (h.f.adjoint() * x);
    const double scale = std::max(bx.norm(), btx.norm());
    if (scale > 0)
      out.a = std::max(out.a, diff.norm() / scale);
    if (has_c) {
      const Vector<S> btt = (*h.bt)(x);
      if (bx.norm() > 0)
        out.b = std::max(out.b, (h.ct.adjoint() * bx).norm() / (h.ct.norm() * bx.norm()));
      if (btt.norm() > 0)
        out.b = std::max(out.b, (h.c.adjoint() * btt).norm() / (h.c.norm() * btt.norm()));
    }
  }
  if (has_c) {
    out.c = std::max((h.ct.adjoint() * v1).norm() / (h.ct.norm() * v1.norm()),
                     (h.c.adjoint() * vt1).norm() / (h.c.norm() * vt1.norm()));
  }
  return out;
}

template <Scalar S>
std::pair<Vector<S>, Vector<S>> normalize_starts(const Vector<S> &v, const Vector<S> &vt)
{
  const double nv = v.norm();
  if (nv == 0)
    throw std::invalid_argument("normalize_starts: zero starting vector");
  Vector<S> v1 = v / nv;
  const S d = vt.dot(v1);
  if (std::abs(d) <= 1e-14 * vt.norm())
    throw std::invalid_argument("normalize_starts: starting vectors are orthogonal");
  // (vt1, v1) = 1 requires vt1 = vt / conj(d)
  Vector<S> vt1 = vt / conj(d);
  return {std::move(v1), std::move(vt1)};
}

template <Scalar S>
std::pair<Vector<S>, Vector<S>> augmented_starts(const RecycleSpace<S> &space, const Vector<S> &r0,
                                                 const Vector<S> &rt0)
{
  Vector<S> v = r0, vt = rt0;
  if (!space.empty()) {
    v.noalias() -= space.c * (space.chat.adjoint() * r0);
    vt.noalias() -= space.ct * (space.ccheck.adjoint() * rt0);
  }
  return normalize_starts<S>(v, vt);
}

template <Scalar S>
double GenBiLanczosResult<S>::off_band() const
{
  const Index m = steps;
  if (m == 0)
    return 0.0;
  const double scale = h.topLeftCorner(m, m).norm();
  double worst = 0.0;
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i + 1 < j; ++i)
      worst = std::max(worst, std::abs(h(i, j)));
  return scale > 0 ? worst / scale : worst;
}

template <Scalar S>
double GenBiLanczosResult<S>::adjoint_mismatch() const
{
  const Index m = steps;
  if (m == 0)
    return 0.0;
  const double scale = h.topLeftCorner(m, m).norm();
  const double worst = (h.topLeftCorner(m, m) - ht.topLeftCorner(m, m).adjoint()).cwiseAbs().maxCoeff();
  return scale > 0 ? worst / scale : worst;
}

template <Scalar S>
GenBiLanczosResult<S> gen_bilanczos_full(const GenBiLanczosHarness<S> &h, const Vector<S> &v1, const Vector<S> &vt1,
                                         int m, double breakdown_tol)
{
  const Index n = h.b->size();
  if (m <= 0)
    throw std::invalid_argument("gen_bilanczos_full: m must be positive");
  if (v1.size() != n || vt1.size() != n)
    throw std::invalid_argument("gen_bilanczos_full: starting vectors do not conform");

  GenBiLanczosResult<S> out;
  out.v = DenseMatrix<S>::Zero(n, m + 1);
  out.vt = DenseMatrix<S>::Zero(n, m + 1);
  out.h = DenseMatrix<S>::Zero(m + 1, m);
  out.ht = DenseMatrix<S>::Zero(m + 1, m);
  out.v.col(0) = v1;
  out.vt.col(0) = vt1;

  Vector<S> w(n), wt(n);
  for (Index i = 0; i < m; ++i) {
    h.b->apply(out.v.col(i), w);
    h.bt->apply(out.vt.col(i), wt);
    const double wnorm0 = w.norm();
    const double wtnorm0 = wt.norm();
    // oblique Gram-Schmidt against all previous vectors, twice
    for (int pass = 0; pass < 2; ++pass) {
      const Vector<S> coef = out.vt.leftCols(i + 1).adjoint() * w;
      const Vector<S> coeft = out.v.leftCols(i + 1).adjoint() * wt;
      w.noalias() -= out.v.leftCols(i + 1) * coef;
      wt.noalias() -= out.vt.leftCols(i + 1) * coeft;
      out.h.col(i).head(i + 1) += coef;
      out.ht.col(i).head(i + 1) += coeft;
    }
    out.steps = static_cast<int>(i + 1);
    const double wnorm = w.norm();
    if (wnorm <= 1e-12 * std::max(wnorm0, 1e-300) || wt.norm() <= 1e-12 * std::max(wtnorm0, 1e-300)) {
      out.stop = LanczosStop::invariant_subspace;
      out.message = "invariant subspace reached after " + std::to_string(i + 1) + " steps";
      break;
    }
    const Vector<S> vnext = w / wnorm;
    // (vt_{i+1}, v_{i+1}) = 1 fixes the dual scaling: ht(i+1, i) = v_{i+1}* wt
    const S dual = vnext.dot(wt);
    if (std::abs(dual) <= breakdown_tol * wt.norm()) {
      out.stop = LanczosStop::breakdown;
      out.message = "breakdown: (vt, v) vanishes at step " + std::to_string(i + 1);
      break;
    }
    out.h(i + 1, i) = wnorm;
    out.ht(i + 1, i) = dual;
    out.v.col(i + 1) = vnext;
    out.vt.col(i + 1) = wt / dual;
  }
  const Index steps = out.steps;
  out.v.conservativeResize(n, steps + 1);
  out.vt.conservativeResize(n, steps + 1);
  out.h.conservativeResize(steps + 1, steps);
  out.ht.conservativeResize(steps + 1, steps);
  return out;
}

#define RKRYLOV_INSTANTIATE(S)                                                                                   \
  template class ProjectedOperator<S>;                                                                           \
  template struct GenBiLanczosResult<S>;                                                                         \
  template GenBiLanczosHarness<S> augmented_harness(const LinearOperator<S> &, const RecycleSpace<S> &);         \
  template GenBiLanczosHarness<S> classical_harness(const LinearOperator<S> &);                                  \
  template HarnessConditions check_conditions(const GenBiLanczosHarness<S> &, const Vector<S> &,                \
                                              const Vector<S> &, int, std::uint64_t);                            \
  template std::pair<Vector<S>, Vector<S>> normalize_starts(const Vector<S> &, const Vector<S> &);              \
  template std::pair<Vector<S>, Vector<S>> augmented_starts(const RecycleSpace<S> &, const Vector<S> &,         \
                                                            const Vector<S> &);                                  \
  template GenBiLanczosResult<S> gen_bilanczos_full(const GenBiLanczosHarness<S> &, const Vector<S> &,          \
                                                    const Vector<S> &, int, double);

RKRYLOV_INSTANTIATE(double)
RKRYLOV_INSTANTIATE(std::complex<double>)

#undef RKRYLOV_INSTANTIATE

} // namespace rkrylov
