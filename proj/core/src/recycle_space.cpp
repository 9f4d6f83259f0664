// SPDX-License-Identifier: Apache-2.0

#include "rkrylov/recycle_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace rkrylov {

namespace {

template <Scalar S>
void require_rows(const DenseMatrix<S> &m, Index n, const char *what)
{
  if (m.cols() > 0 && m.rows() != n)
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) + " rows, got " +
                                std::to_string(m.rows()));
}

// Orthonormal basis of span(w) with the matching image: q = w_r R^{-1}, aq = aw_r R^{-1}
// where w_r are the numerically independent pivoted columns.
template <Scalar S>
std::pair<DenseMatrix<S>, DenseMatrix<S>> orthonormalize_with_image(const DenseMatrix<S> &w, const DenseMatrix<S> &aw,
                                                                    double rank_tol)
{
  if (w.cols() == 0)
    return {w, aw};
  Eigen::ColPivHouseholderQR<DenseMatrix<S>> qr(w);
  const auto &r_full = qr.matrixR();
  const double lead = std::abs(r_full(0, 0));
  Index rank = 0;
  while (rank < std::min(w.rows(), w.cols()) && std::abs(r_full(rank, rank)) > rank_tol * lead)
    ++rank;
  DenseMatrix<S> r = r_full.topLeftCorner(rank, rank).template triangularView<Eigen::Upper>();
  DenseMatrix<S> wp = (w * qr.colsPermutation()).leftCols(rank);
  DenseMatrix<S> awp = (aw * qr.colsPermutation()).leftCols(rank);
  r.template triangularView<Eigen::Upper>().template solveInPlace<Eigen::OnTheRight>(wp);
  r.template triangularView<Eigen::Upper>().template solveInPlace<Eigen::OnTheRight>(awp);
  return {std::move(wp), std::move(awp)};
}

// Removes the complex phase of an eigenvector so that its real part carries it.
inline Eigen::VectorXcd dephase(const Eigen::VectorXcd &v)
{
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const double mag = std::abs(v[imax]);
  if (mag == 0)
    return v;
  return v * (std::conj(v[imax]) / mag);
}

template <Scalar S>
DenseMatrix<S> from_complex(const Eigen::MatrixXcd &m)
{
  if constexpr (is_complex_v<S>)
    return m;
  else
    return m.real();
}

} // namespace

template <Scalar S>
RecycleSpace<S> RecycleSpace<S>::none(Index n)
{
  RecycleSpace out;
  out.u = out.ut = out.c = out.ct = out.chat = out.ccheck = DenseMatrix<S>(n, 0);
  out.dc = Eigen::VectorXd(0);
  return out;
}

template <Scalar S>
RecycleSpace<S> RecycleSpace<S>::from_biorthogonal(DenseMatrix<S> u, DenseMatrix<S> ut, DenseMatrix<S> c,
                                                   DenseMatrix<S> ct)
{
  const Index n = u.rows(), k = u.cols();
  if (ut.cols() != k || c.cols() != k || ct.cols() != k)
    throw std::invalid_argument("RecycleSpace: U, Ut, C, Ct must have the same number of columns");
  require_rows(ut, n, "RecycleSpace");
  require_rows(c, n, "RecycleSpace");
  require_rows(ct, n, "RecycleSpace");
  RecycleSpace out;
  out.dc.resize(k);
  for (Index j = 0; j < k; ++j) {
    const S d = ct.col(j).dot(c.col(j));
    if (!(std::real(d) > 0))
      throw std::invalid_argument("RecycleSpace: Ct* C must have a positive real diagonal");
    out.dc[j] = std::real(d);
  }
  const Eigen::VectorXd inv = out.dc.cwiseInverse();
  out.chat = ct * inv.template cast<S>().asDiagonal();
  out.ccheck = c * inv.template cast<S>().asDiagonal();
  out.u = std::move(u);
  out.ut = std::move(ut);
  out.c = std::move(c);
  out.ct = std::move(ct);
  return out;
}

bool RecycleValidation::ok(double tol) const
{
  return biorthogonality <= tol && dc_imag <= tol && min_dc > 0 && image_error <= tol && dual_image_error <= tol &&
         chat_error <= tol && ccheck_error <= tol;
}

std::string RecycleValidation::describe() const
{
  std::ostringstream os;
  os << "biorthogonality=" << biorthogonality << " dc_imag=" << dc_imag << " min_dc=" << min_dc
     << " image_error=" << image_error << " dual_image_error=" << dual_image_error << " chat_error=" << chat_error
     << " ccheck_error=" << ccheck_error;
  return os.str();
}

template <Scalar S>
RecycleValidation validate(const RecycleSpace<S> &space, const LinearOperator<S> &op)
{
  RecycleValidation v;
  if (space.empty()) {
    v.min_dc = 1.0;
    return v;
  }
  const Index k = space.k();
  const DenseMatrix<S> m = space.ct.adjoint() * space.c;
  const double scale = space.dc.maxCoeff();
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      if (i != j)
        v.biorthogonality = std::max(v.biorthogonality, std::abs(m(i, j)) / scale);
  for (Index j = 0; j < k; ++j) {
    v.dc_imag = std::max(v.dc_imag, std::abs(std::imag(m(j, j))) / scale);
    v.biorthogonality = std::max(v.biorthogonality, std::abs(std::real(m(j, j)) - space.dc[j]) / scale);
  }
  v.min_dc = space.dc.minCoeff();
  v.image_error = (op.apply_block(space.u) - space.c).norm() / space.c.norm();
  v.dual_image_error = (op.apply_adjoint_block(space.ut) - space.ct).norm() / space.ct.norm();
  const DenseMatrix<S> eye = DenseMatrix<S>::Identity(k, k);
  v.chat_error = (space.chat.adjoint() * space.c - eye).norm();
  v.ccheck_error = (space.ccheck.adjoint() * space.ct - eye).norm();
  return v;
}

template <Scalar S>
ProjectedStart<S> project_initial(const LinearOperator<S> &op, const Vector<S> &b, const Vector<S> &x_minus1,
                                  const RecycleSpace<S> &space)
{
  if (b.size() != op.size() || x_minus1.size() != op.size())
    throw std::invalid_argument("project_initial: dimension mismatch");
  if (!space.empty() && space.n() != op.size())
    throw std::invalid_argument("project_initial: recycle space dimension mismatch");
  ProjectedStart<S> out;
  out.r0 = b - op(x_minus1);
  out.x0 = x_minus1;
  if (!space.empty()) {
    const Vector<S> coef = space.chat.adjoint() * out.r0;
    out.x0.noalias() += space.u * coef;
    out.r0.noalias() -= space.c * coef;
  }
  return out;
}

template <Scalar S>
ProjectedStart<S> project_initial_dual(const LinearOperator<S> &op, const Vector<S> &b, const Vector<S> &x_minus1,
                                       const RecycleSpace<S> &space)
{
  if (b.size() != op.size() || x_minus1.size() != op.size())
    throw std::invalid_argument("project_initial_dual: dimension mismatch");
  if (!space.empty() && space.n() != op.size())
    throw std::invalid_argument("project_initial_dual: recycle space dimension mismatch");
  ProjectedStart<S> out;
  out.r0 = b - op.adjoint(x_minus1);
  out.x0 = x_minus1;
  if (!space.empty()) {
    const Vector<S> coef = space.ccheck.adjoint() * out.r0;
    out.x0.noalias() += space.ut * coef;
    out.r0.noalias() -= space.ct * coef;
  }
  return out;
}

template <Scalar S>
RecycleSpace<S> biorthonormalize_images(const DenseMatrix<S> &u_raw, const DenseMatrix<S> &ut_raw,
                                        const DenseMatrix<S> &c_raw, const DenseMatrix<S> &ct_raw, double rank_tol,
                                        double min_cosine)
{
  const Index n = u_raw.rows();
  if (ut_raw.cols() != u_raw.cols() || c_raw.cols() != u_raw.cols() || ct_raw.cols() != u_raw.cols())
    throw std::invalid_argument("biorthonormalize: U, Ut, C, Ct must have the same number of columns");
  require_rows(ut_raw, n, "biorthonormalize");
  require_rows(c_raw, n, "biorthonormalize");
  require_rows(ct_raw, n, "biorthonormalize");
  if (u_raw.cols() == 0)
    return RecycleSpace<S>::none(n);

  // Orthonormal bases of the two images first: the singular values of
  // Qt* Q are then the cosines of the principal angles between span(C) and
  // span(Ct), and the singular vectors give the best-conditioned pairing.
  auto [q, u_q] = orthonormalize_with_image<S>(c_raw, u_raw, rank_tol);
  auto [qt, ut_q] = orthonormalize_with_image<S>(ct_raw, ut_raw, rank_tol);
  if (q.cols() == 0 || qt.cols() == 0)
    return RecycleSpace<S>::none(n);
  const DenseMatrix<S> m = qt.adjoint() * q;
  Eigen::JacobiSVD<DenseMatrix<S>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto &sigma = svd.singularValues();
  Index keep = 0;
  while (keep < sigma.size() && sigma[keep] > rank_tol * sigma[0] && sigma[keep] > min_cosine)
    ++keep;
  if (keep == 0)
    return RecycleSpace<S>::none(n);

  const DenseMatrix<S> x = svd.matrixU().leftCols(keep);
  const DenseMatrix<S> y = svd.matrixV().leftCols(keep);
  DenseMatrix<S> u = u_q * y, c = q * y;
  DenseMatrix<S> ut = ut_q * x, ct = qt * x;
  return RecycleSpace<S>::from_biorthogonal(std::move(u), std::move(ut), std::move(c), std::move(ct));
}

template <Scalar S>
RecycleSpace<S> biorthonormalize(const DenseMatrix<S> &u_raw, const DenseMatrix<S> &ut_raw,
                                 const LinearOperator<S> &op, double rank_tol, double min_cosine)
{
  if (u_raw.cols() > 0 && (u_raw.rows() != op.size() || ut_raw.rows() != op.size()))
    throw std::invalid_argument("biorthonormalize: basis rows do not match operator size");
  return biorthonormalize_images(u_raw, ut_raw, op.apply_block(u_raw), op.apply_adjoint_block(ut_raw), rank_tol,
                                   min_cosine);
}

template <Scalar S>
RecycleSpace<S> refresh_images(const RecycleSpace<S> &space, const LinearOperator<S> &op, double rank_tol,
                               double min_cosine)
{
  if (space.empty())
    return RecycleSpace<S>::none(op.size());
  if (space.n() != op.size())
    throw std::invalid_argument("refresh_images: recycle space has " + std::to_string(space.n()) +
                                " rows, operator has size " + std::to_string(op.size()));
  return biorthonormalize(space.u, space.ut, op, rank_tol, min_cosine);
}

template <Scalar S>
RecycleAccumulator<S>::RecycleAccumulator(Index n, int k, std::optional<RecycleSpace<S>> previous, double min_cosine)
    : n_(n), k_(k), min_cosine_(min_cosine)
{
  if (k < 0)
    throw std::invalid_argument("RecycleAccumulator: k must be nonnegative");
  if (previous && !previous->empty()) {
    if (previous->n() != n)
      throw std::invalid_argument("RecycleAccumulator: previous space has wrong dimension");
    u_ = previous->u;
    ut_ = previous->ut;
    c_ = previous->c;
    ct_ = previous->ct;
  } else {
    u_ = ut_ = c_ = ct_ = DenseMatrix<S>(n, 0);
  }
}

template <Scalar S>
void RecycleAccumulator<S>::absorb(const CapturedCycle<S> &cycle)
{
  if (k_ == 0 || cycle.columns() == 0)
    return;
  if (cycle.p.rows() != n_)
    throw std::invalid_argument("RecycleAccumulator: cycle has wrong dimension");

  const Index kw = u_.cols() + cycle.p.cols();
  DenseMatrix<S> w(n_, kw), aw(n_, kw), wt(n_, kw), awt(n_, kw);
  w << u_, cycle.p;
  aw << c_, cycle.z;
  wt << ut_, cycle.pt;
  awt << ct_, cycle.zt;

  constexpr double basis_tol = 1e-10;
  auto [q, aq] = orthonormalize_with_image<S>(w, aw, basis_tol);
  auto [qt, aqt] = orthonormalize_with_image<S>(wt, awt, basis_tol);
  if (q.cols() == 0 || qt.cols() == 0) {
    warnings_.push_back("recycle update: cycle basis is empty; keeping previous space");
    return;
  }

  // restrict to the part where the two bases pair up: qt_r* q_r = diag(sigma)
  Eigen::JacobiSVD<DenseMatrix<S>> svd(qt.adjoint() * q, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto &sigma = svd.singularValues();
  Index m = 0;
  while (m < sigma.size() && sigma[m] > basis_tol * sigma[0] && sigma[m] > min_cosine_)
    ++m;
  if (m == 0) {
    warnings_.push_back("recycle update: primary and dual bases are orthogonal; keeping previous space");
    return;
  }
  const DenseMatrix<S> qr = q * svd.matrixV().leftCols(m);
  const DenseMatrix<S> aqr = aq * svd.matrixV().leftCols(m);
  const DenseMatrix<S> qtr = qt * svd.matrixU().leftCols(m);
  const DenseMatrix<S> aqtr = aqt * svd.matrixU().leftCols(m);

  // Ritz problem G z = theta diag(sigma) z with G = qtr* A qr
  const Eigen::MatrixXcd g = (qtr.adjoint() * aqr).template cast<std::complex<double>>();
  const Eigen::VectorXcd inv_sigma = sigma.head(m).cwiseInverse().template cast<std::complex<double>>();
  const Eigen::MatrixXcd t = inv_sigma.asDiagonal() * g;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(t);
  if (eig.info() != Eigen::Success) {
    warnings_.push_back("recycle update: small eigenproblem did not converge; keeping previous space");
    return;
  }
  const Eigen::VectorXcd theta = eig.eigenvalues();
  const Eigen::MatrixXcd zr = eig.eigenvectors();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(zr);
  // rows of zr^{-1} diag(sigma)^{-1} are the left Ritz vectors (conjugated)
  const Eigen::MatrixXcd zl = (lu.inverse() * inv_sigma.asDiagonal()).adjoint();
  if (!zl.allFinite()) {
    warnings_.push_back("recycle update: defective Ritz basis; keeping previous space");
    return;
  }

  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double ma = std::abs(theta[a]), mb = std::abs(theta[b]);
    if (ma != mb)
      return ma < mb;
    return theta[a].imag() > theta[b].imag();
  });

  std::vector<Eigen::VectorXcd> right, left;
  const double scale = std::abs(theta[order.back()]);
  if constexpr (is_complex_v<S>) {
    for (Index i = 0; i < std::min<Index>(k_, m); ++i) {
      right.push_back(zr.col(order[i]));
      left.push_back(zl.col(order[i]));
    }
  } else {
    // conjugate pairs of a real pencil become their real and imaginary parts
    std::vector<char> used(m, 0);
    const double imag_tol = 1e-8 * std::max(scale, 1e-300);
    for (Index pos = 0; pos < m && static_cast<int>(right.size()) < k_; ++pos) {
      const Index i = order[pos];
      if (used[i])
        continue;
      used[i] = 1;
      if (std::abs(theta[i].imag()) <= imag_tol) {
        right.push_back(dephase(zr.col(i)).real().cast<std::complex<double>>());
        left.push_back(dephase(zl.col(i)).real().cast<std::complex<double>>());
        continue;
      }
      Index partner = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < m; ++j)
        if (!used[j] && std::abs(theta[j] - std::conj(theta[i])) < best) {
          best = std::abs(theta[j] - std::conj(theta[i]));
          partner = j;
        }
      if (partner >= 0)
        used[partner] = 1;
      if (static_cast<int>(right.size()) + 2 > k_)
        continue;
      right.push_back(zr.col(i).real().cast<std::complex<double>>());
      right.push_back(zr.col(i).imag().cast<std::complex<double>>());
      left.push_back(zl.col(i).real().cast<std::complex<double>>());
      left.push_back(zl.col(i).imag().cast<std::complex<double>>());
    }
  }
  if (right.empty()) {
    warnings_.push_back("recycle update: no Ritz vectors selected; keeping previous space");
    return;
  }

  Eigen::MatrixXcd zsel(m, right.size()), ysel(m, left.size());
  for (std::size_t j = 0; j < right.size(); ++j) {
    zsel.col(j) = right[j];
    ysel.col(j) = left[j];
  }
  const DenseMatrix<S> zs = from_complex<S>(zsel);
  const DenseMatrix<S> ys = from_complex<S>(ysel);
  u_ = qr * zs;
  c_ = aqr * zs;
  ut_ = qtr * ys;
  ct_ = aqtr * ys;
  ++absorbed_;
}

template <Scalar S>
RecycleSpace<S> RecycleAccumulator<S>::current() const
{
  return biorthonormalize_images<S>(u_, ut_, c_, ct_, default_rank_tol, min_cosine_);
}

template <Scalar S>
RecycleSpace<S> RecycleAccumulator<S>::finish(const LinearOperator<S> &op) const
{
  return biorthonormalize<S>(u_, ut_, op, default_rank_tol, min_cosine_);
}

template <Scalar S>
RecycleSpace<S> update_recycle_space(const std::vector<CapturedCycle<S>> &cycles,
                                     const std::optional<RecycleSpace<S>> &previous, const LinearOperator<S> &op, int k)
{
  std::optional<RecycleSpace<S>> seed;
  if (previous && !previous->empty())
    seed = refresh_images(*previous, op);
  RecycleAccumulator<S> acc(op.size(), k, seed);
  for (const auto &cycle : cycles)
    acc.absorb(cycle);
  return acc.finish(op);
}

template <Scalar S>
std::vector<double> principal_angle_cosines(const DenseMatrix<S> &s1, const DenseMatrix<S> &s2)
{
  if (s1.rows() != s2.rows())
    throw std::invalid_argument("principal_angle_cosines: row mismatch");
  auto basis = [](const DenseMatrix<S> &s) {
    Eigen::ColPivHouseholderQR<DenseMatrix<S>> qr(s);
    if (qr.rank() < s.cols())
      throw std::invalid_argument("principal_angle_cosines: input is rank deficient");
    return DenseMatrix<S>(qr.householderQ() * DenseMatrix<S>::Identity(s.rows(), s.cols()));
  };
  const DenseMatrix<S> q1 = basis(s1), q2 = basis(s2);
  Eigen::JacobiSVD<DenseMatrix<S>> svd(q1.adjoint() * q2);
  std::vector<double> out(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
  for (double &c : out)
    c = std::clamp(c, 0.0, 1.0);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

#define RKRYLOV_INSTANTIATE(S)                                                                                    \
  template struct RecycleSpace<S>;                                                                                 \
  template class RecycleAccumulator<S>;                                                                            \
  template RecycleValidation validate(const RecycleSpace<S> &, const LinearOperator<S> &);                       \
  template ProjectedStart<S> project_initial(const LinearOperator<S> &, const Vector<S> &, const Vector<S> &,    \
                                             const RecycleSpace<S> &);                                             \
  template ProjectedStart<S> project_initial_dual(const LinearOperator<S> &, const Vector<S> &, const Vector<S> &, \
                                                  const RecycleSpace<S> &);                                        \
  template RecycleSpace<S> biorthonormalize_images(const DenseMatrix<S> &, const DenseMatrix<S> &,               \
                                                   const DenseMatrix<S> &, const DenseMatrix<S> &, double,       \
                                                   double);                                                       \
  template RecycleSpace<S> biorthonormalize(const DenseMatrix<S> &, const DenseMatrix<S> &,                      \
                                            const LinearOperator<S> &, double, double);                           \
  template RecycleSpace<S> refresh_images(const RecycleSpace<S> &, const LinearOperator<S> &, double, double);   \
  template RecycleSpace<S> update_recycle_space(const std::vector<CapturedCycle<S>> &,                           \
                                                const std::optional<RecycleSpace<S>> &, const LinearOperator<S> &, \
                                                int);                                                              \
  template std::vector<double> principal_angle_cosines(const DenseMatrix<S> &, const DenseMatrix<S> &);

RKRYLOV_INSTANTIATE(double)
RKRYLOV_INSTANTIATE(std::complex<double>)

#undef RKRYLOV_INSTANTIATE

} // namespace rkrylov
