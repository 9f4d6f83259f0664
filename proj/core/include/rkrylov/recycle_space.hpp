// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rkrylov/operator.hpp"

namespace rkrylov {

/// Primary and dual recycle subspaces.
///
/// C = A U and Ct = A* Ut are bi-orthogonal with Ct* C = diag(dc), dc real
/// and positive. chat = Ct diag(dc)^{-1} and ccheck = C diag(dc)^{-1}, so
/// chat* C = I and ccheck* Ct = I.
template <Scalar S>
struct RecycleSpace
{
  DenseMatrix<S> u, ut;
  DenseMatrix<S> c, ct;
  DenseMatrix<S> chat, ccheck;
  Eigen::VectorXd dc;

  Index k() const { return u.cols(); }
  Index n() const { return u.rows(); }
  bool empty() const { return u.cols() == 0; }

  static RecycleSpace none(Index n);

  /// Assembles a space from bi-orthogonal images; derives dc, chat and ccheck.
  static RecycleSpace from_biorthogonal(DenseMatrix<S> u, DenseMatrix<S> ut, DenseMatrix<S> c, DenseMatrix<S> ct);
};

struct RecycleValidation
{
  double biorthogonality = 0.0; ///< max off-diagonal |Ct* C| relative to max dc
  double dc_imag = 0.0;         ///< largest imaginary part on the diagonal, relative
  double min_dc = 0.0;
  double image_error = 0.0;      ///< ||A U - C|| / ||C||
  double dual_image_error = 0.0; ///< ||A* Ut - Ct|| / ||Ct||
  double chat_error = 0.0;       ///< ||chat* C - I||
  double ccheck_error = 0.0;     ///< ||ccheck* Ct - I||

  bool ok(double tol = 1e-10) const;
  std::string describe() const;
};

/// Measures every RecycleSpace invariant against `op`. Costs 2k operator applications.
template <Scalar S>
RecycleValidation validate(const RecycleSpace<S> &space, const LinearOperator<S> &op);

/// Lanczos and direction vectors harvested from one cycle of a two-sided solve.
///
/// Column j of p/pt is a search direction, z = A p and zt = A* pt are
/// the unprojected products the solver already computed, and r/rt are the
/// residuals (unnormalized Lanczos vectors) at the start of the iteration.
template <Scalar S>
struct CapturedCycle
{
  DenseMatrix<S> p, pt;
  DenseMatrix<S> z, zt;
  DenseMatrix<S> r, rt;
  Vector<S> alpha, beta;
  int first_iteration = 0;
  /// Leading columns carried over from the previous cycle.
  int carried = 0;

  Index columns() const { return p.cols(); }
};

/// x0 = x + U chat* r, r0 = (I - C chat*) r with r = b - A x.
template <Scalar S>
struct ProjectedStart
{
  Vector<S> x0;
  Vector<S> r0;
};

template <Scalar S>
ProjectedStart<S> project_initial(const LinearOperator<S> &op, const Vector<S> &b, const Vector<S> &x_minus1,
                                  const RecycleSpace<S> &space);

/// Dual counterpart: x0 = x + Ut ccheck* r, r0 = (I - Ct ccheck*) r with r = b - A* x.
template <Scalar S>
ProjectedStart<S> project_initial_dual(const LinearOperator<S> &op, const Vector<S> &b, const Vector<S> &x_minus1,
                                       const RecycleSpace<S> &space);

/// Columns with singular value at or below rank_tol * sigma_max are dropped.
inline constexpr double default_rank_tol = 1e-12;

/// Primary/dual directions whose cosine falls below this are not recycled:
/// the oblique projector I - C chat* has norm 1 / min(dc).
inline constexpr double default_min_cosine = 1e-3;

/// Bi-orthonormalizes a pair of raw bases given their images.
///
/// Factors Ct_raw* C_raw = X diag(sigma) Y* and rotates U, C by Y and Ut, Ct by X.
template <Scalar S>
RecycleSpace<S> biorthonormalize_images(const DenseMatrix<S> &u_raw, const DenseMatrix<S> &ut_raw,
                                        const DenseMatrix<S> &c_raw, const DenseMatrix<S> &ct_raw,
                                        double rank_tol = default_rank_tol, double min_cosine = 0.0);

/// Computes C_raw = A U_raw and Ct_raw = A* Ut_raw, then bi-orthonormalizes.
template <Scalar S>
RecycleSpace<S> biorthonormalize(const DenseMatrix<S> &u_raw, const DenseMatrix<S> &ut_raw,
                                 const LinearOperator<S> &op, double rank_tol = default_rank_tol,
                                 double min_cosine = 0.0);

/// Recomputes the images against a new operator. Costs k applications of op and k of its adjoint.
template <Scalar S>
RecycleSpace<S> refresh_images(const RecycleSpace<S> &space, const LinearOperator<S> &op,
                               double rank_tol = default_rank_tol, double min_cosine = 0.0);

/// Two-sided Ritz update of a recycle space.
///
/// Keeps a working pair (U, Ut) with images (C, Ct) for the current operator
/// and folds in captured cycles: with W = [U, P] and Wt = [Ut, Pt] it solves
/// the small pencil (Wt* A W, Wt* W), keeps the k Ritz pairs of smallest
/// magnitude, and maps the right/left Ritz vectors back. Images come from the
/// captured products, so absorbing a cycle costs no operator applications.
template <Scalar S>
class RecycleAccumulator
{
public:
  RecycleAccumulator(Index n, int k, std::optional<RecycleSpace<S>> previous = std::nullopt,
                     double min_cosine = default_min_cosine);

  void absorb(const CapturedCycle<S> &cycle);

  /// Current space, bi-orthonormalized with the tracked images.
  RecycleSpace<S> current() const;

  /// Final space with images recomputed against op (2k applications).
  RecycleSpace<S> finish(const LinearOperator<S> &op) const;

  int cycles_absorbed() const { return absorbed_; }
  const std::vector<std::string> &warnings() const { return warnings_; }

private:
  Index n_;
  int k_;
  double min_cosine_;
  DenseMatrix<S> u_, ut_, c_, ct_;
  int absorbed_ = 0;
  std::vector<std::string> warnings_;
};

template <Scalar S>
RecycleSpace<S> update_recycle_space(const std::vector<CapturedCycle<S>> &cycles,
                                     const std::optional<RecycleSpace<S>> &previous, const LinearOperator<S> &op,
                                     int k);

/// Cosines of the principal angles between span(s1) and span(s2), descending.
/// Throws std::invalid_argument on rank-deficient input.
template <Scalar S>
std::vector<double> principal_angle_cosines(const DenseMatrix<S> &s1, const DenseMatrix<S> &s2);

} // namespace rkrylov
