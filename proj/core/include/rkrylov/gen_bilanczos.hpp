// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "rkrylov/recycle_space.hpp"

namespace rkrylov {

/// Applies (I - X Y*) op, or (I - X Y*) op* when `dual` is set.
template <Scalar S>
class ProjectedOperator final : public LinearOperator<S>
{
public:
  ProjectedOperator(const LinearOperator<S> &op, DenseMatrix<S> x, DenseMatrix<S> y, bool dual = false);

  Index size() const override { return op_->size(); }
  void apply(const Vector<S> &v, Vector<S> &out) const override;
  void apply_adjoint(const Vector<S> &v, Vector<S> &out) const override;

private:
  const LinearOperator<S> *op_;
  DenseMatrix<S> x_, y_;
  bool dual_;
};

/// Operator pair (B, Bt) with the correction terms relating B to Bt*:
/// B - Bt* = Ft Ct* - C F*.
template <Scalar S>
struct GenBiLanczosHarness
{
  std::shared_ptr<const LinearOperator<S>> b, bt;
  DenseMatrix<S> c, ct, f, ft;
};

/// The augmented pair B = (I - C Dc^{-1} Ct*) A and Bt = (I - Ct Dc^{-1} C*) A*,
/// with F = A* Ct Dc^{-1} and Ft = A C Dc^{-1}. `op` must outlive the harness.
template <Scalar S>
GenBiLanczosHarness<S> augmented_harness(const LinearOperator<S> &op, const RecycleSpace<S> &space);

/// The classical pair B = A, Bt = A* (no correction terms).
template <Scalar S>
GenBiLanczosHarness<S> classical_harness(const LinearOperator<S> &op);

/// Relative residuals of the three harness conditions for given starting vectors.
struct HarnessConditions
{
  double a = 0.0;       ///< ||(B - Bt* - Ft Ct* + C F*) x|| / (||B|| ||x||), sampled
  double b = 0.0;       ///< max of ||Ct* B x||, ||C* Bt xt|| relative, sampled
  double c = 0.0;       ///< max of ||Ct* v1||, ||C* vt1|| relative
};

template <Scalar S>
HarnessConditions check_conditions(const GenBiLanczosHarness<S> &h, const Vector<S> &v1, const Vector<S> &vt1,
                                   int probes = 4, std::uint64_t seed = 1);

/// Scales (v, vt) so that ||v|| = 1 and (vt, v) = 1.
template <Scalar S>
std::pair<Vector<S>, Vector<S>> normalize_starts(const Vector<S> &v, const Vector<S> &vt);

/// Projected starting vectors v1 ~ (I - C chat*) r0, vt1 ~ (I - Ct ccheck*) rt0, normalized.
template <Scalar S>
std::pair<Vector<S>, Vector<S>> augmented_starts(const RecycleSpace<S> &space, const Vector<S> &r0,
                                                 const Vector<S> &rt0);

enum class LanczosStop
{
  completed,
  invariant_subspace,
  breakdown,
};

template <Scalar S>
struct GenBiLanczosResult
{
  DenseMatrix<S> v, vt; ///< n x (steps + 1)
  DenseMatrix<S> h, ht; ///< (steps + 1) x steps, upper Hessenberg
  int steps = 0;
  LanczosStop stop = LanczosStop::completed;
  std::string message;

  /// max |h(i, j)| over j > i + 1, relative to ||H||_F (square part).
  double off_band() const;
  /// max |H - Ht*| over the square part, relative to ||H||_F.
  double adjoint_mismatch() const;
};

/// Runs m steps of the full (long) recurrences B V = V_+ H, Bt Vt = Vt_+ Ht with
/// Vt* V = I and unit-norm v. Every coefficient against every previous vector is
/// computed, so the banded structure is observed rather than assumed.
template <Scalar S>
GenBiLanczosResult<S> gen_bilanczos_full(const GenBiLanczosHarness<S> &h, const Vector<S> &v1, const Vector<S> &vt1,
                                         int m, double breakdown_tol = 1e-14);

} // namespace rkrylov
