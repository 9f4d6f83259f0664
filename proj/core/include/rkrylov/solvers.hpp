// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "rkrylov/history.hpp"
#include "rkrylov/ilutp.hpp"
#include "rkrylov/recycle_space.hpp"

namespace rkrylov {

/// State exposed to an observer after every iteration.
///
/// `x` is the iterate before the recycle correction; the solution estimate is
/// x - U * correction. Pointers are null when a solver has no such quantity.
template <Scalar S>
struct IterationSnapshot
{
  int iteration = 0;
  const Vector<S> *x = nullptr;
  const Vector<S> *r = nullptr;
  const Vector<S> *correction = nullptr;
  const Vector<S> *x_dual = nullptr;
  const Vector<S> *r_dual = nullptr;
  const Vector<S> *correction_dual = nullptr;
  const Vector<S> *s = nullptr;
  const Vector<S> *t = nullptr;
  const Vector<S> *shadow = nullptr;
  S alpha{};
  S beta{};
  S omega{};
  /// True when the iteration ended at the half step (s already small enough).
  bool half_step = false;
};

template <Scalar S>
using IterationObserver = std::function<void(const IterationSnapshot<S> &)>;

template <Scalar S>
using CycleSink = std::function<void(CapturedCycle<S> &&)>;

template <Scalar S>
struct SolveResult
{
  Vector<S> x;
  ConvergenceHistory history;
};

template <Scalar S>
struct DualSolveResult
{
  Vector<S> x;
  Vector<S> x_dual;
  ConvergenceHistory history;
  /// Harvested cycles, unless they were handed to a CycleSink.
  std::vector<CapturedCycle<S>> cycles;
};

/// Uniform(-1, 1) entries (real and imaginary parts for complex S).
template <Scalar S>
Vector<S> random_vector(Index n, std::uint64_t seed);

// Solvers on an abstract operator. Convergence: ||r|| <= tol ||b||.

template <Scalar S>
SolveResult<S> bicgstab(const LinearOperator<S> &op, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &x0,
                        const SolverConfig &config, const NoDeduce<IterationObserver<S>> &observe = {});

template <Scalar S>
DualSolveResult<S> bicg(const LinearOperator<S> &op, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &b_dual,
                        const NoDeduce<Vector<S>> &x0, const NoDeduce<Vector<S>> &x0_dual, const SolverConfig &config,
                        const NoDeduce<IterationObserver<S>> &observe = {});

/// Recycling BiCG. Direction and Lanczos blocks are harvested every config.s
/// iterations (plus a final partial cycle) and passed to `sink`, or returned
/// in the result when `sink` is empty.
template <Scalar S>
DualSolveResult<S> rbicg(const LinearOperator<S> &op, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &b_dual,
                         const NoDeduce<Vector<S>> &x0, const NoDeduce<Vector<S>> &x0_dual, const NoDeduce<RecycleSpace<S>> &space,
                         const SolverConfig &config, const NoDeduce<IterationObserver<S>> &observe = {},
                         const NoDeduce<CycleSink<S>> &sink = {});

/// Recycling BiCGSTAB. The shadow residual is drawn from config.seed.
template <Scalar S>
SolveResult<S> rbicgstab(const LinearOperator<S> &op, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &x0,
                         const NoDeduce<RecycleSpace<S>> &space, const SolverConfig &config,
                         const NoDeduce<IterationObserver<S>> &observe = {});

/// Original and split-preconditioned coordinates of one system.
///
/// With factors A P ~ L U the solver works on L^{-1} A P U^{-1} y = L^{-1} b
/// and x = P U^{-1} y. The dual system A* xt = bt becomes
/// (L^{-1} A P U^{-1})* yt = U^{-*} P^T bt with xt = L^{-*} yt.
template <Scalar S>
class PreconditionedSystem
{
public:
  PreconditionedSystem(const SparseMatrix<S> &a, const IlutpFactors<S> *factors);

  const LinearOperator<S> &op() const { return *op_; }
  bool preconditioned() const { return factors_ != nullptr; }

  Vector<S> rhs(const Vector<S> &b) const;
  Vector<S> to_inner(const Vector<S> &x) const;
  Vector<S> to_outer(const Vector<S> &y) const;
  Vector<S> rhs_dual(const Vector<S> &b) const;
  Vector<S> to_inner_dual(const Vector<S> &x) const;
  Vector<S> to_outer_dual(const Vector<S> &y) const;

private:
  const SparseMatrix<S> *a_;
  const IlutpFactors<S> *factors_;
  std::unique_ptr<LinearOperator<S>> op_;
};

// Matrix front ends. `precond` may be null; when given, the recurrences run
// on the split-preconditioned operator, convergence is declared on the
// preconditioned residual, and the returned solutions are in original
// variables. A recycle space must live in the coordinates of the operator
// the solver iterates on.

template <Scalar S>
SolveResult<S> bicgstab_solve(const SparseMatrix<S> &a, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &x_init,
                              const NoDeduce<IlutpFactors<S>> *precond, const SolverConfig &config);

template <Scalar S>
DualSolveResult<S> bicg_solve(const SparseMatrix<S> &a, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &b_dual,
                              const NoDeduce<Vector<S>> &x_init, const NoDeduce<Vector<S>> &x_init_dual, const NoDeduce<IlutpFactors<S>> *precond,
                              const SolverConfig &config);

template <Scalar S>
DualSolveResult<S> rbicg_solve(const SparseMatrix<S> &a, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &b_dual,
                               const NoDeduce<Vector<S>> &x_init, const NoDeduce<Vector<S>> &x_init_dual, const NoDeduce<RecycleSpace<S>> *recycle,
                               const NoDeduce<IlutpFactors<S>> *precond, const SolverConfig &config);

template <Scalar S>
SolveResult<S> rbicgstab_solve(const SparseMatrix<S> &a, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &x_init,
                               const NoDeduce<RecycleSpace<S>> &recycle, const NoDeduce<IlutpFactors<S>> *precond,
                               const SolverConfig &config);

} // namespace rkrylov
