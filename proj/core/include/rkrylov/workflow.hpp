// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rkrylov/problems.hpp"
#include "rkrylov/solvers.hpp"

namespace rkrylov {

struct SequencePolicyOptions
{
  SolverConfig solver{.tol = 1e-8, .max_itn = 2000, .k = 20, .s = 25};
  // With unlimited fill the factors are nearly exact and the recurrences break down.
  IlutpOptions ilutp{1e-4, 0.1, 2};
  bool precondition = true;
};

/// Matrices of a sequence with their (optional) ILUTP factors, built once and
/// shared read-only by every solver track.
struct PreparedSequence
{
  const ParametricSequence *sequence = nullptr;
  std::vector<SparseMatrix<double>> matrices;
  std::vector<std::optional<IlutpFactors<double>>> factors;
};

PreparedSequence prepare_sequence(const ParametricSequence &sequence, const SequencePolicyOptions &options);

struct SequenceRun
{
  RunReport report;
  /// Zero-based indices of the systems solved with RBiCG.
  std::vector<int> rebuild_systems;
  std::vector<std::string> warnings;
  std::optional<RecycleSpace<double>> final_space;
};

/// BiCGSTAB on every system, zero initial guess.
SequenceRun run_sequence_baseline(const PreparedSequence &prepared, const SequencePolicyOptions &options);

/// RBiCG on the first system of each matrix (dual right-hand side of ones,
/// recycle space rebuilt from its cycles on top of the previous one), RBiCGSTAB
/// on the others. Image refreshes for a new matrix are charged to that system.
SequenceRun run_sequence_recycling(const PreparedSequence &prepared, const SequencePolicyOptions &options,
                                   const RecycleSpace<double> *initial = nullptr);

/// Three-way comparison: no recycling, U only (Ut = U), and U with Ut.
struct StudyResult
{
  RunReport baseline, right_only, left_right;
  DenseMatrix<double> right_basis, left_basis;
};

struct Example1StudyOptions
{
  Example1Options problem;
  int k = 5;
  SolverConfig solver{.tol = 1e-10, .max_itn = 5000};
};

/// Exact smallest-magnitude eigenvectors from the dense oracle; initial guess of ones.
StudyResult example1_study(const Example1StudyOptions &options);

struct Example2StudyOptions
{
  Example2Options problem = Example2Options::defaults();
  int k = 20;
  /// Number of RBiCG solves used to harvest the recycle space.
  int harvest_solves = 2;
  SolverConfig solver{.tol = 1e-8, .max_itn = 5000, .k = 20, .s = 25};
};

/// Approximate invariant subspaces harvested from repeated RBiCG solves of the
/// split-preconditioned system; initial guess 0.5 times ones.
StudyResult example2_study(const Example2StudyOptions &options);

} // namespace rkrylov
