// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rkrylov {

struct SolverConfig
{
  /// Relative residual target, measured against the norm of the right-hand side.
  double tol = 1e-8;
  int max_itn = 1000;
  /// Recycle dimension.
  int k = 0;
  /// Cycle length in iterations for recycle-space harvesting.
  int s = 25;
  std::uint64_t seed = 0;
  /// Breakdown is declared when |(x, y)| <= breakdown_tol * ||x|| ||y||.
  double breakdown_tol = 1e-14;
  /// Continue from the current iterate when the explicit residual misses tol.
  int max_restarts = 3;

  /// Throws std::invalid_argument on nonsensical values.
  void validate() const;
};

enum class SolveStatus
{
  converged,
  max_iterations,
  serious_breakdown,
  second_kind_breakdown,
  omega_breakdown,
  shadow_breakdown,
};

std::string_view to_string(SolveStatus status);

struct IterationRecord
{
  int iteration = 0;
  /// Recursively updated relative residual.
  double residual = 0.0;
  /// Explicit relative residual, when it was computed.
  std::optional<double> true_residual;
  long matvecs = 0;
  double seconds = 0.0;
};

struct ConvergenceHistory
{
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::max_iterations;
  std::string message;
  /// Explicit relative residual of the returned solution.
  double true_residual = 0.0;
  /// Relative residual of the dual system (two-sided solvers only).
  std::optional<double> dual_residual;

  bool converged() const { return status == SolveStatus::converged; }
  int iterations() const { return records.empty() ? 0 : records.back().iteration; }
  long matvecs() const { return records.empty() ? 0 : records.back().matvecs; }
  double seconds() const { return records.empty() ? 0.0 : records.back().seconds; }
};

/// Per-system histories from one solver track.
struct RunReport
{
  std::string solver;
  std::vector<ConvergenceHistory> systems;

  long total_matvecs() const;
  double total_seconds() const;
  bool all_converged() const;
};

/// Monotonic stopwatch.
class Stopwatch
{
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

} // namespace rkrylov
