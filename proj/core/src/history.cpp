// SPDX-License-Identifier: Apache-2.0

#include "rkrylov/history.hpp"

#include <numeric>
#include <stdexcept>

namespace rkrylov {

void SolverConfig::validate() const
{
  if (!(tol > 0))
    throw std::invalid_argument("SolverConfig: tol must be positive");
  if (max_itn <= 0)
    throw std::invalid_argument("SolverConfig: max_itn must be positive");
  if (k < 0)
    throw std::invalid_argument("SolverConfig: k must be nonnegative");
  if (s <= 0)
    throw std::invalid_argument("SolverConfig: s must be positive");
  if (!(breakdown_tol > 0))
    throw std::invalid_argument("SolverConfig: breakdown_tol must be positive");
  if (max_restarts < 0)
    throw std::invalid_argument("SolverConfig: max_restarts must be nonnegative");
}

std::string_view to_string(SolveStatus status)
{
  switch (status) {
  case SolveStatus::converged:
    return "converged";
  case SolveStatus::max_iterations:
    return "max_itn";
  case SolveStatus::serious_breakdown:
    return "serious_breakdown";
  case SolveStatus::second_kind_breakdown:
    return "second_kind_breakdown";
  case SolveStatus::omega_breakdown:
    return "omega_breakdown";
  case SolveStatus::shadow_breakdown:
    return "shadow_breakdown";
  }
  return "unknown";
}

long RunReport::total_matvecs() const
{
  return std::accumulate(systems.begin(), systems.end(), 0L,
                         [](long acc, const ConvergenceHistory &h) { return acc + h.matvecs(); });
}

double RunReport::total_seconds() const
{
  return std::accumulate(systems.begin(), systems.end(), 0.0,
                         [](double acc, const ConvergenceHistory &h) { return acc + h.seconds(); });
}

bool RunReport::all_converged() const
{
  for (const auto &h : systems)
    if (!h.converged())
      return false;
  return true;
}

} // namespace rkrylov
