// SPDX-License-Identifier: Apache-2.0

#include "rkrylov/workflow.hpp"

#include <stdexcept>

#include "rkrylov/eigen_oracle.hpp"

namespace rkrylov {

namespace {

// Charges setup work done before a solve to every record of its history.
void charge(ConvergenceHistory &h, long matvecs, double seconds)
{
  for (IterationRecord &rec : h.records) {
    rec.matvecs += matvecs;
    rec.seconds += seconds;
  }
}

} // namespace

PreparedSequence prepare_sequence(const ParametricSequence &sequence, const SequencePolicyOptions &options)
{
  PreparedSequence out;
  out.sequence = &sequence;
  for (int i = 0; i < sequence.num_matrices(); ++i) {
    out.matrices.push_back(sequence.matrix(i));
    if (options.precondition)
      out.factors.emplace_back(ilutp_factor(out.matrices.back(), options.ilutp));
    else
      out.factors.emplace_back(std::nullopt);
  }
  return out;
}

SequenceRun run_sequence_baseline(const PreparedSequence &prepared, const SequencePolicyOptions &options)
{
  const ParametricSequence &seq = *prepared.sequence;
  SequenceRun run;
  run.report.solver = "bicgstab";
  const Vector<double> zero = Vector<double>::Zero(seq.size());
  for (int m = 0; m < seq.num_matrices(); ++m) {
    const IlutpFactors<double> *f = prepared.factors[m] ? &*prepared.factors[m] : nullptr;
    for (const Vector<double> &b : seq.rhs[m])
      run.report.systems.push_back(bicgstab_solve(prepared.matrices[m], b, zero, f, options.solver).history);
  }
  return run;
}

SequenceRun run_sequence_recycling(const PreparedSequence &prepared, const SequencePolicyOptions &options,
                                   const RecycleSpace<double> *initial)
{
  const ParametricSequence &seq = *prepared.sequence;
  const Index n = seq.size();
  const int k = options.solver.k;
  SequenceRun run;
  run.report.solver = "rbicg+rbicgstab";
  std::optional<RecycleSpace<double>> space;
  if (initial && !initial->empty())
    space = *initial;
  const Vector<double> ones = Vector<double>::Ones(n);
  int system = 0;
  for (int m = 0; m < seq.num_matrices(); ++m) {
    const IlutpFactors<double> *f = prepared.factors[m] ? &*prepared.factors[m] : nullptr;
    PreconditionedSystem<double> sys(prepared.matrices[m], f);
    const Vector<double> zero = Vector<double>::Zero(n);
    for (std::size_t j = 0; j < seq.rhs[m].size(); ++j, ++system) {
      const Vector<double> rhs = sys.rhs(seq.rhs[m][j]);
      if (j == 0) {
        // new matrix: carry the old U, Ut over and harvest a fresh space with RBiCG
        Stopwatch setup;
        long setup_matvecs = 0;
        if (space) {
          *space = refresh_images(*space, sys.op(), default_rank_tol, default_min_cosine);
          setup_matvecs = 2 * static_cast<long>(space->u.cols());
        }
        const double setup_seconds = setup.seconds();
        RecycleAccumulator<double> acc(n, k, space);
        const RecycleSpace<double> none = RecycleSpace<double>::none(n);
        DualSolveResult<double> res =
            rbicg<double>(sys.op(), rhs, sys.rhs_dual(ones), zero, zero, space ? *space : none, options.solver, {},
                  [&acc](CapturedCycle<double> &&cycle) { acc.absorb(cycle); });
        if (k > 0) {
          RecycleSpace<double> next = acc.current();
          if (!next.empty())
            space = std::move(next);
        }
        for (const std::string &w : acc.warnings())
          run.warnings.push_back("system " + std::to_string(system + 1) + ": " + w);
        charge(res.history, setup_matvecs, setup_seconds);
        run.report.systems.push_back(std::move(res.history));
        run.rebuild_systems.push_back(system);
      } else {
        const RecycleSpace<double> none = RecycleSpace<double>::none(n);
        run.report.systems.push_back(
            rbicgstab(sys.op(), rhs, zero, space ? *space : none, options.solver).history);
      }
    }
  }
  run.final_space = std::move(space);
  return run;
}

StudyResult example1_study(const Example1StudyOptions &options)
{
  const GridProblem grid = example1_operator(options.problem);
  const MatrixOperator<double> op(grid.a);
  const Index n = grid.a.rows();
  StudyResult out;
  const EigenPairs pairs = smallest_eigenpairs<double>(grid.a.to_dense(), options.k);
  out.right_basis = eigenbasis<double>(pairs.right, pairs.values);
  out.left_basis = eigenbasis<double>(pairs.left, pairs.values.conjugate());

  const Vector<double> x0 = Vector<double>::Ones(n);
  out.baseline.solver = "bicgstab";
  out.baseline.systems.push_back(bicgstab(op, grid.rhs, x0, options.solver).history);
  const RecycleSpace<double> right = biorthonormalize<double>(out.right_basis, out.right_basis, op);
  out.right_only.solver = "rbicgstab-right";
  out.right_only.systems.push_back(rbicgstab(op, grid.rhs, x0, right, options.solver).history);
  const RecycleSpace<double> both = biorthonormalize<double>(out.right_basis, out.left_basis, op);
  out.left_right.solver = "rbicgstab-left-right";
  out.left_right.systems.push_back(rbicgstab(op, grid.rhs, x0, both, options.solver).history);
  return out;
}

StudyResult example2_study(const Example2StudyOptions &options)
{
  const Example2Problem problem = example2_operator(options.problem);
  const PreconditionedSystem<double> sys(problem.grid.a, &problem.factors);
  const Index n = problem.grid.a.rows();
  const Vector<double> rhs = sys.rhs(problem.grid.rhs);
  const Vector<double> x0 = sys.to_inner(Vector<double>::Constant(n, 0.5));
  SolverConfig harvest = options.solver;
  harvest.k = options.k;

  // the dual right-hand side is the initial residual, the usual BiCG shadow choice
  std::optional<RecycleSpace<double>> space;
  const Vector<double> dual = rhs - sys.op()(x0);
  for (int i = 0; i < options.harvest_solves; ++i) {
    RecycleAccumulator<double> acc(n, options.k, space);
    const RecycleSpace<double> none = RecycleSpace<double>::none(n);
    rbicg<double>(sys.op(), rhs, dual, x0, Vector<double>::Zero(n), space ? *space : none, harvest, {},
                  [&acc](CapturedCycle<double> &&cycle) { acc.absorb(cycle); });
    // tracked images drift when the Lanczos vectors lose bi-orthogonality; recompute them
    space = acc.finish(sys.op());
  }
  if (!space || space->empty())
    throw std::runtime_error("example2_study: harvesting produced an empty recycle space");

  StudyResult out;
  out.right_basis = space->u;
  out.left_basis = space->ut;
  out.baseline.solver = "bicgstab";
  out.baseline.systems.push_back(bicgstab(sys.op(), rhs, x0, options.solver).history);
  const RecycleSpace<double> right = biorthonormalize<double>(space->u, space->u, sys.op());
  out.right_only.solver = "rbicgstab-right";
  out.right_only.systems.push_back(rbicgstab(sys.op(), rhs, x0, right, options.solver).history);
  out.left_right.solver = "rbicgstab-left-right";
  out.left_right.systems.push_back(rbicgstab(sys.op(), rhs, x0, *space, options.solver).history);
  return out;
}

} // namespace rkrylov
