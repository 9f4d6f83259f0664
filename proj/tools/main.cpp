// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rkrylov/eigen_oracle.hpp"
#include "rkrylov/io.hpp"
#include "rkrylov/workflow.hpp"

using namespace rkrylov;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_unconverged = 2;

enum class Method
{
  bicg,
  bicgstab,
  rbicg,
  rbicgstab,
};

enum class Start
{
  zeros,
  ones,
  half,
  file,
};

const std::map<std::string, Method> method_names{
    {"bicg", Method::bicg}, {"bicgstab", Method::bicgstab}, {"rbicg", Method::rbicg}, {"rbicgstab", Method::rbicgstab}};

const std::map<std::string, Start> start_names{
    {"zeros", Start::zeros}, {"ones", Start::ones}, {"half", Start::half}, {"file", Start::file}};

struct Common
{
  SolverConfig solver;
  std::string history_out;
};

void add_solver_flags(CLI::App *cmd, Common &c)
{
  cmd->add_option("--tol", c.solver.tol, "relative residual tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-itn", c.solver.max_itn, "iteration limit per solve")->check(CLI::PositiveNumber);
  cmd->add_option("--k", c.solver.k, "recycle dimension")->check(CLI::NonNegativeNumber);
  cmd->add_option("--s", c.solver.s, "cycle length for recycle harvesting")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.solver.seed, "seed for shadow vectors and generated data");
  cmd->add_option("--history-out", c.history_out, "write convergence histories as CSV");
}

Vector<double> initial_guess(Start start, const std::string &file, Index n)
{
  switch (start) {
  case Start::zeros:
    return Vector<double>::Zero(n);
  case Start::ones:
    return Vector<double>::Ones(n);
  case Start::half:
    return Vector<double>::Constant(n, 0.5);
  case Start::file: {
    if (file.empty())
      throw CLI::ValidationError("--x0 file requires --x0-file");
    Vector<double> x = mm_read_vector<double>(file);
    if (x.size() != n)
      throw CLI::ValidationError("--x0-file has length " + std::to_string(x.size()) + ", expected " +
                                 std::to_string(n));
    return x;
  }
  }
  return Vector<double>::Zero(n);
}

void print_history(const std::string &label, const ConvergenceHistory &h)
{
  std::printf("%-22s status=%s iterations=%d matvecs=%ld true_resid=%.3e seconds=%.3f\n", label.c_str(),
              std::string(to_string(h.status)).c_str(), h.iterations(), h.matvecs(), h.true_residual, h.seconds());
  if (!h.message.empty())
    std::printf("%-22s note: %s\n", "", h.message.c_str());
}

int status_code(bool converged) { return converged ? exit_ok : exit_unconverged; }

// ---------------------------------------------------------------------------

struct SolveArgs
{
  Common common;
  std::string matrix, rhs, dual_rhs, solution_out, x0_file, recycle_in, recycle_out;
  Method method = Method::bicgstab;
  Start x0 = Start::zeros;
  bool ilutp = false;
  IlutpOptions ilu;
};

int run_solve(const SolveArgs &args)
{
  const SparseMatrix<double> a = mm_read<double>(args.matrix);
  if (a.rows() != a.cols())
    throw CLI::ValidationError("matrix is not square");
  const Index n = a.rows();
  const Vector<double> b = args.rhs.empty() ? Vector<double>(Vector<double>::Ones(n)) : mm_read_vector<double>(args.rhs);
  if (b.size() != n)
    throw CLI::ValidationError("right-hand side length does not match the matrix");
  const Vector<double> b_dual =
      args.dual_rhs.empty() ? Vector<double>(Vector<double>::Ones(n)) : mm_read_vector<double>(args.dual_rhs);
  const Vector<double> x_init = initial_guess(args.x0, args.x0_file, n);

  std::optional<IlutpFactors<double>> factors;
  if (args.ilutp)
    factors = ilutp_factor(a, args.ilu);
  const IlutpFactors<double> *f = factors ? &*factors : nullptr;
  const PreconditionedSystem<double> sys(a, f);

  RecycleSpace<double> space = RecycleSpace<double>::none(n);
  if (!args.recycle_in.empty())
    space = recycle_load<double>(args.recycle_in, sys.op());

  if (!args.recycle_out.empty() && args.method != Method::rbicg && space.empty())
    throw CLI::ValidationError("--recycle-out needs --method rbicg or a --recycle-in space");

  SolverConfig config = args.common.solver;
  Vector<double> x;
  ConvergenceHistory history;
  std::string label;
  switch (args.method) {
  case Method::bicgstab: {
    auto res = bicgstab_solve<double>(a, b, x_init, f, config);
    x = std::move(res.x);
    history = std::move(res.history);
    label = "bicgstab";
    break;
  }
  case Method::rbicgstab: {
    auto res = rbicgstab_solve<double>(a, b, x_init, space, f, config);
    x = std::move(res.x);
    history = std::move(res.history);
    label = "rbicgstab";
    break;
  }
  case Method::bicg: {
    auto res = bicg_solve<double>(a, b, b_dual, x_init, Vector<double>::Zero(n), f, config);
    x = std::move(res.x);
    history = std::move(res.history);
    label = "bicg";
    break;
  }
  case Method::rbicg: {
    std::optional<RecycleSpace<double>> previous;
    if (!space.empty())
      previous = space;
    RecycleAccumulator<double> acc(n, config.k, previous);
    auto res = rbicg<double>(sys.op(), sys.rhs(b), sys.rhs_dual(b_dual), sys.to_inner(x_init),
                             sys.to_inner_dual(Vector<double>::Zero(n)), space, config, {},
                             [&acc](CapturedCycle<double> &&cycle) { acc.absorb(cycle); });
    x = sys.to_outer(res.x);
    history = std::move(res.history);
    label = "rbicg";
    if (!args.recycle_out.empty()) {
      const RecycleSpace<double> next = acc.finish(sys.op());
      recycle_save(args.recycle_out, next);
      std::printf("recycle space: k=%lld written to %s\n", static_cast<long long>(next.k()), args.recycle_out.c_str());
    }
    break;
  }
  }
  if (!args.recycle_out.empty() && args.method != Method::rbicg)
    recycle_save(args.recycle_out, space);
  const double true_resid = (b - matvec(a, x)).norm() / b.norm();
  print_history(label, history);
  std::printf("unpreconditioned relative residual %.3e\n", true_resid);
  if (!args.solution_out.empty())
    mm_write_vector(args.solution_out, x);
  if (!args.common.history_out.empty())
    history_write(args.common.history_out, RunReport{label, {history}});
  return status_code(history.converged());
}

// ---------------------------------------------------------------------------

int report_study(const StudyResult &study, const std::string &history_out)
{
  print_history("no recycling", study.baseline.systems.front());
  print_history("right only", study.right_only.systems.front());
  print_history("left and right", study.left_right.systems.front());
  // One CSV per variant: out.csv -> out-baseline.csv, out-right.csv, out-left-right.csv.
  if (!history_out.empty()) {
    const std::filesystem::path base(history_out);
    const auto variant = [&base](const std::string &tag) {
      return base.parent_path() / (base.stem().string() + "-" + tag + base.extension().string());
    };
    history_write(variant("baseline"), study.baseline);
    history_write(variant("right"), study.right_only);
    history_write(variant("left-right"), study.left_right);
  }
  return status_code(study.baseline.all_converged() && study.right_only.all_converged() &&
                     study.left_right.all_converged());
}

struct Example1Args
{
  Common common;
  Example1StudyOptions options;
};

struct Example2Args
{
  Common common;
  Example2StudyOptions options;
};

// ---------------------------------------------------------------------------

struct SequenceArgs
{
  Common common;
  SequenceOptions sequence;
  SequencePolicyOptions policy;
  std::string recycle_in, recycle_out;
};

int run_sequence(SequenceArgs args)
{
  args.policy.solver = args.common.solver;
  args.sequence.seed = args.common.solver.seed;
  const ParametricSequence seq = synthetic_sequence(args.sequence);
  const PreparedSequence prepared = prepare_sequence(seq, args.policy);

  std::optional<RecycleSpace<double>> initial;
  if (!args.recycle_in.empty()) {
    const IlutpFactors<double> *f = prepared.factors.front() ? &*prepared.factors.front() : nullptr;
    const PreconditionedSystem<double> sys(prepared.matrices.front(), f);
    initial = recycle_load<double>(args.recycle_in, sys.op());
  }

  const SequenceRun base = run_sequence_baseline(prepared, args.policy);
  const SequenceRun rec = run_sequence_recycling(prepared, args.policy, initial ? &*initial : nullptr);

  std::printf("%6s %10s %10s\n", "system", "bicgstab", "recycling");
  for (std::size_t i = 0; i < base.report.systems.size(); ++i)
    std::printf("%6zu %10ld %10ld\n", i + 1, base.report.systems[i].matvecs(), rec.report.systems[i].matvecs());
  const long tb = base.report.total_matvecs(), tr = rec.report.total_matvecs();
  std::printf("total matvecs: bicgstab %ld, recycling %ld (%.1f%% fewer)\n", tb, tr,
              100.0 * static_cast<double>(tb - tr) / static_cast<double>(tb));
  std::printf("total seconds: bicgstab %.3f, recycling %.3f\n", base.report.total_seconds(),
              rec.report.total_seconds());
  for (const std::string &w : rec.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (!args.common.history_out.empty())
    history_write(args.common.history_out, {base.report, rec.report});
  if (!args.recycle_out.empty() && rec.final_space)
    recycle_save(args.recycle_out, *rec.final_space);
  return status_code(base.report.all_converged() && rec.report.all_converged());
}

// ---------------------------------------------------------------------------

struct AnglesArgs
{
  std::string problem = "example1";
  Index dims = 10;
  Example1Options example1;
  Index gridlines = 33;
};

int run_angles(const AnglesArgs &args)
{
  EigenPairs pairs;
  if (args.problem == "example1") {
    const GridProblem grid = example1_operator(args.example1);
    pairs = smallest_eigenpairs<double>(grid.a.to_dense(), args.dims);
  } else {
    Example2Options opt = Example2Options::defaults();
    opt.gridlines = args.gridlines;
    const Example2Problem p = example2_operator(opt);
    const SplitPreconditionedOperator<double> op(p.grid.a, p.factors);
    pairs = smallest_eigenpairs<double>(op, args.dims);
  }
  const Index d = std::min<Index>(args.dims, pairs.values.size());
  const DenseMatrix<double> right = eigenbasis<double>(pairs.right.leftCols(d), pairs.values.head(d));
  const DenseMatrix<double> left = eigenbasis<double>(pairs.left.leftCols(d), pairs.values.head(d).conjugate());
  const std::vector<double> cosines = principal_angle_cosines<double>(right, left);
  std::printf("%-4s %-10s %s\n", "i", "cosine", "eigenvalue");
  for (std::size_t i = 0; i < cosines.size(); ++i) {
    const auto lambda = pairs.values[static_cast<Index>(i)];
    std::printf("%-4zu %-10.4f %.6g%+.6gi\n", i + 1, cosines[i], lambda.real(), lambda.imag());
  }
  return exit_ok;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Recycling BiCG / BiCGSTAB solvers"};
  app.require_subcommand(1);

  SolveArgs solve;
  solve.common.solver.max_itn = 5000;
  CLI::App *cmd_solve = app.add_subcommand("solve", "solve one Matrix Market system");
  cmd_solve->add_option("matrix", solve.matrix, "Matrix Market matrix")->required()->check(CLI::ExistingFile);
  cmd_solve->add_option("--rhs", solve.rhs, "right-hand side vector (default: ones)")->check(CLI::ExistingFile);
  cmd_solve->add_option("--dual-rhs", solve.dual_rhs, "dual right-hand side for bicg/rbicg (default: ones)")
      ->check(CLI::ExistingFile);
  cmd_solve->add_option("--method", solve.method, "solver")->transform(CLI::CheckedTransformer(method_names));
  cmd_solve->add_option("--x0", solve.x0, "initial guess")->transform(CLI::CheckedTransformer(start_names));
  cmd_solve->add_option("--x0-file", solve.x0_file, "initial guess vector for --x0 file");
  cmd_solve->add_flag("--ilutp", solve.ilutp, "split-precondition with ILUTP");
  cmd_solve->add_option("--drop-tol", solve.ilu.drop_tol, "ILUTP drop tolerance")->check(CLI::NonNegativeNumber);
  cmd_solve->add_option("--pivot-tol", solve.ilu.pivot_tol, "ILUTP pivot tolerance")->check(CLI::NonNegativeNumber);
  cmd_solve->add_option("--max-fill", solve.ilu.max_fill, "ILUTP fill per row in L and U (negative: unlimited)");
  cmd_solve->add_option("--recycle-in", solve.recycle_in, "recycle space file")->check(CLI::ExistingFile);
  cmd_solve->add_option("--recycle-out", solve.recycle_out, "write the recycle space after the solve");
  cmd_solve->add_option("--solution-out", solve.solution_out, "write the solution vector");
  add_solver_flags(cmd_solve, solve.common);

  Example1Args ex1;
  ex1.common.solver = ex1.options.solver;
  Start ex1_start = Start::ones;
  CLI::App *cmd_ex1 = app.add_subcommand("example1", "no recycling vs right-only vs left-and-right, exact eigenvectors");
  cmd_ex1->add_option("--cells", ex1.options.problem.cells, "grid lines per side")->check(CLI::Range(3, 1000));
  cmd_ex1->add_option("--x0", ex1_start, "initial guess (ones only)")->transform(CLI::CheckedTransformer(start_names));
  add_solver_flags(cmd_ex1, ex1.common);
  ex1.common.solver.k = ex1.options.k;

  Example2Args ex2;
  ex2.common.solver = ex2.options.solver;
  CLI::App *cmd_ex2 = app.add_subcommand("example2", "no recycling vs right-only vs left-and-right, harvested spaces");
  cmd_ex2->add_option("--gridlines", ex2.options.problem.gridlines, "grid lines per side")->check(CLI::Range(5, 2000));
  cmd_ex2->add_option("--drop-tol", ex2.options.problem.ilutp.drop_tol, "ILUTP drop tolerance");
  cmd_ex2->add_option("--pivot-tol", ex2.options.problem.ilutp.pivot_tol, "ILUTP pivot tolerance");
  cmd_ex2->add_option("--harvest-solves", ex2.options.harvest_solves, "RBiCG solves used to build the space")
      ->check(CLI::PositiveNumber);
  add_solver_flags(cmd_ex2, ex2.common);

  SequenceArgs seq;
  seq.common.solver = seq.policy.solver;
  CLI::App *cmd_seq = app.add_subcommand("sequence", "RBiCG/RBiCGSTAB policy vs BiCGSTAB on a synthetic sequence");
  cmd_seq->add_option("--n", seq.sequence.n, "system size")->check(CLI::Range(10, 10000000));
  cmd_seq->add_option("--matrices", seq.sequence.num_matrices, "number of matrices")->check(CLI::PositiveNumber);
  cmd_seq->add_option("--rhs-per", seq.sequence.rhs_per_matrix, "right-hand sides per matrix")
      ->check(CLI::PositiveNumber);
  cmd_seq->add_option("--scale", seq.sequence.perturbation_scale, "perturbation scale")
      ->check(CLI::NonNegativeNumber);
  cmd_seq->add_option("--drop-tol", seq.policy.ilutp.drop_tol, "ILUTP drop tolerance");
  cmd_seq->add_option("--pivot-tol", seq.policy.ilutp.pivot_tol, "ILUTP pivot tolerance");
  cmd_seq->add_option("--max-fill", seq.policy.ilutp.max_fill, "ILUTP fill per row in L and U (negative: unlimited)");
  cmd_seq->add_flag("!--no-precond", seq.policy.precondition, "solve without ILUTP");
  cmd_seq->add_option("--recycle-in", seq.recycle_in, "initial recycle space for the first matrix")
      ->check(CLI::ExistingFile);
  cmd_seq->add_option("--recycle-out", seq.recycle_out, "write the final recycle space");
  add_solver_flags(cmd_seq, seq.common);

  AnglesArgs angles;
  CLI::App *cmd_angles = app.add_subcommand("angles", "principal angles between left and right invariant subspaces");
  cmd_angles->add_option("--problem", angles.problem, "example1 or example2")
      ->check(CLI::IsMember({"example1", "example2"}));
  cmd_angles->add_option("--dims", angles.dims, "subspace dimension")->check(CLI::PositiveNumber);
  cmd_angles->add_option("--cells", angles.example1.cells, "example1 grid lines per side")->check(CLI::Range(3, 1000));
  cmd_angles->add_option("--gridlines", angles.gridlines, "example2 grid lines per side")->check(CLI::Range(5, 2000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*cmd_solve)
      return run_solve(solve);
    if (*cmd_ex1) {
      if (ex1_start != Start::ones)
        throw CLI::ValidationError("example1 uses the all-ones initial guess");
      ex1.options.solver = ex1.common.solver;
      ex1.options.k = ex1.common.solver.k;
      return report_study(example1_study(ex1.options), ex1.common.history_out);
    }
    if (*cmd_ex2) {
      ex2.options.solver = ex2.common.solver;
      ex2.options.k = ex2.common.solver.k;
      return report_study(example2_study(ex2.options), ex2.common.history_out);
    }
    if (*cmd_seq)
      return run_sequence(seq);
    if (*cmd_angles)
      return run_angles(angles);
  } catch (const CLI::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const MatrixMarketError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const FileError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const RecycleFileError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}
