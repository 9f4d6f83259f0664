// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "rkrylov/problems.hpp"
#include "rkrylov/solvers.hpp"

using namespace rkrylov;

namespace {

SparseMatrix<double> grid_matrix(Index side) { return convection_diffusion(side, side, 10.0, -10.0); }

void BM_Matvec(benchmark::State &state)
{
  const SparseMatrix<double> a = grid_matrix(state.range(0));
  const Vector<double> x = random_vector<double>(a.cols(), 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(matvec(a, x));
  state.SetItemsProcessed(state.iterations() * a.nnz());
}
BENCHMARK(BM_Matvec)->Arg(64)->Arg(256);

void BM_MatvecAdjoint(benchmark::State &state)
{
  const SparseMatrix<double> a = grid_matrix(state.range(0));
  const Vector<double> x = random_vector<double>(a.rows(), 1);
  // The transpose is built on first use and cached; keep that out of the timing.
  benchmark::DoNotOptimize(a.conj_transpose());
  for (auto _ : state)
    benchmark::DoNotOptimize(matvec_conj_transpose(a, x));
  state.SetItemsProcessed(state.iterations() * a.nnz());
}
BENCHMARK(BM_MatvecAdjoint)->Arg(64)->Arg(256);

void BM_Ilutp(benchmark::State &state)
{
  const SparseMatrix<double> a = grid_matrix(state.range(0));
  const IlutpOptions options{1e-4, 0.1, static_cast<int>(state.range(1))};
  for (auto _ : state)
    benchmark::DoNotOptimize(ilutp_factor(a, options));
}
BENCHMARK(BM_Ilutp)->Args({64, 2})->Args({64, -1})->Unit(benchmark::kMillisecond);

void BM_IlutpApply(benchmark::State &state)
{
  const SparseMatrix<double> a = grid_matrix(state.range(0));
  const IlutpFactors<double> f = ilutp_factor(a, IlutpOptions{1e-4, 0.1, 2});
  const SplitPreconditionedOperator<double> op(a, f);
  const Vector<double> x = random_vector<double>(a.cols(), 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(op(x));
}
BENCHMARK(BM_IlutpApply)->Arg(64)->Arg(256);

// Fixed iteration budget, so the time per solve is the time per iteration times max_itn.
void BM_BicgstabIterations(benchmark::State &state)
{
  const SparseMatrix<double> a = grid_matrix(state.range(0));
  const MatrixOperator<double> op(a);
  const Vector<double> b = random_vector<double>(a.rows(), 2);
  const Vector<double> x0 = Vector<double>::Zero(a.rows());
  const SolverConfig config{.tol = 1e-30, .max_itn = 50, .max_restarts = 0};
  for (auto _ : state)
    benchmark::DoNotOptimize(bicgstab<double>(op, b, x0, config));
  state.SetItemsProcessed(state.iterations() * config.max_itn);
}
BENCHMARK(BM_BicgstabIterations)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_RbicgstabIterations(benchmark::State &state)
{
  const SparseMatrix<double> a = grid_matrix(state.range(0));
  const MatrixOperator<double> op(a);
  const Index n = a.rows();
  const int k = static_cast<int>(state.range(1));
  DenseMatrix<double> u(n, k), ut(n, k);
  for (int j = 0; j < k; ++j) {
    u.col(j) = random_vector<double>(n, 10 + j);
    ut.col(j) = random_vector<double>(n, 100 + j);
  }
  const RecycleSpace<double> space = biorthonormalize<double>(u, ut, op);
  const Vector<double> b = random_vector<double>(n, 2);
  const Vector<double> x0 = Vector<double>::Zero(n);
  const SolverConfig config{.tol = 1e-30, .max_itn = 50, .k = k, .max_restarts = 0};
  for (auto _ : state)
    benchmark::DoNotOptimize(rbicgstab<double>(op, b, x0, space, config));
  state.SetItemsProcessed(state.iterations() * config.max_itn);
}
BENCHMARK(BM_RbicgstabIterations)->Args({64, 10})->Args({64, 20})->Unit(benchmark::kMillisecond);

void BM_RbicgHarvest(benchmark::State &state)
{
  const SparseMatrix<double> a = grid_matrix(state.range(0));
  const MatrixOperator<double> op(a);
  const Index n = a.rows();
  const Vector<double> b = random_vector<double>(n, 2);
  const Vector<double> bt = Vector<double>::Ones(n);
  const Vector<double> zero = Vector<double>::Zero(n);
  const SolverConfig config{.tol = 1e-30, .max_itn = 50, .k = 20, .s = 25, .max_restarts = 0};
  for (auto _ : state) {
    RecycleAccumulator<double> acc(n, config.k);
    rbicg<double>(op, b, bt, zero, zero, RecycleSpace<double>::none(n), config, {},
                  [&acc](CapturedCycle<double> &&c) { acc.absorb(c); });
    benchmark::DoNotOptimize(acc.current());
  }
}
BENCHMARK(BM_RbicgHarvest)->Arg(64)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
