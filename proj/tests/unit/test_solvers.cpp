// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "rkrylov/eigen_oracle.hpp"
#include "rkrylov/solvers.hpp"
#include "support.hpp"

using namespace rkrylov;
using namespace testing;

namespace {

// Textbook conjugate gradients, one iterate per step.
std::vector<Vector<double>> cg_iterates(const DenseMatrix<double> &a, const Vector<double> &b, int steps)
{
  std::vector<Vector<double>> xs;
  Vector<double> x = Vector<double>::Zero(b.size()), r = b, p = r;
  double rr = r.squaredNorm();
  for (int i = 0; i < steps && rr > 0; ++i) {
    const Vector<double> ap = a * p;
    const double alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    xs.push_back(x);
  }
  return xs;
}

template <class S>
Vector<S> dense_solve(const SparseMatrix<S> &a, const Vector<S> &b)
{
  return a.to_dense().partialPivLu().solve(b);
}

template <class S>
RecycleSpace<S> random_space(const LinearOperator<S> &op, int k, std::uint64_t seed)
{
  const Index n = op.size();
  return biorthonormalize<S>(dense_random<S>(n, k, seed), dense_random<S>(n, k, seed + 1), op);
}

struct Trace
{
  std::vector<Vector<double>> x, r, xt, rt;
};

IterationObserver<double> recorder(Trace &t)
{
  return [&t](const IterationSnapshot<double> &s) {
    Vector<double> x = *s.x;
    t.x.push_back(x);
    t.r.push_back(*s.r);
    if (s.x_dual) {
      t.xt.push_back(*s.x_dual);
      t.rt.push_back(*s.r_dual);
    }
  };
}

void check_same_trace(const Trace &a, const Trace &b, double tol)
{
  REQUIRE(a.x.size() == b.x.size());
  REQUIRE(!a.x.empty());
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    CHECK(rel_diff(a.x[i], b.x[i]) <= tol);
    CHECK(rel_diff(a.r[i], b.r[i]) <= tol);
  }
  for (std::size_t i = 0; i < a.xt.size(); ++i) {
    CHECK(rel_diff(a.xt[i], b.xt[i]) <= tol);
    CHECK(rel_diff(a.rt[i], b.rt[i]) <= tol);
  }
}

} // namespace

TEST_CASE("identity systems converge in one iteration")
{
  const auto id = SparseMatrix<double>::identity(9);
  const auto b = vector_random<double>(9, 1), bt = vector_random<double>(9, 2);
  const Vector<double> zero = Vector<double>::Zero(9);
  const SolverConfig config;

  const auto r1 = bicgstab_solve<double>(id, b, zero, nullptr, config);
  CHECK(r1.history.converged());
  CHECK(r1.history.iterations() == 1);
  CHECK(rel_diff(r1.x, b) <= 1e-15);

  const auto r2 = bicg_solve<double>(id, b, bt, zero, zero, nullptr, config);
  CHECK(r2.history.converged());
  CHECK(r2.history.iterations() == 1);
  CHECK(rel_diff(r2.x, b) <= 1e-15);
  CHECK(rel_diff(r2.x_dual, bt) <= 1e-15);

  const MatrixOperator<double> op(id);
  const auto space = random_space<double>(op, 3, 5);
  const auto r3 = rbicg_solve<double>(id, b, bt, zero, zero, &space, nullptr, config);
  CHECK(r3.history.converged());
  CHECK(r3.history.iterations() <= 1);
  CHECK(rel_diff(r3.x, b) <= 1e-14);
  const auto r4 = rbicgstab_solve<double>(id, b, zero, space, nullptr, config);
  CHECK(r4.history.converged());
  CHECK(r4.history.iterations() <= 1);
  CHECK(rel_diff(r4.x, b) <= 1e-14);
}

TEST_CASE("diagonally dominant 10x10 systems match a dense LU solve")
{
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = sparse_random<double>(10, 4, 6.0, seed);
    const auto b = vector_random<double>(10, seed + 10);
    const Vector<double> zero = Vector<double>::Zero(10);
    const Vector<double> exact = dense_solve(a, b);
    const SolverConfig config{.tol = 1e-10};
    CHECK(rel_diff(bicgstab_solve<double>(a, b, zero, nullptr, config).x, exact) <= 1e-6);
    const auto dual = bicg_solve<double>(a, b, b, zero, zero, nullptr, config);
    CHECK(rel_diff(dual.x, exact) <= 1e-6);
    const Vector<double> exact_dual = a.to_dense().adjoint().partialPivLu().solve(b);
    CHECK(rel_diff(dual.x_dual, exact_dual) <= 1e-6);
  }
}

TEST_CASE("complex systems converge")
{
  const auto a = sparse_random<cplx>(40, 4, 6.0, 3);
  const auto b = vector_random<cplx>(40, 4);
  const Vector<cplx> zero = Vector<cplx>::Zero(40);
  const Vector<cplx> exact = dense_solve(a, b);
  const SolverConfig config{.tol = 1e-10};
  const auto r1 = bicgstab_solve<cplx>(a, b, zero, nullptr, config);
  CHECK(r1.history.converged());
  CHECK(rel_diff(r1.x, exact) <= 1e-7);
  const auto r2 = bicg_solve<cplx>(a, b, b, zero, zero, nullptr, config);
  CHECK(r2.history.converged());
  CHECK(rel_diff(r2.x, exact) <= 1e-7);
  const MatrixOperator<cplx> op(a);
  const auto space = random_space<cplx>(op, 4, 9);
  const auto r3 = rbicgstab_solve<cplx>(a, b, zero, space, nullptr, config);
  CHECK(r3.history.converged());
  CHECK(rel_diff(r3.x, exact) <= 1e-7);
  const auto r4 = rbicg_solve<cplx>(a, b, b, zero, zero, &space, nullptr, config);
  CHECK(r4.history.converged());
  CHECK(rel_diff(r4.x, exact) <= 1e-7);
}

TEST_CASE("BiCG with a matching shadow reproduces CG on an SPD matrix")
{
  const DenseMatrix<double> m = dense_random<double>(12, 12, 8);
  const DenseMatrix<double> spd = m.transpose() * m + 0.5 * DenseMatrix<double>::Identity(12, 12);
  const auto b = vector_random<double>(12, 9);
  const DenseOperator<double> op(spd);
  Trace t;
  const SolverConfig config{.tol = 1e-12, .max_itn = 12, .max_restarts = 0};
  (void)bicg<double>(op, b, b, Vector<double>::Zero(12), Vector<double>::Zero(12), config, recorder(t));
  const auto oracle = cg_iterates(spd, b, static_cast<int>(t.x.size()));
  REQUIRE(oracle.size() == t.x.size());
  for (std::size_t i = 0; i < oracle.size(); ++i)
    CHECK(rel_diff(t.x[i], oracle[i]) <= 1e-10);
}

TEST_CASE("empty recycle space: RBiCG is BiCG and RBiCGSTAB is BiCGSTAB")
{
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index n = 10 + static_cast<Index>(seed) * 2;
    const auto a = sparse_random<double>(n, 4, 3.0, seed + 200);
    const MatrixOperator<double> op(a);
    const auto b = vector_random<double>(n, seed + 300), bt = vector_random<double>(n, seed + 400);
    const Vector<double> x0 = vector_random<double>(n, seed + 500);
    const Vector<double> zero = Vector<double>::Zero(n);
    const SolverConfig config{.tol = 1e-10, .max_itn = 200, .seed = seed};
    const auto none = RecycleSpace<double>::none(n);

    Trace t1, t2;
    (void)bicgstab<double>(op, b, x0, config, recorder(t1));
    (void)rbicgstab<double>(op, b, x0, none, config, recorder(t2));
    check_same_trace(t1, t2, 1e-12);

    Trace t3, t4;
    (void)bicg<double>(op, b, bt, x0, zero, config, recorder(t3));
    (void)rbicg<double>(op, b, bt, x0, zero, none, config, recorder(t4));
    check_same_trace(t3, t4, 1e-12);
  }
}

TEST_CASE("RBiCGSTAB invariants with a random recycle space")
{
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 60 + static_cast<Index>(seed) * 10;
    const auto a = sparse_random<double>(n, 5, 4.0, seed + 600);
    const MatrixOperator<double> op(a);
    const auto space = random_space<double>(op, 4, seed + 700);
    REQUIRE(space.k() == 4);
    const auto b = vector_random<double>(n, seed + 800);
    const SolverConfig config{.tol = 1e-10, .max_itn = 300, .k = 4, .seed = seed};

    int seen = 0;
    const auto observe = [&](const IterationSnapshot<double> &s) {
      ++seen;
      const Vector<double> xs = *s.x - space.u * *s.correction;
      const Vector<double> true_r = b - a.to_dense() * xs;
      CHECK((true_r - *s.r).norm() <= 1e-8 * b.norm());
      CHECK((space.ct.adjoint() * *s.r).norm() <= 1e-8 * s.r->norm() * space.ct.norm());
      if (!s.half_step && s.t) {
        const auto resid = [&](double w) { return (*s.s - w * *s.t).norm(); };
        const double w = s.omega;
        CHECK(resid(w) <= resid(0.5 * w) * (1 + 1e-14));
        CHECK(resid(w) <= resid(2.0 * w) * (1 + 1e-14));
      }
    };
    const auto res = rbicgstab<double>(op, b, Vector<double>::Zero(n), space, config, observe);
    CHECK(res.history.converged());
    CHECK(seen == res.history.iterations());
    CHECK((b - matvec(a, res.x)).norm() <= 1.1 * config.tol * b.norm());
  }
}

TEST_CASE("RBiCG invariants with a random recycle space")
{
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 50 + static_cast<Index>(seed) * 5;
    const auto a = sparse_random<double>(n, 5, 4.0, seed + 900);
    const MatrixOperator<double> op(a);
    const auto space = random_space<double>(op, 3, seed + 1000);
    const auto b = vector_random<double>(n, seed + 1100), bt = vector_random<double>(n, seed + 1200);
    const Vector<double> zero = Vector<double>::Zero(n);
    const SolverConfig config{.tol = 1e-10, .max_itn = 300, .k = 3, .seed = seed};
    const DenseMatrix<double> dense = a.to_dense();

    std::vector<Vector<double>> rs, rts;
    const auto observe = [&](const IterationSnapshot<double> &s) {
      const Vector<double> xs = *s.x - space.u * *s.correction;
      const Vector<double> xts = *s.x_dual - space.ut * *s.correction_dual;
      CHECK(((b - dense * xs) - *s.r).norm() <= 1e-8 * b.norm());
      CHECK(((bt - dense.adjoint() * xts) - *s.r_dual).norm() <= 1e-8 * bt.norm());
      CHECK((space.ct.adjoint() * *s.r).norm() <= 1e-8 * s.r->norm() * space.ct.norm());
      CHECK((space.c.adjoint() * *s.r_dual).norm() <= 1e-8 * s.r_dual->norm() * space.c.norm());
      rs.push_back(*s.r);
      rts.push_back(*s.r_dual);
    };
    const auto res = rbicg<double>(op, b, bt, zero, zero, space, config, observe);
    CHECK(res.history.converged());
    CHECK((b - dense * res.x).norm() <= 1.1 * config.tol * b.norm());
    CHECK((bt - dense.adjoint() * res.x_dual).norm() <= 1.1 * config.tol * bt.norm());

    // local bi-orthogonality of consecutive residuals
    for (std::size_t i = 1; i < std::min<std::size_t>(rs.size(), 10); ++i)
      CHECK(std::abs(rts[i - 1].dot(rs[i])) <= 1e-6 * rts[i - 1].norm() * rs[i].norm());
  }
}

TEST_CASE("BiCG residuals are bi-orthogonal to earlier shadow residuals")
{
  const Index n = 80;
  const auto a = sparse_random<double>(n, 4, 5.0, 17);
  const MatrixOperator<double> op(a);
  const auto b = vector_random<double>(n, 18), bt = vector_random<double>(n, 19);
  std::vector<Vector<double>> rs{b}, rts{bt};
  const auto observe = [&](const IterationSnapshot<double> &s) {
    rs.push_back(*s.r);
    rts.push_back(*s.r_dual);
  };
  const SolverConfig config{.tol = 1e-10, .max_itn = 200};
  (void)bicg<double>(op, b, bt, Vector<double>::Zero(n), Vector<double>::Zero(n), config, observe);
  const std::size_t m = std::min<std::size_t>(rs.size(), 15);
  for (std::size_t i = 1; i < m; ++i)
    for (std::size_t j = 0; j < i; ++j)
      CHECK(std::abs(rts[j].dot(rs[i])) <= 1e-6 * rts[j].norm() * rs[i].norm());
}

TEST_CASE("captured Lanczos blocks stay bi-orthogonal to each other and to the recycle images")
{
  // The space is built from exact left/right eigenvectors, the kind of space
  // the method recycles. With nearly orthogonal random pairs (min dc ~ 1e-2)
  // the oblique projector amplifies rounding and bi-orthogonality is lost.
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Index n = 100 + static_cast<Index>(seed) * 20;
    const auto a = sparse_random<double>(n, 5, 3.0, seed + 41);
    const MatrixOperator<double> op(a);
    const auto pairs = smallest_eigenpairs<double>(a.to_dense(), 4);
    const auto space = biorthonormalize<double>(eigenbasis<double>(pairs.right, pairs.values),
                                                eigenbasis<double>(pairs.left, pairs.values.conjugate()), op);
    const auto b = vector_random<double>(n, seed + 43);
    const Vector<double> bt = seed % 2 ? b : vector_random<double>(n, seed + 44);
    const Vector<double> zero = Vector<double>::Zero(n);
    for (int s : {10, 25}) {
      const SolverConfig config{.tol = 1e-10, .max_itn = 300, .k = static_cast<int>(space.k()), .s = s};
      const auto res = rbicg<double>(op, b, bt, zero, zero, space, config);
      REQUIRE(!res.cycles.empty());
      const auto &cycle = res.cycles.front();
      CHECK(cycle.columns() <= config.s + 2);

      DenseMatrix<double> w(n, space.k() + cycle.r.cols()), wt(n, space.k() + cycle.rt.cols());
      w << space.c, cycle.r;
      wt << space.ct, cycle.rt;
      for (Index j = 0; j < w.cols(); ++j) {
        w.col(j).normalize();
        wt.col(j).normalize();
      }
      const DenseMatrix<double> m = wt.adjoint() * w;
      double worst = 0.0;
      for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
          if (i != j)
            worst = std::max(worst, std::abs(m(i, j)) / std::sqrt(std::abs(m(i, i) * m(j, j))));
      CHECK(worst <= 1e-6);
    }
  }
}

TEST_CASE("matvec accounting")
{
  const Index n = 70;
  const auto a = sparse_random<double>(n, 4, 4.0, 51);
  const MatrixOperator<double> base(a);
  CountingOperator<double> op(base);
  const auto b = vector_random<double>(n, 52);
  const Vector<double> zero = Vector<double>::Zero(n);
  const SolverConfig config{.tol = 1e-10, .max_itn = 300, .k = 3};

  auto per_iteration = [](const ConvergenceHistory &h, long expected) {
    for (std::size_t i = 1; i + 1 < h.records.size(); ++i)
      CHECK(h.records[i].matvecs - h.records[i - 1].matvecs == expected);
  };

  const auto r1 = bicgstab<double>(op, b, zero, config);
  CHECK(op.adjoint_count() == 0);
  CHECK(op.forward_count() == r1.history.matvecs());
  per_iteration(r1.history, 2);

  op.reset();
  const auto space = random_space<double>(base, 3, 53);
  const auto r2 = rbicgstab<double>(op, b, zero, space, config);
  CHECK(op.adjoint_count() == 0);
  CHECK(op.forward_count() == r2.history.matvecs());
  per_iteration(r2.history, 2);

  op.reset();
  const auto r3 = rbicg<double>(op, b, b, zero, zero, space, config);
  CHECK(op.forward_count() + op.adjoint_count() == r3.history.matvecs());
  CHECK(op.forward_count() == op.adjoint_count());
  per_iteration(r3.history, 2);

  for (const auto *h : {&r1.history, &r2.history, &r3.history}) {
    for (std::size_t i = 1; i < h->records.size(); ++i) {
      CHECK(h->records[i].matvecs > h->records[i - 1].matvecs);
      CHECK(h->records[i].seconds >= h->records[i - 1].seconds);
    }
    for (const auto &rec : h->records)
      CHECK(rec.residual >= 0.0);
  }
}

TEST_CASE("breakdowns and limits are reported, not thrown")
{
  // Skew-symmetric A with b_dual = b: (pt, A p) = 0 at the first step.
  const std::vector<Triplet<double>> t{{0, 1, 1.0}, {1, 0, -1.0}, {2, 3, 1.0}, {3, 2, -1.0}};
  const auto skew = SparseMatrix<double>::from_triplets(4, 4, t);
  const MatrixOperator<double> op(skew);
  const Vector<double> b = Vector<double>::Ones(4);
  const auto res = bicg<double>(op, b, b, Vector<double>::Zero(4), Vector<double>::Zero(4), SolverConfig{});
  CHECK(res.history.status == SolveStatus::second_kind_breakdown);
  CHECK(!res.history.message.empty());

  const auto a = sparse_random<double>(200, 6, 0.0, 61);
  const auto b2 = vector_random<double>(200, 62);
  const auto capped = bicgstab_solve<double>(a, b2, Vector<double>::Zero(200), nullptr,
                                             SolverConfig{.tol = 1e-14, .max_itn = 3, .max_restarts = 0});
  CHECK(capped.history.status == SolveStatus::max_iterations);
  CHECK(capped.history.iterations() == 3);
  CHECK(to_string(SolveStatus::max_iterations) == "max_itn");
}

TEST_CASE("solver configuration is validated")
{
  CHECK_THROWS_AS(SolverConfig{.tol = 0.0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(SolverConfig{.max_itn = 0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(SolverConfig{.k = -1}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(SolverConfig{.s = 0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(SolverConfig{.breakdown_tol = 0.0}.validate(), std::invalid_argument);
  CHECK_NOTHROW(SolverConfig{}.validate());

  const auto a = sparse_random<double>(5, 2, 4.0, 1);
  CHECK_THROWS_AS(bicgstab_solve<double>(a, Vector<double>(Vector<double>::Ones(4)), Vector<double>::Zero(5), nullptr,
                                         SolverConfig{}),
                  std::invalid_argument);
}

TEST_CASE("preconditioned front ends return solutions in original variables")
{
  const Index n = 90;
  const auto a = sparse_random<double>(n, 5, 2.0, 71);
  const auto f = ilutp_factor(a, IlutpOptions{0.05, 0.1, -1});
  const auto b = vector_random<double>(n, 72), bt = vector_random<double>(n, 73);
  const Vector<double> x0 = Vector<double>::Constant(n, 0.5);
  const Vector<double> exact = dense_solve(a, b);
  const SolverConfig config{.tol = 1e-10, .max_itn = 500, .k = 4};
  const PreconditionedSystem<double> sys(a, &f);
  const auto space = random_space<double>(sys.op(), 4, 74);

  CHECK(rel_diff(bicgstab_solve<double>(a, b, x0, &f, config).x, exact) <= 1e-6);
  CHECK(rel_diff(rbicgstab_solve<double>(a, b, x0, space, &f, config).x, exact) <= 1e-6);
  const auto r = rbicg_solve<double>(a, b, bt, x0, x0, &space, &f, config);
  CHECK(rel_diff(r.x, exact) <= 1e-6);
  const Vector<double> exact_dual = a.to_dense().adjoint().partialPivLu().solve(bt);
  CHECK(rel_diff(r.x_dual, exact_dual) <= 1e-6);

  const auto y = vector_random<double>(n, 75);
  CHECK(rel_diff(sys.to_inner(sys.to_outer(y)), y) <= 1e-12);
  CHECK(rel_diff(sys.to_inner_dual(sys.to_outer_dual(y)), y) <= 1e-12);
}

TEST_CASE("shadow residuals are seeded and deterministic")
{
  CHECK(random_vector<double>(20, 5) == random_vector<double>(20, 5));
  CHECK(random_vector<double>(20, 5) != random_vector<double>(20, 6));
  CHECK(random_vector<double>(20, 5).cwiseAbs().maxCoeff() <= 1.0);
}
