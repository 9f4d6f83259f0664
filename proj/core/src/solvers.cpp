// SPDX-License-Identifier: Apache-2.0

#include "rkrylov/solvers.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rkrylov {

template <Scalar S>
Vector<S> random_vector(Index n, std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector<S> v(n);
  for (Index i = 0; i < n; ++i) {
    if constexpr (is_complex_v<S>) {
      const double re = dist(gen);
      v[i] = S(re, dist(gen));
    } else {
      v[i] = dist(gen);
    }
  }
  return v;
}

namespace {

template <Scalar S>
bool nearly_zero(S value, double scale, double tol)
{
  return std::abs(value) <= tol * scale;
}

// Bookkeeping shared by all solvers: iteration records and matvec counts.
class Tracker
{
public:
  explicit Tracker(double bnorm) : bnorm_(bnorm) {}

  void matvec(long count = 1) { matvecs_ += count; }

  void record(int iteration, double rnorm)
  {
    history.records.push_back({iteration, rnorm / bnorm_, std::nullopt, matvecs_, clock_.seconds()});
  }

  // Folds the verification matvecs into the last record.
  void verify(double true_rnorm)
  {
    history.true_residual = true_rnorm / bnorm_;
    if (!history.records.empty()) {
      history.records.back().matvecs = matvecs_;
      history.records.back().true_residual = history.true_residual;
      history.records.back().seconds = clock_.seconds();
    }
  }

  void finish(SolveStatus status, std::string message = {})
  {
    history.status = status;
    if (!message.empty())
      history.message = std::move(message);
  }

  double bnorm() const { return bnorm_; }
  long matvecs() const { return matvecs_; }

  ConvergenceHistory history;

private:
  double bnorm_;
  long matvecs_ = 0;
  Stopwatch clock_;
};

template <Scalar S>
void check_system(const LinearOperator<S> &op, const Vector<S> &b, const Vector<S> &x0, const char *who)
{
  if (b.size() != op.size() || x0.size() != op.size())
    throw std::invalid_argument(std::string(who) + ": operator has size " + std::to_string(op.size()) +
                                ", right-hand side " + std::to_string(b.size()) + ", initial guess " +
                                std::to_string(x0.size()));
}

template <Scalar S>
void check_space(const LinearOperator<S> &op, const RecycleSpace<S> &space, const char *who)
{
  if (!space.empty() && space.n() != op.size())
    throw std::invalid_argument(std::string(who) + ": recycle space has " + std::to_string(space.n()) +
                                " rows, operator has size " + std::to_string(op.size()));
}

std::string describe_restart(double true_res, double tol)
{
  std::ostringstream os;
  os << "explicit residual " << true_res << " above tol " << tol << " after all restarts";
  return os.str();
}

// Outcome of one pass of a solver's inner loop.
enum class Pass
{
  converged,
  stopped,
};

// Collects per-iteration vectors and emits them in cycles of s columns.
template <Scalar S>
class CycleBuffer
{
public:
  CycleBuffer(int s, const CycleSink<S> &sink, std::vector<CapturedCycle<S>> &store)
      : s_(s), sink_(sink), store_(store)
  {
  }

  void push(int iteration, const Vector<S> &p, const Vector<S> &pt, const Vector<S> &z, const Vector<S> &zt,
            const Vector<S> &r, const Vector<S> &rt, S alpha, S beta)
  {
    if (cols_.empty())
      first_ = iteration;
    cols_.push_back({p, pt, z, zt, r, rt, alpha, beta});
    if (static_cast<int>(cols_.size()) == s_)
      emit();
  }

  void flush()
  {
    if (!cols_.empty())
      emit();
  }

private:
  struct Column
  {
    Vector<S> p, pt, z, zt, r, rt;
    S alpha, beta;
  };

  void emit()
  {
    const Index n = cols_.front().p.size();
    const Index m = static_cast<Index>(carry_.size() + cols_.size());
    CapturedCycle<S> cycle;
    cycle.p.resize(n, m);
    cycle.pt.resize(n, m);
    cycle.z.resize(n, m);
    cycle.zt.resize(n, m);
    cycle.r.resize(n, m);
    cycle.rt.resize(n, m);
    cycle.alpha.resize(m);
    cycle.beta.resize(m);
    cycle.first_iteration = first_;
    cycle.carried = static_cast<int>(carry_.size());
    Index j = 0;
    for (const auto *group : {&carry_, &cols_})
      for (const Column &c : *group) {
        cycle.p.col(j) = c.p;
        cycle.pt.col(j) = c.pt;
        cycle.z.col(j) = c.z;
        cycle.zt.col(j) = c.zt;
        cycle.r.col(j) = c.r;
        cycle.rt.col(j) = c.rt;
        cycle.alpha[j] = c.alpha;
        cycle.beta[j] = c.beta;
        ++j;
      }
    // the last two direction pairs continue into the next cycle
    carry_.assign(cols_.size() >= 2 ? cols_.end() - 2 : cols_.begin(), cols_.end());
    cols_.clear();
    if (sink_)
      sink_(std::move(cycle));
    else
      store_.push_back(std::move(cycle));
  }

  int s_;
  const CycleSink<S> &sink_;
  std::vector<CapturedCycle<S>> &store_;
  std::vector<Column> cols_;
  std::vector<Column> carry_;
  int first_ = 0;
};

} // namespace

// ---------------------------------------------------------------------------
// BiCGSTAB

template <Scalar S>
SolveResult<S> bicgstab(const LinearOperator<S> &op, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &x0,
                        const SolverConfig &config, const NoDeduce<IterationObserver<S>> &observe)
{
  config.validate();
  check_system(op, b, x0, "bicgstab");
  const Index n = op.size();
  const double bt = config.breakdown_tol;
  Tracker tr(b.norm());
  SolveResult<S> out;
  if (tr.bnorm() == 0) {
    out.x = Vector<S>::Zero(n);
    tr.record(0, 0.0);
    tr.finish(SolveStatus::converged);
    out.history = std::move(tr.history);
    return out;
  }
  const double target = config.tol * tr.bnorm();

  Vector<S> x = x0;
  Vector<S> r = b - op(x);
  tr.matvec();
  tr.record(0, r.norm());
  const Vector<S> shadow = random_vector<S>(n, config.seed);
  const double shadow_norm = shadow.norm();

  int it = 0;
  Vector<S> p(n), v(n), s(n), t(n);
  auto pass = [&]() -> Pass {
    if (r.norm() <= target)
      return Pass::converged;
    S rho = shadow.dot(r);
    if (nearly_zero(rho, shadow_norm * r.norm(), bt)) {
      tr.finish(SolveStatus::shadow_breakdown, "(shadow, r0) vanishes; choose another seed or initial guess");
      return Pass::stopped;
    }
    S alpha(0), beta(0), omega(0);
    p.setZero();
    v.setZero();
    while (it < config.max_itn) {
      ++it;
      p = r + beta * (p - omega * v);
      op.apply(p, v);
      tr.matvec();
      const S den = shadow.dot(v);
      if (nearly_zero(den, shadow_norm * v.norm(), bt)) {
        tr.record(it, r.norm());
        tr.finish(SolveStatus::second_kind_breakdown, "(shadow, A p) vanishes");
        return Pass::stopped;
      }
      alpha = rho / den;
      s = r - alpha * v;
      if (s.norm() <= target) {
        x += alpha * p;
        r = s;
        tr.record(it, r.norm());
        if (observe)
          observe({.iteration = it, .x = &x, .r = &r, .s = &s, .shadow = &shadow, .alpha = alpha, .beta = beta,
                   .half_step = true});
        return Pass::converged;
      }
      op.apply(s, t);
      tr.matvec();
      const double tt = t.squaredNorm();
      if (tt == 0) {
        tr.record(it, r.norm());
        tr.finish(SolveStatus::omega_breakdown, "(t, t) vanishes");
        return Pass::stopped;
      }
      omega = t.dot(s) / tt;
      if (std::abs(omega) * std::sqrt(tt) <= bt * s.norm()) {
        tr.record(it, r.norm());
        tr.finish(SolveStatus::omega_breakdown, "omega vanishes");
        return Pass::stopped;
      }
      x += alpha * p + omega * s;
      r = s - omega * t;
      const double rnorm = r.norm();
      tr.record(it, rnorm);
      if (observe)
        observe({.iteration = it, .x = &x, .r = &r, .s = &s, .t = &t, .shadow = &shadow, .alpha = alpha,
                 .beta = beta, .omega = omega});
      if (rnorm <= target)
        return Pass::converged;
      const S rho_new = shadow.dot(r);
      if (nearly_zero(rho_new, shadow_norm * rnorm, bt)) {
        tr.finish(SolveStatus::serious_breakdown, "(shadow, r) vanishes");
        return Pass::stopped;
      }
      beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
    }
    tr.finish(SolveStatus::max_iterations);
    return Pass::stopped;
  };

  for (int restart = 0;; ++restart) {
    const Pass result = pass();
    r = b - op(x);
    tr.matvec();
    const double true_rnorm = r.norm();
    tr.verify(true_rnorm);
    if (result == Pass::stopped)
      break;
    if (true_rnorm <= target) {
      tr.finish(SolveStatus::converged);
      break;
    }
    if (restart == config.max_restarts || it >= config.max_itn) {
      tr.finish(SolveStatus::converged, describe_restart(true_rnorm / tr.bnorm(), config.tol));
      break;
    }
  }
  out.x = std::move(x);
  out.history = std::move(tr.history);
  return out;
}

// ---------------------------------------------------------------------------
// RBiCGSTAB

template <Scalar S>
SolveResult<S> rbicgstab(const LinearOperator<S> &op, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &x0,
                         const NoDeduce<RecycleSpace<S>> &space, const SolverConfig &config, const NoDeduce<IterationObserver<S>> &observe)
{
  config.validate();
  check_system(op, b, x0, "rbicgstab");
  check_space(op, space, "rbicgstab");
  const Index n = op.size();
  const Index k = space.k();
  const double bt = config.breakdown_tol;
  Tracker tr(b.norm());
  SolveResult<S> out;
  if (tr.bnorm() == 0) {
    out.x = Vector<S>::Zero(n);
    tr.record(0, 0.0);
    tr.finish(SolveStatus::converged);
    out.history = std::move(tr.history);
    return out;
  }
  const double target = config.tol * tr.bnorm();

  // x_{-1}, r_{-1}, then the projected start
  Vector<S> x = x0;
  Vector<S> r = b - op(x);
  tr.matvec();
  auto project = [&](Vector<S> &xv, Vector<S> &rv) {
    if (k == 0)
      return;
    const Vector<S> coef = space.chat.adjoint() * rv;
    xv.noalias() += space.u * coef;
    rv.noalias() -= space.c * coef;
  };
  project(x, r);
  tr.record(0, r.norm());

  Vector<S> shadow = random_vector<S>(n, config.seed);
  if (k > 0) {
    const Vector<S> coef = space.ccheck.adjoint() * shadow;
    shadow.noalias() -= space.ct * coef;
  }
  const double shadow_norm = shadow.norm();

  // Rounding leaves a component along C that the recurrence never removes;
  // without this it dominates ||Ct* r|| / ||r|| once r is small.
  auto reproject = [&](Vector<S> &rv) {
    if (k > 0)
      rv.noalias() -= space.c * (space.chat.adjoint() * rv);
  };

  int it = 0;
  Vector<S> xc = Vector<S>::Zero(k);
  Vector<S> p(n), q(n), s(n), t(n), zeta(k), gamma(k);
  auto pass = [&]() -> Pass {
    if (r.norm() <= target)
      return Pass::converged;
    S rho = shadow.dot(r);
    if (nearly_zero(rho, shadow_norm * r.norm(), bt)) {
      tr.finish(SolveStatus::shadow_breakdown,
                "(r0, shadow) vanishes after projection; choose another seed or initial guess");
      return Pass::stopped;
    }
    S alpha(0), beta(0), omega(0);
    p.setZero();
    q.setZero();
    while (it < config.max_itn) {
      ++it;
      p = r + beta * (p - omega * q);
      op.apply(p, q);
      tr.matvec();
      if (k > 0) {
        zeta.noalias() = space.chat.adjoint() * q;
        q.noalias() -= space.c * zeta;
      }
      const S den = shadow.dot(q);
      if (nearly_zero(den, shadow_norm * q.norm(), bt)) {
        tr.record(it, r.norm());
        tr.finish(SolveStatus::second_kind_breakdown, "(shadow, q) vanishes");
        return Pass::stopped;
      }
      alpha = rho / den;
      s = r - alpha * q;
      if (s.norm() <= target) {
        x += alpha * p;
        if (k > 0)
          xc += alpha * zeta;
        r = s;
        reproject(r);
        tr.record(it, r.norm());
        if (observe)
          observe({.iteration = it, .x = &x, .r = &r, .correction = &xc, .s = &s, .shadow = &shadow,
                   .alpha = alpha, .beta = beta, .half_step = true});
        return Pass::converged;
      }
      op.apply(s, t);
      tr.matvec();
      if (k > 0) {
        gamma.noalias() = space.chat.adjoint() * t;
        t.noalias() -= space.c * gamma;
      }
      const double tt = t.squaredNorm();
      if (tt == 0) {
        tr.record(it, r.norm());
        tr.finish(SolveStatus::omega_breakdown, "(t, t) vanishes");
        return Pass::stopped;
      }
      omega = t.dot(s) / tt;
      if (std::abs(omega) * std::sqrt(tt) <= bt * s.norm()) {
        tr.record(it, r.norm());
        tr.finish(SolveStatus::omega_breakdown, "omega vanishes");
        return Pass::stopped;
      }
      x += alpha * p + omega * s;
      if (k > 0)
        xc += alpha * zeta + omega * gamma;
      r = s - omega * t;
      reproject(r);
      const double rnorm = r.norm();
      tr.record(it, rnorm);
      if (observe)
        observe({.iteration = it, .x = &x, .r = &r, .correction = &xc, .s = &s, .t = &t, .shadow = &shadow,
                 .alpha = alpha, .beta = beta, .omega = omega});
      if (rnorm <= target)
        return Pass::converged;
      const S rho_new = shadow.dot(r);
      if (nearly_zero(rho_new, shadow_norm * rnorm, bt)) {
        tr.finish(SolveStatus::serious_breakdown, "(shadow, r) vanishes");
        return Pass::stopped;
      }
      beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
    }
    tr.finish(SolveStatus::max_iterations);
    return Pass::stopped;
  };

  for (int restart = 0;; ++restart) {
    const Pass result = pass();
    if (k > 0) {
      x.noalias() -= space.u * xc;
      xc.setZero();
    }
    r = b - op(x);
    tr.matvec();
    const double true_rnorm = r.norm();
    tr.verify(true_rnorm);
    if (result == Pass::stopped)
      break;
    if (true_rnorm <= target) {
      tr.finish(SolveStatus::converged);
      break;
    }
    if (restart == config.max_restarts || it >= config.max_itn) {
      tr.finish(SolveStatus::converged, describe_restart(true_rnorm / tr.bnorm(), config.tol));
      break;
    }
    project(x, r);
  }
  out.x = std::move(x);
  out.history = std::move(tr.history);
  return out;
}

// ---------------------------------------------------------------------------
// BiCG

template <Scalar S>
DualSolveResult<S> bicg(const LinearOperator<S> &op, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &b_dual,
                        const NoDeduce<Vector<S>> &x0, const NoDeduce<Vector<S>> &x0_dual, const SolverConfig &config,
                        const NoDeduce<IterationObserver<S>> &observe)
{
  config.validate();
  check_system(op, b, x0, "bicg");
  check_system(op, b_dual, x0_dual, "bicg (dual)");
  const Index n = op.size();
  const double bt = config.breakdown_tol;
  Tracker tr(b.norm());
  DualSolveResult<S> out;
  if (tr.bnorm() == 0) {
    out.x = Vector<S>::Zero(n);
    out.x_dual = x0_dual;
    tr.record(0, 0.0);
    tr.finish(SolveStatus::converged);
    out.history = std::move(tr.history);
    return out;
  }
  const double target = config.tol * tr.bnorm();

  Vector<S> x = x0, xt = x0_dual;
  Vector<S> r = b - op(x);
  Vector<S> rt = b_dual - op.adjoint(xt);
  tr.matvec(2);
  if (nearly_zero(rt.dot(r), r.norm() * rt.norm(), bt)) {
    xt = random_vector<S>(n, config.seed);
    rt = b_dual - op.adjoint(xt);
    tr.matvec();
  }
  const double dual_scale = b_dual.norm() > 0 ? b_dual.norm() : std::max(rt.norm(), 1.0);
  const double target_dual = config.tol * dual_scale;
  tr.record(0, r.norm());

  int it = 0;
  Vector<S> p(n), pt(n), q(n), qt(n);
  auto pass = [&]() -> Pass {
    if (r.norm() <= target && rt.norm() <= target_dual)
      return Pass::converged;
    S rho = rt.dot(r);
    if (nearly_zero(rho, r.norm() * rt.norm(), bt)) {
      tr.finish(SolveStatus::serious_breakdown, "(rt, r) vanishes");
      return Pass::stopped;
    }
    S beta(0);
    p.setZero();
    pt.setZero();
    while (it < config.max_itn) {
      ++it;
      p = r + beta * p;
      pt = rt + conj(beta) * pt;
      op.apply(p, q);
      op.apply_adjoint(pt, qt);
      tr.matvec(2);
      const S den = pt.dot(q);
      if (nearly_zero(den, pt.norm() * q.norm(), bt)) {
        tr.record(it, r.norm());
        tr.finish(SolveStatus::second_kind_breakdown, "(pt, q) vanishes");
        return Pass::stopped;
      }
      const S alpha = rho / den;
      x += alpha * p;
      xt += conj(alpha) * pt;
      r -= alpha * q;
      rt -= conj(alpha) * qt;
      const double rnorm = r.norm();
      tr.record(it, rnorm);
      if (observe)
        observe({.iteration = it, .x = &x, .r = &r, .x_dual = &xt, .r_dual = &rt, .alpha = alpha, .beta = beta});
      if (rnorm <= target && rt.norm() <= target_dual)
        return Pass::converged;
      const S rho_new = rt.dot(r);
      if (nearly_zero(rho_new, rnorm * rt.norm(), bt)) {
        tr.finish(SolveStatus::serious_breakdown, "(rt, r) vanishes");
        return Pass::stopped;
      }
      beta = rho_new / rho;
      rho = rho_new;
    }
    tr.finish(SolveStatus::max_iterations);
    return Pass::stopped;
  };

  for (int restart = 0;; ++restart) {
    const Pass result = pass();
    r = b - op(x);
    rt = b_dual - op.adjoint(xt);
    tr.matvec(2);
    const double true_rnorm = r.norm();
    tr.verify(true_rnorm);
    tr.history.dual_residual = rt.norm() / dual_scale;
    if (result == Pass::stopped)
      break;
    if (true_rnorm <= target && rt.norm() <= target_dual) {
      tr.finish(SolveStatus::converged);
      break;
    }
    if (restart == config.max_restarts || it >= config.max_itn) {
      tr.finish(SolveStatus::converged, describe_restart(true_rnorm / tr.bnorm(), config.tol));
      break;
    }
  }
  out.x = std::move(x);
  out.x_dual = std::move(xt);
  out.history = std::move(tr.history);
  return out;
}

// ---------------------------------------------------------------------------
// RBiCG

template <Scalar S>
DualSolveResult<S> rbicg(const LinearOperator<S> &op, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &b_dual,
                         const NoDeduce<Vector<S>> &x0, const NoDeduce<Vector<S>> &x0_dual, const NoDeduce<RecycleSpace<S>> &space,
                         const SolverConfig &config, const NoDeduce<IterationObserver<S>> &observe, const NoDeduce<CycleSink<S>> &sink)
{
  config.validate();
  check_system(op, b, x0, "rbicg");
  check_system(op, b_dual, x0_dual, "rbicg (dual)");
  check_space(op, space, "rbicg");
  const Index n = op.size();
  const Index k = space.k();
  const double bt = config.breakdown_tol;
  Tracker tr(b.norm());
  DualSolveResult<S> out;
  if (tr.bnorm() == 0) {
    out.x = Vector<S>::Zero(n);
    out.x_dual = x0_dual;
    tr.record(0, 0.0);
    tr.finish(SolveStatus::converged);
    out.history = std::move(tr.history);
    return out;
  }
  const double target = config.tol * tr.bnorm();

  auto project = [&](Vector<S> &xv, Vector<S> &rv) {
    if (k == 0)
      return;
    const Vector<S> coef = space.chat.adjoint() * rv;
    xv.noalias() += space.u * coef;
    rv.noalias() -= space.c * coef;
  };
  auto project_dual = [&](Vector<S> &xv, Vector<S> &rv) {
    if (k == 0)
      return;
    const Vector<S> coef = space.ccheck.adjoint() * rv;
    xv.noalias() += space.ut * coef;
    rv.noalias() -= space.ct * coef;
  };

  Vector<S> x = x0, xt = x0_dual;
  Vector<S> r = b - op(x);
  Vector<S> rt = b_dual - op.adjoint(xt);
  tr.matvec(2);
  project(x, r);
  project_dual(xt, rt);
  if (nearly_zero(rt.dot(r), r.norm() * rt.norm(), bt)) {
    xt = random_vector<S>(n, config.seed);
    rt = b_dual - op.adjoint(xt);
    tr.matvec();
    project_dual(xt, rt);
  }
  const double dual_scale = b_dual.norm() > 0 ? b_dual.norm() : std::max(rt.norm(), 1.0);
  const double target_dual = config.tol * dual_scale;
  tr.record(0, r.norm());

  CycleBuffer<S> cycles(config.s, sink, out.cycles);
  int it = 0;
  Vector<S> zc = Vector<S>::Zero(k), zct = Vector<S>::Zero(k);
  Vector<S> p(n), pt(n), z(n), zt(n), q(n), qt(n), zeta(k), zetat(k);
  auto pass = [&]() -> Pass {
    if (r.norm() <= target && rt.norm() <= target_dual)
      return Pass::converged;
    S rho = rt.dot(r);
    if (nearly_zero(rho, r.norm() * rt.norm(), bt)) {
      tr.finish(SolveStatus::serious_breakdown, "serious breakdown: (rt, r) vanishes");
      return Pass::stopped;
    }
    S beta(0);
    p.setZero();
    pt.setZero();
    while (it < config.max_itn) {
      ++it;
      p = r + beta * p;
      pt = rt + conj(beta) * pt;
      op.apply(p, z);
      op.apply_adjoint(pt, zt);
      tr.matvec(2);
      q = z;
      qt = zt;
      if (k > 0) {
        zeta.noalias() = space.chat.adjoint() * z;
        zetat.noalias() = space.ccheck.adjoint() * zt;
        q.noalias() -= space.c * zeta;
        qt.noalias() -= space.ct * zetat;
      }
      const S den = pt.dot(q);
      if (nearly_zero(den, pt.norm() * q.norm(), bt)) {
        tr.record(it, r.norm());
        tr.finish(SolveStatus::second_kind_breakdown, "breakdown of the second kind: (pt, q) vanishes");
        return Pass::stopped;
      }
      const S alpha = rho / den;
      cycles.push(it, p, pt, z, zt, r, rt, alpha, beta);
      if (k > 0) {
        zc += alpha * zeta;
        zct += conj(alpha) * zetat;
      }
      x += alpha * p;
      xt += conj(alpha) * pt;
      r -= alpha * q;
      rt -= conj(alpha) * qt;
      // same rounding drift as in RBiCGSTAB, on both sides
      if (k > 0) {
        r.noalias() -= space.c * (space.chat.adjoint() * r);
        rt.noalias() -= space.ct * (space.ccheck.adjoint() * rt);
      }
      const double rnorm = r.norm();
      tr.record(it, rnorm);
      if (observe)
        observe({.iteration = it, .x = &x, .r = &r, .correction = &zc, .x_dual = &xt, .r_dual = &rt,
                 .correction_dual = &zct, .alpha = alpha, .beta = beta});
      if (rnorm <= target && rt.norm() <= target_dual)
        return Pass::converged;
      const S rho_new = rt.dot(r);
      if (nearly_zero(rho_new, rnorm * rt.norm(), bt)) {
        tr.finish(SolveStatus::serious_breakdown, "serious breakdown: (rt, r) vanishes");
        return Pass::stopped;
      }
      beta = rho_new / rho;
      rho = rho_new;
    }
    tr.finish(SolveStatus::max_iterations);
    return Pass::stopped;
  };

  for (int restart = 0;; ++restart) {
    const Pass result = pass();
    if (k > 0) {
      x.noalias() -= space.u * zc;
      xt.noalias() -= space.ut * zct;
      zc.setZero();
      zct.setZero();
    }
    r = b - op(x);
    rt = b_dual - op.adjoint(xt);
    tr.matvec(2);
    const double true_rnorm = r.norm();
    tr.verify(true_rnorm);
    tr.history.dual_residual = rt.norm() / dual_scale;
    if (result == Pass::stopped)
      break;
    if (true_rnorm <= target && rt.norm() <= target_dual) {
      tr.finish(SolveStatus::converged);
      break;
    }
    if (restart == config.max_restarts || it >= config.max_itn) {
      tr.finish(SolveStatus::converged, describe_restart(true_rnorm / tr.bnorm(), config.tol));
      break;
    }
    project(x, r);
    project_dual(xt, rt);
  }
  cycles.flush();
  out.x = std::move(x);
  out.x_dual = std::move(xt);
  out.history = std::move(tr.history);
  return out;
}

// ---------------------------------------------------------------------------
// Preconditioned front ends

template <Scalar S>
PreconditionedSystem<S>::PreconditionedSystem(const SparseMatrix<S> &a, const IlutpFactors<S> *factors)
    : a_(&a), factors_(factors)
{
  if (factors)
    op_ = std::make_unique<SplitPreconditionedOperator<S>>(a, *factors);
  else
    op_ = std::make_unique<MatrixOperator<S>>(a);
}

template <Scalar S>
Vector<S> PreconditionedSystem<S>::rhs(const Vector<S> &b) const
{
  return factors_ ? factors_->apply_left(b) : b;
}

template <Scalar S>
Vector<S> PreconditionedSystem<S>::to_inner(const Vector<S> &x) const
{
  return factors_ ? factors_->multiply_right(x) : x;
}

template <Scalar S>
Vector<S> PreconditionedSystem<S>::to_outer(const Vector<S> &y) const
{
  return factors_ ? factors_->apply_right(y) : y;
}

template <Scalar S>
Vector<S> PreconditionedSystem<S>::rhs_dual(const Vector<S> &b) const
{
  return factors_ ? factors_->apply_right_adjoint(b) : b;
}

template <Scalar S>
Vector<S> PreconditionedSystem<S>::to_inner_dual(const Vector<S> &x) const
{
  return factors_ ? factors_->multiply_left_adjoint(x) : x;
}

template <Scalar S>
Vector<S> PreconditionedSystem<S>::to_outer_dual(const Vector<S> &y) const
{
  return factors_ ? factors_->apply_left_adjoint(y) : y;
}

template <Scalar S>
SolveResult<S> bicgstab_solve(const SparseMatrix<S> &a, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &x_init,
                              const NoDeduce<IlutpFactors<S>> *precond, const SolverConfig &config)
{
  PreconditionedSystem<S> sys(a, precond);
  auto result = bicgstab(sys.op(), sys.rhs(b), sys.to_inner(x_init), config);
  result.x = sys.to_outer(result.x);
  return result;
}

template <Scalar S>
DualSolveResult<S> bicg_solve(const SparseMatrix<S> &a, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &b_dual,
                              const NoDeduce<Vector<S>> &x_init, const NoDeduce<Vector<S>> &x_init_dual, const NoDeduce<IlutpFactors<S>> *precond,
                              const SolverConfig &config)
{
  PreconditionedSystem<S> sys(a, precond);
  auto result = bicg(sys.op(), sys.rhs(b), sys.rhs_dual(b_dual), sys.to_inner(x_init),
                     sys.to_inner_dual(x_init_dual), config);
  result.x = sys.to_outer(result.x);
  result.x_dual = sys.to_outer_dual(result.x_dual);
  return result;
}

template <Scalar S>
DualSolveResult<S> rbicg_solve(const SparseMatrix<S> &a, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &b_dual,
                               const NoDeduce<Vector<S>> &x_init, const NoDeduce<Vector<S>> &x_init_dual, const NoDeduce<RecycleSpace<S>> *recycle,
                               const NoDeduce<IlutpFactors<S>> *precond, const SolverConfig &config)
{
  PreconditionedSystem<S> sys(a, precond);
  const RecycleSpace<S> none = RecycleSpace<S>::none(a.rows());
  auto result = rbicg(sys.op(), sys.rhs(b), sys.rhs_dual(b_dual), sys.to_inner(x_init),
                      sys.to_inner_dual(x_init_dual), recycle ? *recycle : none, config);
  result.x = sys.to_outer(result.x);
  result.x_dual = sys.to_outer_dual(result.x_dual);
  return result;
}

template <Scalar S>
SolveResult<S> rbicgstab_solve(const SparseMatrix<S> &a, const NoDeduce<Vector<S>> &b, const NoDeduce<Vector<S>> &x_init,
                               const NoDeduce<RecycleSpace<S>> &recycle, const NoDeduce<IlutpFactors<S>> *precond,
                               const SolverConfig &config)
{
  PreconditionedSystem<S> sys(a, precond);
  auto result = rbicgstab(sys.op(), sys.rhs(b), sys.to_inner(x_init), recycle, config);
  result.x = sys.to_outer(result.x);
  return result;
}

#define RKRYLOV_INSTANTIATE(S)                                                                                    \
  template Vector<S> random_vector<S>(Index, std::uint64_t);                                                      \
  template SolveResult<S> bicgstab(const LinearOperator<S> &, const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &,              \
                                   const SolverConfig &, const NoDeduce<IterationObserver<S>> &);                          \
  template SolveResult<S> rbicgstab(const LinearOperator<S> &, const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &,             \
                                    const NoDeduce<RecycleSpace<S>> &, const SolverConfig &, const NoDeduce<IterationObserver<S>> &); \
  template DualSolveResult<S> bicg(const LinearOperator<S> &, const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &,              \
                                   const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &, const SolverConfig &,                   \
                                   const NoDeduce<IterationObserver<S>> &);                                                 \
  template DualSolveResult<S> rbicg(const LinearOperator<S> &, const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &,             \
                                    const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &, const NoDeduce<RecycleSpace<S>> &,               \
                                    const SolverConfig &, const NoDeduce<IterationObserver<S>> &, const NoDeduce<CycleSink<S>> &);    \
  template class PreconditionedSystem<S>;                                                                          \
  template SolveResult<S> bicgstab_solve(const SparseMatrix<S> &, const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &,          \
                                         const NoDeduce<IlutpFactors<S>> *, const SolverConfig &);                          \
  template DualSolveResult<S> bicg_solve(const SparseMatrix<S> &, const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &,          \
                                         const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &, const NoDeduce<IlutpFactors<S>> *,           \
                                         const SolverConfig &);                                                   \
  template DualSolveResult<S> rbicg_solve(const SparseMatrix<S> &, const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &,         \
                                          const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &, const NoDeduce<RecycleSpace<S>> *,          \
                                          const NoDeduce<IlutpFactors<S>> *, const SolverConfig &);                         \
  template SolveResult<S> rbicgstab_solve(const SparseMatrix<S> &, const NoDeduce<Vector<S>> &, const NoDeduce<Vector<S>> &,         \
                                          const NoDeduce<RecycleSpace<S>> &, const NoDeduce<IlutpFactors<S>> *, const SolverConfig &);

RKRYLOV_INSTANTIATE(double)
RKRYLOV_INSTANTIATE(std::complex<double>)

#undef RKRYLOV_INSTANTIATE

} // namespace rkrylov
