// SPDX-License-Identifier: Apache-2.0

#include "rkrylov/problems.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace rkrylov {

namespace {

// Five-point stencil weights of one interior node.
struct Stencil
{
  double p = 0, e = 0, w = 0, n = 0, s = 0;
};

struct Boundary
{
  double south, west, north, east;
};

// Assembles an m_x x m_y interior grid. `stencil(i, j)` gets 1-based node
// indices; neighbors outside the interior contribute boundary data to rhs.
template <class StencilFn>
GridProblem assemble(Index mx, Index my, double h, const Boundary &bc, StencilFn stencil)
{
  GridProblem out;
  out.nx = mx;
  out.ny = my;
  out.h = h;
  const Index n = mx * my;
  out.rhs = Vector<double>::Zero(n);
  std::vector<Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(5 * n));
  auto id = [mx](Index i, Index j) { return (j - 1) * mx + (i - 1); };
  for (Index j = 1; j <= my; ++j)
    for (Index i = 1; i <= mx; ++i) {
      const Stencil st = stencil(i, j);
      const Index row = id(i, j);
      entries.push_back({row, row, st.p});
      if (i > 1)
        entries.push_back({row, id(i - 1, j), st.w});
      else
        out.rhs[row] -= st.w * bc.west;
      if (i < mx)
        entries.push_back({row, id(i + 1, j), st.e});
      else
        out.rhs[row] -= st.e * bc.east;
      if (j > 1)
        entries.push_back({row, id(i, j - 1), st.s});
      else
        out.rhs[row] -= st.s * bc.south;
      if (j < my)
        entries.push_back({row, id(i, j + 1), st.n});
      else
        out.rhs[row] -= st.n * bc.north;
    }
  out.a = SparseMatrix<double>::from_triplets(n, n, entries);
  return out;
}

// Weights of -u_xx - u_yy + bx u_x + by u_y multiplied by hx hy.
Stencil convection_stencil(double hx, double hy, double bx, double by, ConvectionScheme scheme)
{
  const double dx = hy / hx, dy = hx / hy;
  Stencil st{2 * dx + 2 * dy, -dx, -dx, -dy, -dy};
  if (scheme == ConvectionScheme::central) {
    st.e += bx * hy / 2;
    st.w -= bx * hy / 2;
    st.n += by * hx / 2;
    st.s -= by * hx / 2;
  } else {
    st.p += std::abs(bx) * hy + std::abs(by) * hx;
    st.w -= std::max(bx, 0.0) * hy;
    st.e -= std::max(-bx, 0.0) * hy;
    st.s -= std::max(by, 0.0) * hx;
    st.n -= std::max(-by, 0.0) * hx;
  }
  return st;
}

} // namespace

GridProblem example1_operator(const Example1Options &options)
{
  if (options.cells < 3)
    throw std::invalid_argument("example1_operator: need at least 3 grid lines per side");
  const Index m = options.cells - 2;
  const double h = 1.0 / static_cast<double>(options.cells - 1);
  const Stencil st = convection_stencil(h, h, options.bx, options.by, options.scheme);
  return assemble(m, m, h, {options.south, options.west, options.north, options.east},
                  [&](Index, Index) { return st; });
}

Example2Options Example2Options::defaults()
{
  Example2Options o;
  o.diffusion = [](double x, double y) { return (x > 0.1 && x < 0.9 && y > 0.1 && y < 0.9) ? 1000.0 : 1.0; };
  o.convection = [](double x, double y) { return 2.0 * std::exp(2.0 * (x * x + y * y)); };
  o.source = [](double x, double y) { return (x >= 0.45 && x <= 0.55 && y >= 0.45 && y <= 0.55) ? 100.0 : 0.0; };
  return o;
}

GridProblem example2_grid(const Example2Options &options)
{
  if (options.gridlines < 5)
    throw std::invalid_argument("example2_operator: need at least 5 grid lines per side");
  const Index m = options.gridlines - 2;
  const double h = 1.0 / static_cast<double>(options.gridlines - 1);
  auto field = [](const std::function<double(double, double)> &f, double fallback) {
    return f ? f : [fallback](double, double) { return fallback; };
  };
  const auto a = field(options.diffusion, 1.0);
  const auto b = field(options.convection, 0.0);
  const auto f = field(options.source, 0.0);
  GridProblem grid = assemble(m, m, h, {options.south, options.west, options.north, options.east},
                              [&](Index i, Index j) {
                                const double x = static_cast<double>(i) * h, y = static_cast<double>(j) * h;
                                const double ae = a(x + h / 2, y), aw = a(x - h / 2, y);
                                const double an = a(x, y + h / 2), as = a(x, y - h / 2);
                                const double bxy = b(x, y);
                                if (options.scheme == ConvectionScheme::central)
                                  return Stencil{ae + aw + an + as, -ae + bxy * h / 2, -aw - bxy * h / 2, -an, -as};
                                const double fwd = std::max(bxy, 0.0) * h, bwd = std::max(-bxy, 0.0) * h;
                                return Stencil{ae + aw + an + as + fwd + bwd, -ae - bwd, -aw - fwd, -an, -as};
                              });
  for (Index j = 1; j <= m; ++j)
    for (Index i = 1; i <= m; ++i)
      grid.rhs[(j - 1) * m + (i - 1)] += h * h * f(static_cast<double>(i) * h, static_cast<double>(j) * h);
  return grid;
}

Example2Problem example2_operator(const Example2Options &options)
{
  GridProblem grid = example2_grid(options);
  IlutpFactors<double> factors = ilutp_factor(grid.a, options.ilutp);
  return {std::move(grid), std::move(factors)};
}

SparseMatrix<double> convection_diffusion(Index nx, Index ny, double bx, double by, ConvectionScheme scheme)
{
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("convection_diffusion: empty grid");
  const double hx = 1.0 / static_cast<double>(nx + 1), hy = 1.0 / static_cast<double>(ny + 1);
  const Stencil st = convection_stencil(hx, hy, bx, by, scheme);
  return assemble(nx, ny, hx, {0, 0, 0, 0}, [&](Index, Index) { return st; }).a;
}

int ParametricSequence::num_systems() const
{
  int total = 0;
  for (const auto &r : rhs)
    total += static_cast<int>(r.size());
  return total;
}

SparseMatrix<double> ParametricSequence::matrix(int i) const
{
  if (i < 0 || i >= num_matrices())
    throw std::out_of_range("ParametricSequence::matrix: index " + std::to_string(i));
  return linear_combination(1.0, a0, 1.0, linear_combination(sigma[i], a1, delta[i], a2));
}

std::pair<int, int> ParametricSequence::locate(int system) const
{
  int left = system;
  for (int m = 0; m < num_matrices(); ++m) {
    const int count = static_cast<int>(rhs[m].size());
    if (left < count)
      return {m, left};
    left -= count;
  }
  throw std::out_of_range("ParametricSequence::locate: system " + std::to_string(system));
}

ParametricSequence synthetic_sequence(const SequenceOptions &options)
{
  if (options.n < 10)
    throw std::invalid_argument("synthetic_sequence: n must be at least 10");
  if (options.num_matrices < 1 || options.rhs_per_matrix < 1)
    throw std::invalid_argument("synthetic_sequence: need at least one matrix and one right-hand side");
  Index mx = 1;
  for (Index d = 1; d * d <= options.n; ++d)
    if (options.n % d == 0)
      mx = d;
  const Index my = options.n / mx;

  ParametricSequence seq;
  seq.a0 = convection_diffusion(mx, my, options.bx, options.by, options.scheme);
  const double norm0 = seq.a0.frobenius_norm();

  std::mt19937_64 gen(options.seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  auto perturbation = [&]() {
    std::vector<Triplet<double>> t = seq.a0.to_triplets();
    for (auto &e : t)
      e.value = sym(gen);
    SparseMatrix<double> p = SparseMatrix<double>::from_triplets(options.n, options.n, t);
    return scaled(p, norm0 / p.frobenius_norm());
  };
  seq.a1 = perturbation();
  seq.a2 = perturbation();
  for (int i = 0; i < options.num_matrices; ++i) {
    seq.sigma.push_back(options.perturbation_scale * mag(gen));
    seq.delta.push_back(options.perturbation_scale * mag(gen));
  }

  Vector<double> f1(options.n), f2(options.n);
  for (Index i = 0; i < options.n; ++i)
    f1[i] = sym(gen);
  for (Index i = 0; i < options.n; ++i)
    f2[i] = sym(gen);
  const double quarter = std::acos(-1.0) / 2;
  const int kmax = options.rhs_per_matrix;
  for (int i = 0; i < options.num_matrices; ++i) {
    std::vector<Vector<double>> rhs;
    for (int kappa = 0; kappa < kmax; ++kappa) {
      const double t = quarter * kappa / kmax;
      rhs.push_back(std::cos(t) * f1 + std::sin(t) * f2);
    }
    seq.rhs.push_back(std::move(rhs));
  }
  return seq;
}

} // namespace rkrylov
