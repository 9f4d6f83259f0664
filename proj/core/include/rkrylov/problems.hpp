// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "rkrylov/ilutp.hpp"

namespace rkrylov {

/// Discretized boundary-value problem on the unit square.
///
/// Nodes sit on a uniform grid with `gridlines` lines per side (spacing
/// h = 1 / (gridlines - 1)); the unknowns are the interior nodes, ordered
/// lexicographically with x running fastest.
struct GridProblem
{
  SparseMatrix<double> a;
  Vector<double> rhs;
  Index nx = 0, ny = 0;
  double h = 0.0;
};

enum class ConvectionScheme
{
  central,
  upwind,
};

struct Example1Options
{
  /// Grid lines per side; 42 gives the 40 x 40 interior (n = 1600).
  Index cells = 42;
  /// Velocity (bx, by) in -u_xx - u_yy + bx u_x + by u_y.
  double bx = 10.0;
  double by = -10.0;
  ConvectionScheme scheme = ConvectionScheme::central;
  double south = 1.0, west = 1.0, north = 0.0, east = 0.0;
};

/// Convection-diffusion on the unit square, scaled by h^2 (finite-volume form).
GridProblem example1_operator(const Example1Options &options = {});

struct Example2Options
{
  Index gridlines = 129;
  /// Diffusion coefficient field a(x, y).
  std::function<double(double, double)> diffusion;
  /// Convection coefficient B(x, y) multiplying v_x.
  std::function<double(double, double)> convection;
  /// Source F(x, y).
  std::function<double(double, double)> source;
  ConvectionScheme scheme = ConvectionScheme::upwind;
  double south = 1.0, west = 1.0, north = 0.0, east = 1.0;
  IlutpOptions ilutp{0.1, 0.1, -1};

  /// a = 1 with a 1000 block on [0.1, 0.9]^2, B = 2 exp(2 (x^2 + y^2)),
  /// F = 100 on the central [0.45, 0.55]^2 and 0 elsewhere.
  static Example2Options defaults();
};

struct Example2Problem
{
  GridProblem grid;
  IlutpFactors<double> factors;
};

/// -(a v_x)_x - (a v_y)_y + B v_x = F with Dirichlet data, a sampled at
/// cell-edge midpoints. Also factors the matrix with ILUTP.
Example2Problem example2_operator(const Example2Options &options = Example2Options::defaults());

/// Assembly without the factorization.
GridProblem example2_grid(const Example2Options &options = Example2Options::defaults());

/// A(i) = A0 + sigma_i A1 + delta_i A2 with rhs_per_matrix right-hand sides each.
struct ParametricSequence
{
  SparseMatrix<double> a0, a1, a2;
  std::vector<double> sigma, delta;
  std::vector<std::vector<Vector<double>>> rhs;

  Index size() const { return a0.rows(); }
  int num_matrices() const { return static_cast<int>(sigma.size()); }
  int num_systems() const;
  SparseMatrix<double> matrix(int i) const;
  /// Zero-based system index -> (matrix index, rhs index).
  std::pair<int, int> locate(int system) const;
};

struct SequenceOptions
{
  Index n = 4000;
  int num_matrices = 3;
  int rhs_per_matrix = 21;
  double perturbation_scale = 1e-3;
  std::uint64_t seed = 0;
  double bx = 10.0;
  double by = -10.0;
  /// Mesh Peclet number stays below 1 at the default velocity, so central differences are stable.
  ConvectionScheme scheme = ConvectionScheme::central;
};

/// A0 is a convection-diffusion operator on an mx x my grid (mx the largest
/// divisor of n not above sqrt(n)); A1, A2 are random on the same pattern,
/// scaled to ||A0||_F; sigma, delta ~ scale * U(0.5, 1.5). Right-hand sides
/// rotate smoothly between two random vectors: cos(t) f1 + sin(t) f2.
ParametricSequence synthetic_sequence(const SequenceOptions &options);

/// Five-point operator -u_xx - u_yy + bx u_x + by u_y on an nx x ny interior grid
/// with spacing 1/(nx+1), 1/(ny+1); homogeneous Dirichlet data, scaled by hx hy.
SparseMatrix<double> convection_diffusion(Index nx, Index ny, double bx, double by,
                                          ConvectionScheme scheme = ConvectionScheme::central);

} // namespace rkrylov
