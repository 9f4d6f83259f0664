// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <type_traits>

#include <Eigen/Dense>

namespace rkrylov {

using Index = std::int64_t;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

/// Excludes a parameter from template argument deduction, so Eigen
/// expressions, lambdas and nullptr convert at the call site.
template <class T>
using NoDeduce = std::type_identity_t<T>;

/// Field over which vectors and matrices are defined: double or std::complex<double>.
template <typename T>
concept Scalar = std::is_same_v<T, double> || std::is_same_v<T, std::complex<double>>;

template <Scalar S>
using Real = typename Eigen::NumTraits<S>::Real;

template <Scalar S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <Scalar S>
using DenseMatrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <Scalar S>
constexpr S conj(S x)
{
  if constexpr (is_complex_v<S>)
    return std::conj(x);
  else
    return x;
}

/// Tag stored in on-disk payloads.
template <Scalar S>
constexpr char scalar_tag()
{
  return is_complex_v<S> ? 'z' : 'd';
}

} // namespace rkrylov
