// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "rkrylov/history.hpp"
#include "rkrylov/recycle_space.hpp"

namespace rkrylov {

/// Base class of every Matrix Market failure.
class MatrixMarketError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// The first line is not a recognized %%MatrixMarket banner, or the banner
/// asks for something this reader does not support.
class BannerError : public MatrixMarketError
{
public:
  using MatrixMarketError::MatrixMarketError;
};

/// The size line or an entry line cannot be parsed, or entries are missing.
class HeaderError : public MatrixMarketError
{
public:
  using MatrixMarketError::MatrixMarketError;
};

/// An entry index lies outside the declared dimensions.
class IndexError : public MatrixMarketError
{
public:
  using MatrixMarketError::MatrixMarketError;
};

/// File cannot be opened, read or written.
class FileError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class MarketField
{
  real,
  complex,
  integer,
  pattern,
};

struct MarketInfo
{
  bool coordinate = true;
  MarketField field = MarketField::real;
  std::string symmetry = "general";
  Index rows = 0, cols = 0, entries = 0;
};

/// Reads and validates the banner and size line only.
MarketInfo mm_info(const std::filesystem::path &path);

/// Coordinate files (real, integer, pattern, complex; general, symmetric,
/// skew-symmetric, hermitian). Symmetric storage is expanded. Reading a
/// complex file as real throws BannerError.
template <Scalar S>
SparseMatrix<S> mm_read(const std::filesystem::path &path);

/// Writes a general coordinate file with 17 significant digits.
template <Scalar S>
void mm_write(const std::filesystem::path &path, const SparseMatrix<S> &a);

/// Reads a vector stored as an n x 1 array or coordinate file.
template <Scalar S>
Vector<S> mm_read_vector(const std::filesystem::path &path);

/// Writes an n x 1 array file.
template <Scalar S>
void mm_write_vector(const std::filesystem::path &path, const Vector<S> &v);

/// Thrown for malformed recycle-space files and size mismatches.
class RecycleFileError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Binary layout (little-endian host order): 8-byte magic "RKRYLRS\0",
/// uint32 version, int64 n, int64 k, char scalar tag ('d' or 'z'), then U
/// and Ut column-major.
template <Scalar S>
void recycle_save(const std::filesystem::path &path, const RecycleSpace<S> &space);

/// Loads U and Ut and recomputes the images against `op` (2k applications).
template <Scalar S>
RecycleSpace<S> recycle_load(const std::filesystem::path &path, const LinearOperator<S> &op);

/// Writes `system_index,solver,iteration,resid,matvecs_cum,seconds_cum` rows,
/// then one `# summary` line per system. Several reports share the header.
void history_write(const std::filesystem::path &path, const std::vector<RunReport> &reports);
void history_write(const std::filesystem::path &path, const RunReport &report);

} // namespace rkrylov
