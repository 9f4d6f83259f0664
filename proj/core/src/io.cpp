// SPDX-License-Identifier: Apache-2.0

#include "rkrylov/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace rkrylov {

namespace {

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::ifstream open_in(const std::filesystem::path &path, std::ios::openmode mode = std::ios::in)
{
  std::ifstream in(path, mode);
  if (!in)
    throw FileError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path &path, std::ios::openmode mode = std::ios::out)
{
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out)
    throw FileError("cannot open '" + path.string() + "' for writing");
  return out;
}

// Parses an index token; overflow and garbage are reported separately.
Index parse_index(const std::string &token, long line)
{
  Index value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec == std::errc::result_out_of_range)
    throw IndexError("line " + std::to_string(line) + ": index '" + token + "' overflows");
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw HeaderError("line " + std::to_string(line) + ": expected an integer, got '" + token + "'");
  return value;
}

double parse_value(const std::string &token, long line)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size())
      throw std::invalid_argument(token);
    return v;
  } catch (const std::out_of_range &) {
    throw HeaderError("line " + std::to_string(line) + ": value '" + token + "' out of range");
  } catch (const std::invalid_argument &) {
    throw HeaderError("line " + std::to_string(line) + ": expected a number, got '" + token + "'");
  }
}

struct Reader
{
  std::ifstream in;
  std::filesystem::path path;
  long line = 0;
  MarketInfo info;

  // Next non-comment, non-blank line split into tokens; false at end of file.
  bool next(std::vector<std::string> &tokens)
  {
    std::string text;
    while (std::getline(in, text)) {
      ++line;
      if (text.empty() || text[0] == '%')
        continue;
      std::istringstream ss(text);
      tokens.clear();
      for (std::string t; ss >> t;)
        tokens.push_back(t);
      if (!tokens.empty())
        return true;
    }
    return false;
  }
};

Reader open_market(const std::filesystem::path &path)
{
  Reader r{open_in(path), path, 0, {}};
  std::string banner;
  if (!std::getline(r.in, banner))
    throw BannerError(path.string() + ": empty file");
  r.line = 1;
  std::istringstream ss(banner);
  std::string tag, object, format, field, symmetry;
  ss >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket")
    throw BannerError(path.string() + ": missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix")
    throw BannerError(path.string() + ": unsupported object '" + object + "'");
  if (format == "coordinate")
    r.info.coordinate = true;
  else if (format == "array")
    r.info.coordinate = false;
  else
    throw BannerError(path.string() + ": unsupported format '" + format + "'");
  if (field == "real" || field == "double")
    r.info.field = MarketField::real;
  else if (field == "complex")
    r.info.field = MarketField::complex;
  else if (field == "integer")
    r.info.field = MarketField::integer;
  else if (field == "pattern" && r.info.coordinate)
    r.info.field = MarketField::pattern;
  else
    throw BannerError(path.string() + ": unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric" && symmetry != "hermitian")
    throw BannerError(path.string() + ": unsupported symmetry '" + symmetry + "'");
  if (symmetry == "hermitian" && r.info.field != MarketField::complex)
    throw BannerError(path.string() + ": hermitian symmetry requires a complex field");
  r.info.symmetry = symmetry;

  std::vector<std::string> tokens;
  if (!r.next(tokens))
    throw HeaderError(path.string() + ": missing size line");
  const std::size_t expect = r.info.coordinate ? 3 : 2;
  if (tokens.size() != expect)
    throw HeaderError(path.string() + ": line " + std::to_string(r.line) + ": malformed size line");
  r.info.rows = parse_index(tokens[0], r.line);
  r.info.cols = parse_index(tokens[1], r.line);
  r.info.entries = r.info.coordinate ? parse_index(tokens[2], r.line) : r.info.rows * r.info.cols;
  if (r.info.rows <= 0 || r.info.cols <= 0 || r.info.entries < 0)
    throw HeaderError(path.string() + ": nonpositive dimensions");
  if (r.info.symmetry != "general" && r.info.rows != r.info.cols)
    throw HeaderError(path.string() + ": symmetric storage of a non-square matrix");
  return r;
}

template <Scalar S>
S read_scalar(const std::vector<std::string> &tokens, std::size_t at, MarketField field, long line)
{
  if (field == MarketField::pattern)
    return S(1);
  const std::size_t needed = at + (field == MarketField::complex ? 2 : 1);
  if (tokens.size() != needed)
    throw HeaderError("line " + std::to_string(line) + ": expected " + std::to_string(needed) + " fields, got " +
                      std::to_string(tokens.size()));
  const double re = parse_value(tokens[at], line);
  if (field == MarketField::complex) {
    const double im = parse_value(tokens[at + 1], line);
    if constexpr (is_complex_v<S>)
      return S(re, im);
    else
      (void)im;
  }
  return S(re);
}

template <Scalar S>
void check_field(const Reader &r)
{
  if constexpr (!is_complex_v<S>)
    if (r.info.field == MarketField::complex)
      throw BannerError(r.path.string() + ": complex matrix cannot be read as real");
}

template <Scalar S>
std::vector<Triplet<S>> read_entries(Reader &r)
{
  check_field<S>(r);
  std::vector<Triplet<S>> out;
  std::vector<std::string> tokens;
  const bool sym = r.info.symmetry != "general";
  out.reserve(static_cast<std::size_t>(sym ? 2 * r.info.entries : r.info.entries));
  if (r.info.coordinate) {
    for (Index e = 0; e < r.info.entries; ++e) {
      if (!r.next(tokens))
        throw HeaderError(r.path.string() + ": expected " + std::to_string(r.info.entries) + " entries, found " +
                          std::to_string(e));
      if (tokens.size() < 2)
        throw HeaderError(r.path.string() + ": line " + std::to_string(r.line) + ": malformed entry");
      const Index i = parse_index(tokens[0], r.line);
      const Index j = parse_index(tokens[1], r.line);
      if (i < 1 || i > r.info.rows || j < 1 || j > r.info.cols)
        throw IndexError(r.path.string() + ": line " + std::to_string(r.line) + ": entry (" + std::to_string(i) +
                         ", " + std::to_string(j) + ") outside " + std::to_string(r.info.rows) + " x " +
                         std::to_string(r.info.cols));
      const S v = read_scalar<S>(tokens, 2, r.info.field, r.line);
      out.push_back({i - 1, j - 1, v});
      if (sym && i != j) {
        S mirrored = v;
        if (r.info.symmetry == "skew-symmetric")
          mirrored = -v;
        else if (r.info.symmetry == "hermitian")
          mirrored = conj(v);
        out.push_back({j - 1, i - 1, mirrored});
      }
    }
  } else {
    // column-major; symmetric arrays list the lower triangle only
    for (Index j = 0; j < r.info.cols; ++j)
      for (Index i = sym ? j : 0; i < r.info.rows; ++i) {
        if (!r.next(tokens))
          throw HeaderError(r.path.string() + ": array data ends early");
        const S v = read_scalar<S>(tokens, 0, r.info.field, r.line);
        if (v != S(0))
          out.push_back({i, j, v});
        if (sym && i != j && v != S(0))
          out.push_back({j, i, r.info.symmetry == "skew-symmetric" ? S(-v) : r.info.symmetry == "hermitian" ? conj(v) : v});
      }
  }
  if (r.next(tokens))
    throw HeaderError(r.path.string() + ": line " + std::to_string(r.line) + ": more entries than declared");
  return out;
}

template <Scalar S>
void write_scalar(std::ostream &os, S v)
{
  if constexpr (is_complex_v<S>)
    os << v.real() << ' ' << v.imag();
  else
    os << v;
}

constexpr char recycle_magic[8] = {'R', 'K', 'R', 'Y', 'L', 'R', 'S', '\0'};
constexpr std::uint32_t recycle_version = 1;

} // namespace

MarketInfo mm_info(const std::filesystem::path &path)
{
  return open_market(path).info;
}

template <Scalar S>
SparseMatrix<S> mm_read(const std::filesystem::path &path)
{
  Reader r = open_market(path);
  const std::vector<Triplet<S>> entries = read_entries<S>(r);
  return SparseMatrix<S>::from_triplets(r.info.rows, r.info.cols, entries);
}

template <Scalar S>
void mm_write(const std::filesystem::path &path, const SparseMatrix<S> &a)
{
  std::ofstream out = open_out(path);
  out << "%%MatrixMarket matrix coordinate " << (is_complex_v<S> ? "complex" : "real") << " general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  for (const Triplet<S> &t : a.to_triplets()) {
    out << t.row + 1 << ' ' << t.col + 1 << ' ';
    write_scalar(out, t.value);
    out << '\n';
  }
  if (!out)
    throw FileError("write to '" + path.string() + "' failed");
}

template <Scalar S>
Vector<S> mm_read_vector(const std::filesystem::path &path)
{
  Reader r = open_market(path);
  if (r.info.cols != 1)
    throw HeaderError(path.string() + ": expected a single column, got " + std::to_string(r.info.cols));
  const std::vector<Triplet<S>> entries = read_entries<S>(r);
  Vector<S> v = Vector<S>::Zero(r.info.rows);
  for (const auto &t : entries)
    v[t.row] += t.value;
  return v;
}

template <Scalar S>
void mm_write_vector(const std::filesystem::path &path, const Vector<S> &v)
{
  std::ofstream out = open_out(path);
  out << "%%MatrixMarket matrix array " << (is_complex_v<S> ? "complex" : "real") << " general\n";
  out << v.size() << " 1\n" << std::setprecision(17);
  for (Index i = 0; i < v.size(); ++i) {
    write_scalar(out, v[i]);
    out << '\n';
  }
  if (!out)
    throw FileError("write to '" + path.string() + "' failed");
}

template <Scalar S>
void recycle_save(const std::filesystem::path &path, const RecycleSpace<S> &space)
{
  if (space.empty())
    throw RecycleFileError("recycle_save: refusing to save an empty recycle space");
  std::ofstream out = open_out(path, std::ios::binary);
  const std::int64_t n = space.n(), k = space.k();
  const char tag = scalar_tag<S>();
  out.write(recycle_magic, sizeof recycle_magic);
  out.write(reinterpret_cast<const char *>(&recycle_version), sizeof recycle_version);
  out.write(reinterpret_cast<const char *>(&n), sizeof n);
  out.write(reinterpret_cast<const char *>(&k), sizeof k);
  out.write(&tag, 1);
  const auto bytes = static_cast<std::streamsize>(sizeof(S) * static_cast<std::size_t>(n * k));
  out.write(reinterpret_cast<const char *>(space.u.data()), bytes);
  out.write(reinterpret_cast<const char *>(space.ut.data()), bytes);
  if (!out)
    throw FileError("write to '" + path.string() + "' failed");
}

template <Scalar S>
RecycleSpace<S> recycle_load(const std::filesystem::path &path, const LinearOperator<S> &op)
{
  std::ifstream in = open_in(path, std::ios::binary);
  char magic[8] = {};
  std::uint32_t version = 0;
  std::int64_t n = 0, k = 0;
  char tag = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char *>(&version), sizeof version);
  in.read(reinterpret_cast<char *>(&n), sizeof n);
  in.read(reinterpret_cast<char *>(&k), sizeof k);
  in.read(&tag, 1);
  if (!in || std::memcmp(magic, recycle_magic, sizeof magic) != 0)
    throw RecycleFileError(path.string() + ": not a recycle-space file");
  if (version != recycle_version)
    throw RecycleFileError(path.string() + ": unsupported version " + std::to_string(version));
  if (tag != scalar_tag<S>())
    throw RecycleFileError(path.string() + ": scalar tag '" + std::string(1, tag) + "' does not match '" +
                           std::string(1, scalar_tag<S>()) + "'");
  if (n <= 0 || k <= 0 || k > n)
    throw RecycleFileError(path.string() + ": corrupt header (n = " + std::to_string(n) + ", k = " +
                           std::to_string(k) + ")");
  if (n != op.size())
    throw RecycleFileError(path.string() + ": space has n = " + std::to_string(n) + " but the operator has size " +
                           std::to_string(op.size()));
  DenseMatrix<S> u(n, k), ut(n, k);
  const auto bytes = static_cast<std::streamsize>(sizeof(S) * static_cast<std::size_t>(n * k));
  in.read(reinterpret_cast<char *>(u.data()), bytes);
  in.read(reinterpret_cast<char *>(ut.data()), bytes);
  if (!in)
    throw RecycleFileError(path.string() + ": truncated payload");
  in.peek();
  if (!in.eof())
    throw RecycleFileError(path.string() + ": trailing bytes after payload");
  return biorthonormalize<S>(u, ut, op);
}

void history_write(const std::filesystem::path &path, const std::vector<RunReport> &reports)
{
  std::ofstream out = open_out(path);
  out << "system_index,solver,iteration,resid,matvecs_cum,seconds_cum\n";
  out << std::setprecision(17);
  for (const RunReport &report : reports)
    for (std::size_t s = 0; s < report.systems.size(); ++s)
      for (const IterationRecord &rec : report.systems[s].records)
        out << s + 1 << ',' << report.solver << ',' << rec.iteration << ',' << rec.residual << ',' << rec.matvecs
            << ',' << rec.seconds << '\n';
  for (const RunReport &report : reports)
    for (std::size_t s = 0; s < report.systems.size(); ++s) {
      const ConvergenceHistory &h = report.systems[s];
      out << "# summary system_index=" << s + 1 << " solver=" << report.solver << " status=" << to_string(h.status)
          << " iterations=" << h.iterations() << " matvecs=" << h.matvecs() << " seconds=" << h.seconds()
          << " true_resid=" << h.true_residual << '\n';
    }
  if (!out)
    throw FileError("write to '" + path.string() + "' failed");
}

void history_write(const std::filesystem::path &path, const RunReport &report)
{
  history_write(path, std::vector<RunReport>{report});
}

#define RKRYLOV_INSTANTIATE(S)                                                                     \
  template SparseMatrix<S> mm_read<S>(const std::filesystem::path &);                              \
  template void mm_write<S>(const std::filesystem::path &, const SparseMatrix<S> &);               \
  template Vector<S> mm_read_vector<S>(const std::filesystem::path &);                             \
  template void mm_write_vector<S>(const std::filesystem::path &, const Vector<S> &);              \
  template void recycle_save<S>(const std::filesystem::path &, const RecycleSpace<S> &);           \
  template RecycleSpace<S> recycle_load<S>(const std::filesystem::path &, const LinearOperator<S> &);

RKRYLOV_INSTANTIATE(double)
RKRYLOV_INSTANTIATE(std::complex<double>)

#undef RKRYLOV_INSTANTIATE

} // namespace rkrylov
