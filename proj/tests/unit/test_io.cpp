// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <doctest.h>

#include "rkrylov/io.hpp"
#include "support.hpp"

using namespace rkrylov;
using namespace testing;
namespace fs = std::filesystem;

namespace {

/// Unique scratch directory, removed on scope exit.
struct ScratchDir
{
  fs::path path;
  ScratchDir()
  {
    static int counter = 0;
    path = fs::temp_directory_path() / ("rkrylov-io-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  fs::path operator/(const std::string &name) const { return path / name; }
};

fs::path write_text(const fs::path &p, const std::string &text)
{
  std::ofstream(p) << text;
  return p;
}

std::string read_text(const fs::path &p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE_TEMPLATE("Matrix Market round trip is exact", S, double, cplx)
{
  ScratchDir dir;
  const auto a = sparse_random<S>(37, 4, 2.0, 3);
  mm_write(dir / "a.mtx", a);
  const auto back = mm_read<S>(dir / "a.mtx");
  CHECK(back.rows() == 37);
  CHECK(back.nnz() == a.nnz());
  CHECK(back.to_dense() == a.to_dense());

  const auto v = vector_random<S>(19, 4);
  mm_write_vector(dir / "v.mtx", v);
  CHECK(mm_read_vector<S>(dir / "v.mtx") == v);
}

TEST_CASE("Matrix Market storage variants")
{
  ScratchDir dir;
  const auto sym = mm_read<double>(write_text(dir / "s.mtx", "%%MatrixMarket matrix coordinate real symmetric\n"
                                                              "% comment\n3 3 4\n1 1 2\n2 1 -1\n3 2 -1\n3 3 2\n"));
  DenseMatrix<double> want(3, 3);
  want << 2, -1, 0, -1, 0, -1, 0, -1, 2;
  CHECK(sym.to_dense() == want);

  const auto skew = mm_read<double>(
      write_text(dir / "k.mtx", "%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n"));
  DenseMatrix<double> wk(2, 2);
  wk << 0, -3, 3, 0;
  CHECK(skew.to_dense() == wk);

  const auto pat =
      mm_read<double>(write_text(dir / "p.mtx", "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 2\n2 1\n"));
  CHECK(pat.coeff(0, 1) == 1.0);
  CHECK(pat.coeff(1, 0) == 1.0);

  const auto herm = mm_read<cplx>(
      write_text(dir / "h.mtx", "%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 1 0\n2 1 1 2\n"));
  CHECK(herm.coeff(1, 0) == cplx(1, 2));
  CHECK(herm.coeff(0, 1) == cplx(1, -2));

  const auto info = mm_info(dir / "s.mtx");
  CHECK(info.symmetry == "symmetric");
  CHECK(info.rows == 3);
  CHECK(info.entries == 4);
}

TEST_CASE("Matrix Market errors have distinct types")
{
  ScratchDir dir;
  CHECK_THROWS_AS(mm_read<double>(dir / "missing.mtx"), FileError);
  CHECK_THROWS_AS(mm_read<double>(write_text(dir / "b.mtx", "not a banner\n1 1 1\n1 1 1\n")), BannerError);
  CHECK_THROWS_AS(mm_read<double>(write_text(dir / "c.mtx", "%%MatrixMarket matrix coordinate complex general\n"
                                                            "1 1 1\n1 1 1 0\n")),
                  BannerError);
  CHECK_THROWS_AS(mm_read<double>(write_text(dir / "h.mtx", "%%MatrixMarket matrix coordinate real general\n"
                                                            "2 x 1\n1 1 1\n")),
                  HeaderError);
  CHECK_THROWS_AS(mm_read<double>(write_text(dir / "m.mtx", "%%MatrixMarket matrix coordinate real general\n"
                                                            "2 2 3\n1 1 1\n")),
                  HeaderError);
  CHECK_THROWS_AS(mm_read<double>(write_text(dir / "i.mtx", "%%MatrixMarket matrix coordinate real general\n"
                                                            "2 2 1\n3 1 1\n")),
                  IndexError);
  CHECK_THROWS_AS(mm_read<double>(write_text(dir / "z.mtx", "%%MatrixMarket matrix coordinate real general\n"
                                                            "2 2 1\n0 1 1\n")),
                  IndexError);
  CHECK_THROWS_AS(mm_write(dir / "no-such-dir" / "x.mtx", SparseMatrix<double>::identity(2)), FileError);
}

TEST_CASE("recycle space files")
{
  ScratchDir dir;
  const auto a = sparse_random<double>(40, 5, 3.0, 7);
  const MatrixOperator<double> op(a);
  const auto space = biorthonormalize<double>(dense_random<double>(40, 4, 8), dense_random<double>(40, 4, 9), op);
  recycle_save(dir / "r.bin", space);

  const auto same = recycle_load<double>(dir / "r.bin", op);
  CHECK(same.k() == space.k());
  CHECK(rel_diff(same.u, space.u) <= 1e-14);
  CHECK(rel_diff(same.c, space.c) <= 1e-12);
  CHECK((same.dc - space.dc).cwiseAbs().maxCoeff() <= 1e-12);

  // a different operator: spans kept, images recomputed against it
  const auto b = linear_combination(1.0, a, 0.1, sparse_random<double>(40, 3, 0.0, 10));
  const MatrixOperator<double> opb(b);
  const auto moved = recycle_load<double>(dir / "r.bin", opb);
  CHECK(validate(moved, opb).ok());
  CHECK(moved.k() == space.k());

  const auto small = sparse_random<double>(30, 5, 3.0, 11);
  CHECK_THROWS_AS(recycle_load<double>(dir / "r.bin", MatrixOperator<double>(small)), RecycleFileError);
  CHECK_THROWS_AS(recycle_load<cplx>(dir / "r.bin", MatrixOperator<cplx>(sparse_random<cplx>(40, 5, 3.0, 1))),
                  RecycleFileError);

  std::string bytes = read_text(dir / "r.bin");
  bytes[0] = 'X';
  std::ofstream(dir / "bad.bin", std::ios::binary) << bytes;
  CHECK_THROWS_AS(recycle_load<double>(dir / "bad.bin", op), RecycleFileError);
  std::ofstream(dir / "short.bin", std::ios::binary) << read_text(dir / "r.bin").substr(0, 40);
  CHECK_THROWS_AS(recycle_load<double>(dir / "short.bin", op), RecycleFileError);
}

TEST_CASE("history files")
{
  ScratchDir dir;
  history_write(dir / "empty.csv", RunReport{"bicgstab", {}});
  CHECK(read_text(dir / "empty.csv") == "system_index,solver,iteration,resid,matvecs_cum,seconds_cum\n");

  ConvergenceHistory h;
  h.records = {{0, 1.0, std::nullopt, 1, 0.0}, {1, 0.5, std::nullopt, 3, 0.25}};
  h.status = SolveStatus::converged;
  h.true_residual = 0.5;
  history_write(dir / "one.csv", std::vector<RunReport>{{"bicg", {h}}, {"rbicg", {h, h}}});
  const std::string text = read_text(dir / "one.csv");
  std::istringstream lines(text);
  std::vector<std::string> rows;
  for (std::string line; std::getline(lines, line);)
    rows.push_back(line);
  REQUIRE(rows.size() == 1 + 6 + 3);
  CHECK(rows[1] == "1,bicg,0,1,1,0");
  CHECK(rows[2] == "1,bicg,1,0.5,3,0.25");
  CHECK(rows[5] == "2,rbicg,0,1,1,0");
  CHECK(rows[7] == "# summary system_index=1 solver=bicg status=converged iterations=1 matvecs=3 seconds=0.25 "
                   "true_resid=0.5");
  CHECK(rows[9].starts_with("# summary system_index=2 solver=rbicg"));
}
