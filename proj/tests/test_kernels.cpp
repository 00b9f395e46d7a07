#include <doctest.h>

#include <omp.h>

#include <cstring>
#include <random>
#include <vector>

#include "projlab/kernels.hpp"

using namespace projlab;
using namespace projlab::kernels;

namespace {

bool same_bits(const SpMat& a, const SpMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
  const auto nnz = static_cast<std::size_t>(a.nonZeros());
  return std::memcmp(a.valuePtr(), b.valuePtr(), nnz * sizeof(double)) == 0 &&
         std::memcmp(a.innerIndexPtr(), b.innerIndexPtr(), nnz * sizeof(int)) == 0 &&
         std::memcmp(a.outerIndexPtr(), b.outerIndexPtr(), (a.rows() + 1) * sizeof(int)) == 0;
}

// Deterministic per-block generator with duplicate columns and cancellations.
void gen_block(int b, RowBuffer& local) {
  std::mt19937_64 rng(1000 + b);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int r = 0; r < static_cast<int>(local.size()); ++r) {
    for (int e = 0; e < 9; ++e) local[r].push_back({static_cast<int>((b * 7 + e * 13 + r) % 500), u(rng)});
    local[r].push_back({b % 500, 0.5});
    local[r].push_back({b % 500, -0.5});
  }
}

std::vector<double> randvec(std::size_t n, int seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

struct Threads {
  int saved = omp_get_max_threads();
  explicit Threads(int t) { omp_set_num_threads(t); }
  ~Threads() { omp_set_num_threads(saved); }
};

} // namespace

TEST_CASE("finalize_row merges in order and drops zeros") {
  std::vector<Entry> row{{3, 1.0}, {1, 2.0}, {3, -1.0}, {0, 0.25}, {1, 0.5}};
  finalize_row(row);
  REQUIRE(row.size() == 2);
  CHECK(row[0].col == 0);
  CHECK(row[0].val == 0.25);
  CHECK(row[1].col == 1);
  CHECK(row[1].val == 2.5);
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  for (int threads : {1, 3, 4}) {
    Threads t(threads);
    const SpMat s = assemble_serial(400, 3, 500, gen_block);
    const SpMat p = assemble_parallel(400, 3, 500, gen_block);
    CHECK(same_bits(s, p));
    CHECK(s.rows() == 1200);

    const auto x = randvec(500, 1);
    std::vector<double> ys(1200), yp(1200);
    spmv_serial(s, x, ys);
    spmv_parallel(s, x, yp);
    CHECK(std::memcmp(ys.data(), yp.data(), ys.size() * sizeof(double)) == 0);

    const auto a = randvec(100001, 2), b = randvec(100001, 3);
    const double ds = dot_serial(a, b), dp = dot_parallel(a, b);
    CHECK(std::memcmp(&ds, &dp, sizeof ds) == 0);

    const auto u = randvec(1200, 4);
    const SpMat sq = assemble_serial(400, 3, 1200, gen_block);
    const double bs = bilinear_serial(sq, u, u), bp = bilinear_parallel(sq, u, u);
    CHECK(std::memcmp(&bs, &bp, sizeof bs) == 0);
  }
}

TEST_CASE("spmv matches Eigen") {
  const SpMat s = assemble_serial(50, 2, 500, gen_block);
  const auto x = randvec(500, 5);
  std::vector<double> y(100);
  spmv_parallel(s, x, y);
  const Eigen::VectorXd ref = s * Eigen::Map<const Eigen::VectorXd>(x.data(), 500);
  for (int i = 0; i < 100; ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-14).scale(1.0));
}

TEST_CASE("pairwise sum") {
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(pairwise_sum(std::vector<double>{2.5}) == 2.5);
  // 1 + 1e-16 * n is lost by a naive left fold but not by the tree
  std::vector<double> v(1 << 16, 1e-16);
  v[0] = 1.0;
  long double ref = 0;
  for (double x : v) ref += x;
  CHECK(pairwise_sum(v) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-15));
  const auto r = randvec(12345, 6);
  long double exact = 0;
  for (double x : r) exact += x;
  CHECK(std::abs(pairwise_sum(r) - static_cast<double>(exact)) <= 1e-12);
}
