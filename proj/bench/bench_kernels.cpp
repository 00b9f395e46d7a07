// Serial reference vs OpenMP kernels. Set OMP_NUM_THREADS to compare; the
// two variants produce bitwise identical results (tests/test_kernels.cpp).

#include <benchmark/benchmark.h>

#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "projlab/spectral.hpp"

using namespace projlab;

namespace {

// 9-point periodic stencil with 3 components per node, one block per node
struct StencilGen {
  int N;
  void operator()(int b, kernels::RowBuffer& local) const {
    const int i = b / N, j = b % N;
    for (int c = 0; c < 3; ++c)
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const int nb = ((i + di + N) % N) * N + (j + dj + N) % N;
          for (int d = 0; d < 3; ++d) local[c].push_back({nb * 3 + d, 0.1 * (c + 1) - 0.05 * d + di * dj});
        }
  }
};

std::vector<double> randvec(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

const SpMat& sinjukov_matrix(int N) {
  static std::map<int, SpMat> cache;
  auto it = cache.find(N);
  if (it == cache.end()) {
    auto g = std::make_shared<const ManifoldGrid>(build_flat_torus(2, N, 2 * std::numbers::pi));
    it = cache.emplace(N, build_normal(g, OperatorTag::sinjukov).A).first;
  }
  return it->second;
}

template <bool Parallel>
void BM_assemble(benchmark::State& st) {
  const int N = static_cast<int>(st.range(0));
  for (auto _ : st) {
    SpMat m = Parallel ? kernels::assemble_parallel(N * N, 3, 3 * N * N, StencilGen{N})
                       : kernels::assemble_serial(N * N, 3, 3 * N * N, StencilGen{N});
    benchmark::DoNotOptimize(m.valuePtr());
  }
  st.SetItemsProcessed(st.iterations() * N * N);
}

template <bool Parallel>
void BM_spmv(benchmark::State& st) {
  const SpMat& a = sinjukov_matrix(static_cast<int>(st.range(0)));
  const auto x = randvec(a.cols());
  std::vector<double> y(a.rows());
  for (auto _ : st) {
    Parallel ? kernels::spmv_parallel(a, x, y) : kernels::spmv_serial(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * a.nonZeros());
}

template <bool Parallel>
void BM_dot(benchmark::State& st) {
  const auto a = randvec(st.range(0)), b = randvec(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(Parallel ? kernels::dot_parallel(a, b) : kernels::dot_serial(a, b));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_bilinear(benchmark::State& st) {
  const SpMat& a = sinjukov_matrix(static_cast<int>(st.range(0)));
  const auto x = randvec(a.cols());
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? kernels::bilinear_parallel(a, x, x) : kernels::bilinear_serial(a, x, x));
  st.SetItemsProcessed(st.iterations() * a.nonZeros());
}

} // namespace

BENCHMARK(BM_assemble<false>)->Name("assemble/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_assemble<true>)->Name("assemble/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_spmv<false>)->Name("spmv/serial")->Arg(64)->Arg(128);
BENCHMARK(BM_spmv<true>)->Name("spmv/parallel")->Arg(64)->Arg(128);
BENCHMARK(BM_dot<false>)->Name("dot/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_dot<true>)->Name("dot/parallel")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_bilinear<false>)->Name("bilinear/serial")->Arg(64)->Arg(128);
BENCHMARK(BM_bilinear<true>)->Name("bilinear/parallel")->Arg(64)->Arg(128);

BENCHMARK_MAIN();
