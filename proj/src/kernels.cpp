#include "projlab/kernels.hpp"

#include <omp.h>

namespace projlab::kernels {

SpMat pack_rows(std::vector<std::vector<Entry>>& rows, int cols, bool parallel) {
  const int nrows = static_cast<int>(rows.size());
  std::vector<int> outer(nrows + 1, 0);
  for (int r = 0; r < nrows; ++r) outer[r + 1] = outer[r] + static_cast<int>(rows[r].size());
  std::vector<int> inner(outer[nrows]);
  std::vector<double> values(outer[nrows]);
  auto fill = [&](int r) {
    int k = outer[r];
    for (const auto& e : rows[r]) {
      inner[k] = e.col;
      values[k] = e.val;
      ++k;
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < nrows; ++r) fill(r);
  } else {
    for (int r = 0; r < nrows; ++r) fill(r);
  }
  Eigen::Map<const SpMat> view(nrows, cols, outer[nrows], outer.data(), inner.data(), values.data());
  return SpMat(view);
}

void spmv_serial(const SpMat& a, std::span<const double> x, std::span<double> y) {
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  for (int r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (int k = outer[r]; k < outer[r + 1]; ++k) s += val[k] * x[inner[k]];
    y[r] = s;
  }
}

void spmv_parallel(const SpMat& a, std::span<const double> x, std::span<double> y) {
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  const int rows = static_cast<int>(a.rows());
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int k = outer[r]; k < outer[r + 1]; ++k) s += val[k] * x[inner[k]];
    y[r] = s;
  }
}

namespace {

double pairwise(const double* v, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise(v, half) + pairwise(v + half, n - half);
}

} // namespace

double pairwise_sum(std::span<const double> v) { return pairwise(v.data(), v.size()); }

double dot_serial(std::span<const double> a, std::span<const double> b) {
  std::vector<double> p(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] * b[i];
  return pairwise_sum(p);
}

double dot_parallel(std::span<const double> a, std::span<const double> b) {
  const long n = static_cast<long>(a.size());
  std::vector<double> p(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) p[i] = a[i] * b[i];
  return pairwise_sum(p);
}

double bilinear_serial(const SpMat& m, std::span<const double> a, std::span<const double> b) {
  std::vector<double> mb(m.rows());
  spmv_serial(m, b, mb);
  return dot_serial(a, mb);
}

double bilinear_parallel(const SpMat& m, std::span<const double> a, std::span<const double> b) {
  std::vector<double> mb(m.rows());
  spmv_parallel(m, b, mb);
  return dot_parallel(a, mb);
}

int max_threads() { return omp_get_max_threads(); }

} // namespace projlab::kernels
