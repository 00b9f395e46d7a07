#pragma once

// Data-parallel building blocks. Every kernel exists twice: a plain serial
// loop kept as the reference, and an OpenMP version. Both produce bitwise
// identical results: rows are finalised by the same routine regardless of
// which thread generated them, and reductions use a fixed pairwise tree.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Sparse>

namespace projlab {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using SpMatCol = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

namespace kernels {

struct Entry {
  int col;
  double val;
};

using RowBuffer = std::vector<std::vector<Entry>>;

// Sort by column, merge duplicates in generation order, drop exact zeros.
inline void finalize_row(std::vector<Entry>& row) {
  std::stable_sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < row.size();) {
    Entry e = row[i++];
    while (i < row.size() && row[i].col == e.col) e.val += row[i++].val;
    if (e.val != 0.0) row[out++] = e;
  }
  row.resize(out);
}

SpMat pack_rows(std::vector<std::vector<Entry>>& rows, int cols, bool parallel);

// gen(block, RowBuffer& local) must fill local[0..rows_per_block) for the
// rows block*rows_per_block + r.
template <class Gen>
SpMat assemble_serial(int blocks, int rows_per_block, int cols, Gen&& gen) {
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(blocks) * rows_per_block);
  RowBuffer local(rows_per_block);
  for (int b = 0; b < blocks; ++b) {
    for (auto& r : local) r.clear();
    gen(b, local);
    for (int r = 0; r < rows_per_block; ++r) {
      finalize_row(local[r]);
      rows[static_cast<std::size_t>(b) * rows_per_block + r] = local[r];
    }
  }
  return pack_rows(rows, cols, false);
}

template <class Gen>
SpMat assemble_parallel(int blocks, int rows_per_block, int cols, Gen&& gen) {
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(blocks) * rows_per_block);
#pragma omp parallel
  {
    RowBuffer local(rows_per_block);
#pragma omp for schedule(static)
    for (int b = 0; b < blocks; ++b) {
      for (auto& r : local) r.clear();
      gen(b, local);
      for (int r = 0; r < rows_per_block; ++r) {
        finalize_row(local[r]);
        rows[static_cast<std::size_t>(b) * rows_per_block + r] = local[r];
      }
    }
  }
  return pack_rows(rows, cols, true);
}

template <class Gen>
SpMat assemble(int blocks, int rows_per_block, int cols, Gen&& gen) {
  return assemble_parallel(blocks, rows_per_block, cols, std::forward<Gen>(gen));
}

void spmv_serial(const SpMat& a, std::span<const double> x, std::span<double> y);
void spmv_parallel(const SpMat& a, std::span<const double> x, std::span<double> y);

double pairwise_sum(std::span<const double> v);

// sum_i a_i b_i with a fixed pairwise tree; products formed in parallel
double dot_serial(std::span<const double> a, std::span<const double> b);
double dot_parallel(std::span<const double> a, std::span<const double> b);

// a^T M b for a row-major M
double bilinear_serial(const SpMat& m, std::span<const double> a, std::span<const double> b);
double bilinear_parallel(const SpMat& m, std::span<const double> a, std::span<const double> b);

int max_threads();

} // namespace kernels
} // namespace projlab
