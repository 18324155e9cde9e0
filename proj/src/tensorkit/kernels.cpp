#include "kernels.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace bvqa::kernels {

namespace {

constexpr double kMinParallelCost = 4.0e6;
constexpr std::size_t kTileRows = 4;
constexpr std::size_t kTileCols = 8;
constexpr std::size_t kDepthBlock = 256;

std::size_t worker_count() {
  static const std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

void tile_4x8(std::size_t k0, std::size_t k1, const double* a, std::size_t lda, const double* b,
              std::size_t ldb, double* c, std::size_t ldc) {
  double acc[kTileRows][kTileCols];
  for (std::size_t r = 0; r < kTileRows; ++r)
    for (std::size_t j = 0; j < kTileCols; ++j) acc[r][j] = c[r * ldc + j];
  for (std::size_t kk = k0; kk < k1; ++kk) {
    const double* brow = b + kk * ldb;
    for (std::size_t r = 0; r < kTileRows; ++r) {
      const double av = a[r * lda + kk];
      for (std::size_t j = 0; j < kTileCols; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (std::size_t r = 0; r < kTileRows; ++r)
    for (std::size_t j = 0; j < kTileCols; ++j) c[r * ldc + j] = acc[r][j];
}

void tile_edge(std::size_t rows, std::size_t cols, std::size_t k0, std::size_t k1, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      double s = c[r * ldc + j];
      for (std::size_t kk = k0; kk < k1; ++kk) s += a[r * lda + kk] * b[kk * ldb + j];
      c[r * ldc + j] = s;
    }
  }
}

}  // namespace

void parallel_for(std::size_t begin, std::size_t end, double cost,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (end <= begin) return;
  const std::size_t span = end - begin;
  const std::size_t workers = std::min(worker_count(), span);
  if (workers <= 1 || cost < kMinParallelCost) {
    fn(begin, end);
    return;
  }
  const std::size_t chunk = (span + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo < hi) pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  fn(begin, std::min(end, begin + chunk));
  for (auto& t : pool) t.join();
}

void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < m; ++i) std::fill(c + i * ldc, c + i * ldc + n, 0.0);
  }
  if (m == 0 || n == 0 || k == 0) return;
  const std::size_t row_blocks = (m + kTileRows - 1) / kTileRows;
  const double cost = 2.0 * double(m) * double(n) * double(k);
  parallel_for(0, row_blocks, cost, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k0 = 0; k0 < k; k0 += kDepthBlock) {
      const std::size_t k1 = std::min(k, k0 + kDepthBlock);
      for (std::size_t j0 = 0; j0 < n; j0 += kTileCols) {
        const std::size_t cols = std::min(kTileCols, n - j0);
        for (std::size_t rb = lo; rb < hi; ++rb) {
          const std::size_t i0 = rb * kTileRows;
          const std::size_t rows = std::min(kTileRows, m - i0);
          double* ctile = c + i0 * ldc + j0;
          const double* atile = a + i0 * lda;
          if (rows == kTileRows && cols == kTileCols) {
            tile_4x8(k0, k1, atile, lda, b + j0, ldb, ctile, ldc);
          } else {
            tile_edge(rows, cols, k0, k1, atile, lda, b + j0, ldb, ctile, ldc);
          }
        }
      }
    }
  });
}

void transpose(std::size_t rows, std::size_t cols, const double* src, std::size_t ld_src,
               double* dst, std::size_t ld_dst) {
  constexpr std::size_t block = 32;
  for (std::size_t i0 = 0; i0 < rows; i0 += block) {
    const std::size_t i1 = std::min(rows, i0 + block);
    for (std::size_t j0 = 0; j0 < cols; j0 += block) {
      const std::size_t j1 = std::min(cols, j0 + block);
      for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = j0; j < j1; ++j) dst[j * ld_dst + i] = src[i * ld_src + j];
    }
  }
}

}  // namespace bvqa::kernels
