#pragma once

// Internal numeric kernels shared by the tensorkit ops.

#include <cstddef>
#include <functional>

namespace bvqa::kernels {

/// Runs fn(lo, hi) over disjoint chunks of [begin, end). Work is split only
/// when `cost` (rough flop count) is large enough to amortize thread start.
/// Each index is handled by exactly one call, so results never depend on the
/// worker count as long as fn writes only to outputs owned by its indices.
void parallel_for(std::size_t begin, std::size_t end, double cost,
                  const std::function<void(std::size_t, std::size_t)>& fn);

/// C[m,n] (+)= A[m,k] * B[k,n], row-major with leading dimensions.
/// Every C element is accumulated in ascending k order.
void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);

/// dst[cols, rows] = src[rows, cols]^T.
void transpose(std::size_t rows, std::size_t cols, const double* src, std::size_t ld_src,
               double* dst, std::size_t ld_dst);

}  // namespace bvqa::kernels
