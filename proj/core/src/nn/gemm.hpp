#pragma once

#include <cstddef>

namespace csiloc::nn::detail {

/// C(m x n) += op(A) * op(B), row-major, where op(X) is X or X^T. lda and ldb
/// are the leading dimensions of A and B as stored.
void gemm_acc(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const double* a,
              std::size_t lda, const double* b, std::size_t ldb, double* c, std::size_t ldc);

}  // namespace csiloc::nn::detail
