#include "gemm.hpp"

#include <Eigen/Core>

namespace csiloc::nn::detail {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstView = Eigen::Map<const RowMajor, 0, Eigen::OuterStride<>>;
using View = Eigen::Map<RowMajor, 0, Eigen::OuterStride<>>;

}  // namespace

void gemm_acc(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const double* a,
              std::size_t lda, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  if (m == 0 || n == 0 || k == 0) return;
  const auto rows = [](bool t, std::size_t r, std::size_t q) { return static_cast<Eigen::Index>(t ? q : r); };
  const ConstView A(a, rows(trans_a, m, k), rows(!trans_a, m, k), Eigen::OuterStride<>(static_cast<Eigen::Index>(lda)));
  const ConstView B(b, rows(trans_b, k, n), rows(!trans_b, k, n), Eigen::OuterStride<>(static_cast<Eigen::Index>(ldb)));
  View C(c, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n), Eigen::OuterStride<>(static_cast<Eigen::Index>(ldc)));
  if (!trans_a && !trans_b) {
    C.noalias() += A * B;
  } else if (!trans_a) {
    C.noalias() += A * B.transpose();
  } else if (!trans_b) {
    C.noalias() += A.transpose() * B;
  } else {
    C.noalias() += A.transpose() * B.transpose();
  }
}

}  // namespace csiloc::nn::detail
