#pragma once

// Dense and sparse compute kernels behind the autodiff ops and the
// structural encodings. Each kernel exists twice: a plain serial reference
// in kernels::serial and an OpenMP version in kernels::omp. Both versions
// accumulate every output element in the same order, so their results are
// bit-identical; tests assert this and bench/ compares their speed.
//
// All matrices are row-major; outputs are overwritten.

#include <cstddef>
#include <span>
#include <vector>

namespace tfuse::kernels {

// Constant sparse matrix in CSR form (rows x cols).
struct Csr {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> offsets;  // rows + 1
    std::vector<std::size_t> indices;
    std::vector<double> values;

    Csr transposed() const;
};

using In = std::span<const double>;
using Out = std::span<double>;

namespace serial {
// C(m x n) = A(m x k) * B(k x n)
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c);
// C(m x n) = A(m x k) * B(n x k)^T
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c);
// C(m x n) = A(k x m)^T * B(k x n)
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c);
// Y(rows x d) = S * X(cols x d)
void csr_spmm(const Csr& s, std::size_t d, In x, Out y);
// Row i of Y becomes vec(W * Mat(h_i) * Q^T); H and Y are n x d^2, W and Q are d x d.
void bilinear_rows(std::size_t n, std::size_t d, In h, In w, In q, Out y);
// Input gradient of bilinear_rows: Mat(dH_i) = W^T * Mat(G_i) * Q.
void bilinear_rows_input_grad(std::size_t n, std::size_t d, In g, In w, In q, Out dh);
// Factor gradients: dW = sum_i G_i Q M_i^T, dQ = sum_i G_i^T W M_i.
void bilinear_rows_factor_grad(std::size_t n, std::size_t d, In g, In h, In w, In q, Out dw, Out dq);
}  // namespace serial

namespace omp {
// C(m x n) = A(m x k) * B(k x n)
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c);
// C(m x n) = A(m x k) * B(n x k)^T
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c);
// C(m x n) = A(k x m)^T * B(k x n)
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c);
// Y(rows x d) = S * X(cols x d)
void csr_spmm(const Csr& s, std::size_t d, In x, Out y);
// Row i of Y becomes vec(W * Mat(h_i) * Q^T); H and Y are n x d^2, W and Q are d x d.
void bilinear_rows(std::size_t n, std::size_t d, In h, In w, In q, Out y);
// Input gradient of bilinear_rows: Mat(dH_i) = W^T * Mat(G_i) * Q.
void bilinear_rows_input_grad(std::size_t n, std::size_t d, In g, In w, In q, Out dh);
// Factor gradients: dW = sum_i G_i Q M_i^T, dQ = sum_i G_i^T W M_i.
void bilinear_rows_factor_grad(std::size_t n, std::size_t d, In g, In h, In w, In q, Out dw, Out dq);
}  // namespace omp

// The library calls these; they forward to the OpenMP versions.
using omp::bilinear_rows;
using omp::bilinear_rows_factor_grad;
using omp::bilinear_rows_input_grad;
using omp::csr_spmm;
using omp::gemm_nn;
using omp::gemm_nt;
using omp::gemm_tn;

}  // namespace tfuse::kernels
