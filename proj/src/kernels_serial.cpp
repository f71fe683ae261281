#include <algorithm>
#include <vector>

#include "kernel_rows.hpp"
#include "tfuse/kernels.hpp"

namespace tfuse::kernels {

Csr Csr::transposed() const {
    Csr t;
    t.rows = cols;
    t.cols = rows;
    t.offsets.assign(cols + 1, 0);
    for (auto j : indices) ++t.offsets[j + 1];
    for (std::size_t j = 0; j < cols; ++j) t.offsets[j + 1] += t.offsets[j];
    t.indices.resize(indices.size());
    t.values.resize(values.size());
    std::vector<std::size_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
    // Rows are visited in ascending order, so each transposed row stays sorted.
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
            const std::size_t slot = cursor[indices[e]]++;
            t.indices[slot] = i;
            t.values[slot] = values[e];
        }
    return t;
}

namespace serial {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
            c[i * n + j] = acc;
        }
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
            c[i * n + j] = acc;
        }
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
            c[i * n + j] = acc;
        }
}

void csr_spmm(const Csr& s, std::size_t d, In x, Out y) {
    for (std::size_t i = 0; i < s.rows; ++i)
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t e = s.offsets[i]; e < s.offsets[i + 1]; ++e) acc += s.values[e] * x[s.indices[e] * d + c];
            y[i * d + c] = acc;
        }
}

void bilinear_rows(std::size_t n, std::size_t d, In h, In w, In q, Out y) {
    const std::size_t dd = d * d;
    std::vector<double> t(dd);
    for (std::size_t i = 0; i < n; ++i) detail::bilinear_row(d, &h[i * dd], w.data(), q.data(), t.data(), &y[i * dd]);
}

void bilinear_rows_input_grad(std::size_t n, std::size_t d, In g, In w, In q, Out dh) {
    const std::size_t dd = d * d;
    std::vector<double> u(dd);
    for (std::size_t i = 0; i < n; ++i)
        detail::bilinear_row_input_grad(d, &g[i * dd], w.data(), q.data(), u.data(), &dh[i * dd]);
}

void bilinear_rows_factor_grad(std::size_t n, std::size_t d, In g, In h, In w, In q, Out dw, Out dq) {
    const std::size_t dd = d * d;
    std::vector<double> scratch(dd), cw(dd), cq(dd);
    std::fill(dw.begin(), dw.end(), 0.0);
    std::fill(dq.begin(), dq.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        detail::bilinear_row_factor_grad(d, &g[i * dd], &h[i * dd], w.data(), q.data(), scratch.data(), cw.data(),
                                         cq.data());
        for (std::size_t e = 0; e < dd; ++e) {
            dw[e] += cw[e];
            dq[e] += cq[e];
        }
    }
}

}  // namespace serial
}  // namespace tfuse::kernels
