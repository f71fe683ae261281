#include <algorithm>
#include <cstdint>
#include <vector>

#include "kernel_rows.hpp"
#include "tfuse/kernels.hpp"

namespace tfuse::kernels::omp {

namespace {
// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

bool worth(std::size_t work) { return work >= kParallelWork; }
}  // namespace

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c) {
    const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (worth(m * k * n))
    for (std::int64_t ii = 0; ii < rows; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* crow = &c[i * n];
        std::fill(crow, crow + n, 0.0);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            const double* brow = &b[p * n];
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c) {
    const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (worth(m * k * n))
    for (std::int64_t ii = 0; ii < rows; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* arow = &a[i * k];
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = &b[j * k];
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            c[i * n + j] = acc;
        }
    }
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c) {
    const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (worth(m * k * n))
    for (std::int64_t ii = 0; ii < rows; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* crow = &c[i * n];
        std::fill(crow, crow + n, 0.0);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[p * m + i];
            const double* brow = &b[p * n];
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void csr_spmm(const Csr& s, std::size_t d, In x, Out y) {
    const auto rows = static_cast<std::int64_t>(s.rows);
#pragma omp parallel for schedule(static) if (worth(s.indices.size() * d))
    for (std::int64_t ii = 0; ii < rows; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* yrow = &y[i * d];
        std::fill(yrow, yrow + d, 0.0);
        for (std::size_t e = s.offsets[i]; e < s.offsets[i + 1]; ++e) {
            const double v = s.values[e];
            const double* xrow = &x[s.indices[e] * d];
            for (std::size_t c = 0; c < d; ++c) yrow[c] += v * xrow[c];
        }
    }
}

void bilinear_rows(std::size_t n, std::size_t d, In h, In w, In q, Out y) {
    const std::size_t dd = d * d;
    const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel if (worth(2 * n * dd * d))
    {
        std::vector<double> t(dd);
#pragma omp for schedule(static)
        for (std::int64_t ii = 0; ii < rows; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            detail::bilinear_row(d, &h[i * dd], w.data(), q.data(), t.data(), &y[i * dd]);
        }
    }
}

void bilinear_rows_input_grad(std::size_t n, std::size_t d, In g, In w, In q, Out dh) {
    const std::size_t dd = d * d;
    const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel if (worth(2 * n * dd * d))
    {
        std::vector<double> u(dd);
#pragma omp for schedule(static)
        for (std::int64_t ii = 0; ii < rows; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            detail::bilinear_row_input_grad(d, &g[i * dd], w.data(), q.data(), u.data(), &dh[i * dd]);
        }
    }
}

void bilinear_rows_factor_grad(std::size_t n, std::size_t d, In g, In h, In w, In q, Out dw, Out dq) {
    const std::size_t dd = d * d;
    const auto rows = static_cast<std::int64_t>(n);
    // Per-row contributions first, then a column sum over rows in ascending
    // order, which matches the serial accumulation exactly.
    std::vector<double> cw(n * dd), cq(n * dd);
    const bool par = worth(4 * n * dd * d);
#pragma omp parallel if (par)
    {
        std::vector<double> scratch(dd);
#pragma omp for schedule(static)
        for (std::int64_t ii = 0; ii < rows; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            detail::bilinear_row_factor_grad(d, &g[i * dd], &h[i * dd], w.data(), q.data(), scratch.data(),
                                             &cw[i * dd], &cq[i * dd]);
        }
    }
    const auto entries = static_cast<std::int64_t>(dd);
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t ee = 0; ee < entries; ++ee) {
        const auto e = static_cast<std::size_t>(ee);
        double sw = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sw += cw[i * dd + e];
            sq += cq[i * dd + e];
        }
        dw[e] = sw;
        dq[e] = sq;
    }
}

}  // namespace tfuse::kernels::omp
