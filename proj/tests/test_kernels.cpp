#include <gtest/gtest.h>

#include <omp.h>

#include "oracles.hpp"
#include "tfuse/kernels.hpp"

using namespace tfuse;
namespace k = tfuse::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

k::Csr random_csr(std::size_t rows, std::size_t cols, double p, Rng& rng) {
    k::Csr s;
    s.rows = rows;
    s.cols = cols;
    s.offsets.push_back(0);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j)
            if (rng.bernoulli(p)) {
                s.indices.push_back(j);
                s.values.push_back(rng.uniform(-1.0, 1.0));
            }
        s.offsets.push_back(s.indices.size());
    }
    return s;
}

// Sizes straddle the parallel threshold.
const std::size_t kSizes[] = {3, 40, 200};

}  // namespace

TEST(Kernels, GemmMatchesOracle) {
    Rng rng(31, "test");
    const std::size_t m = 5, kk = 7, n = 4;
    const auto a = random_vec(m * kk, rng), b = random_vec(kk * n, rng);
    std::vector<double> c(m * n);
    k::gemm_nn(m, kk, n, a, b, c);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0;
            for (std::size_t t = 0; t < kk; ++t) s += a[i * kk + t] * b[t * n + j];
            EXPECT_NEAR(c[i * n + j], s, 1e-13);
        }
}

TEST(Kernels, TransposedGemmsAgreeWithNN) {
    Rng rng(32, "test");
    const std::size_t m = 6, kk = 5, n = 7;
    const auto a = random_vec(m * kk, rng), b = random_vec(kk * n, rng);
    std::vector<double> bt(n * kk), at(kk * m);
    for (std::size_t i = 0; i < kk; ++i)
        for (std::size_t j = 0; j < n; ++j) bt[j * kk + i] = b[i * n + j];
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < kk; ++j) at[j * m + i] = a[i * kk + j];
    std::vector<double> c1(m * n), c2(m * n), c3(m * n);
    k::gemm_nn(m, kk, n, a, b, c1);
    k::gemm_nt(m, kk, n, a, bt, c2);
    k::gemm_tn(m, kk, n, at, b, c3);
    for (std::size_t i = 0; i < m * n; ++i) {
        EXPECT_NEAR(c1[i], c2[i], 1e-13);
        EXPECT_NEAR(c1[i], c3[i], 1e-13);
    }
}

TEST(Kernels, OpenMpIsBitIdenticalToSerial) {
    omp_set_num_threads(4);
    Rng rng(33, "test");
    for (std::size_t n : kSizes) {
        const auto a = random_vec(n * n, rng), b = random_vec(n * n, rng);
        std::vector<double> s(n * n), o(n * n);
        k::serial::gemm_nn(n, n, n, a, b, s);
        k::omp::gemm_nn(n, n, n, a, b, o);
        EXPECT_EQ(s, o);
        k::serial::gemm_nt(n, n, n, a, b, s);
        k::omp::gemm_nt(n, n, n, a, b, o);
        EXPECT_EQ(s, o);
        k::serial::gemm_tn(n, n, n, a, b, s);
        k::omp::gemm_tn(n, n, n, a, b, o);
        EXPECT_EQ(s, o);

        const k::Csr csr = random_csr(n * 10, n * 10, 0.05, rng);
        const auto x = random_vec(n * 10 * 16, rng);
        std::vector<double> ys(n * 10 * 16), yo(n * 10 * 16);
        k::serial::csr_spmm(csr, 16, x, ys);
        k::omp::csr_spmm(csr, 16, x, yo);
        EXPECT_EQ(ys, yo);

        const std::size_t d = 4, rows = n * 10;
        const auto h = random_vec(rows * d * d, rng), w = random_vec(d * d, rng), q = random_vec(d * d, rng);
        const auto g = random_vec(rows * d * d, rng);
        std::vector<double> bs(rows * d * d), bo(rows * d * d);
        k::serial::bilinear_rows(rows, d, h, w, q, bs);
        k::omp::bilinear_rows(rows, d, h, w, q, bo);
        EXPECT_EQ(bs, bo);
        k::serial::bilinear_rows_input_grad(rows, d, g, w, q, bs);
        k::omp::bilinear_rows_input_grad(rows, d, g, w, q, bo);
        EXPECT_EQ(bs, bo);
        std::vector<double> dws(d * d), dqs(d * d), dwo(d * d), dqo(d * d);
        k::serial::bilinear_rows_factor_grad(rows, d, g, h, w, q, dws, dqs);
        k::omp::bilinear_rows_factor_grad(rows, d, g, h, w, q, dwo, dqo);
        EXPECT_EQ(dws, dwo);
        EXPECT_EQ(dqs, dqo);
    }
}

TEST(Kernels, SpmmMatchesDense) {
    Rng rng(34, "test");
    const k::Csr s = random_csr(9, 7, 0.3, rng);
    const auto x = random_vec(7 * 3, rng);
    std::vector<double> y(9 * 3);
    k::csr_spmm(s, 3, x, y);
    oracle::Dense dense = oracle::zeros(9, 7);
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t p = s.offsets[i]; p < s.offsets[i + 1]; ++p) dense[i][s.indices[p]] = s.values[p];
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            double v = 0;
            for (std::size_t j = 0; j < 7; ++j) v += dense[i][j] * x[j * 3 + c];
            EXPECT_NEAR(y[i * 3 + c], v, 1e-14);
        }
    const k::Csr t = s.transposed();
    EXPECT_EQ(t.rows, 7u);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t p = t.offsets[i]; p < t.offsets[i + 1]; ++p)
            EXPECT_EQ(dense[t.indices[p]][i], t.values[p]);
}

TEST(Kernels, BilinearRowsIsKroneckerProduct) {
    Rng rng(35, "test");
    for (std::size_t d : {2u, 3u, 5u}) {
        const Tensor w = oracle::random_tensor({d, d}, rng), q = oracle::random_tensor({d, d}, rng);
        const auto h = random_vec(4 * d * d, rng);
        std::vector<double> y(4 * d * d);
        k::bilinear_rows(4, d, h, w.data(), q.data(), y);
        const oracle::Dense m = oracle::kron(w, q);
        for (std::size_t i = 0; i < 4; ++i) {
            const auto ref = oracle::apply(m, std::span(h).subspan(i * d * d, d * d));
            for (std::size_t j = 0; j < d * d; ++j) EXPECT_NEAR(y[i * d * d + j], ref[j], 1e-13);
        }
    }
}
