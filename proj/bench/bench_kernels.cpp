// Serial vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare.

#include <benchmark/benchmark.h>

#include <vector>

#include "tfuse/generators.hpp"
#include "tfuse/graph.hpp"
#include "tfuse/kernels.hpp"
#include "tfuse/rng.hpp"

namespace k = tfuse::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    tfuse::Rng rng(seed, "bench");
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

// Row-normalised adjacency of a union of random graphs, as the GCN sees it.
k::Csr random_csr(std::size_t n) {
    const tfuse::Graph g = tfuse::erdos_renyi(n, 8.0 / static_cast<double>(n), 7);
    const tfuse::AdjacencyView adj = tfuse::build_adjacency(g);
    k::Csr s;
    s.rows = s.cols = n;
    s.offsets.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : adj.neighbors_of(i)) {
            s.indices.push_back(j);
            s.values.push_back(1.0 / static_cast<double>(adj.degrees[i]));
        }
        s.offsets.push_back(s.indices.size());
    }
    return s;
}

template <auto Fn>
void bm_gemm(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
    std::vector<double> c(n * n);
    for (auto _ : state) {
        Fn(n, n, n, a, b, c);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

template <auto Fn>
void bm_spmm(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const std::size_t d = 64;
    const k::Csr s = random_csr(n);
    const auto x = random_vec(n * d, 3);
    std::vector<double> y(n * d);
    for (auto _ : state) {
        Fn(s, d, x, y);
        benchmark::DoNotOptimize(y.data());
    }
}

template <auto Fn>
void bm_bilinear(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const std::size_t d = 8;
    const auto h = random_vec(n * d * d, 4), w = random_vec(d * d, 5), q = random_vec(d * d, 6);
    std::vector<double> y(n * d * d);
    for (auto _ : state) {
        Fn(n, d, h, w, q, y);
        benchmark::DoNotOptimize(y.data());
    }
}

}  // namespace

BENCHMARK(bm_gemm<k::serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(64)->Arg(256);
BENCHMARK(bm_gemm<k::omp::gemm_nn>)->Name("gemm_nn/omp")->Arg(64)->Arg(256);
BENCHMARK(bm_spmm<k::serial::csr_spmm>)->Name("csr_spmm/serial")->Arg(1000)->Arg(10000);
BENCHMARK(bm_spmm<k::omp::csr_spmm>)->Name("csr_spmm/omp")->Arg(1000)->Arg(10000);
BENCHMARK(bm_bilinear<k::serial::bilinear_rows>)->Name("bilinear_rows/serial")->Arg(1000)->Arg(10000);
BENCHMARK(bm_bilinear<k::omp::bilinear_rows>)->Name("bilinear_rows/omp")->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
