#include "tfuse/generators.hpp"

#include <cmath>
#include <stdexcept>

#include "tfuse/encoding.hpp"
#include "tfuse/rng.hpp"

namespace tfuse {

Graph cycle_graph(std::size_t n) {
    if (n == 0) throw std::invalid_argument("cycle needs n >= 1");
    std::vector<Edge> edges;
    if (n == 2) edges.push_back({0, 1});
    if (n >= 3)
        for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
    return Graph(n, std::move(edges));
}

Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("erdos_renyi needs n >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("erdos_renyi needs 0 <= p <= 1");
    Rng rng(seed, "graph.erdos_renyi");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) edges.push_back({i, j});
    return Graph(n, std::move(edges));
}

Graph fused_cycles(std::size_t a, std::size_t b) {
    if (a < 3 || b < 3) throw std::invalid_argument("fused_cycles needs both cycle lengths >= 3");
    const std::size_t n = a + b - 2;
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < a; ++i) edges.push_back({i, (i + 1) % a});
    // Second cycle: 1 -> a -> a+1 -> ... -> n-1 -> 0.
    std::size_t prev = 1;
    for (std::size_t v = a; v < n; ++v) {
        edges.push_back({prev, v});
        prev = v;
    }
    edges.push_back({prev, 0});
    return Graph(n, std::move(edges));
}

MultiplicativeTask multiplicative_task(const MultiplicativeTaskParams& params, std::uint64_t seed) {
    if (params.num_nodes == 0 || params.feature_dim == 0 || params.rw_steps == 0 || params.num_graphs == 0) {
        throw std::invalid_argument("multiplicative_task needs positive sizes");
    }
    if (!(params.edge_prob >= 0.0 && params.edge_prob <= 1.0)) {
        throw std::invalid_argument("multiplicative_task needs 0 <= p <= 1");
    }
    const std::size_t d = params.feature_dim, k = params.rw_steps, n = params.num_nodes;
    MultiplicativeTask task;
    task.bilinear = Tensor({d, k});
    Rng map_rng(seed, "task.multiplicative.map");
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    for (double& b : task.bilinear.data()) b = scale * map_rng.normal();

    Rng graph_rng(seed, "task.multiplicative.graphs");
    Rng feat_rng(seed, "task.multiplicative.features");
    task.graphs.reserve(params.num_graphs);
    for (std::size_t g = 0; g < params.num_graphs; ++g) {
        Graph topo = erdos_renyi(n, params.edge_prob, graph_rng.next_u64());
        Tensor x({n, d});
        for (double& v : x.data()) v = feat_rng.normal();
        const EncodingMatrix enc = rw_diag_encoding(build_adjacency(topo), k);
        double y = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < d; ++a) {
                double bp = 0.0;
                for (std::size_t c = 0; c < k; ++c) bp += task.bilinear(a, c) * enc.rows(i, c);
                y += x(i, a) * bp;
            }
        task.graphs.push_back(Graph(n, topo.edges(), std::move(x), {y}));
    }
    return task;
}

std::vector<Graph> generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed, Tensor* bilinear) {
    return std::visit(
        [&](const auto& s) -> std::vector<Graph> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CycleSpec>) {
                return {cycle_graph(s.n)};
            } else if constexpr (std::is_same_v<T, ErdosRenyiSpec>) {
                return {erdos_renyi(s.n, s.p, seed)};
            } else if constexpr (std::is_same_v<T, FusedCyclesSpec>) {
                return {fused_cycles(s.a, s.b)};
            } else {
                MultiplicativeTask task = multiplicative_task(s, seed);
                if (bilinear) *bilinear = task.bilinear;
                return std::move(task.graphs);
            }
        },
        spec);
}

}  // namespace tfuse
