#include "tfuse/graph.hpp"

#include <algorithm>
#include <string>

namespace tfuse {

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges, Tensor features, std::vector<double> target)
    : num_nodes_(num_nodes), edges_(std::move(edges)), features_(std::move(features)), target_(std::move(target)) {
    for (Edge& e : edges_) {
        if (e.u >= num_nodes_ || e.v >= num_nodes_) {
            throw GraphError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ") has an endpoint >= " +
                             std::to_string(num_nodes_));
        }
        if (e.u == e.v) throw GraphError("self-loop on node " + std::to_string(e.u));
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end());
    auto dup = std::adjacent_find(edges_.begin(), edges_.end());
    if (dup != edges_.end()) {
        throw GraphError("duplicate edge (" + std::to_string(dup->u) + ", " + std::to_string(dup->v) + ")");
    }
    if (features_.empty() && features_.rank() == 0) features_ = Tensor::filled({num_nodes_, 1}, 1.0);
    if (features_.rank() != 2 || features_.rows() != num_nodes_) {
        throw GraphError("feature matrix " + shape_str(features_.shape()) + " does not have " +
                         std::to_string(num_nodes_) + " rows");
    }
}

Graph Graph::with_features(Tensor features) const {
    return Graph(num_nodes_, edges_, std::move(features), target_);
}

Graph Graph::with_target(std::vector<double> target) const {
    return Graph(num_nodes_, edges_, features_, std::move(target));
}

AdjacencyView build_adjacency(const Graph& g) {
    const std::size_t n = g.num_nodes();
    AdjacencyView adj;
    adj.degrees.assign(n, 0);
    for (const Edge& e : g.edges()) {
        ++adj.degrees[e.u];
        ++adj.degrees[e.v];
    }
    adj.offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) adj.offsets[i + 1] = adj.offsets[i] + adj.degrees[i];
    adj.neighbors.resize(adj.offsets[n]);
    std::vector<std::size_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const Edge& e : g.edges()) {
        adj.neighbors[cursor[e.u]++] = e.v;
        adj.neighbors[cursor[e.v]++] = e.u;
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto first = adj.neighbors.begin() + static_cast<std::ptrdiff_t>(adj.offsets[i]);
        std::sort(first, first + static_cast<std::ptrdiff_t>(adj.degrees[i]));
    }
    return adj;
}

Graph permute_graph(const Graph& g, std::span<const std::size_t> perm) {
    const std::size_t n = g.num_nodes();
    if (perm.size() != n) {
        throw GraphError("permutation has " + std::to_string(perm.size()) + " entries for " + std::to_string(n) +
                         " nodes");
    }
    std::vector<bool> seen(n, false);
    for (std::size_t p : perm) {
        if (p >= n || seen[p]) throw GraphError("permutation is not a bijection");
        seen[p] = true;
    }
    std::vector<Edge> edges;
    edges.reserve(g.num_edges());
    for (const Edge& e : g.edges()) edges.push_back({perm[e.u], perm[e.v]});
    const Tensor& f = g.features();
    Tensor pf(f.shape());
    for (std::size_t i = 0; i < n; ++i) std::copy(f.row(i).begin(), f.row(i).end(), pf.row(perm[i]).begin());
    return Graph(n, std::move(edges), std::move(pf), g.target());
}

GraphBatch disjoint_union(std::span<const Graph* const> parts) {
    GraphBatch batch;
    batch.node_offsets.push_back(0);
    std::size_t total = 0, width = parts.empty() ? 1 : parts.front()->feature_dim();
    for (const Graph* g : parts) {
        if (g->feature_dim() != width) throw GraphError("feature widths differ inside a batch");
        total += g->num_nodes();
        batch.node_offsets.push_back(total);
    }
    std::vector<Edge> edges;
    Tensor features({total, width});
    std::vector<double> target;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const Graph& g = *parts[p];
        const std::size_t base = batch.node_offsets[p];
        for (const Edge& e : g.edges()) edges.push_back({e.u + base, e.v + base});
        std::copy(g.features().data().begin(), g.features().data().end(),
                  features.data().begin() + static_cast<std::ptrdiff_t>(base * width));
        target.insert(target.end(), g.target().begin(), g.target().end());
    }
    batch.graph = Graph(total, std::move(edges), std::move(features), std::move(target));
    return batch;
}

std::vector<std::size_t> sorted_degrees(const AdjacencyView& adj) {
    std::vector<std::size_t> d = adj.degrees;
    std::sort(d.begin(), d.end());
    return d;
}

std::pair<Graph, Graph> figure1_pair() {
    std::vector<Edge> left = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0},
                              {1, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 0}};
    std::vector<Edge> right = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},
                               {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 5}, {0, 5}};
    return {Graph(10, std::move(left)), Graph(10, std::move(right))};
}

}  // namespace tfuse
