#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tfuse/tensor.hpp"

namespace tfuse {

class GraphError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Undirected edge stored canonically with u < v.
struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Simple undirected graph with per-node features and a graph-level target.
// Immutable once constructed; the constructor validates and canonicalises
// the edge list (endpoints ordered, list sorted).
class Graph {
public:
    Graph() = default;
    // Features default to a single constant-one column when empty.
    Graph(std::size_t num_nodes, std::vector<Edge> edges, Tensor features = {}, std::vector<double> target = {});

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Tensor& features() const { return features_; }
    std::size_t feature_dim() const { return features_.cols(); }
    const std::vector<double>& target() const { return target_; }

    Graph with_features(Tensor features) const;
    Graph with_target(std::vector<double> target) const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    std::size_t num_nodes_ = 0;
    std::vector<Edge> edges_;
    Tensor features_;
    std::vector<double> target_;
};

// CSR adjacency with sorted neighbour lists.
struct AdjacencyView {
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> neighbors;
    std::vector<std::size_t> degrees;

    std::size_t num_nodes() const { return degrees.size(); }
    std::span<const std::size_t> neighbors_of(std::size_t i) const {
        return {neighbors.data() + offsets[i], degrees[i]};
    }
};

AdjacencyView build_adjacency(const Graph& g);

// Relabels node i as perm[i]. Feature rows move with their nodes.
Graph permute_graph(const Graph& g, std::span<const std::size_t> perm);

// Block-diagonal union; node offsets of each part are returned alongside.
struct GraphBatch {
    Graph graph;
    std::vector<std::size_t> node_offsets;  // one per part plus the total
};
GraphBatch disjoint_union(std::span<const Graph* const> parts);

std::vector<std::size_t> sorted_degrees(const AdjacencyView& adj);

// The 1-WL-indistinguishable pair: two hexagons sharing an edge, and two
// pentagons joined by a bridge. Labelling:
//   left:  hexagon 0-1-2-3-4-5-0 and hexagon 0-1-6-7-8-9-0 (shared edge 0-1)
//          with edges 1-6, 6-7, 7-8, 8-9, 9-0.
//   right: pentagons 0-1-2-3-4-0 and 5-6-7-8-9-5, bridge 0-5.
// Both carry a single constant-one feature column.
std::pair<Graph, Graph> figure1_pair();

}  // namespace tfuse
