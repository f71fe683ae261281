#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tfuse/graph.hpp"

namespace tfuse {

// n = 1 gives a single node, n = 2 a single edge, n >= 3 the n-cycle.
Graph cycle_graph(std::size_t n);
Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed);
// An a-cycle and a b-cycle sharing the edge (0, 1); a, b >= 3.
Graph fused_cycles(std::size_t a, std::size_t b);

// Graph regression task whose target needs features and structure
// multiplied together: y = sum_i <x_i, B p_i>, with x_i ~ N(0, I),
// p_i the node's random-walk return probabilities and B a fixed random
// d_in x rw_steps matrix drawn from the seed.
struct MultiplicativeTaskParams {
    std::size_t num_graphs = 500;
    std::size_t num_nodes = 15;
    double edge_prob = 0.2;
    std::size_t feature_dim = 4;
    std::size_t rw_steps = 20;
};

struct MultiplicativeTask {
    std::vector<Graph> graphs;
    Tensor bilinear;  // feature_dim x rw_steps
};

MultiplicativeTask multiplicative_task(const MultiplicativeTaskParams& params, std::uint64_t seed);

struct CycleSpec {
    std::size_t n = 3;
};
struct ErdosRenyiSpec {
    std::size_t n = 10;
    double p = 0.3;
};
struct FusedCyclesSpec {
    std::size_t a = 6;
    std::size_t b = 6;
};
using SyntheticSpec = std::variant<CycleSpec, ErdosRenyiSpec, FusedCyclesSpec, MultiplicativeTaskParams>;

// Dispatches to the generators above. The multiplicative task's bilinear
// map is returned through `bilinear` when requested.
std::vector<Graph> generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed, Tensor* bilinear = nullptr);

}  // namespace tfuse
