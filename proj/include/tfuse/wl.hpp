#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "tfuse/graph.hpp"

namespace tfuse {

struct ColoringState {
    std::vector<std::size_t> colors;            // per node
    std::size_t rounds = 0;                     // refinement rounds performed
    bool stable = false;                        // partition stopped changing
    std::map<std::size_t, std::size_t> histogram;  // color -> count
};

// 1-WL colour refinement. Nodes start from their feature rows (equal rows
// share a colour) unless uniform_start is set. Each round a node's new
// colour is the index of (own colour, sorted neighbour colours) in a
// first-appearance dictionary, so colourings are deterministic.
ColoringState wl_refine(const Graph& g, std::size_t max_rounds, bool uniform_start = true);

// Refines both graphs with a shared dictionary and compares colour
// histograms after every round until both partitions are stable.
bool wl_equivalent(const Graph& a, const Graph& b, bool uniform_start = true);

struct WlComparison {
    bool equivalent = false;
    std::size_t rounds = 0;
    ColoringState left;
    ColoringState right;
};
WlComparison wl_compare(const Graph& a, const Graph& b, bool uniform_start = true);

}  // namespace tfuse
