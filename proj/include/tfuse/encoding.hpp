#pragma once

#include <cstddef>
#include <string_view>

#include "tfuse/graph.hpp"
#include "tfuse/tensor.hpp"

namespace tfuse {

enum class EncodingKind { rw_diag, laplacian_eig, constant };

std::string_view to_string(EncodingKind kind);
EncodingKind parse_encoding_kind(std::string_view s);

// Per-node structural encoding rows (num_nodes x k).
struct EncodingMatrix {
    Tensor rows;
    EncodingKind kind = EncodingKind::rw_diag;
    std::size_t k = 0;

    friend bool operator==(const EncodingMatrix&, const EncodingMatrix&) = default;
};

inline constexpr std::size_t kDefaultRwSteps = 20;

// R = A D^-1: R(i, j) = A(i, j) / deg(j). Columns of isolated nodes are zero.
Tensor rw_transition(const AdjacencyView& adj);

// Row i is [R_ii, (R^2)_ii, ..., (R^k)_ii]. Every entry of each power is
// summed over its nonzero terms in sorted order, so relabelling the graph
// permutes the rows without changing a single bit.
EncodingMatrix rw_diag_encoding(const AdjacencyView& adj, std::size_t k = kDefaultRwSteps);

// L = D - A.
Tensor laplacian(const AdjacencyView& adj);

struct LaplacianOptions {
    // Keep the eigenvector of the smallest eigenvalue (constant on
    // connected graphs) as the first column.
    bool include_trivial = false;
    // Order columns by descending eigenvalue instead of ascending.
    bool descending = false;
    double tol = 1e-10;
};

// All-ones rows; carries no structural information.
EncodingMatrix constant_encoding(std::size_t num_nodes, std::size_t k);

// Row i holds node i's coordinates in the first k selected eigenvectors;
// columns past the available eigenvectors are zero.
EncodingMatrix laplacian_eig_encoding(const AdjacencyView& adj, std::size_t k, const LaplacianOptions& opts = {});

}  // namespace tfuse
