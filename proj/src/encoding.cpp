#include "tfuse/encoding.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfuse/eigen.hpp"

namespace tfuse {

std::string_view to_string(EncodingKind kind) {
    switch (kind) {
        case EncodingKind::rw_diag: return "rw_diag";
        case EncodingKind::laplacian_eig: return "laplacian_eig";
        case EncodingKind::constant: return "constant";
    }
    return "?";
}

EncodingKind parse_encoding_kind(std::string_view s) {
    if (s == "rw_diag") return EncodingKind::rw_diag;
    if (s == "laplacian_eig") return EncodingKind::laplacian_eig;
    if (s == "constant") return EncodingKind::constant;
    throw std::invalid_argument("unknown encoding kind '" + std::string(s) + "'");
}

Tensor rw_transition(const AdjacencyView& adj) {
    const std::size_t n = adj.num_nodes();
    Tensor r({n, n});
    for (std::size_t j = 0; j < n; ++j) {
        if (adj.degrees[j] == 0) continue;
        const double w = 1.0 / static_cast<double>(adj.degrees[j]);
        for (std::size_t i : adj.neighbors_of(j)) r(i, j) = w;
    }
    return r;
}

EncodingMatrix rw_diag_encoding(const AdjacencyView& adj, std::size_t k) {
    if (k == 0) throw std::invalid_argument("rw_diag_encoding needs k >= 1");
    const std::size_t n = adj.num_nodes();
    EncodingMatrix enc{Tensor({n, k}), EncodingKind::rw_diag, k};

    // power holds R^t; R^{t+1}(i, j) = sum over neighbours p of j of R^t(i, p) / deg(j).
    Tensor power = rw_transition(adj);
    Tensor next({n, n});
    std::vector<double> terms;
    for (std::size_t t = 0; t < k; ++t) {
        for (std::size_t i = 0; i < n; ++i) enc.rows(i, t) = power(i, i);
        if (t + 1 == k) break;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (adj.degrees[j] == 0) {
                    next(i, j) = 0.0;
                    continue;
                }
                const double w = 1.0 / static_cast<double>(adj.degrees[j]);
                terms.clear();
                for (std::size_t p : adj.neighbors_of(j)) terms.push_back(power(i, p) * w);
                std::sort(terms.begin(), terms.end());
                double acc = 0.0;
                for (double x : terms) acc += x;
                next(i, j) = acc;
            }
        std::swap(power, next);
    }
    return enc;
}

Tensor laplacian(const AdjacencyView& adj) {
    const std::size_t n = adj.num_nodes();
    Tensor l({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        l(i, i) = static_cast<double>(adj.degrees[i]);
        for (std::size_t j : adj.neighbors_of(i)) l(i, j) = -1.0;
    }
    return l;
}

EncodingMatrix constant_encoding(std::size_t num_nodes, std::size_t k) {
    return {Tensor::filled({num_nodes, k}, 1.0), EncodingKind::constant, k};
}

EncodingMatrix laplacian_eig_encoding(const AdjacencyView& adj, std::size_t k, const LaplacianOptions& opts) {
    if (k == 0) throw std::invalid_argument("laplacian_eig_encoding needs k >= 1");
    const std::size_t n = adj.num_nodes();
    EncodingMatrix enc{Tensor({n, k}), EncodingKind::laplacian_eig, k};
    if (n == 0) return enc;

    const SymmetricEigen eig = symmetric_eig(laplacian(adj), opts.tol);
    std::vector<std::size_t> columns;
    for (std::size_t j = opts.include_trivial ? 0 : 1; j < n; ++j) columns.push_back(j);
    if (opts.descending) std::reverse(columns.begin(), columns.end());
    for (std::size_t c = 0; c < std::min(k, columns.size()); ++c)
        for (std::size_t i = 0; i < n; ++i) enc.rows(i, c) = eig.vectors(i, columns[c]);
    return enc;
}

}  // namespace tfuse
