#include "tfuse/wl.hpp"

#include <algorithm>
#include <utility>

namespace tfuse {

namespace {

using Signature = std::pair<std::size_t, std::vector<std::size_t>>;

class Refiner {
public:
    std::vector<std::size_t> initial(const Graph& g, bool uniform) {
        std::vector<std::size_t> colors(g.num_nodes(), 0);
        if (uniform) return colors;
        for (std::size_t i = 0; i < g.num_nodes(); ++i) {
            std::vector<double> row(g.features().row(i).begin(), g.features().row(i).end());
            auto [it, inserted] = feature_dict_.try_emplace(std::move(row), feature_dict_.size());
            colors[i] = it->second;
        }
        return colors;
    }

    std::vector<std::size_t> round(const AdjacencyView& adj, const std::vector<std::size_t>& colors) {
        std::vector<std::size_t> next(colors.size());
        for (std::size_t i = 0; i < colors.size(); ++i) {
            Signature sig{colors[i], {}};
            for (std::size_t j : adj.neighbors_of(i)) sig.second.push_back(colors[j]);
            std::sort(sig.second.begin(), sig.second.end());
            auto [it, inserted] = dict_.try_emplace(std::move(sig), dict_.size());
            next[i] = it->second;
        }
        return next;
    }

    void next_round() { dict_.clear(); }

private:
    std::map<std::vector<double>, std::size_t> feature_dict_;
    std::map<Signature, std::size_t> dict_;
};

std::size_t class_count(const std::vector<std::size_t>& colors) {
    std::vector<std::size_t> c = colors;
    std::sort(c.begin(), c.end());
    return static_cast<std::size_t>(std::unique(c.begin(), c.end()) - c.begin());
}

std::map<std::size_t, std::size_t> histogram(const std::vector<std::size_t>& colors) {
    std::map<std::size_t, std::size_t> h;
    for (std::size_t c : colors) ++h[c];
    return h;
}

}  // namespace

ColoringState wl_refine(const Graph& g, std::size_t max_rounds, bool uniform_start) {
    Refiner refiner;
    const AdjacencyView adj = build_adjacency(g);
    ColoringState s;
    s.colors = refiner.initial(g, uniform_start);
    std::size_t classes = class_count(s.colors);
    while (s.rounds < max_rounds) {
        refiner.next_round();
        auto next = refiner.round(adj, s.colors);
        ++s.rounds;
        const std::size_t next_classes = class_count(next);
        s.colors = std::move(next);
        // Refinement only splits classes, so an unchanged count means an
        // unchanged partition.
        if (next_classes == classes) {
            s.stable = true;
            break;
        }
        classes = next_classes;
    }
    s.histogram = histogram(s.colors);
    return s;
}

WlComparison wl_compare(const Graph& a, const Graph& b, bool uniform_start) {
    Refiner refiner;
    const AdjacencyView adj_a = build_adjacency(a);
    const AdjacencyView adj_b = build_adjacency(b);
    WlComparison cmp;
    cmp.left.colors = refiner.initial(a, uniform_start);
    cmp.right.colors = refiner.initial(b, uniform_start);
    cmp.equivalent = histogram(cmp.left.colors) == histogram(cmp.right.colors);
    std::size_t ca = class_count(cmp.left.colors), cb = class_count(cmp.right.colors);
    const std::size_t cap = std::max(a.num_nodes(), b.num_nodes()) + 1;
    while (cmp.equivalent && cmp.rounds < cap) {
        refiner.next_round();
        auto na = refiner.round(adj_a, cmp.left.colors);
        auto nb = refiner.round(adj_b, cmp.right.colors);
        ++cmp.rounds;
        const std::size_t nca = class_count(na), ncb = class_count(nb);
        cmp.left.colors = std::move(na);
        cmp.right.colors = std::move(nb);
        cmp.equivalent = histogram(cmp.left.colors) == histogram(cmp.right.colors);
        const bool stable = nca == ca && ncb == cb;
        ca = nca;
        cb = ncb;
        if (stable) {
            cmp.left.stable = cmp.right.stable = true;
            break;
        }
    }
    cmp.left.rounds = cmp.right.rounds = cmp.rounds;
    cmp.left.histogram = histogram(cmp.left.colors);
    cmp.right.histogram = histogram(cmp.right.colors);
    return cmp;
}

bool wl_equivalent(const Graph& a, const Graph& b, bool uniform_start) {
    return wl_compare(a, b, uniform_start).equivalent;
}

}  // namespace tfuse
