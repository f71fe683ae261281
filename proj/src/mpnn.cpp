#include "tfuse/mpnn.hpp"

#include <cmath>
#include <stdexcept>

#include "tfuse/encoder.hpp"

namespace tfuse {

std::string_view to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::gcn: return "gcn";
        case LayerKind::gin: return "gin";
        case LayerKind::sage: return "sage";
    }
    return "?";
}

std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::full: return "full";
        case Regime::sparse: return "sparse";
        case Regime::none: return "none";
    }
    return "?";
}

LayerKind parse_layer_kind(std::string_view s) {
    if (s == "gcn") return LayerKind::gcn;
    if (s == "gin") return LayerKind::gin;
    if (s == "sage") return LayerKind::sage;
    throw std::invalid_argument("unknown layer kind '" + std::string(s) + "'");
}

Regime parse_regime(std::string_view s) {
    if (s == "full") return Regime::full;
    if (s == "sparse") return Regime::sparse;
    if (s == "none") return Regime::none;
    throw std::invalid_argument("unknown regime '" + std::string(s) + "'");
}

Aggregators build_aggregators(const AdjacencyView& adj) {
    const std::size_t n = adj.num_nodes();
    kernels::Csr gcn, sum, mean;
    for (kernels::Csr* c : {&gcn, &sum, &mean}) {
        c->rows = c->cols = n;
        c->offsets.assign(1, 0);
    }
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(adj.degrees[i] + 1));
    for (std::size_t i = 0; i < n; ++i) {
        const auto nbrs = adj.neighbors_of(i);
        // Self loop inserted at its sorted position.
        bool self_done = false;
        for (std::size_t j : nbrs) {
            if (!self_done && i < j) {
                gcn.indices.push_back(i);
                gcn.values.push_back(inv_sqrt[i] * inv_sqrt[i]);
                self_done = true;
            }
            gcn.indices.push_back(j);
            gcn.values.push_back(inv_sqrt[i] * inv_sqrt[j]);
            sum.indices.push_back(j);
            sum.values.push_back(1.0);
            mean.indices.push_back(j);
            mean.values.push_back(1.0 / static_cast<double>(adj.degrees[i]));
        }
        if (!self_done) {
            gcn.indices.push_back(i);
            gcn.values.push_back(inv_sqrt[i] * inv_sqrt[i]);
        }
        gcn.offsets.push_back(gcn.indices.size());
        sum.offsets.push_back(sum.indices.size());
        mean.offsets.push_back(mean.indices.size());
    }
    return {std::make_shared<const SparseOperator>(std::move(gcn)), std::make_shared<const SparseOperator>(std::move(sum)),
            std::make_shared<const SparseOperator>(std::move(mean))};
}

namespace {

Tensor uniform_square(std::size_t d, double bound, Rng& rng) {
    Tensor t({d, d});
    for (double& v : t.data()) v = rng.uniform(-bound, bound);
    return t;
}

}  // namespace

ProjectionParams init_projection(Regime regime, std::size_t d_hidden, std::size_t K, Rng& rng) {
    ProjectionParams p;
    p.regime = regime;
    if (regime == Regime::full) {
        p.dense.push_back(uniform_square(d_hidden, 1.0 / std::sqrt(static_cast<double>(d_hidden)), rng));
    } else if (regime == Regime::sparse) {
        if (!is_perfect_square(d_hidden)) {
            throw std::invalid_argument("sparse projections need a square d_hidden, got " + std::to_string(d_hidden));
        }
        if (K == 0) throw std::invalid_argument("sparse projections need K >= 1");
        const std::size_t d = isqrt(d_hidden);
        const double bound = 1.0 / std::sqrt(static_cast<double>(d));
        for (std::size_t k = 0; k < K; ++k) {
            p.w.push_back(uniform_square(d, bound, rng));
            p.q.push_back(uniform_square(d, bound, rng));
        }
    }
    return p;
}

std::size_t projections_per_layer(const MpConfig& cfg) {
    switch (cfg.kind) {
        case LayerKind::gcn: return 1;
        case LayerKind::gin: return cfg.gin_mlp_depth;
        case LayerKind::sage: return 2;
    }
    return 1;
}

LayerParams init_layer(const MpConfig& cfg, std::size_t d_hidden, Rng& rng) {
    if (!std::isfinite(cfg.gin_epsilon)) throw std::invalid_argument("GIN epsilon must be finite");
    if (cfg.kind == LayerKind::gin && cfg.gin_mlp_depth == 0) throw std::invalid_argument("GIN MLP depth must be >= 1");
    LayerParams layer;
    layer.kind = cfg.kind;
    layer.epsilon = cfg.gin_epsilon;
    for (std::size_t i = 0; i < projections_per_layer(cfg); ++i)
        layer.projections.push_back(init_projection(cfg.regime, d_hidden, cfg.K, rng));
    return layer;
}

std::size_t projection_param_count(Regime regime, std::size_t d_hidden, std::size_t K) {
    switch (regime) {
        case Regime::full: return d_hidden * d_hidden;
        case Regime::sparse: return 2 * K * d_hidden;  // 2 K d^2 with d^2 = d_hidden
        case Regime::none: return 0;
    }
    return 0;
}

std::size_t layer_param_count(const LayerParams& layer) {
    std::size_t n = 0;
    layer.for_each("", [&](const std::string&, const Tensor& t) { n += t.size(); });
    return n;
}

std::size_t layer_param_count(const MpConfig& cfg, std::size_t d_hidden) {
    return projections_per_layer(cfg) * projection_param_count(cfg.regime, d_hidden, cfg.K);
}

Var project(const ProjectionWeights<Var>& p, Var h) {
    switch (p.regime) {
        case Regime::full:
            return ops::linear(h, p.dense.at(0));
        case Regime::sparse: {
            if (p.w.empty()) throw std::invalid_argument("sparse projection without factor pairs");
            Var out = ops::bilinear(h, p.w[0], p.q[0]);
            for (std::size_t k = 1; k < p.w.size(); ++k) out = ops::add(out, ops::bilinear(h, p.w[k], p.q[k]));
            return out;
        }
        case Regime::none:
            break;
    }
    throw std::invalid_argument("regime none has no projection");
}

Var gcn_layer(const LayerWeights<Var>& layer, Var h, const Aggregators& agg) {
    return ops::relu(project(layer.projections.at(0), ops::spmm(agg.gcn, h)));
}

Var gin_layer(const LayerWeights<Var>& layer, Var h, const Aggregators& agg) {
    Var x = ops::add(ops::scale(h, 1.0 + layer.epsilon), ops::spmm(agg.sum, h));
    for (const auto& p : layer.projections) x = ops::relu(project(p, x));
    return x;
}

Var sage_layer(const LayerWeights<Var>& layer, Var h, const Aggregators& agg) {
    Var self = project(layer.projections.at(0), h);
    Var nbr = project(layer.projections.at(1), ops::spmm(agg.mean, h));
    return ops::relu(ops::add(self, nbr));
}

Var apply_layer(const LayerWeights<Var>& layer, Var h, const Aggregators& agg) {
    switch (layer.kind) {
        case LayerKind::gcn: return gcn_layer(layer, h, agg);
        case LayerKind::gin: return gin_layer(layer, h, agg);
        case LayerKind::sage: return sage_layer(layer, h, agg);
    }
    throw std::invalid_argument("unknown layer kind");
}

Tensor project(const ProjectionParams& p, const Tensor& h) {
    Tape tape;
    auto w = p.map<Var>("", [&](const std::string&, const Tensor& t) { return tape.constant(t); });
    return project(w, tape.constant(h)).value();
}

Tensor apply_layer(const LayerParams& layer, const Tensor& h, const AdjacencyView& adj) {
    Tape tape;
    auto w = layer.map<Var>("", [&](const std::string&, const Tensor& t) { return tape.constant(t); });
    return apply_layer(w, tape.constant(h), build_aggregators(adj)).value();
}

}  // namespace tfuse
