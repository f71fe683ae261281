#include "tfuse/model.hpp"

#include <cmath>
#include <stdexcept>

#include "tfuse/rng.hpp"

namespace tfuse {

std::string_view to_string(TaskKind kind) { return kind == TaskKind::regression ? "regression" : "multilabel"; }

std::string_view to_string(Readout readout) {
    switch (readout) {
        case Readout::sum: return "sum";
        case Readout::mean: return "mean";
        case Readout::max: return "max";
    }
    return "?";
}

TaskKind parse_task_kind(std::string_view s) {
    if (s == "regression") return TaskKind::regression;
    if (s == "multilabel") return TaskKind::multilabel;
    throw std::invalid_argument("unknown task '" + std::string(s) + "'");
}

Readout parse_readout(std::string_view s) {
    if (s == "sum") return Readout::sum;
    if (s == "mean") return Readout::mean;
    if (s == "max") return Readout::max;
    throw std::invalid_argument("unknown readout '" + std::string(s) + "'");
}

void validate(const ModelConfig& cfg) {
    if (cfg.d_hidden == 0 || cfg.out_dim == 0 || cfg.encoder.d_in == 0 || cfg.encoder.k == 0) {
        throw std::invalid_argument("model dimensions must be positive");
    }
    if ((cfg.mp.layers == 0) != (cfg.mp.regime == Regime::none)) {
        throw std::invalid_argument("regime none requires L = 0 and L = 0 requires regime none (got L = " +
                                    std::to_string(cfg.mp.layers) + ", regime " + std::string(to_string(cfg.mp.regime)) +
                                    ")");
    }
    if (cfg.encoder.mlp_depth < 1 || cfg.encoder.mlp_depth > 2) {
        throw std::invalid_argument("encoder mlp_depth must be 1 or 2");
    }
    embed_dim(cfg.encoder.kind, cfg.d_hidden);
    if (cfg.mp.regime == Regime::sparse) {
        if (!is_perfect_square(cfg.d_hidden)) {
            throw std::invalid_argument("sparse regime needs a square d_hidden, got " + std::to_string(cfg.d_hidden));
        }
        if (cfg.mp.K == 0) throw std::invalid_argument("sparse regime needs K >= 1");
    }
    if (cfg.mp.kind == LayerKind::gin && cfg.mp.gin_mlp_depth == 0) {
        throw std::invalid_argument("GIN MLP depth must be >= 1");
    }
    if (!std::isfinite(cfg.mp.gin_epsilon)) throw std::invalid_argument("GIN epsilon must be finite");
}

std::vector<std::string> resolve_dims(ModelConfig& cfg) {
    std::vector<std::string> notes;
    const std::size_t requested = cfg.d_hidden;
    const bool needs_square = cfg.encoder.kind == EncoderKind::tensor || cfg.mp.regime == Regime::sparse;
    if (needs_square && !is_perfect_square(cfg.d_hidden)) {
        std::size_t d = isqrt(cfg.d_hidden);
        // A concat encoder additionally needs an even width.
        while (cfg.encoder.kind == EncoderKind::concat && d > 0 && (d * d) % 2 != 0) --d;
        cfg.d_hidden = d * d;
    } else if (cfg.encoder.kind == EncoderKind::concat && cfg.d_hidden % 2 != 0) {
        cfg.d_hidden -= 1;
    }
    if (cfg.d_hidden != requested) {
        notes.push_back("d_hidden " + std::to_string(requested) + " -> " + std::to_string(cfg.d_hidden) + " (" +
                        std::string(to_string(cfg.encoder.kind)) + " encoder, " +
                        std::string(to_string(cfg.mp.regime)) + " regime)");
    }
    return notes;
}

ModelParams init_model(const ModelConfig& cfg) {
    validate(cfg);
    ModelParams p;
    Rng enc_rng(cfg.seed, "model.encoder");
    p.encoder = init_encoder(cfg.encoder, cfg.d_hidden, enc_rng);
    Rng mp_rng(cfg.seed, "model.mp");
    for (std::size_t l = 0; l < cfg.mp.layers; ++l) p.layers.push_back(init_layer(cfg.mp, cfg.d_hidden, mp_rng));

    Rng dec_rng(cfg.seed, "model.decoder");
    const std::size_t hidden = cfg.decoder_width();
    auto uniform = [&](std::size_t r, std::size_t c, std::size_t fan_in) {
        Tensor t({r, c});
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : t.data()) v = dec_rng.uniform(-bound, bound);
        return t;
    };
    p.decoder.w1 = uniform(hidden, cfg.d_hidden, cfg.d_hidden);
    p.decoder.b1 = Tensor({hidden});
    p.decoder.w2 = uniform(cfg.out_dim, hidden, hidden);
    p.decoder.b2 = Tensor({cfg.out_dim});
    return p;
}

ParamBreakdown param_breakdown(const ModelConfig& cfg) {
    validate(cfg);
    ParamBreakdown b;
    b.encoder = parameter_budget(cfg.encoder.kind, cfg.encoder.d_in, cfg.encoder.k, cfg.d_hidden, cfg.encoder.joint,
                                 cfg.encoder.mlp_depth);
    b.layers.assign(cfg.mp.layers, layer_param_count(cfg.mp, cfg.d_hidden));
    const std::size_t h = cfg.decoder_width();
    b.decoder = h * cfg.d_hidden + h + cfg.out_dim * h + cfg.out_dim;
    b.total = b.encoder + b.decoder;
    for (std::size_t n : b.layers) b.total += n;
    return b;
}

std::size_t d_hidden_for_budget(ModelConfig cfg, std::size_t budget, std::size_t max_d_hidden) {
    std::size_t best = 0, best_gap = 0;
    for (std::size_t d = 1; d <= max_d_hidden; ++d) {
        cfg.d_hidden = d;
        try {
            validate(cfg);
        } catch (const std::invalid_argument&) {
            continue;
        }
        const std::size_t n = model_param_count(cfg);
        const std::size_t gap = n > budget ? n - budget : budget - n;
        if (best == 0 || gap < best_gap) {
            best = d;
            best_gap = gap;
        }
        if (n > budget) break;
    }
    if (best == 0) throw std::invalid_argument("no admissible d_hidden up to " + std::to_string(max_d_hidden));
    return best;
}

std::size_t model_param_count(const ModelConfig& cfg) { return param_breakdown(cfg).total; }

std::size_t count_params(const ModelParams& params) {
    std::size_t n = 0;
    params.for_each([&](const std::string&, const Tensor& t) { n += t.size(); });
    return n;
}

std::vector<double> flatten(const ModelParams& params) {
    std::vector<double> flat;
    params.for_each([&](const std::string&, const Tensor& t) { flat.insert(flat.end(), t.data().begin(), t.data().end()); });
    return flat;
}

ModelParams unflatten(const ModelParams& layout, std::span<const double> flat) {
    std::size_t offset = 0;
    ModelParams out = layout.map<Tensor>([&](const std::string& name, const Tensor& t) {
        if (offset + t.size() > flat.size()) throw std::invalid_argument("flat parameter array too short at " + name);
        Tensor copy(t.shape(), std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                                                   flat.begin() + static_cast<std::ptrdiff_t>(offset + t.size())));
        offset += t.size();
        return copy;
    });
    if (offset != flat.size()) throw std::invalid_argument("flat parameter array has trailing values");
    return out;
}

ModelWeights<Var> bind_parameters(const ModelParams& params, Tape& tape) {
    return params.map<Var>([&](const std::string&, const Tensor& t) { return tape.parameter(t); });
}

ModelWeights<Var> bind_flat(const ModelParams& layout, Var flat) {
    std::size_t offset = 0;
    return layout.map<Var>([&](const std::string&, const Tensor& t) {
        Var v = ops::slice(flat, offset, t.shape());
        offset += t.size();
        return v;
    });
}

PreparedBatch prepare_batch(std::span<const Graph* const> graphs, std::span<const EncodingMatrix* const> encodings) {
    if (graphs.size() != encodings.size()) throw std::invalid_argument("one encoding per graph is required");
    if (graphs.empty()) throw std::invalid_argument("empty batch");
    const GraphBatch merged = disjoint_union(graphs);
    const std::size_t total = merged.graph.num_nodes();
    const std::size_t k = encodings.front()->k;
    PreparedBatch b;
    b.features = merged.graph.features();
    b.encodings = Tensor({total, k});
    for (std::size_t g = 0; g < graphs.size(); ++g) {
        const Tensor& rows = encodings[g]->rows;
        if (rows.rows() != graphs[g]->num_nodes() || encodings[g]->k != k) {
            throw std::invalid_argument("encoding " + shape_str(rows.shape()) + " does not match graph " +
                                        std::to_string(g) + " with " + std::to_string(graphs[g]->num_nodes()) +
                                        " nodes");
        }
        std::copy(rows.data().begin(), rows.data().end(),
                  b.encodings.data().begin() + static_cast<std::ptrdiff_t>(merged.node_offsets[g] * k));
    }
    b.aggregators = build_aggregators(build_adjacency(merged.graph));
    b.offsets = merged.node_offsets;
    const std::size_t width = graphs.front()->target().size();
    b.targets = Tensor({graphs.size(), width});
    for (std::size_t g = 0; g < graphs.size(); ++g) {
        if (graphs[g]->target().size() != width) throw std::invalid_argument("target widths differ inside a batch");
        std::copy(graphs[g]->target().begin(), graphs[g]->target().end(), b.targets.row(g).begin());
    }
    return b;
}

Var forward(const ModelConfig& cfg, const ModelWeights<Var>& w, Tape& tape, const PreparedBatch& batch) {
    Var h = encode(cfg.encoder, w.encoder, tape.constant(batch.features), tape.constant(batch.encodings));
    for (const auto& layer : w.layers) h = apply_layer(layer, h, batch.aggregators);
    Var pooled;
    switch (cfg.readout) {
        case Readout::sum: pooled = ops::segment_sum(h, batch.offsets); break;
        case Readout::mean: pooled = ops::segment_mean(h, batch.offsets); break;
        case Readout::max: pooled = ops::segment_max(h, batch.offsets); break;
    }
    Var hidden = ops::relu(ops::add_row_bias(ops::linear(pooled, w.decoder.w1), w.decoder.b1));
    return ops::add_row_bias(ops::linear(hidden, w.decoder.w2), w.decoder.b2);
}

Tensor predict(const ModelConfig& cfg, const ModelParams& params, const PreparedBatch& batch) {
    Tape tape;
    auto w = params.map<Var>([&](const std::string&, const Tensor& t) { return tape.constant(t); });
    return forward(cfg, w, tape, batch).value();
}

std::vector<double> forward(const ModelConfig& cfg, const ModelParams& params, const Graph& g,
                            const EncodingMatrix& enc) {
    const Graph* gp[] = {&g};
    const EncodingMatrix* ep[] = {&enc};
    const Tensor out = predict(cfg, params, prepare_batch(gp, ep));
    return {out.data().begin(), out.data().end()};
}

}  // namespace tfuse
