#include "tfuse/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace tfuse {

std::string_view to_string(EncoderKind kind) { return kind == EncoderKind::concat ? "concat" : "tensor"; }

EncoderKind parse_encoder_kind(std::string_view s) {
    if (s == "concat") return EncoderKind::concat;
    if (s == "tensor") return EncoderKind::tensor;
    throw std::invalid_argument("unknown encoder kind '" + std::string(s) + "'");
}

std::size_t isqrt(std::size_t n) {
    auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

bool is_perfect_square(std::size_t n) {
    const std::size_t r = isqrt(n);
    return r * r == n;
}

std::size_t embed_dim(EncoderKind kind, std::size_t d_hidden) {
    if (d_hidden == 0) throw std::invalid_argument("d_hidden must be positive");
    if (kind == EncoderKind::concat) {
        if (d_hidden % 2 != 0) {
            throw std::invalid_argument("concat encoder needs an even d_hidden, got " + std::to_string(d_hidden));
        }
        return d_hidden / 2;
    }
    if (!is_perfect_square(d_hidden)) {
        throw std::invalid_argument("tensor encoder needs a square d_hidden, got " + std::to_string(d_hidden));
    }
    return isqrt(d_hidden);
}

std::size_t parameter_budget(EncoderKind kind, std::size_t d_in, std::size_t k, std::size_t d_hidden, bool joint,
                             std::size_t mlp_depth) {
    const std::size_t d_emb = embed_dim(kind, d_hidden);
    std::size_t count = d_emb * d_in + d_emb * k;
    if (joint) count += mlp_depth * d_hidden * d_hidden;  // fused width is d_hidden for both kinds
    return count;
}

namespace {

Tensor uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
    Tensor t({rows, cols});
    for (double& v : t.data()) v = rng.uniform(-bound, bound);
    return t;
}

double fan_bound(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, fan_in))); }

}  // namespace

EncoderParams init_encoder(const EncoderConfig& cfg, std::size_t d_hidden, Rng& rng) {
    if (cfg.mlp_depth < 1 || cfg.mlp_depth > 2) throw std::invalid_argument("encoder mlp_depth must be 1 or 2");
    const std::size_t d_emb = embed_dim(cfg.kind, d_hidden);
    EncoderParams p;
    p.w_h = uniform_matrix(d_emb, cfg.d_in, fan_bound(cfg.d_in), rng);
    p.w_p = uniform_matrix(d_emb, cfg.k, fan_bound(cfg.k), rng);
    if (cfg.joint)
        for (std::size_t i = 0; i < cfg.mlp_depth; ++i)
            p.joint.push_back(uniform_matrix(d_hidden, d_hidden, fan_bound(d_hidden), rng));
    return p;
}

Var encode(const EncoderConfig& cfg, const EncoderWeights<Var>& w, Var features, Var encoding) {
    if (features.value().cols() != cfg.d_in) {
        throw std::invalid_argument("encoder expects " + std::to_string(cfg.d_in) + " feature columns, got " +
                                    shape_str(features.shape()));
    }
    if (encoding.value().cols() != cfg.k) {
        throw std::invalid_argument("encoder expects " + std::to_string(cfg.k) + " encoding columns, got " +
                                    shape_str(encoding.shape()));
    }
    Var h = ops::linear(features, w.w_h);
    Var p = ops::linear(encoding, w.w_p);
    Var fused = cfg.kind == EncoderKind::tensor ? ops::kron_rows(h, p) : ops::rowwise_concat(h, p);
    for (std::size_t i = 0; i < w.joint.size(); ++i) {
        if (i > 0) fused = ops::relu(fused);
        fused = ops::linear(fused, w.joint[i]);
    }
    return fused;
}

Tensor encode(const EncoderConfig& cfg, const EncoderParams& params, const Tensor& features, const Tensor& encoding) {
    Tape tape;
    auto w = params.map<Var>("", [&](const std::string&, const Tensor& t) { return tape.constant(t); });
    return encode(cfg, w, tape.constant(features), tape.constant(encoding)).value();
}

}  // namespace tfuse
