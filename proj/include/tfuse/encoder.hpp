#pragma once

// Fusion of node features with structural encodings, either by
// concatenation [W_h h ; W_p p] or by the row-wise Kronecker product
// (W_h h) (x) (W_p p), optionally followed by a joint linear map.
//
// Embedding widths are chosen so both kinds produce d_hidden-wide states:
//   concat: d_emb = d_hidden / 2, fused width 2 d_emb   (d_hidden even)
//   tensor: d_emb = sqrt(d_hidden), fused width d_emb^2 (d_hidden square)

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tfuse/autodiff.hpp"
#include "tfuse/rng.hpp"

namespace tfuse {

enum class EncoderKind { concat, tensor };

std::string_view to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view s);

struct EncoderConfig {
    EncoderKind kind = EncoderKind::tensor;
    std::size_t d_in = 1;
    std::size_t k = 20;  // structural encoding width
    bool joint = true;
    std::size_t mlp_depth = 1;  // joint map: 1 = linear, 2 = linear-relu-linear
};

// Largest d with d * d <= n.
std::size_t isqrt(std::size_t n);
bool is_perfect_square(std::size_t n);

// Embedding width for the kind; throws std::invalid_argument when d_hidden
// is inadmissible (odd for concat, not a square for tensor).
std::size_t embed_dim(EncoderKind kind, std::size_t d_hidden);

// Scalar parameter count of the encoder: d_emb (d_in + k) for W_h and W_p,
// plus the joint map when enabled. The joint map carries no bias.
std::size_t parameter_budget(EncoderKind kind, std::size_t d_in, std::size_t k, std::size_t d_hidden, bool joint,
                             std::size_t mlp_depth = 1);

template <typename T>
struct EncoderWeights {
    T w_h;                 // d_emb x d_in
    T w_p;                 // d_emb x k
    std::vector<T> joint;  // empty when the joint map is disabled

    template <typename F>
    void for_each(const std::string& prefix, F&& f) const {
        f(prefix + "w_h", w_h);
        f(prefix + "w_p", w_p);
        for (std::size_t i = 0; i < joint.size(); ++i) f(prefix + "joint." + std::to_string(i), joint[i]);
    }

    template <typename U, typename F>
    EncoderWeights<U> map(const std::string& prefix, F&& f) const {
        EncoderWeights<U> out{f(prefix + "w_h", w_h), f(prefix + "w_p", w_p), {}};
        for (std::size_t i = 0; i < joint.size(); ++i) out.joint.push_back(f(prefix + "joint." + std::to_string(i), joint[i]));
        return out;
    }
};

using EncoderParams = EncoderWeights<Tensor>;

EncoderParams init_encoder(const EncoderConfig& cfg, std::size_t d_hidden, Rng& rng);

// h0 = Joint(Fuse(X W_h^T, P W_p^T)); the fused vector itself when the joint
// map is disabled. X is n x d_in, P is n x k, the result n x d_hidden.
Var encode(const EncoderConfig& cfg, const EncoderWeights<Var>& w, Var features, Var encoding);

// Value-level convenience wrapper over a private tape.
Tensor encode(const EncoderConfig& cfg, const EncoderParams& params, const Tensor& features, const Tensor& encoding);

}  // namespace tfuse
