#pragma once

// Message-passing layers (GCN, GIN, SAGE) whose linear projections come in
// three regimes:
//   full    dense d_hidden x d_hidden matrix, H W^T
//   sparse  K factor pairs acting on Mat(h) = d x d: sum_k W_k Mat(h) Q_k^T,
//           i.e. multiplication by sum_k (W_k (x) Q_k), with d^2 = d_hidden
//   none    no layers at all
// Projections carry no bias.

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tfuse/autodiff.hpp"
#include "tfuse/graph.hpp"
#include "tfuse/rng.hpp"

namespace tfuse {

enum class LayerKind { gcn, gin, sage };
enum class Regime { full, sparse, none };

std::string_view to_string(LayerKind kind);
std::string_view to_string(Regime regime);
LayerKind parse_layer_kind(std::string_view s);
Regime parse_regime(std::string_view s);

struct MpConfig {
    LayerKind kind = LayerKind::gcn;
    Regime regime = Regime::full;
    std::size_t K = 1;
    std::size_t layers = 4;
    double gin_epsilon = 0.0;
    std::size_t gin_mlp_depth = 1;
};

template <typename T>
struct ProjectionWeights {
    Regime regime = Regime::full;
    std::vector<T> dense;  // one d_hidden x d_hidden matrix in the full regime
    std::vector<T> w;      // K factors, d x d, in the sparse regime
    std::vector<T> q;

    template <typename F>
    void for_each(const std::string& prefix, F&& f) const {
        for (std::size_t i = 0; i < dense.size(); ++i) f(prefix + "dense", dense[i]);
        for (std::size_t k = 0; k < w.size(); ++k) {
            f(prefix + "W." + std::to_string(k), w[k]);
            f(prefix + "Q." + std::to_string(k), q[k]);
        }
    }

    template <typename U, typename F>
    ProjectionWeights<U> map(const std::string& prefix, F&& f) const {
        ProjectionWeights<U> out;
        out.regime = regime;
        for (std::size_t i = 0; i < dense.size(); ++i) out.dense.push_back(f(prefix + "dense", dense[i]));
        for (std::size_t k = 0; k < w.size(); ++k) {
            out.w.push_back(f(prefix + "W." + std::to_string(k), w[k]));
            out.q.push_back(f(prefix + "Q." + std::to_string(k), q[k]));
        }
        return out;
    }
};

using ProjectionParams = ProjectionWeights<Tensor>;

template <typename T>
struct LayerWeights {
    LayerKind kind = LayerKind::gcn;
    double epsilon = 0.0;  // GIN only
    // GCN: one projection. GIN: one per MLP layer. SAGE: self then neighbour.
    std::vector<ProjectionWeights<T>> projections;

    template <typename F>
    void for_each(const std::string& prefix, F&& f) const {
        for (std::size_t i = 0; i < projections.size(); ++i)
            projections[i].for_each(prefix + "proj." + std::to_string(i) + ".", f);
    }

    template <typename U, typename F>
    LayerWeights<U> map(const std::string& prefix, F&& f) const {
        LayerWeights<U> out;
        out.kind = kind;
        out.epsilon = epsilon;
        for (std::size_t i = 0; i < projections.size(); ++i)
            out.projections.push_back(projections[i].template map<U>(prefix + "proj." + std::to_string(i) + ".", f));
        return out;
    }
};

using LayerParams = LayerWeights<Tensor>;

// Constant aggregation operators for one (possibly batched) graph.
struct Aggregators {
    std::shared_ptr<const SparseOperator> gcn;   // D^-1/2 (A + I) D^-1/2, degrees of A + I
    std::shared_ptr<const SparseOperator> sum;   // A
    std::shared_ptr<const SparseOperator> mean;  // D^-1 A, zero rows for isolated nodes
};

Aggregators build_aggregators(const AdjacencyView& adj);

ProjectionParams init_projection(Regime regime, std::size_t d_hidden, std::size_t K, Rng& rng);
LayerParams init_layer(const MpConfig& cfg, std::size_t d_hidden, Rng& rng);

// Number of projections a layer of this kind owns.
std::size_t projections_per_layer(const MpConfig& cfg);

// full: d_hidden^2 = d^4; sparse: 2 K d^2; none: 0.
std::size_t projection_param_count(Regime regime, std::size_t d_hidden, std::size_t K);
std::size_t layer_param_count(const LayerParams& layer);
std::size_t layer_param_count(const MpConfig& cfg, std::size_t d_hidden);

Var project(const ProjectionWeights<Var>& p, Var h);
Var gcn_layer(const LayerWeights<Var>& layer, Var h, const Aggregators& agg);
Var gin_layer(const LayerWeights<Var>& layer, Var h, const Aggregators& agg);
Var sage_layer(const LayerWeights<Var>& layer, Var h, const Aggregators& agg);
Var apply_layer(const LayerWeights<Var>& layer, Var h, const Aggregators& agg);

// Value-level wrappers over a private tape.
Tensor project(const ProjectionParams& p, const Tensor& h);
Tensor apply_layer(const LayerParams& layer, const Tensor& h, const AdjacencyView& adj);

}  // namespace tfuse
