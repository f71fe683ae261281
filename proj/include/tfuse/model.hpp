#pragma once

// End-to-end graph model:
//   encoder -> L message-passing layers -> readout over nodes -> 2-layer MLP.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfuse/encoder.hpp"
#include "tfuse/encoding.hpp"
#include "tfuse/graph.hpp"
#include "tfuse/mpnn.hpp"

namespace tfuse {

enum class TaskKind { regression, multilabel };
enum class Readout { sum, mean, max };

std::string_view to_string(TaskKind kind);
std::string_view to_string(Readout readout);
TaskKind parse_task_kind(std::string_view s);
Readout parse_readout(std::string_view s);

struct ModelConfig {
    EncoderConfig encoder;
    MpConfig mp;
    std::size_t d_hidden = 16;
    std::size_t decoder_hidden = 0;  // 0 means d_hidden
    TaskKind task = TaskKind::regression;
    std::size_t out_dim = 1;
    Readout readout = Readout::sum;
    std::uint64_t seed = 0;

    std::size_t decoder_width() const { return decoder_hidden ? decoder_hidden : d_hidden; }
};

// Throws std::invalid_argument naming the first violated constraint.
void validate(const ModelConfig& cfg);

// Replaces a d_hidden the encoder or the sparse regime cannot use by the
// largest admissible value below it (largest square, or largest even number
// for concat). Returns one human-readable note per substitution.
std::vector<std::string> resolve_dims(ModelConfig& cfg);

template <typename T>
struct DecoderWeights {
    T w1, b1, w2, b2;

    template <typename F>
    void for_each(const std::string& prefix, F&& f) const {
        f(prefix + "w1", w1);
        f(prefix + "b1", b1);
        f(prefix + "w2", w2);
        f(prefix + "b2", b2);
    }

    template <typename U, typename F>
    DecoderWeights<U> map(const std::string& prefix, F&& f) const {
        return {f(prefix + "w1", w1), f(prefix + "b1", b1), f(prefix + "w2", w2), f(prefix + "b2", b2)};
    }
};

template <typename T>
struct ModelWeights {
    EncoderWeights<T> encoder;
    std::vector<LayerWeights<T>> layers;
    DecoderWeights<T> decoder;

    // Visits every parameter block in declaration order.
    template <typename F>
    void for_each(F&& f) const {
        encoder.for_each("encoder.", f);
        for (std::size_t l = 0; l < layers.size(); ++l) layers[l].for_each("layers." + std::to_string(l) + ".", f);
        decoder.for_each("decoder.", f);
    }

    template <typename U, typename F>
    ModelWeights<U> map(F&& f) const {
        ModelWeights<U> out{encoder.template map<U>("encoder.", f), {}, {}};
        for (std::size_t l = 0; l < layers.size(); ++l)
            out.layers.push_back(layers[l].template map<U>("layers." + std::to_string(l) + ".", f));
        out.decoder = decoder.template map<U>("decoder.", f);
        return out;
    }
};

using ModelParams = ModelWeights<Tensor>;

ModelParams init_model(const ModelConfig& cfg);

struct ParamBreakdown {
    std::size_t encoder = 0;
    std::vector<std::size_t> layers;
    std::size_t decoder = 0;
    std::size_t total = 0;
};

ParamBreakdown param_breakdown(const ModelConfig& cfg);

// Admissible d_hidden (up to max_d_hidden) whose model_param_count is
// closest to budget; the smaller width wins ties.
std::size_t d_hidden_for_budget(ModelConfig cfg, std::size_t budget, std::size_t max_d_hidden = 4096);
std::size_t model_param_count(const ModelConfig& cfg);
std::size_t count_params(const ModelParams& params);

std::vector<double> flatten(const ModelParams& params);
// Refills a parameter structure of the same layout from a flat array.
ModelParams unflatten(const ModelParams& layout, std::span<const double> flat);

// Several graphs merged into one disjoint union with per-graph offsets.
struct PreparedBatch {
    Tensor features;   // total_nodes x d_in
    Tensor encodings;  // total_nodes x k
    Aggregators aggregators;
    std::vector<std::size_t> offsets;  // num_graphs + 1
    Tensor targets;                    // num_graphs x target width
    std::size_t num_graphs() const { return offsets.size() - 1; }
};

PreparedBatch prepare_batch(std::span<const Graph* const> graphs, std::span<const EncodingMatrix* const> encodings);

// Predictions (num_graphs x out_dim): raw values for regression, logits
// for multilabel.
Var forward(const ModelConfig& cfg, const ModelWeights<Var>& w, Tape& tape, const PreparedBatch& batch);

Tensor predict(const ModelConfig& cfg, const ModelParams& params, const PreparedBatch& batch);
std::vector<double> forward(const ModelConfig& cfg, const ModelParams& params, const Graph& g,
                            const EncodingMatrix& enc);

// Binds every parameter block as a tape parameter, in declaration order.
ModelWeights<Var> bind_parameters(const ModelParams& params, Tape& tape);
// Views consecutive blocks of a flat parameter Var with the layout's shapes.
ModelWeights<Var> bind_flat(const ModelParams& layout, Var flat);

}  // namespace tfuse
