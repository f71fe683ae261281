#pragma once

// Run configuration in a flat "key = value" text format:
//
//   # comment
//   encoder.kind = tensor
//   mp.regime = sparse
//
// Keys are dotted names from a fixed set; unknown keys, duplicate keys and
// malformed values are errors. Every key has a default, and rendering a
// RunConfig always writes all of them, so a rendered config pins a run
// completely.

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfuse/encoding.hpp"
#include "tfuse/generators.hpp"
#include "tfuse/model.hpp"
#include "tfuse/training.hpp"

namespace tfuse {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
std::string render_key_values(const KeyValues& kv);
KeyValues read_key_values(const std::string& path);

enum class DataKind { file, multiplicative };
enum class StructuralKind { rw_diag, laplacian_eig, constant };

struct DataConfig {
    DataKind kind = DataKind::multiplicative;
    std::string path;  // for kind = file
    std::string name = "multiplicative";
    std::size_t num_graphs = 500;
    std::size_t num_nodes = 15;
    double edge_prob = 0.2;
    std::size_t feature_dim = 4;
    std::size_t rw_steps = 20;
    std::uint64_t seed = 0;  // generation and splitting
    double split_train = 0.8;
    double split_val = 0.1;

    MultiplicativeTaskParams task_params() const {
        return {num_graphs, num_nodes, edge_prob, feature_dim, rw_steps};
    }
};

struct StructuralConfig {
    StructuralKind kind = StructuralKind::rw_diag;
    std::size_t k = kDefaultRwSteps;
    bool include_trivial = false;
    bool descending = false;
};

struct RunConfig {
    std::string name = "run";
    std::uint64_t seed = 0;
    DataConfig data;
    StructuralConfig encoding;
    ModelConfig model;  // model.encoder.d_in, model.encoder.k and model.out_dim are derived from the data
    std::size_t param_budget = 0;  // when set, d_hidden is searched to approach this total
    TrainConfig train;
};

// Keys the sweep grid may set; not valid in a single-run config.
struct SweepGrid {
    std::vector<EncoderKind> encoders;
    std::vector<std::pair<Regime, std::size_t>> regimes;  // (regime, K)
    std::vector<LayerKind> layers;
    std::vector<std::size_t> d_hidden;
    std::vector<std::size_t> depths;  // L for regimes other than none
    std::vector<std::uint64_t> seeds;
    std::size_t jobs = 1;
};

struct SweepConfig {
    RunConfig base;
    SweepGrid grid;
};

RunConfig run_config_from(const KeyValues& kv);
KeyValues to_key_values(const RunConfig& cfg);
SweepConfig sweep_config_from(const KeyValues& kv);

// "full", "none", "sparse" (uses mp.K) or "sparse:K".
std::pair<Regime, std::size_t> parse_regime_spec(const std::string& s);
std::string regime_label(Regime regime, std::size_t K);

std::string to_string(StructuralKind kind);
std::string to_string(DataKind kind);

}  // namespace tfuse
