#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfuse/encoding.hpp"
#include "tfuse/graph.hpp"
#include "tfuse/model.hpp"
#include "tfuse/optim.hpp"

namespace tfuse {

struct TrainConfig {
    double lr = 1e-3;
    AdamConfig adam;
    std::size_t patience = 25;
    double factor = 0.5;
    double lr_floor = 1e-5;
    std::size_t batch_size = 0;  // 0 = full batch
    std::size_t max_epochs = 0;  // 0 = run until the scheduler stops
    bool monitor_train = false;  // scheduler watches the train metric instead of validation
    std::uint64_t seed = 0;      // shuffling
};

struct Dataset {
    std::string name;
    std::vector<Graph> graphs;
    std::vector<EncodingMatrix> encodings;
};

struct Splits {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

// Shuffled split with the given train and validation fractions; the rest
// is test.
Splits make_splits(std::size_t n, double train_fraction, double val_fraction, std::uint64_t seed);

struct EpochRecord {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;  // mean minibatch loss during the epoch
    double train_metric = 0.0;
    double val_metric = 0.0;
    double test_metric = 0.0;
};

struct TrainState {
    std::size_t step = 0;
    double lr = 0.0;
    AdamState adam;
    double best_metric = 0.0;
    std::size_t epochs_since_improve = 0;
    std::size_t best_epoch = 0;
    std::vector<EpochRecord> history;
};

struct TrainResult {
    TrainState state;
    ModelParams params;  // at the best monitored epoch
    double train_metric = 0.0;
    double val_metric = 0.0;
    double test_metric = 0.0;
    std::size_t epochs = 0;
    double wall_time_s = 0.0;
};

class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, std::size_t epoch)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

// MAE for regression (lower is better), mean AP for multilabel (higher).
Direction metric_direction(TaskKind task);
double evaluate_metric(const ModelConfig& cfg, const ModelParams& params, const Dataset& data,
                       const std::vector<std::size_t>& indices);

TrainResult train(const ModelConfig& cfg, const TrainConfig& tcfg, const Dataset& data, const Splits& splits);
// Continues from given initial parameters instead of init_model(cfg).
TrainResult train(const ModelConfig& cfg, const TrainConfig& tcfg, const Dataset& data, const Splits& splits,
                  ModelParams initial);

}  // namespace tfuse
