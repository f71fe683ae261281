#include "tfuse/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "tfuse/metrics.hpp"
#include "tfuse/rng.hpp"

namespace tfuse {

Splits make_splits(std::size_t n, double train_fraction, double val_fraction, std::uint64_t seed) {
    if (train_fraction < 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0) {
        throw std::invalid_argument("split fractions must be non-negative and sum to at most 1");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed, "data.split");
    rng.shuffle(idx.begin(), idx.end());
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(n))));
    Splits s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                 idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
    return s;
}

Direction metric_direction(TaskKind task) {
    return task == TaskKind::regression ? Direction::minimize : Direction::maximize;
}

namespace {

PreparedBatch batch_of(const Dataset& data, std::span<const std::size_t> indices) {
    std::vector<const Graph*> graphs;
    std::vector<const EncodingMatrix*> encs;
    for (std::size_t i : indices) {
        graphs.push_back(&data.graphs.at(i));
        encs.push_back(&data.encodings.at(i));
    }
    return prepare_batch(graphs, encs);
}

// Predictions for many graphs, evaluated in chunks to bound tape size.
struct SplitEval {
    Tensor predictions;
    Tensor targets;
};

SplitEval predict_split(const ModelConfig& cfg, const ModelParams& params, const Dataset& data,
                        const std::vector<std::size_t>& indices) {
    constexpr std::size_t kChunk = 256;
    std::vector<double> preds, targets;
    std::size_t width = 0;
    for (std::size_t start = 0; start < indices.size(); start += kChunk) {
        const std::size_t len = std::min(kChunk, indices.size() - start);
        const PreparedBatch b = batch_of(data, std::span(indices).subspan(start, len));
        const Tensor p = predict(cfg, params, b);
        width = b.targets.cols();
        preds.insert(preds.end(), p.data().begin(), p.data().end());
        targets.insert(targets.end(), b.targets.data().begin(), b.targets.data().end());
    }
    const std::size_t n = indices.size();
    return {Tensor({n, cfg.out_dim}, std::move(preds)), Tensor({n, n ? width : cfg.out_dim}, std::move(targets))};
}

double split_metric(const ModelConfig& cfg, const SplitEval& e) {
    if (e.predictions.rows() == 0) return std::nan("");
    if (cfg.task == TaskKind::regression) return mean_absolute_error(e.predictions, e.targets);
    return metric_ap(e.predictions, e.targets).mean;
}

}  // namespace

double evaluate_metric(const ModelConfig& cfg, const ModelParams& params, const Dataset& data,
                       const std::vector<std::size_t>& indices) {
    return split_metric(cfg, predict_split(cfg, params, data, indices));
}

TrainResult train(const ModelConfig& cfg, const TrainConfig& tcfg, const Dataset& data, const Splits& splits) {
    return train(cfg, tcfg, data, splits, init_model(cfg));
}

TrainResult train(const ModelConfig& cfg, const TrainConfig& tcfg, const Dataset& data, const Splits& splits,
                  ModelParams initial) {
    validate(cfg);
    if (data.graphs.size() != data.encodings.size()) throw std::invalid_argument("dataset needs one encoding per graph");
    if (splits.train.empty()) throw std::invalid_argument("training split is empty");
    {
        std::vector<std::size_t> all = splits.train;
        all.insert(all.end(), splits.val.begin(), splits.val.end());
        all.insert(all.end(), splits.test.begin(), splits.test.end());
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end()) throw std::invalid_argument("splits overlap");
        if (!all.empty() && all.back() >= data.graphs.size()) throw std::invalid_argument("split index out of range");
    }
    const auto started = std::chrono::steady_clock::now();

    ModelParams params = std::move(initial);
    std::vector<double> flat = flatten(params);
    std::vector<ParamBlock> blocks;
    params.for_each([&](const std::string& name, const Tensor& t) {
        const std::size_t off = blocks.empty() ? 0 : blocks.back().offset + blocks.back().size;
        blocks.push_back({name, off, t.size()});
    });

    TrainResult result;
    TrainState& state = result.state;
    state.adam = AdamState(flat.size());
    state.lr = tcfg.lr;
    PlateauScheduler scheduler(tcfg.lr, metric_direction(cfg.task), tcfg.patience, tcfg.factor, tcfg.lr_floor);
    const bool use_val = !tcfg.monitor_train && !splits.val.empty();

    Rng shuffle_rng(tcfg.seed, "train.shuffle");
    std::vector<std::size_t> order = splits.train;
    const std::size_t batch = tcfg.batch_size ? tcfg.batch_size : order.size();
    result.params = params;

    for (std::size_t epoch = 1;; ++epoch) {
        shuffle_rng.shuffle(order.begin(), order.end());
        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t len = std::min(batch, order.size() - start);
            const PreparedBatch b = batch_of(data, std::span(order).subspan(start, len));
            Tape tape;
            const ModelWeights<Var> w = bind_parameters(params, tape);
            Var pred = forward(cfg, w, tape, b);
            Var loss = cfg.task == TaskKind::regression ? ops::mae(pred, b.targets) : ops::bce_with_logits(pred, b.targets);
            const double lv = loss.value()[0];
            if (!std::isfinite(lv)) throw TrainingError("non-finite training loss", epoch);
            tape.backward(loss);
            std::vector<double> grads;
            grads.reserve(flat.size());
            w.for_each([&](const std::string&, const Var& v) {
                const Tensor g = tape.grad(v);
                grads.insert(grads.end(), g.data().begin(), g.data().end());
            });
            try {
                adam_step(state.adam, flat, grads, scheduler.lr(), tcfg.adam, blocks);
            } catch (const NonFiniteGradient& e) {
                throw TrainingError(e.what(), epoch);
            }
            params = unflatten(params, flat);
            loss_sum += lv;
            ++loss_count;
        }
        state.step = state.adam.step;

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = scheduler.lr();
        rec.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(1, loss_count));
        rec.train_metric = evaluate_metric(cfg, params, data, splits.train);
        rec.val_metric = use_val ? evaluate_metric(cfg, params, data, splits.val) : rec.train_metric;
        rec.test_metric = splits.test.empty() ? std::nan("") : evaluate_metric(cfg, params, data, splits.test);
        if (!std::isfinite(rec.train_metric)) throw TrainingError("non-finite training metric", epoch);
        state.history.push_back(rec);

        const auto decision = scheduler.step(use_val ? rec.val_metric : rec.train_metric);
        if (decision.improved) {
            result.params = params;
            result.train_metric = rec.train_metric;
            result.val_metric = rec.val_metric;
            result.test_metric = rec.test_metric;
            state.best_epoch = epoch;
        }
        state.lr = scheduler.lr();
        state.best_metric = scheduler.best();
        state.epochs_since_improve = scheduler.epochs_since_improve();
        result.epochs = epoch;
        if (decision.stop || (tcfg.max_epochs && epoch >= tcfg.max_epochs)) break;
    }
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

}  // namespace tfuse
