#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "tfuse/encoding.hpp"
#include "tfuse/generators.hpp"
#include "tfuse/training.hpp"

using namespace tfuse;

namespace {

Dataset small_task(std::size_t graphs, std::uint64_t seed) {
    MultiplicativeTaskParams p;
    p.num_graphs = graphs;
    p.num_nodes = 8;
    p.rw_steps = 6;
    Dataset d{"small", multiplicative_task(p, seed).graphs, {}};
    for (const Graph& g : d.graphs) d.encodings.push_back(rw_diag_encoding(build_adjacency(g), 6));
    return d;
}

ModelConfig small_model() {
    ModelConfig cfg;
    cfg.encoder = {EncoderKind::tensor, 4, 6, true, 1};
    cfg.mp = {LayerKind::gcn, Regime::sparse, 1, 1, 0.0, 1};
    cfg.d_hidden = 9;
    return cfg;
}

}  // namespace

TEST(Splits, DisjointAndCovering) {
    const Splits s = make_splits(103, 0.8, 0.1, 5);
    std::set<std::size_t> all;
    for (auto* part : {&s.train, &s.val, &s.test}) all.insert(part->begin(), part->end());
    EXPECT_EQ(all.size(), 103u);
    EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), 103u);
    EXPECT_EQ(s.train.size(), 82u);
    EXPECT_THROW(make_splits(10, 0.9, 0.2, 0), std::invalid_argument);
}

TEST(Training, LossDecreases) {
    const Dataset d = small_task(60, 1);
    const Splits s = make_splits(60, 0.8, 0.1, 1);
    TrainConfig t;
    t.lr = 0.01;
    t.max_epochs = 40;
    t.batch_size = 16;
    const TrainResult r = train(small_model(), t, d, s);
    ASSERT_EQ(r.state.history.size(), 40u);
    EXPECT_LT(r.state.history.back().train_loss, 0.5 * r.state.history.front().train_loss);
}

TEST(Training, Deterministic) {
    const Dataset d = small_task(30, 2);
    const Splits s = make_splits(30, 0.8, 0.1, 2);
    TrainConfig t;
    t.lr = 0.01;
    t.max_epochs = 10;
    t.batch_size = 7;
    const TrainResult a = train(small_model(), t, d, s), b = train(small_model(), t, d, s);
    EXPECT_EQ(flatten(a.params), flatten(b.params));
    ASSERT_EQ(a.state.history.size(), b.state.history.size());
    for (std::size_t i = 0; i < a.state.history.size(); ++i)
        EXPECT_EQ(a.state.history[i].val_metric, b.state.history[i].val_metric);
}

TEST(Training, StopsAfterPlateau) {
    // Zero model on zero targets: the metric never improves after epoch 1,
    // so the rate halves every 25 epochs until it drops below the floor.
    Dataset d = small_task(10, 3);
    for (Graph& g : d.graphs) g = g.with_target({0.0});
    const Splits s = make_splits(10, 0.6, 0.2, 3);
    const ModelConfig cfg = small_model();
    ModelParams zero = init_model(cfg);
    zero = unflatten(zero, std::vector<double>(count_params(zero), 0.0));
    TrainConfig t;
    const TrainResult r = train(cfg, t, d, s, zero);
    EXPECT_EQ(r.epochs, 1u + 7 * 25);
    EXPECT_LT(r.state.lr, 1e-5);
    // Records carry the rate used during the epoch; the first halving
    // happens at the end of epoch 26.
    EXPECT_EQ(r.state.history[25].lr, 1e-3);
    EXPECT_EQ(r.state.history[26].lr, 5e-4);
}

TEST(Training, RejectsOverlappingSplits) {
    const Dataset d = small_task(10, 4);
    Splits s{{0, 1, 2}, {2}, {}};
    EXPECT_THROW(train(small_model(), TrainConfig{}, d, s), std::invalid_argument);
}

TEST(Training, NonFiniteTargetFails) {
    Dataset d = small_task(10, 5);
    d.graphs[0] = d.graphs[0].with_target({NAN});
    const Splits s{{0, 1, 2, 3}, {4}, {5}};
    TrainConfig t;
    t.max_epochs = 3;
    EXPECT_THROW(train(small_model(), t, d, s), TrainingError);
}

TEST(Training, MultilabelUsesAp) {
    Rng rng(101, "test");
    Dataset d{"ml", {}, {}};
    for (int i = 0; i < 20; ++i) {
        Graph g = oracle::random_connected(6, 0.3, rng);
        d.encodings.push_back(rw_diag_encoding(build_adjacency(g), 6));
        d.graphs.push_back(g.with_target({i % 2 ? 1.0 : 0.0, i % 3 ? 0.0 : 1.0}));
    }
    ModelConfig cfg = small_model();
    cfg.encoder.d_in = 1;
    cfg.task = TaskKind::multilabel;
    cfg.out_dim = 2;
    TrainConfig t;
    t.max_epochs = 5;
    t.lr = 0.01;
    const TrainResult r = train(cfg, t, d, make_splits(20, 0.6, 0.2, 0));
    EXPECT_GE(r.train_metric, 0.0);
    EXPECT_LE(r.train_metric, 1.0);
    EXPECT_EQ(metric_direction(TaskKind::multilabel), Direction::maximize);
}
