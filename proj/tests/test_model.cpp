#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tfuse/encoding.hpp"
#include "tfuse/generators.hpp"
#include "tfuse/grad_check.hpp"
#include "tfuse/model.hpp"

using namespace tfuse;

namespace {

ModelConfig make_config(EncoderKind enc, LayerKind layer, Regime regime, std::size_t K = 2) {
    ModelConfig cfg;
    cfg.encoder = {enc, 2, 5, true, 1};
    cfg.mp = {layer, regime, K, regime == Regime::none ? 0u : 2u, 0.1, 1};
    cfg.d_hidden = 16;
    cfg.seed = 3;
    return cfg;
}

}  // namespace

TEST(Model, ValidateRules) {
    ModelConfig cfg = make_config(EncoderKind::tensor, LayerKind::gcn, Regime::full);
    EXPECT_NO_THROW(validate(cfg));
    cfg.mp.layers = 0;
    EXPECT_THROW(validate(cfg), std::invalid_argument);
    cfg = make_config(EncoderKind::tensor, LayerKind::gcn, Regime::none);
    cfg.mp.layers = 2;
    EXPECT_THROW(validate(cfg), std::invalid_argument);
    cfg = make_config(EncoderKind::tensor, LayerKind::gcn, Regime::full);
    cfg.d_hidden = 20;
    EXPECT_THROW(validate(cfg), std::invalid_argument);
}

TEST(Model, ResolveDimsSubstitutes) {
    ModelConfig cfg = make_config(EncoderKind::tensor, LayerKind::gcn, Regime::full);
    cfg.d_hidden = 328;
    const auto notes = resolve_dims(cfg);
    EXPECT_EQ(cfg.d_hidden, 324u);
    ASSERT_EQ(notes.size(), 1u);
    EXPECT_NE(notes[0].find("328"), std::string::npos);
    cfg = make_config(EncoderKind::concat, LayerKind::gcn, Regime::full);
    cfg.d_hidden = 17;
    resolve_dims(cfg);
    EXPECT_EQ(cfg.d_hidden, 16u);
    cfg.d_hidden = 64;
    EXPECT_TRUE(resolve_dims(cfg).empty());
}

TEST(Model, BreakdownSumsToTotal) {
    for (EncoderKind enc : {EncoderKind::concat, EncoderKind::tensor})
        for (LayerKind layer : {LayerKind::gcn, LayerKind::gin, LayerKind::sage})
            for (Regime regime : {Regime::full, Regime::sparse, Regime::none}) {
                const ModelConfig cfg = make_config(enc, layer, regime);
                const ParamBreakdown b = param_breakdown(cfg);
                std::size_t sum = b.encoder + b.decoder;
                for (std::size_t l : b.layers) sum += l;
                EXPECT_EQ(sum, b.total);
                EXPECT_EQ(b.total, model_param_count(cfg));
                EXPECT_EQ(count_params(init_model(cfg)), b.total);
            }
}

TEST(Model, BudgetSearchPicksClosestAdmissibleWidth) {
    for (EncoderKind enc : {EncoderKind::concat, EncoderKind::tensor})
        for (Regime regime : {Regime::full, Regime::sparse}) {
            ModelConfig cfg = make_config(enc, LayerKind::gcn, regime);
            const std::size_t budget = 50000;
            const std::size_t d = d_hidden_for_budget(cfg, budget);
            cfg.d_hidden = d;
            ASSERT_NO_THROW(validate(cfg));
            const auto gap = [&](std::size_t w) {
                ModelConfig c = cfg;
                c.d_hidden = w;
                const std::size_t n = model_param_count(c);
                return n > budget ? n - budget : budget - n;
            };
            for (std::size_t w = 1; w <= 400; ++w) {
                ModelConfig c = cfg;
                c.d_hidden = w;
                try {
                    validate(c);
                } catch (const std::invalid_argument&) {
                    continue;
                }
                EXPECT_GE(gap(w), gap(d)) << w;
            }
        }
}

TEST(Model, FlattenRoundTrip) {
    const ModelConfig cfg = make_config(EncoderKind::tensor, LayerKind::sage, Regime::sparse);
    const ModelParams p = init_model(cfg);
    const auto flat = flatten(p);
    EXPECT_EQ(flat.size(), count_params(p));
    const ModelParams q = unflatten(p, flat);
    EXPECT_EQ(flatten(q), flat);
}

TEST(Model, InitIsSeeded) {
    ModelConfig cfg = make_config(EncoderKind::tensor, LayerKind::gcn, Regime::full);
    EXPECT_EQ(flatten(init_model(cfg)), flatten(init_model(cfg)));
    ModelConfig other = cfg;
    other.seed = 4;
    EXPECT_NE(flatten(init_model(cfg)), flatten(init_model(other)));
}

TEST(Model, BatchedForwardMatchesSingleGraphs) {
    Rng rng(71, "test");
    const ModelConfig cfg = make_config(EncoderKind::tensor, LayerKind::gin, Regime::sparse);
    const ModelParams p = init_model(cfg);
    std::vector<Graph> graphs;
    std::vector<EncodingMatrix> encs;
    for (int i = 0; i < 4; ++i) {
        Graph g = oracle::random_connected(5 + i, 0.3, rng);
        g = g.with_features(oracle::random_tensor({g.num_nodes(), 2}, rng));
        encs.push_back(rw_diag_encoding(build_adjacency(g), 5));
        graphs.push_back(g.with_target({0.0}));
    }
    std::vector<const Graph*> gp;
    std::vector<const EncodingMatrix*> ep;
    for (int i = 0; i < 4; ++i) {
        gp.push_back(&graphs[i]);
        ep.push_back(&encs[i]);
    }
    const Tensor batched = predict(cfg, p, prepare_batch(gp, ep));
    for (int i = 0; i < 4; ++i) {
        const auto single = forward(cfg, p, graphs[i], encs[i]);
        EXPECT_NEAR(batched(i, 0), single[0], 1e-12);
    }
}

TEST(Model, GradientCheckSmall) {
    Rng rng(72, "test");
    for (Regime regime : {Regime::full, Regime::sparse, Regime::none}) {
        const ModelConfig cfg = make_config(EncoderKind::tensor, LayerKind::gcn, regime);
        const ModelParams layout = init_model(cfg);
        Graph g = oracle::random_connected(6, 0.4, rng);
        g = g.with_features(oracle::random_tensor({6, 2}, rng)).with_target({0.3});
        const EncodingMatrix enc = rw_diag_encoding(build_adjacency(g), 5);
        const Graph* gp[] = {&g};
        const EncodingMatrix* ep[] = {&enc};
        const PreparedBatch batch = prepare_batch(gp, ep);
        auto f = [&](Tape& t, Var x) {
            // Smooth surrogate loss so the check is not dominated by kinks.
            Var y = forward(cfg, bind_flat(layout, x), t, batch);
            return ops::sum_all(ops::mul(y, y));
        };
        const Tensor x = Tensor::vector(flatten(layout));
        EXPECT_LT(grad_check(f, x, 1e-6, 30), 1e-5) << to_string(regime);
    }
}

TEST(Model, ReadoutsAreInvariant) {
    Rng rng(73, "test");
    for (Readout r : {Readout::sum, Readout::mean, Readout::max}) {
        ModelConfig cfg = make_config(EncoderKind::concat, LayerKind::sage, Regime::full);
        cfg.readout = r;
        const ModelParams p = init_model(cfg);
        Graph g = oracle::random_connected(8, 0.3, rng).with_features(oracle::random_tensor({8, 2}, rng));
        const auto perm = oracle::random_permutation(8, rng);
        const Graph h = permute_graph(g, perm);
        const auto a = forward(cfg, p, g, rw_diag_encoding(build_adjacency(g), 5));
        const auto b = forward(cfg, p, h, rw_diag_encoding(build_adjacency(h), 5));
        EXPECT_NEAR(a[0], b[0], 1e-10) << to_string(r);
    }
}
