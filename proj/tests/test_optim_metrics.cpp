#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tfuse/metrics.hpp"
#include "tfuse/optim.hpp"

using namespace tfuse;

TEST(Adam, FirstStepClosedForm) {
    std::vector<double> p{1.0, -2.0, 0.5};
    const std::vector<double> g{0.3, -0.1, 0.0};
    AdamState s(3);
    adam_step(s, p, g, 0.01);
    // After one step m_hat = g and v_hat = g^2.
    const double want[] = {1.0 - 0.01 * 0.3 / (0.3 + 1e-8), -2.0 + 0.01 * 0.1 / (0.1 + 1e-8), 0.5};
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], want[i], 1e-15);
    EXPECT_EQ(s.step, 1u);
}

TEST(Adam, SecondStepClosedForm) {
    std::vector<double> p{1.0};
    AdamState s(1);
    adam_step(s, p, std::vector<double>{0.5}, 0.1);
    adam_step(s, p, std::vector<double>{-0.2}, 0.1);
    const double m1 = 0.1 * 0.5, v1 = 0.001 * 0.25;
    const double m2 = 0.9 * m1 + 0.1 * -0.2, v2 = 0.999 * v1 + 0.001 * 0.04;
    const double p1 = 1.0 - 0.1 * (m1 / 0.1) / (std::sqrt(v1 / 0.001) + 1e-8);
    const double p2 = p1 - 0.1 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
    EXPECT_NEAR(p[0], p2, 1e-12);
}

TEST(Adam, NonFiniteGradientNamesBlock) {
    std::vector<double> p{1.0, 2.0};
    const std::vector<ParamBlock> blocks{{"a", 0, 1}, {"b", 1, 1}};
    AdamState s(2);
    try {
        adam_step(s, p, std::vector<double>{0.0, NAN}, 0.1, {}, blocks);
        FAIL();
    } catch (const NonFiniteGradient& e) {
        EXPECT_EQ(e.block(), "b");
    }
    EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(s.step, 0u);
}

TEST(Plateau, HalvesAtPatienceAndStops) {
    PlateauScheduler s(1e-3, Direction::minimize);
    EXPECT_TRUE(s.step(1.0).improved);
    for (int e = 1; e < 25; ++e) EXPECT_FALSE(s.step(1.0).halved);
    auto d = s.step(1.0);
    EXPECT_TRUE(d.halved);
    EXPECT_EQ(d.lr, 5e-4);
    std::size_t epochs = 26;
    while (!s.stopped()) {
        s.step(1.0);
        ++epochs;
    }
    // 1e-3 * 0.5^7 < 1e-5 <= 1e-3 * 0.5^6
    EXPECT_EQ(s.halvings(), 7u);
    EXPECT_EQ(epochs, 1u + 7 * 25);
    EXPECT_LT(s.lr(), 1e-5);
}

TEST(Plateau, ImprovementResetsCounter) {
    PlateauScheduler s(1e-3, Direction::maximize);
    s.step(0.1);
    for (int e = 0; e < 24; ++e) s.step(0.1);
    EXPECT_TRUE(s.step(0.2).improved);
    EXPECT_EQ(s.epochs_since_improve(), 0u);
    for (int e = 0; e < 24; ++e) EXPECT_FALSE(s.step(0.2).halved);
    EXPECT_TRUE(s.step(0.2).halved);
}

TEST(Metrics, MaeAndLoss) {
    const Tensor p = Tensor::from_rows({{1.0}, {-1.0}}), t = Tensor::from_rows({{0.5}, {1.0}});
    EXPECT_DOUBLE_EQ(mean_absolute_error(p, t), 1.25);
    EXPECT_DOUBLE_EQ(loss_value(TaskKind::regression, p, t), 1.25);
    const Tensor logits = Tensor::from_rows({{0.0}}), label = Tensor::from_rows({{1.0}});
    EXPECT_NEAR(loss_value(TaskKind::multilabel, logits, label), std::log(2.0), 1e-15);
}

TEST(Metrics, ApKnownValues) {
    const Tensor scores = Tensor::from_rows({{0.9}, {0.8}, {0.7}, {0.6}});
    const Tensor labels = Tensor::from_rows({{1}, {0}, {1}, {0}});
    EXPECT_DOUBLE_EQ(metric_ap(scores, labels).mean, (1.0 + 2.0 / 3.0) / 2.0);
}

TEST(Metrics, ApTiesKeepIndexOrder) {
    const Tensor scores = Tensor::from_rows({{0.5}, {0.5}});
    EXPECT_DOUBLE_EQ(metric_ap(scores, Tensor::from_rows({{0}, {1}})).mean, 0.5);
    EXPECT_DOUBLE_EQ(metric_ap(scores, Tensor::from_rows({{1}, {0}})).mean, 1.0);
}

TEST(Metrics, ApSkipsLabelsWithoutPositives) {
    const Tensor scores = Tensor::from_rows({{0.1, 0.2}, {0.3, 0.4}});
    const ApResult r = metric_ap(scores, Tensor::from_rows({{1, 0}, {0, 0}}));
    EXPECT_EQ(r.skipped_labels, (std::vector<std::size_t>{1}));
    EXPECT_TRUE(std::isnan(r.per_label[1]));
    EXPECT_DOUBLE_EQ(r.mean, 0.5);
    EXPECT_THROW(metric_ap(scores, Tensor::zeros({2, 2})), std::invalid_argument);
}

TEST(Metrics, ApMatchesPrefixEnumeration) {
    Rng rng(81, "test");
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.below(20), L = 1 + rng.below(5);
        Tensor scores({n, L}), labels({n, L});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < L; ++l) {
                scores(i, l) = static_cast<double>(rng.below(6)) / 5.0;
                labels(i, l) = rng.bernoulli(0.4) ? 1.0 : 0.0;
            }
        labels(0, 0) = 1.0;
        const ApResult r = metric_ap(scores, labels);
        for (std::size_t l = 0; l < L; ++l) {
            std::vector<double> s(n), y(n);
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = scores(i, l);
                y[i] = labels(i, l);
            }
            if (std::count(y.begin(), y.end(), 1.0) == 0) continue;
            EXPECT_EQ(r.per_label[l], oracle::average_precision(s, y));
        }
    }
}
