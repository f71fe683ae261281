#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "tfuse/encoding.hpp"
#include "tfuse/generators.hpp"
#include "tfuse/wl.hpp"

using namespace tfuse;

TEST(Wl, Figure1PairIsEquivalent) {
    auto [l, r] = figure1_pair();
    const WlComparison c = wl_compare(l, r);
    EXPECT_TRUE(c.equivalent);
    EXPECT_EQ(c.left.histogram, c.right.histogram);
    EXPECT_TRUE(c.left.stable && c.right.stable);
}

TEST(Wl, DistinguishesDifferentDegreeSequences) {
    EXPECT_FALSE(wl_equivalent(cycle_graph(4), Graph(4, {{0, 1}, {1, 2}, {2, 3}})));
    EXPECT_FALSE(wl_equivalent(cycle_graph(4), cycle_graph(5)));
}

TEST(Wl, CycleUnionsAreEquivalentToOneCycle) {
    // C6 and two disjoint triangles: the classic 1-WL failure.
    const Graph two_triangles(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}});
    EXPECT_TRUE(wl_equivalent(cycle_graph(6), two_triangles));
}

TEST(Wl, InvariantUnderPermutation) {
    Rng rng(91, "test");
    for (int t = 0; t < 30; ++t) {
        const Graph g = oracle::random_connected(10, 0.25, rng);
        const auto perm = oracle::random_permutation(10, rng);
        const Graph h = permute_graph(g, perm);
        EXPECT_TRUE(wl_equivalent(g, h));
        const ColoringState a = wl_refine(g, 20), b = wl_refine(h, 20);
        // Colour ids are first-appearance labels; the partition is what must match.
        for (std::size_t i = 0; i < 10; ++i)
            for (std::size_t j = 0; j < 10; ++j)
                EXPECT_EQ(a.colors[i] == a.colors[j], b.colors[perm[i]] == b.colors[perm[j]]);
    }
}

TEST(Wl, RefinementIsMonotone) {
    Rng rng(92, "test");
    const Graph g = oracle::random_connected(12, 0.2, rng);
    std::size_t prev = 1;
    for (std::size_t r = 0; r < 6; ++r) {
        const ColoringState s = wl_refine(g, r);
        std::set<std::size_t> classes(s.colors.begin(), s.colors.end());
        EXPECT_GE(classes.size(), prev);
        prev = classes.size();
    }
}

TEST(Wl, FeaturesSeedColours) {
    const Graph plain = cycle_graph(4);
    const Graph marked = plain.with_features(Tensor::from_rows({{1}, {0}, {0}, {0}}));
    EXPECT_TRUE(wl_equivalent(plain, marked, true));
    EXPECT_FALSE(wl_equivalent(plain, marked, false));
}

TEST(Wl, RwEncodingSeparatesFigure1Pair) {
    auto [l, r] = figure1_pair();
    auto sorted_rows = [](const Graph& g) {
        const oracle::Dense rw = oracle::rw_diag(g, 20);
        auto rows = rw;
        std::sort(rows.begin(), rows.end());
        return rows;
    };
    const auto a = sorted_rows(l), b = sorted_rows(r);
    double diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t s = 0; s < 20; ++s) diff = std::max(diff, std::abs(a[i][s] - b[i][s]));
    EXPECT_GT(diff, 1e-6);
    const EncodingMatrix el = rw_diag_encoding(build_adjacency(l), 20);
    const oracle::Dense ref = oracle::rw_diag(l, 20);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t s = 0; s < 20; ++s) EXPECT_NEAR(el.rows(i, s), ref[i][s], 1e-12);
}
