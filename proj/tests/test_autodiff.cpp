#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tfuse/autodiff.hpp"
#include "tfuse/grad_check.hpp"

using namespace tfuse;

namespace {

// A smooth fixed weighting so every output element matters.
Var weighted_sum(Tape& t, Var y) {
    Tensor w(y.shape());
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = std::sin(0.7 * static_cast<double>(i) + 0.3);
    return ops::sum_all(ops::mul(y, t.constant(w)));
}

void expect_grad_ok(const ScalarFn& f, const Tensor& x) {
    const GradCheckReport r = grad_check_report(f, x, 1e-6, 50, 1);
    EXPECT_LT(r.max_rel_error, 1e-6);
    EXPECT_GT(r.checked, 0u);
}

}  // namespace

TEST(Autodiff, ElementwiseAndLinearOps) {
    Rng rng(41, "test");
    const Tensor x = oracle::random_tensor({4, 3}, rng);
    const Tensor other = oracle::random_tensor({4, 3}, rng);
    const Tensor w = oracle::random_tensor({5, 3}, rng);
    const Tensor bias = oracle::random_tensor({3}, rng);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::add(v, t.constant(other))); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::mul(v, v)); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::scale(v, -2.5)); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::linear(v, t.constant(w))); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::linear(t.constant(other), v)); }, w.reshaped({5, 3}));
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::matmul(v, t.constant(w.transposed()))); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::add_row_bias(t.constant(x), v)); }, bias);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::sigmoid(v)); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::relu(v)); }, x);
}

TEST(Autodiff, ReductionsAndShapes) {
    Rng rng(42, "test");
    const Tensor x = oracle::random_tensor({6, 4}, rng);
    const std::vector<std::size_t> seg{0, 2, 3, 6};
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::sum_rows(v)); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::mean_rows(v)); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::segment_sum(v, seg)); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::segment_mean(v, seg)); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::segment_max(v, seg)); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::reshape(v, {4, 6})); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::slice(v, 5, {3, 3})); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::rowwise_concat(v, ops::scale(v, 2.0))); }, x);
}

TEST(Autodiff, KronAndBilinear) {
    Rng rng(43, "test");
    const Tensor h = oracle::random_tensor({5, 3}, rng), p = oracle::random_tensor({5, 4}, rng);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::kron_rows(v, t.constant(p))); }, h);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::kron_rows(t.constant(h), v)); }, p);

    const std::size_t d = 3;
    const Tensor x = oracle::random_tensor({4, d * d}, rng);
    const Tensor w = oracle::random_tensor({d, d}, rng), q = oracle::random_tensor({d, d}, rng);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::bilinear(v, t.constant(w), t.constant(q))); }, x);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::bilinear(t.constant(x), v, t.constant(q))); }, w);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::bilinear(t.constant(x), t.constant(w), v)); }, q);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::mat_view(v, d)); }, x);
}

TEST(Autodiff, KronRowsLayout) {
    Tape t;
    Var h = t.constant(Tensor::from_rows({{1, 2}}));
    Var p = t.constant(Tensor::from_rows({{3, 5, 7}}));
    const Tensor y = ops::kron_rows(h, p).value();
    EXPECT_EQ(y.data()[0 * 3 + 2], 1 * 7.0);
    EXPECT_EQ(y.data()[1 * 3 + 0], 2 * 3.0);
}

TEST(Autodiff, SpmmAndLosses) {
    Rng rng(44, "test");
    kernels::Csr s;
    s.rows = 3;
    s.cols = 4;
    s.offsets = {0, 2, 2, 4};
    s.indices = {0, 3, 1, 2};
    s.values = {0.5, -1.0, 2.0, 0.25};
    auto op = std::make_shared<const SparseOperator>(s);
    const Tensor x = oracle::random_tensor({4, 2}, rng);
    expect_grad_ok([&](Tape& t, Var v) { return weighted_sum(t, ops::spmm(op, v)); }, x);

    const Tensor target = oracle::random_tensor({3, 2}, rng);
    Tensor labels({3, 2}, {1, 0, 0, 1, 1, 1});
    const Tensor pred = oracle::random_tensor({3, 2}, rng);
    expect_grad_ok([&](Tape&, Var v) { return ops::mae(v, target); }, pred);
    expect_grad_ok([&](Tape&, Var v) { return ops::bce_with_logits(v, labels); }, pred);
}

TEST(Autodiff, GradientAccumulatesAcrossUses) {
    Tape t;
    Var x = t.parameter(Tensor::vector({2.0, -3.0}));
    Var y = ops::sum_all(ops::add(ops::mul(x, x), ops::scale(x, 3.0)));
    t.backward(y);
    const Tensor g = t.grad(x);
    EXPECT_EQ(g.data()[0], 2 * 2.0 + 3.0);
    EXPECT_EQ(g.data()[1], 2 * -3.0 + 3.0);
}

TEST(Autodiff, ReluGradientIsZeroAtKink) {
    Tape t;
    Var x = t.parameter(Tensor::vector({0.0, 1.0, -1.0}));
    t.backward(ops::sum_all(ops::relu(x)));
    EXPECT_EQ(t.grad(x).data()[0], 0.0);
    EXPECT_EQ(t.grad(x).data()[1], 1.0);
    EXPECT_EQ(t.grad(x).data()[2], 0.0);
}

TEST(Autodiff, ShapeErrorsNameShapes) {
    Tape t;
    Var a = t.constant(Tensor::zeros({2, 3}));
    Var b = t.constant(Tensor::zeros({3, 2}));
    try {
        ops::add(a, b);
        FAIL();
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("[2, 3]"), std::string::npos) << msg;
        EXPECT_NE(msg.find("[3, 2]"), std::string::npos) << msg;
    }
    EXPECT_THROW(t.backward(a), std::invalid_argument);
}

TEST(Autodiff, UnreachableGradIsZero) {
    Tape t;
    Var x = t.parameter(Tensor::vector({1.0}));
    Var unused = t.parameter(Tensor::vector({1.0, 2.0}));
    t.backward(ops::sum_all(x));
    EXPECT_EQ(t.grad(unused), Tensor::zeros({2}));
}

TEST(GradCheck, DetectsWrongGradient) {
    // Backward deliberately off by a factor of two.
    auto wrong = [](Tape& t, Var x) {
        Tensor v = x.value();
        double s = 0;
        for (double e : v.data()) s += e * e;
        return t.record(Tensor::vector({s}), {x}, [](Tape::Context& c) {
            Tensor& g = c.input_grad(0);
            for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += 4.0 * c.input(0).data()[i] * c.out_grad().data()[0];
        });
    };
    EXPECT_GT(grad_check(wrong, Tensor::vector({1.0, 2.0, 3.0}), 1e-6), 0.5);
}
