#pragma once

// Reverse-mode differentiation over dense tensors.
//
// A Tape records every operation applied to Vars created on it. Calling
// backward() on a scalar Var walks the tape in reverse and fills in the
// gradient of that scalar with respect to every parameter. Tapes are
// single-threaded; separate tapes may be used concurrently.

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "tfuse/kernels.hpp"
#include "tfuse/tensor.hpp"

namespace tfuse {

class Tape;

// Handle to a value recorded on a tape.
class Var {
public:
    Var() = default;

    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }
    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
public:
    // Passed to an op's backward function while its node is processed.
    class Context {
    public:
        const Tensor& out_grad() const;
        const Tensor& out_value() const;
        const Tensor& input(std::size_t k) const;
        bool needs_grad(std::size_t k) const;
        // Accumulator for the k-th input's gradient, zero-initialised on
        // first use.
        Tensor& input_grad(std::size_t k);

    private:
        friend class Tape;
        Context(Tape& tape, std::size_t node) : tape_(tape), node_(node) {}
        Tape& tape_;
        std::size_t node_;
    };

    using BackwardFn = std::function<void(Context&)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    Var parameter(Tensor value);

    // Appends a node. The backward function is dropped when no input needs
    // a gradient.
    Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

    const Tensor& value(Var v) const;
    bool requires_grad(Var v) const;

    // Gradient from the most recent backward(); zeros if v was unreachable.
    Tensor grad(Var v) const;

    void backward(Var loss);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // empty until something flows into it
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        bool requires_grad = false;
    };

    void check_owned(Var v) const;

    std::vector<Node> nodes_;
};

// Constant sparse operator (and its transpose for the backward pass) used
// for neighbourhood aggregation.
struct SparseOperator {
    kernels::Csr forward;
    kernels::Csr backward;

    explicit SparseOperator(kernels::Csr s) : forward(std::move(s)), backward(forward.transposed()) {}
};

namespace ops {

Var add(Var a, Var b);
Var add_row_bias(Var x, Var bias);
Var scale(Var a, double s);
Var mul(Var a, Var b);
Var matmul(Var a, Var b);
// x (n x k) times w^T, w is (m x k).
Var linear(Var x, Var w);
Var rowwise_concat(Var a, Var b);
Var relu(Var x);
Var sigmoid(Var x);
Var sum_rows(Var x);
Var mean_rows(Var x);
Var sum_all(Var x);
// Per-segment reductions over rows; offsets has one entry per segment
// plus a final end offset. Rows are summed in index order.
Var segment_sum(Var x, std::vector<std::size_t> offsets);
Var segment_mean(Var x, std::vector<std::size_t> offsets);
Var segment_max(Var x, std::vector<std::size_t> offsets);
Var reshape(Var x, Shape shape);
// Contiguous block of x's data starting at offset, viewed with the given shape.
Var slice(Var x, std::size_t offset, Shape shape);
// Row-wise Kronecker product: row i is h_i (x) p_i with entry h_a * p_b at
// index a * width(p) + b.
Var kron_rows(Var h, Var p);
// Views an (n x d^2) tensor as (n x d x d) with Mat(h)[r][c] = h[r * d + c].
Var mat_view(Var h, std::size_t d);
// Row-wise vec(W * Mat(h_i) * Q^T), which equals (W (x) Q) h_i.
Var bilinear(Var h, Var w, Var q);
Var spmm(std::shared_ptr<const SparseOperator> s, Var x);
// Mean absolute error against a constant target of the same shape.
Var mae(Var pred, const Tensor& target);
// Mean binary cross-entropy of logits against 0/1 targets.
Var bce_with_logits(Var logits, const Tensor& target);

}  // namespace ops
}  // namespace tfuse
