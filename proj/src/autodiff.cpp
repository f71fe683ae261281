#include "tfuse/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tfuse {

const Tensor& Var::value() const {
    if (!tape_) throw std::logic_error("Var is not attached to a tape");
    return tape_->value(*this);
}

const Tensor& Tape::Context::out_grad() const { return tape_.nodes_[node_].grad; }
const Tensor& Tape::Context::out_value() const { return tape_.nodes_[node_].value; }

const Tensor& Tape::Context::input(std::size_t k) const {
    return tape_.nodes_[tape_.nodes_[node_].inputs.at(k)].value;
}

bool Tape::Context::needs_grad(std::size_t k) const {
    return tape_.nodes_[tape_.nodes_[node_].inputs.at(k)].requires_grad;
}

Tensor& Tape::Context::input_grad(std::size_t k) {
    Node& in = tape_.nodes_[tape_.nodes_[node_].inputs.at(k)];
    if (in.grad.empty() && !in.value.empty()) in.grad = Tensor::zeros(in.value.shape());
    return in.grad;
}

void Tape::check_owned(Var v) const {
    if (v.tape_ != this || v.id_ >= nodes_.size()) throw std::invalid_argument("Var belongs to a different tape");
}

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, {}, false});
    return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, {}, true});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
    Node node;
    node.value = std::move(value);
    for (const Var& v : inputs) {
        check_owned(v);
        node.inputs.push_back(v.id_);
        node.requires_grad = node.requires_grad || nodes_[v.id_].requires_grad;
    }
    if (node.requires_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(Var v) const {
    check_owned(v);
    return nodes_[v.id_].value;
}

bool Tape::requires_grad(Var v) const {
    check_owned(v);
    return nodes_[v.id_].requires_grad;
}

Tensor Tape::grad(Var v) const {
    check_owned(v);
    const Node& n = nodes_[v.id_];
    return n.grad.empty() ? Tensor::zeros(n.value.shape()) : n.grad;
}

void Tape::backward(Var loss) {
    check_owned(loss);
    if (nodes_[loss.id_].value.size() != 1) {
        throw std::invalid_argument("backward needs a scalar loss, got shape " +
                                    shape_str(nodes_[loss.id_].value.shape()));
    }
    for (Node& n : nodes_) n.grad = Tensor();
    nodes_[loss.id_].grad = Tensor::filled(nodes_[loss.id_].value.shape(), 1.0);
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.grad.empty() || !n.backward) continue;
        Context ctx(*this, i);
        n.backward(ctx);
    }
}

namespace ops {

namespace {

void require(bool ok, const std::string& op, const Shape& a, const Shape& b) {
    if (!ok) throw std::invalid_argument(op + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

void require_matrix(const std::string& op, const Tensor& t) {
    if (t.rank() != 2) throw std::invalid_argument(op + ": expected a 2-D tensor, got " + shape_str(t.shape()));
}

void require_same_tape(Var a, Var b) {
    if (a.tape() != b.tape() || !a.tape()) throw std::invalid_argument("operands live on different tapes");
}

void accumulate(Tensor& dst, const Tensor& src) {
    auto d = dst.data();
    auto s = src.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

void check_offsets(const std::string& op, const std::vector<std::size_t>& offsets, std::size_t rows) {
    if (offsets.empty() || offsets.front() != 0 || offsets.back() != rows ||
        !std::is_sorted(offsets.begin(), offsets.end())) {
        throw std::invalid_argument(op + ": segment offsets must ascend from 0 to " + std::to_string(rows));
    }
}

}  // namespace

Var add(Var a, Var b) {
    require_same_tape(a, b);
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    require(x.shape() == y.shape(), "add", x.shape(), y.shape());
    Tensor out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
    return a.tape()->record(std::move(out), {a, b}, [](Tape::Context& c) {
        for (std::size_t k = 0; k < 2; ++k)
            if (c.needs_grad(k)) accumulate(c.input_grad(k), c.out_grad());
    });
}

Var add_row_bias(Var x, Var bias) {
    require_same_tape(x, bias);
    const Tensor& xv = x.value();
    const Tensor& bv = bias.value();
    require_matrix("add_row_bias", xv);
    require(bv.size() == xv.cols(), "add_row_bias", xv.shape(), bv.shape());
    Tensor out = xv;
    for (std::size_t i = 0; i < xv.rows(); ++i)
        for (std::size_t j = 0; j < xv.cols(); ++j) out(i, j) += bv[j];
    return x.tape()->record(std::move(out), {x, bias}, [](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        if (c.needs_grad(0)) accumulate(c.input_grad(0), g);
        if (c.needs_grad(1)) {
            Tensor& gb = c.input_grad(1);
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g(i, j);
        }
    });
}

Var scale(Var a, double s) {
    const Tensor& x = a.value();
    Tensor out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * x[i];
    return a.tape()->record(std::move(out), {a}, [s](Tape::Context& c) {
        Tensor& gx = c.input_grad(0);
        const Tensor& g = c.out_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += s * g[i];
    });
}

Var mul(Var a, Var b) {
    require_same_tape(a, b);
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    require(x.shape() == y.shape(), "mul", x.shape(), y.shape());
    Tensor out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
    return a.tape()->record(std::move(out), {a, b}, [](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        if (c.needs_grad(0)) {
            Tensor& ga = c.input_grad(0);
            const Tensor& y = c.input(1);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
        }
        if (c.needs_grad(1)) {
            Tensor& gb = c.input_grad(1);
            const Tensor& x = c.input(0);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * x[i];
        }
    });
}

Var matmul(Var a, Var b) {
    require_same_tape(a, b);
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    require_matrix("matmul", x);
    require_matrix("matmul", y);
    require(x.cols() == y.rows(), "matmul", x.shape(), y.shape());
    const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
    Tensor out({m, n});
    kernels::gemm_nn(m, k, n, x.data(), y.data(), out.data());
    return a.tape()->record(std::move(out), {a, b}, [m, k, n](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        if (c.needs_grad(0)) {
            Tensor tmp({m, k});
            kernels::gemm_nt(m, n, k, g.data(), c.input(1).data(), tmp.data());
            accumulate(c.input_grad(0), tmp);
        }
        if (c.needs_grad(1)) {
            Tensor tmp({k, n});
            kernels::gemm_tn(k, m, n, c.input(0).data(), g.data(), tmp.data());
            accumulate(c.input_grad(1), tmp);
        }
    });
}

Var linear(Var x, Var w) {
    require_same_tape(x, w);
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    require_matrix("linear", xv);
    require_matrix("linear", wv);
    require(xv.cols() == wv.cols(), "linear", xv.shape(), wv.shape());
    const std::size_t n = xv.rows(), k = xv.cols(), m = wv.rows();
    Tensor out({n, m});
    kernels::gemm_nt(n, k, m, xv.data(), wv.data(), out.data());
    return x.tape()->record(std::move(out), {x, w}, [n, k, m](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        if (c.needs_grad(0)) {
            Tensor tmp({n, k});
            kernels::gemm_nn(n, m, k, g.data(), c.input(1).data(), tmp.data());
            accumulate(c.input_grad(0), tmp);
        }
        if (c.needs_grad(1)) {
            Tensor tmp({m, k});
            kernels::gemm_tn(m, n, k, g.data(), c.input(0).data(), tmp.data());
            accumulate(c.input_grad(1), tmp);
        }
    });
}

Var rowwise_concat(Var a, Var b) {
    require_same_tape(a, b);
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    require_matrix("rowwise_concat", x);
    require_matrix("rowwise_concat", y);
    require(x.rows() == y.rows(), "rowwise_concat", x.shape(), y.shape());
    const std::size_t n = x.rows(), p = x.cols(), q = y.cols();
    Tensor out({n, p + q});
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(x.row(i).begin(), p, out.row(i).begin());
        std::copy_n(y.row(i).begin(), q, out.row(i).begin() + static_cast<std::ptrdiff_t>(p));
    }
    return a.tape()->record(std::move(out), {a, b}, [n, p, q](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        if (c.needs_grad(0)) {
            Tensor& ga = c.input_grad(0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < p; ++j) ga(i, j) += g(i, j);
        }
        if (c.needs_grad(1)) {
            Tensor& gb = c.input_grad(1);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < q; ++j) gb(i, j) += g(i, p + j);
        }
    });
}

Var relu(Var x) {
    const Tensor& v = x.value();
    Tensor out(v.shape());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
    return x.tape()->record(std::move(out), {x}, [](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        const Tensor& v = c.input(0);
        Tensor& gx = c.input_grad(0);
        // The derivative at exactly 0 is taken as 0.
        for (std::size_t i = 0; i < g.size(); ++i)
            if (v[i] > 0.0) gx[i] += g[i];
    });
}

Var sigmoid(Var x) {
    const Tensor& v = x.value();
    Tensor out(v.shape());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double z = v[i];
        out[i] = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
    return x.tape()->record(std::move(out), {x}, [](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        const Tensor& s = c.out_value();
        Tensor& gx = c.input_grad(0);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * s[i] * (1.0 - s[i]);
    });
}

Var sum_rows(Var x) {
    const std::size_t n = x.value().rows();
    return segment_sum(x, {0, n});
}

Var mean_rows(Var x) {
    const std::size_t n = x.value().rows();
    return segment_mean(x, {0, n});
}

Var sum_all(Var x) {
    const Tensor& v = x.value();
    double s = 0.0;
    for (double e : v.data()) s += e;
    return x.tape()->record(Tensor({1}, {s}), {x}, [](Tape::Context& c) {
        const double g = c.out_grad()[0];
        Tensor& gx = c.input_grad(0);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
    });
}

Var segment_sum(Var x, std::vector<std::size_t> offsets) {
    const Tensor& v = x.value();
    require_matrix("segment_sum", v);
    check_offsets("segment_sum", offsets, v.rows());
    const std::size_t segs = offsets.size() - 1, d = v.cols();
    Tensor out({segs, d});
    for (std::size_t s = 0; s < segs; ++s)
        for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i)
            for (std::size_t j = 0; j < d; ++j) out(s, j) += v(i, j);
    return x.tape()->record(std::move(out), {x}, [offsets = std::move(offsets), d](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        Tensor& gx = c.input_grad(0);
        for (std::size_t s = 0; s + 1 < offsets.size(); ++s)
            for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i)
                for (std::size_t j = 0; j < d; ++j) gx(i, j) += g(s, j);
    });
}

Var segment_mean(Var x, std::vector<std::size_t> offsets) {
    const Tensor& v = x.value();
    require_matrix("segment_mean", v);
    check_offsets("segment_mean", offsets, v.rows());
    const std::size_t segs = offsets.size() - 1, d = v.cols();
    Tensor out({segs, d});
    for (std::size_t s = 0; s < segs; ++s) {
        const std::size_t cnt = offsets[s + 1] - offsets[s];
        if (cnt == 0) continue;
        for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i)
            for (std::size_t j = 0; j < d; ++j) out(s, j) += v(i, j);
        for (std::size_t j = 0; j < d; ++j) out(s, j) /= static_cast<double>(cnt);
    }
    return x.tape()->record(std::move(out), {x}, [offsets = std::move(offsets), d](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        Tensor& gx = c.input_grad(0);
        for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
            const double inv = 1.0 / static_cast<double>(std::max<std::size_t>(1, offsets[s + 1] - offsets[s]));
            for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i)
                for (std::size_t j = 0; j < d; ++j) gx(i, j) += g(s, j) * inv;
        }
    });
}

Var segment_max(Var x, std::vector<std::size_t> offsets) {
    const Tensor& v = x.value();
    require_matrix("segment_max", v);
    check_offsets("segment_max", offsets, v.rows());
    const std::size_t segs = offsets.size() - 1, d = v.cols();
    Tensor out({segs, d});
    // Winning row per (segment, column); first occurrence on ties.
    std::vector<std::size_t> arg(segs * d, static_cast<std::size_t>(-1));
    for (std::size_t s = 0; s < segs; ++s)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i) {
                std::size_t& a = arg[s * d + j];
                if (a == static_cast<std::size_t>(-1) || v(i, j) > v(a, j)) a = i;
            }
    for (std::size_t s = 0; s < segs; ++s)
        for (std::size_t j = 0; j < d; ++j)
            if (arg[s * d + j] != static_cast<std::size_t>(-1)) out(s, j) = v(arg[s * d + j], j);
    return x.tape()->record(std::move(out), {x}, [arg = std::move(arg), segs, d](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        Tensor& gx = c.input_grad(0);
        for (std::size_t s = 0; s < segs; ++s)
            for (std::size_t j = 0; j < d; ++j)
                if (arg[s * d + j] != static_cast<std::size_t>(-1)) gx(arg[s * d + j], j) += g(s, j);
    });
}

Var reshape(Var x, Shape shape) {
    Tensor out = x.value().reshaped(std::move(shape));
    return x.tape()->record(std::move(out), {x}, [](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        Tensor& gx = c.input_grad(0);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
}

Var slice(Var x, std::size_t offset, Shape shape) {
    const Tensor& v = x.value();
    const std::size_t len = shape_size(shape);
    if (offset + len > v.size()) {
        throw std::invalid_argument("slice of " + shape_str(shape) + " at " + std::to_string(offset) +
                                    " exceeds " + shape_str(v.shape()));
    }
    auto first = v.data().begin() + static_cast<std::ptrdiff_t>(offset);
    Tensor out(std::move(shape), std::vector<double>(first, first + static_cast<std::ptrdiff_t>(len)));
    return x.tape()->record(std::move(out), {x}, [offset](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        Tensor& gx = c.input_grad(0);
        for (std::size_t i = 0; i < g.size(); ++i) gx[offset + i] += g[i];
    });
}

Var kron_rows(Var h, Var p) {
    require_same_tape(h, p);
    const Tensor& hv = h.value();
    const Tensor& pv = p.value();
    require_matrix("kron_rows", hv);
    require_matrix("kron_rows", pv);
    require(hv.rows() == pv.rows(), "kron_rows", hv.shape(), pv.shape());
    const std::size_t n = hv.rows(), a = hv.cols(), b = pv.cols();
    Tensor out({n, a * b});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t x = 0; x < a; ++x)
            for (std::size_t y = 0; y < b; ++y) out(i, x * b + y) = hv(i, x) * pv(i, y);
    return h.tape()->record(std::move(out), {h, p}, [n, a, b](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        const Tensor& hv = c.input(0);
        const Tensor& pv = c.input(1);
        if (c.needs_grad(0)) {
            Tensor& gh = c.input_grad(0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t x = 0; x < a; ++x) {
                    double acc = 0.0;
                    for (std::size_t y = 0; y < b; ++y) acc += g(i, x * b + y) * pv(i, y);
                    gh(i, x) += acc;
                }
        }
        if (c.needs_grad(1)) {
            Tensor& gp = c.input_grad(1);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t y = 0; y < b; ++y) {
                    double acc = 0.0;
                    for (std::size_t x = 0; x < a; ++x) acc += g(i, x * b + y) * hv(i, x);
                    gp(i, y) += acc;
                }
        }
    });
}

Var mat_view(Var h, std::size_t d) {
    const Tensor& v = h.value();
    require_matrix("mat_view", v);
    if (v.cols() != d * d) {
        throw std::invalid_argument("mat_view: row width " + std::to_string(v.cols()) + " is not " +
                                    std::to_string(d) + "^2");
    }
    return reshape(h, {v.rows(), d, d});
}

Var bilinear(Var h, Var w, Var q) {
    require_same_tape(h, w);
    require_same_tape(h, q);
    const Tensor& hv = h.value();
    const Tensor& wv = w.value();
    const Tensor& qv = q.value();
    require_matrix("bilinear", hv);
    require(wv.rank() == 2 && wv.rows() == wv.cols(), "bilinear", hv.shape(), wv.shape());
    require(qv.shape() == wv.shape(), "bilinear", wv.shape(), qv.shape());
    const std::size_t d = wv.rows(), n = hv.rows();
    require(hv.cols() == d * d, "bilinear", hv.shape(), wv.shape());
    Tensor out({n, d * d});
    kernels::bilinear_rows(n, d, hv.data(), wv.data(), qv.data(), out.data());
    return h.tape()->record(std::move(out), {h, w, q}, [n, d](Tape::Context& c) {
        const Tensor& g = c.out_grad();
        const Tensor& hv = c.input(0);
        const Tensor& wv = c.input(1);
        const Tensor& qv = c.input(2);
        if (c.needs_grad(0)) {
            Tensor tmp({n, d * d});
            kernels::bilinear_rows_input_grad(n, d, g.data(), wv.data(), qv.data(), tmp.data());
            accumulate(c.input_grad(0), tmp);
        }
        if (c.needs_grad(1) || c.needs_grad(2)) {
            Tensor dw({d, d}), dq({d, d});
            kernels::bilinear_rows_factor_grad(n, d, g.data(), hv.data(), wv.data(), qv.data(), dw.data(),
                                               dq.data());
            if (c.needs_grad(1)) accumulate(c.input_grad(1), dw);
            if (c.needs_grad(2)) accumulate(c.input_grad(2), dq);
        }
    });
}

Var spmm(std::shared_ptr<const SparseOperator> s, Var x) {
    const Tensor& v = x.value();
    require_matrix("spmm", v);
    if (s->forward.cols != v.rows()) {
        throw std::invalid_argument("spmm: operator is " + std::to_string(s->forward.rows) + "x" +
                                    std::to_string(s->forward.cols) + ", input " + shape_str(v.shape()));
    }
    const std::size_t d = v.cols();
    Tensor out({s->forward.rows, d});
    kernels::csr_spmm(s->forward, d, v.data(), out.data());
    return x.tape()->record(std::move(out), {x}, [s = std::move(s), d](Tape::Context& c) {
        Tensor tmp({s->backward.rows, d});
        kernels::csr_spmm(s->backward, d, c.out_grad().data(), tmp.data());
        accumulate(c.input_grad(0), tmp);
    });
}

Var mae(Var pred, const Tensor& target) {
    const Tensor& p = pred.value();
    require(p.size() == target.size(), "mae", p.shape(), target.shape());
    const double inv = 1.0 / static_cast<double>(std::max<std::size_t>(1, p.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - target[i]);
    return pred.tape()->record(Tensor({1}, {s * inv}), {pred}, [target, inv](Tape::Context& c) {
        const double g = c.out_grad()[0] * inv;
        const Tensor& p = c.input(0);
        Tensor& gp = c.input_grad(0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double diff = p[i] - target[i];
            gp[i] += diff > 0.0 ? g : (diff < 0.0 ? -g : 0.0);
        }
    });
}

Var bce_with_logits(Var logits, const Tensor& target) {
    const Tensor& z = logits.value();
    require(z.size() == target.size(), "bce_with_logits", z.shape(), target.shape());
    const double inv = 1.0 / static_cast<double>(std::max<std::size_t>(1, z.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        s += std::max(z[i], 0.0) - z[i] * target[i] + std::log1p(std::exp(-std::abs(z[i])));
    return logits.tape()->record(Tensor({1}, {s * inv}), {logits}, [target, inv](Tape::Context& c) {
        const double g = c.out_grad()[0] * inv;
        const Tensor& z = c.input(0);
        Tensor& gz = c.input_grad(0);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double sig = z[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-z[i])) : std::exp(z[i]) / (1.0 + std::exp(z[i]));
            gz[i] += g * (sig - target[i]);
        }
    });
}

}  // namespace ops
}  // namespace tfuse
