#include "tfuse/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tfuse {

namespace {

double off_diagonal_norm(const Tensor& a) {
    const std::size_t n = a.rows();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

double frobenius(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

// A <- J^T A J for the rotation in the (p, q) plane; V <- V J.
void rotate(Tensor& a, Tensor& v, std::size_t p, std::size_t q) {
    const std::size_t n = a.rows();
    const double apq = a(p, q);
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    for (std::size_t k = 0; k < n; ++k) {
        const double akp = a(k, p), akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double apk = a(p, k), aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double vkp = v(k, p), vkq = v(k, q);
        v(k, p) = c * vkp - s * vkq;
        v(k, q) = s * vkp + c * vkq;
    }
}

}  // namespace

SymmetricEigen symmetric_eig(const Tensor& m, double tol) {
    if (m.rank() != 2 || m.rows() != m.shape()[1]) {
        throw EigenError("symmetric_eig needs a square matrix, got " + shape_str(m.shape()));
    }
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(m(i, j) - m(j, i)) > tol * std::max({1.0, std::abs(m(i, j)), std::abs(m(j, i))})) {
                throw EigenError("matrix is not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            }

    Tensor a = m;
    Tensor v = Tensor::identity(n);
    const double target = tol * std::max(1.0, frobenius(m));
    const std::size_t cap = std::max<std::size_t>(100, 100 * n * n);
    std::size_t rotations = 0;
    while (off_diagonal_norm(a) > target) {
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                if (rotations++ >= cap) {
                    throw EigenError("Jacobi iteration did not converge within " + std::to_string(cap) +
                                     " rotations");
                }
                rotate(a, v, p, q);
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    SymmetricEigen out;
    out.rotations = rotations;
    out.values.resize(n);
    out.vectors = Tensor({n, n});
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.values[j] = a(src, src);
        std::size_t lead = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(v(i, src)) > std::abs(v(lead, src)) + 1e-12) lead = i;
        const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = sign * v(i, src);
    }
    return out;
}

}  // namespace tfuse
