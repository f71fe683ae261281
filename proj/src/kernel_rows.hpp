#pragma once

// Per-row pieces of the bilinear (Kronecker-factorized) projection, shared
// by the serial and OpenMP kernels so both accumulate in the same order.

#include <cstddef>

namespace tfuse::kernels::detail {

// t = M * Q^T, y = W * t, for one d x d block.
inline void bilinear_row(std::size_t d, const double* m, const double* w, const double* q, double* t,
                         double* y) {
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t b = 0; b < d; ++b) {
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) acc += m[r * d + c] * q[b * d + c];
            t[r * d + b] = acc;
        }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            double acc = 0.0;
            for (std::size_t r = 0; r < d; ++r) acc += w[a * d + r] * t[r * d + b];
            y[a * d + b] = acc;
        }
}

// u = G * Q, dm = W^T * u.
inline void bilinear_row_input_grad(std::size_t d, const double* g, const double* w, const double* q,
                                    double* u, double* dm) {
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t b = 0; b < d; ++b) acc += g[a * d + b] * q[b * d + c];
            u[a * d + c] = acc;
        }
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t a = 0; a < d; ++a) acc += w[a * d + r] * u[a * d + c];
            dm[r * d + c] = acc;
        }
}

// cw = G * (M Q^T)^T, cq = G^T * (W M). scratch holds d*d values.
inline void bilinear_row_factor_grad(std::size_t d, const double* g, const double* m, const double* w,
                                     const double* q, double* scratch, double* cw, double* cq) {
    double* t = scratch;
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t b = 0; b < d; ++b) {
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) acc += m[r * d + c] * q[b * d + c];
            t[r * d + b] = acc;
        }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t r = 0; r < d; ++r) {
            double acc = 0.0;
            for (std::size_t b = 0; b < d; ++b) acc += g[a * d + b] * t[r * d + b];
            cw[a * d + r] = acc;
        }
    double* v = scratch;  // t is no longer needed
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t r = 0; r < d; ++r) acc += w[a * d + r] * m[r * d + c];
            v[a * d + c] = acc;
        }
    for (std::size_t b = 0; b < d; ++b)
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t a = 0; a < d; ++a) acc += g[a * d + b] * v[a * d + c];
            cq[b * d + c] = acc;
        }
}

}  // namespace tfuse::kernels::detail
