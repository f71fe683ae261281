#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "tfuse/autodiff.hpp"

namespace tfuse {

// Builds a scalar on the given tape from the parameter x.
using ScalarFn = std::function<Var(Tape&, Var x)>;

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped_kinks = 0;
};

// Compares reverse-mode gradients with central differences at up to
// `samples` coordinates of x (all of them when x is smaller). The error at a
// coordinate is |analytic - central| / max(1, |central|). Coordinates where
// the forward and backward one-sided differences disagree are treated as
// sitting on a kink and skipped.
GradCheckReport grad_check_report(const ScalarFn& f, const Tensor& x, double step, std::size_t samples = 20,
                                  std::uint64_t seed = 0);

inline double grad_check(const ScalarFn& f, const Tensor& x, double step, std::size_t samples = 20,
                         std::uint64_t seed = 0) {
    return grad_check_report(f, x, step, samples, seed).max_rel_error;
}

}  // namespace tfuse
