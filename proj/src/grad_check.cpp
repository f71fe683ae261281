#include "tfuse/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tfuse/rng.hpp"

namespace tfuse {

namespace {

double evaluate(const ScalarFn& f, const Tensor& x) {
    Tape tape;
    Var v = tape.parameter(x);
    return f(tape, v).value()[0];
}

}  // namespace

GradCheckReport grad_check_report(const ScalarFn& f, const Tensor& x, double step, std::size_t samples,
                                  std::uint64_t seed) {
    Tensor analytic;
    {
        Tape tape;
        Var v = tape.parameter(x);
        Var out = f(tape, v);
        tape.backward(out);
        analytic = tape.grad(v);
    }

    std::vector<std::size_t> coords(x.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    Rng rng(seed, "grad_check");
    rng.shuffle(coords.begin(), coords.end());

    GradCheckReport report;
    const double f0 = evaluate(f, x);
    for (std::size_t idx : coords) {
        if (report.checked >= samples) break;
        Tensor xp = x, xm = x;
        xp[idx] += step;
        xm[idx] -= step;
        const double fp = evaluate(f, xp);
        const double fm = evaluate(f, xm);
        const double central = (fp - fm) / (2.0 * step);
        const double fwd = (fp - f0) / step;
        const double bwd = (f0 - fm) / step;
        if (std::abs(fwd - bwd) > 1e-2 * std::max(1.0, std::abs(central))) {
            ++report.skipped_kinks;
            continue;
        }
        const double err = std::abs(analytic[idx] - central) / std::max(1.0, std::abs(central));
        report.max_rel_error = std::max(report.max_rel_error, err);
        ++report.checked;
    }
    return report;
}

}  // namespace tfuse
