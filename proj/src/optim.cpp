#include "tfuse/optim.hpp"

#include <cmath>
#include <limits>

namespace tfuse {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr,
               const AdamConfig& cfg, std::span<const ParamBlock> blocks) {
    if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw std::invalid_argument("adam_step: parameter, gradient and moment sizes differ");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (std::isfinite(grads[i])) continue;
        for (const ParamBlock& b : blocks)
            if (i >= b.offset && i < b.offset + b.size) throw NonFiniteGradient(b.name);
        throw NonFiniteGradient("#" + std::to_string(i));
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

PlateauScheduler::PlateauScheduler(double lr, Direction direction, std::size_t patience, double factor, double floor)
    : lr_(lr),
      direction_(direction),
      patience_(patience),
      factor_(factor),
      floor_(floor),
      best_(direction == Direction::minimize ? std::numeric_limits<double>::infinity()
                                             : -std::numeric_limits<double>::infinity()) {
    if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (patience == 0) throw std::invalid_argument("patience must be positive");
    if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("factor must lie in (0, 1)");
}

PlateauScheduler::Decision PlateauScheduler::step(double metric) {
    if (!std::isfinite(metric)) throw std::invalid_argument("scheduler metric is not finite");
    Decision d{lr_, stopped_, false, false};
    if (stopped_) return d;
    const bool better = direction_ == Direction::minimize ? metric < best_ : metric > best_;
    if (better) {
        best_ = metric;
        since_improve_ = 0;
        d.improved = true;
    } else if (++since_improve_ >= patience_) {
        lr_ *= factor_;
        since_improve_ = 0;
        ++halvings_;
        d.halved = true;
        if (lr_ < floor_) stopped_ = true;
    }
    d.lr = lr_;
    d.stop = stopped_;
    return d;
}

}  // namespace tfuse
