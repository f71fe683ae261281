#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfuse {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Named contiguous range of the flat parameter vector, used in error
// messages.
struct ParamBlock {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
};

class NonFiniteGradient : public std::runtime_error {
public:
    explicit NonFiniteGradient(const std::string& block)
        : std::runtime_error("non-finite gradient in parameter block " + block), block_(block) {}
    const std::string& block() const { return block_; }

private:
    std::string block_;
};

struct AdamState {
    std::size_t step = 0;
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update of params in place. Gradients are checked
// for NaN/inf before anything is modified.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr,
               const AdamConfig& cfg = {}, std::span<const ParamBlock> blocks = {});

enum class Direction { minimize, maximize };

// Halves the learning rate after `patience` consecutive epochs without a
// strict improvement of the monitored metric; requests a stop once the rate
// falls below `floor`.
class PlateauScheduler {
public:
    struct Decision {
        double lr;
        bool stop;
        bool halved;
        bool improved;
    };

    PlateauScheduler(double lr, Direction direction, std::size_t patience = 25, double factor = 0.5,
                     double floor = 1e-5);

    Decision step(double metric);

    double lr() const { return lr_; }
    double best() const { return best_; }
    std::size_t epochs_since_improve() const { return since_improve_; }
    std::size_t halvings() const { return halvings_; }
    bool stopped() const { return stopped_; }

private:
    double lr_;
    Direction direction_;
    std::size_t patience_;
    double factor_;
    double floor_;
    double best_;
    std::size_t since_improve_ = 0;
    std::size_t halvings_ = 0;
    bool stopped_ = false;
};

}  // namespace tfuse
