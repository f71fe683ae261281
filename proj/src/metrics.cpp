#include "tfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tfuse {

double mean_absolute_error(const Tensor& pred, const Tensor& target) {
    if (pred.size() != target.size()) {
        throw std::invalid_argument("mae: " + shape_str(pred.shape()) + " vs " + shape_str(target.shape()));
    }
    if (pred.size() == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
    return s / static_cast<double>(pred.size());
}

double loss_value(TaskKind task, const Tensor& pred, const Tensor& target) {
    if (task == TaskKind::regression) return mean_absolute_error(pred, target);
    if (pred.size() != target.size()) {
        throw std::invalid_argument("bce: " + shape_str(pred.shape()) + " vs " + shape_str(target.shape()));
    }
    if (pred.size() == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double z = pred[i];
        s += std::max(z, 0.0) - z * target[i] + std::log1p(std::exp(-std::abs(z)));
    }
    return s / static_cast<double>(pred.size());
}

ApResult metric_ap(const Tensor& scores, const Tensor& labels) {
    if (scores.shape() != labels.shape() || scores.rank() != 2) {
        throw std::invalid_argument("metric_ap: " + shape_str(scores.shape()) + " vs " + shape_str(labels.shape()));
    }
    const std::size_t n = scores.rows(), num_labels = scores.cols();
    ApResult r;
    r.per_label.assign(num_labels, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::size_t> order(n);
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t l = 0; l < num_labels; ++l) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return scores(a, l) > scores(b, l); });
        std::size_t positives = 0;
        for (std::size_t i = 0; i < n; ++i) positives += labels(i, l) > 0.5;
        if (positives == 0) {
            r.skipped_labels.push_back(l);
            continue;
        }
        // Step-wise sum of precision times the recall increment at each rank.
        const double p = static_cast<double>(positives);
        std::size_t hits = 0;
        double ap = 0.0, prev_recall = 0.0;
        for (std::size_t rank = 0; rank < n; ++rank) {
            hits += labels(order[rank], l) > 0.5;
            const double precision = static_cast<double>(hits) / static_cast<double>(rank + 1);
            const double recall = static_cast<double>(hits) / p;
            ap += precision * (recall - prev_recall);
            prev_recall = recall;
        }
        r.per_label[l] = ap;
        total += r.per_label[l];
        ++used;
    }
    if (used == 0) throw std::invalid_argument("metric_ap: no label has a positive example");
    r.mean = total / static_cast<double>(used);
    return r;
}

}  // namespace tfuse
