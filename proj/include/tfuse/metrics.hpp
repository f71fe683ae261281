#pragma once

#include <cstddef>
#include <vector>

#include "tfuse/model.hpp"
#include "tfuse/tensor.hpp"

namespace tfuse {

// Regression: mean |pred - target|. Multilabel: mean binary cross-entropy
// of logits. Shapes must hold the same number of entries.
double loss_value(TaskKind task, const Tensor& pred, const Tensor& target);

double mean_absolute_error(const Tensor& pred, const Tensor& target);

struct ApResult {
    double mean = 0.0;
    std::vector<double> per_label;           // NaN for skipped labels
    std::vector<std::size_t> skipped_labels;  // labels without any positive
};

// Mean over labels of average precision. For each label the items are
// ranked by descending score (ties keep index order) and AP is
// sum_k precision@k * (recall@k - recall@(k-1)). scores and labels are
// (items x labels); labels are 0/1. Throws if no label has a positive.
ApResult metric_ap(const Tensor& scores, const Tensor& labels);

}  // namespace tfuse
