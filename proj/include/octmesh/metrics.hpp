#pragma once

#include <optional>
#include <vector>

namespace octmesh {

// Binary classification metrics over classes {0, 1}; class 1 is positive.
// Sensitivity/specificity are absent (not zero) when their denominator is
// empty.
struct BinaryMetrics {
    double accuracy = 0.0;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
};

BinaryMetrics binary_metrics(const std::vector<int>& predicted, const std::vector<int>& truth);

// Mean per-class intersection-over-union; classes absent from both prediction
// and truth are skipped.
double mean_iou(const std::vector<int>& predicted, const std::vector<int>& truth, int n_classes);

}  // namespace octmesh
