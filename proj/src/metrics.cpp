#include "octmesh/metrics.hpp"

#include <stdexcept>

namespace octmesh {

BinaryMetrics binary_metrics(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw std::logic_error("metrics need equally sized, non-empty label vectors");
    long tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1)
            (predicted[i] == 1 ? tp : fn) += 1;
        else
            (predicted[i] == 0 ? tn : fp) += 1;
    }
    BinaryMetrics m;
    m.accuracy = double(tp + tn) / double(truth.size());
    if (tp + fn > 0) m.sensitivity = double(tp) / double(tp + fn);
    if (tn + fp > 0) m.specificity = double(tn) / double(tn + fp);
    return m;
}

double mean_iou(const std::vector<int>& predicted, const std::vector<int>& truth, int n_classes) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw std::logic_error("metrics need equally sized, non-empty label vectors");
    double sum = 0;
    int counted = 0;
    for (int c = 0; c < n_classes; ++c) {
        long inter = 0, uni = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool a = predicted[i] == c, b = truth[i] == c;
            inter += a && b;
            uni += a || b;
        }
        if (uni == 0) continue;
        sum += double(inter) / double(uni);
        ++counted;
    }
    return counted == 0 ? 0.0 : sum / counted;
}

}  // namespace octmesh
