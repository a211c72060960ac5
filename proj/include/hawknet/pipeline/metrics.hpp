// Confusion matrix bookkeeping and the three classification metrics.
// Abnormal is the positive class. Counts stay in integer arithmetic until the
// final division; a metric with a zero denominator is reported as absent
// rather than zero.

#pragma once

#include <optional>
#include <span>
#include <stdexcept>

namespace hawknet::pipeline {

struct ConfusionMatrix {
    long tp = 0;  // abnormal classified abnormal
    long tn = 0;  // normal classified normal
    long fp = 0;  // normal classified abnormal
    long fn = 0;  // abnormal classified normal

    long total() const { return tp + tn + fp + fn; }
};

inline ConfusionMatrix confusion_from_predictions(std::span<const int> predictions,
                                                  std::span<const int> labels) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("confusion_from_predictions: size mismatch");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred_abn = predictions[i] == 1;
        const bool is_abn = labels[i] == 1;
        if (is_abn)
            (pred_abn ? cm.tp : cm.fn) += 1;
        else
            (pred_abn ? cm.fp : cm.tn) += 1;
    }
    return cm;
}

struct Metrics {
    std::optional<double> accuracy;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
};

inline Metrics confusion_metrics(const ConfusionMatrix& cm) {
    Metrics m;
    const long total = cm.total();
    if (total > 0)
        m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
    if (cm.tp + cm.fn > 0)
        m.sensitivity = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (cm.tn + cm.fp > 0)
        m.specificity = static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
    return m;
}

}  // namespace hawknet::pipeline
