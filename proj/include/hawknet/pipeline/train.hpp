// Cross-validated training and evaluation of the classification networks.
//
// Per fold: train on the remaining folds with 10% carved out (stratified) as
// a validation subset, optimize the class-weighted cross-entropy with Adam
// under a step-decayed learning rate, then evaluate on the held-out fold.
// The batch size defaults to one tenth of the training-set size. A fold whose
// loss goes non-finite is marked failed with a diagnostic instead of aborting
// the whole evaluation.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hawknet/nn/adam.hpp"
#include "hawknet/nn/loss.hpp"
#include "hawknet/nn/network.hpp"
#include "hawknet/pipeline/cv.hpp"
#include "hawknet/pipeline/metrics.hpp"
#include "hawknet/pipeline/synthetic.hpp"
#include "hawknet/rng.hpp"
#include "hawknet/stats.hpp"

namespace hawknet::pipeline {

struct TrainingHyperparameters {
    double ilr = 1e-3;    // initial learning rate
    double lrdf = 0.5;    // learning-rate drop factor in (0, 1]
    double dp = 0.2;      // dropout probability in [0, 1)
    int drop_period = 100;
    int batch_size = 0;   // 0 -> floor(N_train / 10), at least 2
    int max_training_iterations = 1000;
};

inline void validate(const TrainingHyperparameters& h) {
    if (!(h.ilr > 0.0)) throw std::invalid_argument("hyper: ilr must be > 0");
    if (!(h.lrdf > 0.0 && h.lrdf <= 1.0)) throw std::invalid_argument("hyper: lrdf in (0,1]");
    if (!(h.dp >= 0.0 && h.dp < 1.0)) throw std::invalid_argument("hyper: dp in [0,1)");
    if (h.drop_period < 1) throw std::invalid_argument("hyper: drop_period >= 1");
    if (h.max_training_iterations < 1) throw std::invalid_argument("hyper: iterations >= 1");
}

struct FoldOutcome {
    int fold = 0;
    ConfusionMatrix confusion;
    Metrics metrics;
    double validation_loss = std::numeric_limits<double>::quiet_NaN();
    double final_train_loss = std::numeric_limits<double>::quiet_NaN();
    bool failed = false;
    std::string diagnostic;
};

struct TrainEvalResult {
    std::vector<FoldOutcome> folds;
    stats::Summary accuracy;
    stats::Summary sensitivity;
    stats::Summary specificity;
};

namespace detail {

inline nn::Batch to_batch(const LabeledDataset& ds, std::span<const int> indices) {
    nn::Batch batch;
    batch.reserve(indices.size());
    for (int i : indices) {
        nn::Tensor t(1, static_cast<int>(ds.segment_length));
        std::copy(ds.segments[static_cast<std::size_t>(i)].begin(),
                  ds.segments[static_cast<std::size_t>(i)].end(), t.data.begin());
        batch.push_back(std::move(t));
    }
    return batch;
}

inline Vec one_hot(int label, int classes) {
    Vec t(static_cast<std::size_t>(classes), 0.0);
    t[static_cast<std::size_t>(label)] = 1.0;
    return t;
}

// Stratified carve-out: roughly `fraction` of each class moves to the second
// return value.
inline std::pair<std::vector<int>, std::vector<int>> stratified_split(
    const LabeledDataset& ds, std::span<const int> indices, double fraction, Rng& rng) {
    std::map<int, std::vector<int>> by_class;
    for (int i : indices) by_class[ds.labels[static_cast<std::size_t>(i)]].push_back(i);
    std::vector<int> kept, carved;
    for (auto& [label, idx] : by_class) {
        rng.shuffle(idx);
        const std::size_t n_carve =
            std::min(idx.size() - 1, static_cast<std::size_t>(std::ceil(fraction * idx.size())));
        carved.insert(carved.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_carve));
        kept.insert(kept.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_carve), idx.end());
    }
    std::sort(kept.begin(), kept.end());
    std::sort(carved.begin(), carved.end());
    return {kept, carved};
}

}  // namespace detail

struct TrainedModel {
    nn::Network net;
    Vec class_weight;
    double final_train_loss = 0.0;
    bool failed = false;
    std::string diagnostic;
};

// Mean class-weighted cross-entropy of a network over a labeled index set,
// inference mode.
inline double dataset_loss(nn::Network& net, const LabeledDataset& ds,
                           std::span<const int> indices, std::span<const double> weights,
                           int classes) {
    if (indices.empty()) return 0.0;
    const auto probs = net.forward(detail::to_batch(ds, indices), false);
    double acc = 0.0;
    for (std::size_t b = 0; b < probs.size(); ++b)
        acc += nn::weighted_cross_entropy(
            probs[b], detail::one_hot(ds.labels[static_cast<std::size_t>(indices[b])], classes),
            weights);
    return acc / static_cast<double>(indices.size());
}

inline TrainedModel train_network(const nn::NetworkSpec& spec, const LabeledDataset& ds,
                                  std::span<const int> train_idx,
                                  const TrainingHyperparameters& hyper, std::uint64_t seed) {
    validate(hyper);
    TrainedModel out;
    out.net = nn::Network(spec, seed);
    out.net.set_dropout(hyper.dp);

    long counts_arr[2] = {0, 0};
    for (int i : train_idx) ++counts_arr[ds.labels[static_cast<std::size_t>(i)] == 1 ? 1 : 0];
    // class 0 = normal, class 1 = abnormal; weight layout follows class index
    const auto cw = nn::class_weights(std::span<const long>(counts_arr, 2));
    out.class_weight = cw.weights;

    std::vector<std::span<double>> params, grads;
    out.net.collect_params(params, grads);
    std::vector<nn::AdamMoments> moments;
    moments.reserve(params.size());
    for (const auto& p : params) moments.emplace_back(p.size());

    const int batch_size = hyper.batch_size > 0
                               ? hyper.batch_size
                               : std::max<int>(2, static_cast<int>(train_idx.size()) / 10);

    Rng shuffle_rng(derive_seed(seed, 0x7368756600ULL));
    std::vector<int> order(train_idx.begin(), train_idx.end());
    shuffle_rng.shuffle(order);
    std::size_t cursor = 0;

    for (int iter = 0; iter < hyper.max_training_iterations; ++iter) {
        std::vector<int> batch_idx;
        batch_idx.reserve(static_cast<std::size_t>(batch_size));
        for (int b = 0; b < batch_size; ++b) {
            if (cursor == order.size()) {
                shuffle_rng.shuffle(order);
                cursor = 0;
            }
            batch_idx.push_back(order[cursor++]);
        }

        const auto probs = out.net.forward(detail::to_batch(ds, batch_idx), true);
        double loss = 0.0;
        std::vector<Vec> dy(probs.size());
        for (std::size_t b = 0; b < probs.size(); ++b) {
            const Vec target = detail::one_hot(
                ds.labels[static_cast<std::size_t>(batch_idx[b])], spec.classes);
            loss += nn::weighted_cross_entropy(probs[b], target, out.class_weight);
            dy[b] = nn::weighted_cross_entropy_grad(probs[b], target, out.class_weight);
            for (double& v : dy[b]) v /= static_cast<double>(probs.size());
        }
        loss /= static_cast<double>(probs.size());
        if (!std::isfinite(loss)) {
            out.failed = true;
            out.diagnostic = "non-finite training loss at iteration " + std::to_string(iter);
            return out;
        }
        out.final_train_loss = loss;

        out.net.zero_grads();
        out.net.backward(dy);

        nn::AdamHyper ah;
        ah.lr = hyper.ilr * std::pow(hyper.lrdf, static_cast<double>(iter / hyper.drop_period));
        for (std::size_t p = 0; p < params.size(); ++p)
            nn::adam_step(params[p], grads[p], moments[p], ah);
    }
    return out;
}

inline TrainEvalResult train_and_evaluate(const nn::NetworkSpec& spec, const LabeledDataset& ds,
                                          const FoldAssignment& folds,
                                          const TrainingHyperparameters& hyper,
                                          std::uint64_t seed) {
    TrainEvalResult result;
    Vec accs, sens, specs;

    for (std::size_t f = 0; f < folds.folds.size(); ++f) {
        FoldOutcome outcome;
        outcome.fold = static_cast<int>(f);

        const std::vector<int> trainable = folds.train_indices(f);
        Rng split_rng(derive_seed(seed, 0x76616cULL, f));
        const auto [train_idx, val_idx] = detail::stratified_split(ds, trainable, 0.10, split_rng);

        try {
            auto model = train_network(spec, ds, train_idx, hyper,
                                               derive_seed(seed, 0x666f6c64ULL, f));
            outcome.failed = model.failed;
            outcome.diagnostic = model.diagnostic;
            outcome.final_train_loss = model.final_train_loss;
            if (!model.failed) {
                outcome.validation_loss =
                    dataset_loss(model.net, ds, val_idx, model.class_weight, spec.classes);

                const auto& test_idx = folds.folds[f];
                const auto probs = model.net.forward(detail::to_batch(ds, test_idx), false);
                std::vector<int> preds(probs.size()), truth(probs.size());
                for (std::size_t b = 0; b < probs.size(); ++b) {
                    preds[b] = probs[b][1] > probs[b][0] ? 1 : 0;
                    truth[b] = ds.labels[static_cast<std::size_t>(test_idx[b])];
                }
                outcome.confusion = confusion_from_predictions(preds, truth);
                outcome.metrics = confusion_metrics(outcome.confusion);
            }
        } catch (const std::exception& e) {
            outcome.failed = true;
            outcome.diagnostic = e.what();
        }

        if (!outcome.failed) {
            if (outcome.metrics.accuracy) accs.push_back(*outcome.metrics.accuracy);
            if (outcome.metrics.sensitivity) sens.push_back(*outcome.metrics.sensitivity);
            if (outcome.metrics.specificity) specs.push_back(*outcome.metrics.specificity);
        }
        result.folds.push_back(std::move(outcome));
    }

    if (!accs.empty()) result.accuracy = stats::summarize(accs);
    if (!sens.empty()) result.sensitivity = stats::summarize(sens);
    if (!specs.empty()) result.specificity = stats::summarize(specs);
    return result;
}

}  // namespace hawknet::pipeline
