// Hyperparameter search over (initial learning rate, learning-rate drop
// factor, dropout probability) driven by the hho_plus optimizer.
//
// Each hawk is a 3-vector: log10 of the learning rate, the drop factor and
// the dropout probability. Fitness is the validation weighted cross-entropy
// averaged over R training repetitions on a fixed stratified train/validation
// split; the repetition seeds are fixed, so fitness is a pure function of the
// position and re-evaluating a comparison point shares the same random
// numbers. A training run that diverges contributes a large finite penalty
// instead of aborting the search.

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "hawknet/benchfns.hpp"
#include "hawknet/optimizer.hpp"
#include "hawknet/pipeline/train.hpp"

namespace hawknet::pipeline {

struct HpoSpace {
    double log10_ilr_lo = -5.0, log10_ilr_hi = -1.0;
    double lrdf_lo = 0.1, lrdf_hi = 1.0;
    double dp_lo = 0.0, dp_hi = 0.8;

    TrainingHyperparameters midpoint(const TrainingHyperparameters& base) const {
        TrainingHyperparameters h = base;
        h.ilr = std::pow(10.0, 0.5 * (log10_ilr_lo + log10_ilr_hi));
        h.lrdf = 0.5 * (lrdf_lo + lrdf_hi);
        h.dp = 0.5 * (dp_lo + dp_hi);
        return h;
    }
};

struct HpoConfig {
    int population = 6;
    int iterations = 5;
    int repeats = 3;
    std::uint64_t seed = 0;
    // Budget for each fitness evaluation; max_training_iterations here is the
    // reduced per-repetition budget, independent of the final training run.
    TrainingHyperparameters train_base;
};

struct HpoTraceRow {
    int iteration = 0;  // 0 for the initial population
    int hawk = 0;
    double ilr = 0.0, lrdf = 0.0, dp = 0.0;
    double fitness = 0.0;
};

struct HpoResult {
    TrainingHyperparameters best;
    double best_fitness = 0.0;
    std::vector<HpoTraceRow> trace;
    opt::RunRecord record;
};

// The fixed stratified 90/10 train/validation split used by every fitness
// evaluation of a search seeded with `seed`.
inline std::pair<std::vector<int>, std::vector<int>> hpo_split(const LabeledDataset& ds,
                                                               std::uint64_t seed) {
    std::vector<int> all(ds.labels.size());
    std::iota(all.begin(), all.end(), 0);
    Rng split_rng(derive_seed(seed, 0x73706c74ULL));
    return detail::stratified_split(ds, all, 0.10, split_rng);
}

inline TrainingHyperparameters hyper_from_position(std::span<const double> x,
                                                   const TrainingHyperparameters& base) {
    TrainingHyperparameters h = base;
    h.ilr = std::pow(10.0, x[0]);
    h.lrdf = x[1];
    h.dp = x[2];
    return h;
}

// Average validation loss of `hyper` over the configured repetitions, on the
// same split and repetition seeds used by the search itself.
inline double evaluate_hyper(const nn::NetworkSpec& spec, const LabeledDataset& ds,
                             std::span<const int> train_idx, std::span<const int> val_idx,
                             const TrainingHyperparameters& hyper, int repeats,
                             std::uint64_t seed) {
    double acc = 0.0;
    for (int r = 0; r < repeats; ++r) {
        try {
            auto model = train_network(spec, ds, train_idx, hyper,
                                       derive_seed(seed, 0x686f7072ULL,
                                                   static_cast<std::uint64_t>(r)));
            if (model.failed) {
                acc += 1e9;
                continue;
            }
            const double loss =
                dataset_loss(model.net, ds, val_idx, model.class_weight, spec.classes);
            acc += std::isfinite(loss) ? loss : 1e9;
        } catch (const std::exception&) {
            acc += 1e9;
        }
    }
    return acc / static_cast<double>(repeats);
}

inline HpoResult hpo_search(const HpoSpace& space, const nn::NetworkSpec& spec,
                            const LabeledDataset& ds, const HpoConfig& cfg) {
    const auto [train_idx, val_idx] = hpo_split(ds, cfg.seed);

    bench::ObjectiveFunction objective;
    objective.id = "hpo_validation_loss";
    objective.dim = 3;
    objective.lower = {space.log10_ilr_lo, space.lrdf_lo, space.dp_lo};
    objective.upper = {space.log10_ilr_hi, space.lrdf_hi, space.dp_hi};
    objective.modality = bench::Modality::multimodal;
    objective.fn = [&](std::span<const double> x, Rng*) {
        return evaluate_hyper(spec, ds, train_idx, val_idx,
                              hyper_from_position(x, cfg.train_base), cfg.repeats, cfg.seed);
    };

    opt::OptimizerConfig oc;
    oc.population_size = cfg.population;
    oc.max_iterations = cfg.iterations;
    oc.seed = cfg.seed;
    oc.algorithm = opt::Algorithm::hho_plus;

    HpoResult result;
    auto observer = [&](int iteration, int hawk, std::span<const double> x, double fitness) {
        result.trace.push_back(HpoTraceRow{iteration + 1, hawk, std::pow(10.0, x[0]), x[1], x[2],
                                           fitness});
    };
    result.record = opt::run(objective, oc, observer);
    result.best = hyper_from_position(result.record.final_position, cfg.train_base);
    result.best_fitness = result.record.final_fitness;
    return result;
}

}  // namespace hawknet::pipeline
