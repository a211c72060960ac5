// Synthetic pulsatile signal generator: a reproducible stand-in dataset.
//
// Per subject it produces paired pressure and flow waveforms: the pressure
// carries a cardiac harmonic, a respiratory modulation and noise around a
// per-segment baseline, and the flow tracks the pressure baseline through a
// monotone map with a small per-subject gain, so the label is recoverable
// from the flow alone. Baselines are drawn per segment from disjoint normal /
// abnormal ranges to hit a requested abnormal fraction.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hawknet/linalg.hpp"
#include "hawknet/pipeline/signal.hpp"
#include "hawknet/rng.hpp"

namespace hawknet::pipeline {

struct SignalRecord {
    Vec flow;   // L/min
    Vec pawp;   // mmHg
    double fs = 50.0;
    int subject_id = 0;
};

struct SyntheticDataset {
    std::vector<SignalRecord> records;
    std::vector<int> intended_labels;  // per segment, subject-major; 1 = abnormal
    double label_recovery_rate = 0.0;  // fraction recovered by the labeling pipeline
};

struct SyntheticConfig {
    int n_subjects = 25;
    int segments_per_subject = 72;
    double abnormal_fraction = 459.0 / 1797.0;
    std::uint64_t seed = 0;
    std::size_t segment_length = 300;
    double fs = 50.0;
    double noise_sd = 0.25;
};

inline SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.abnormal_fraction < 0.0 || cfg.abnormal_fraction > 1.0)
        throw std::invalid_argument("generate_synthetic: abnormal_fraction must be in [0,1]");
    if (cfg.n_subjects < 1 || cfg.segments_per_subject < 1)
        throw std::invalid_argument("generate_synthetic: need subjects and segments >= 1");

    const int total = cfg.n_subjects * cfg.segments_per_subject;
    const int n_abnormal = static_cast<int>(std::lround(cfg.abnormal_fraction * total));

    Rng assign_rng(derive_seed(cfg.seed, 0x61737369ULL));
    std::vector<int> labels(static_cast<std::size_t>(total), 0);
    for (int i = 0; i < n_abnormal; ++i) labels[static_cast<std::size_t>(i)] = 1;
    assign_rng.shuffle(labels);

    SyntheticDataset out;
    out.intended_labels = labels;
    out.records.reserve(static_cast<std::size_t>(cfg.n_subjects));

    const std::size_t seg_len = cfg.segment_length;
    int recovered = 0;

    for (int s = 0; s < cfg.n_subjects; ++s) {
        Rng rng(derive_seed(cfg.seed, 0x73756266ULL, static_cast<std::uint64_t>(s)));
        SignalRecord rec;
        rec.subject_id = s;
        rec.fs = cfg.fs;
        rec.flow.reserve(seg_len * cfg.segments_per_subject);
        rec.pawp.reserve(seg_len * cfg.segments_per_subject);

        const double gain = rng.uniform(0.95, 1.05);
        const double f_cardiac = rng.uniform(1.05, 1.35);
        const double f_resp = rng.uniform(0.2, 0.3);
        const double phase_c = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double phase_r = rng.uniform(0.0, 2.0 * std::numbers::pi);

        for (int g = 0; g < cfg.segments_per_subject; ++g) {
            const int label = labels[static_cast<std::size_t>(s * cfg.segments_per_subject + g)];
            double baseline;
            if (label == 1) {
                baseline = rng.uniform() < 0.5 ? rng.uniform(3.0, 6.5) : rng.uniform(17.5, 26.0);
            } else {
                baseline = rng.uniform(9.5, 14.5);
            }
            for (std::size_t k = 0; k < seg_len; ++k) {
                const double t =
                    static_cast<double>(g * seg_len + k) / cfg.fs;  // continuous subject time
                const double cardiac = std::sin(2.0 * std::numbers::pi * f_cardiac * t + phase_c);
                const double resp = std::sin(2.0 * std::numbers::pi * f_resp * t + phase_r);
                rec.pawp.push_back(baseline + 1.8 * cardiac + 0.8 * resp +
                                   cfg.noise_sd * rng.normal());
                rec.flow.push_back(1.5 + 0.22 * gain * baseline +
                                   0.8 * std::sin(2.0 * std::numbers::pi * f_cardiac * t +
                                                  phase_c - 0.3) +
                                   0.6 * cfg.noise_sd * rng.normal());
            }
        }

        // Self-check: does the labeling pipeline recover the intended labels?
        const Vec filtered = butterworth_lowpass(rec.pawp, cfg.fs);
        const auto segs = segment(filtered, seg_len);
        for (std::size_t g = 0; g < segs.size(); ++g) {
            const auto lab = label_segment(segs[g], 8.0, 16.0, cfg.fs);
            const int intended = labels[static_cast<std::size_t>(s) * cfg.segments_per_subject + g];
            if ((lab.abnormal ? 1 : 0) == intended) ++recovered;
        }
        out.records.push_back(std::move(rec));
    }

    out.label_recovery_rate = static_cast<double>(recovered) / static_cast<double>(total);
    return out;
}

// The classifier-facing dataset: filtered flow segments labeled through the
// pressure channel.
struct LabeledDataset {
    std::vector<Vec> segments;  // filtered flow, one window per row
    std::vector<int> labels;    // 1 = abnormal (positive class)
    Vec mean_pawp;
    std::vector<int> subject_ids;
    std::size_t segment_length = 300;
};

inline LabeledDataset make_labeled_dataset(const std::vector<SignalRecord>& records,
                                           std::size_t segment_length = 300, double low = 8.0,
                                           double high = 16.0) {
    LabeledDataset ds;
    ds.segment_length = segment_length;
    for (const auto& rec : records) {
        const Vec flow_f = butterworth_lowpass(rec.flow, rec.fs);
        const Vec pawp_f = butterworth_lowpass(rec.pawp, rec.fs);
        const auto flow_segs = segment(flow_f, segment_length);
        const auto pawp_segs = segment(pawp_f, segment_length);
        for (std::size_t g = 0; g < flow_segs.size(); ++g) {
            const auto lab = label_segment(pawp_segs[g], low, high, rec.fs);
            ds.segments.push_back(flow_segs[g]);
            ds.labels.push_back(lab.abnormal ? 1 : 0);
            ds.mean_pawp.push_back(lab.mean_pawp);
            ds.subject_ids.push_back(rec.subject_id);
        }
    }
    return ds;
}

}  // namespace hawknet::pipeline
