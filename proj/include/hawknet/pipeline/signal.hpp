// Signal preprocessing: zero-phase Butterworth low-pass filtering, fixed-width
// segmentation, and beat-aligned segment labeling.
//
// The filter is a bilinear-transform Butterworth (default order 4, -3 dB point
// at the edge frequency) applied forward and backward. Each pass starts from
// the steady-state of a step with the edge sample's value and the signal is
// extended by odd reflection, so constants pass through at machine precision
// and edge transients stay out of the kept samples.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "hawknet/linalg.hpp"

namespace hawknet::pipeline {

struct FilterCoefficients {
    Vec b;  // numerator, b[0..order]
    Vec a;  // denominator, a[0] == 1
};

// Cascade of biquads from the Butterworth polynomial, combined into one
// direct-form transfer function. Order must be even.
inline FilterCoefficients butterworth_lowpass_coefficients(int order, double f_edge, double fs) {
    if (order < 2 || order % 2 != 0)
        throw std::invalid_argument("butterworth: order must be even and >= 2");
    if (!(f_edge > 0.0) || !(f_edge < 0.5 * fs))
        throw std::invalid_argument("butterworth: need 0 < f_edge < fs/2");

    const double K = std::tan(std::numbers::pi * f_edge / fs);
    Vec b{1.0}, a{1.0};
    auto convolve = [](const Vec& p, const Vec& q) {
        Vec r(p.size() + q.size() - 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
        return r;
    };
    for (int k = 1; k <= order / 2; ++k) {
        const double c = 2.0 * std::sin(std::numbers::pi * (2.0 * k - 1.0) / (2.0 * order));
        const double d = 1.0 + c * K + K * K;
        const Vec bq{K * K / d, 2.0 * K * K / d, K * K / d};
        const Vec aq{1.0, (2.0 * K * K - 2.0) / d, (1.0 - c * K + K * K) / d};
        b = convolve(b, bq);
        a = convolve(a, aq);
    }
    return {b, a};
}

// Direct form II transposed with explicit initial state.
inline Vec lfilter(const FilterCoefficients& c, std::span<const double> x, const Vec& zi) {
    const std::size_t order = c.a.size() - 1;
    Vec z = zi;
    z.resize(order, 0.0);
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double yi = c.b[0] * x[i] + z[0];
        for (std::size_t k = 0; k + 1 < order; ++k)
            z[k] = c.b[k + 1] * x[i] - c.a[k + 1] * yi + z[k + 1];
        z[order - 1] = c.b[order] * x[i] - c.a[order] * yi;
        y[i] = yi;
    }
    return y;
}

// Steady-state filter state for a unit step input (direct form II transposed
// has the closed form z[k] = sum_{j>k} (b[j] - a[j])).
inline Vec lfilter_step_state(const FilterCoefficients& c) {
    const std::size_t order = c.a.size() - 1;
    Vec z(order, 0.0);
    for (std::size_t k = order; k-- > 0;)
        z[k] = (k + 1 < order ? z[k + 1] : 0.0) + c.b[k + 1] - c.a[k + 1];
    return z;
}

// Forward-backward (zero phase) filtering with odd edge reflection.
inline Vec filtfilt(const FilterCoefficients& c, std::span<const double> x) {
    const std::size_t order = c.a.size() - 1;
    const std::size_t pad = std::min(x.size() - 1, 3 * (order + 1));
    if (x.size() < 2) return Vec(x.begin(), x.end());

    Vec ext;
    ext.reserve(x.size() + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[x.size() - 1] - x[x.size() - 1 - i]);

    const Vec step = lfilter_step_state(c);
    auto scaled = [&](double v) {
        Vec z = step;
        for (double& s : z) s *= v;
        return z;
    };

    Vec y = lfilter(c, ext, scaled(ext.front()));
    std::reverse(y.begin(), y.end());
    y = lfilter(c, y, scaled(y.front()));
    std::reverse(y.begin(), y.end());
    return Vec(y.begin() + static_cast<std::ptrdiff_t>(pad),
               y.begin() + static_cast<std::ptrdiff_t>(pad + x.size()));
}

inline Vec butterworth_lowpass(std::span<const double> signal, double fs, double f_edge = 15.0,
                               int order = 4) {
    return filtfilt(butterworth_lowpass_coefficients(order, f_edge, fs), signal);
}

// Consecutive non-overlapping windows; the trailing remainder is discarded.
// A signal shorter than one window yields no segments.
inline std::vector<Vec> segment(std::span<const double> signal, std::size_t length = 300) {
    if (length < 1) throw std::invalid_argument("segment: length must be >= 1");
    std::vector<Vec> out;
    for (std::size_t start = 0; start + length <= signal.size(); start += length)
        out.emplace_back(signal.begin() + static_cast<std::ptrdiff_t>(start),
                         signal.begin() + static_cast<std::ptrdiff_t>(start + length));
    return out;
}

// Local minima with a minimum separation (deeper minimum wins a conflict).
inline std::vector<std::size_t> local_minima(std::span<const double> x,
                                             std::size_t min_separation) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (!(x[i] < x[i - 1] && x[i] <= x[i + 1])) continue;
        if (!kept.empty() && i - kept.back() < min_separation) {
            if (x[i] < x[kept.back()]) kept.back() = i;
        } else {
            kept.push_back(i);
        }
    }
    return kept;
}

struct SegmentLabel {
    double mean_pawp = 0.0;
    bool abnormal = false;
    bool fallback = false;  // fewer than two minima; whole-segment mean used
};

// Beat-aligned mean: average of all samples between the first and last
// detected minimum of the (already filtered) pressure segment. Abnormal when
// the mean falls below `low` or above `high`.
inline SegmentLabel label_segment(std::span<const double> pawp_segment, double low = 8.0,
                                  double high = 16.0, double fs = 50.0) {
    if (pawp_segment.empty()) throw std::invalid_argument("label_segment: empty segment");
    const auto minima = local_minima(pawp_segment, static_cast<std::size_t>(std::lround(0.3 * fs)));

    SegmentLabel out;
    std::size_t from = 0, to = pawp_segment.size() - 1;
    if (minima.size() >= 2) {
        from = minima.front();
        to = minima.back();
    } else {
        out.fallback = true;
    }
    double acc = 0.0;
    for (std::size_t i = from; i <= to; ++i) acc += pawp_segment[i];
    out.mean_pawp = acc / static_cast<double>(to - from + 1);
    out.abnormal = out.mean_pawp < low || out.mean_pawp > high;
    return out;
}

}  // namespace hawknet::pipeline
