// Softmax, class-frequency weights and the weighted cross-entropy loss.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "hawknet/linalg.hpp"

namespace hawknet::nn {

inline constexpr double kLogClamp = 1e-12;

inline Vec softmax(std::span<const double> logits) {
    Vec y(logits.size());
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        y[j] = std::exp(logits[j] - m);
        z += y[j];
    }
    for (double& v : y) v /= z;
    return y;
}

// d(loss)/d(logits) given y = softmax(logits) and dy = d(loss)/dy.
inline Vec softmax_backward(std::span<const double> y, std::span<const double> dy) {
    const double s = dot(y, dy);
    Vec da(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) da[j] = y[j] * (dy[j] - s);
    return da;
}

struct ClassWeights {
    Vec weights;
    bool has_empty_class = false;
};

// w_j = 1 - n_j / N. For two classes this sums to 1 already; for more classes
// the weights are rescaled so the sum stays 1. Classes with zero samples get
// flagged (their pre-normalization weight is 1).
inline ClassWeights class_weights(std::span<const long> counts) {
    if (counts.size() < 2) throw std::invalid_argument("class_weights: need >= 2 classes");
    long total = 0;
    for (long c : counts) {
        if (c < 0) throw std::invalid_argument("class_weights: counts must be >= 0");
        total += c;
    }
    if (total == 0) throw std::invalid_argument("class_weights: total count must be > 0");

    ClassWeights out;
    out.weights.resize(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) {
        out.weights[j] = 1.0 - static_cast<double>(counts[j]) / static_cast<double>(total);
        if (counts[j] == 0) out.has_empty_class = true;
    }
    if (counts.size() > 2) {
        const double sum = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
        for (double& w : out.weights) w /= sum;
    }
    return out;
}

// -sum_j w_j T_j log(p_j), with the log argument clamped at 1e-12.
inline double weighted_cross_entropy(std::span<const double> p, std::span<const double> target,
                                     std::span<const double> w) {
    if (p.size() != target.size() || p.size() != w.size())
        throw std::invalid_argument("weighted_cross_entropy: size mismatch");
    double psum = 0.0;
    for (double v : p) {
        if (v < 0.0) throw std::invalid_argument("weighted_cross_entropy: p must be >= 0");
        psum += v;
    }
    if (std::abs(psum - 1.0) > 1e-6)
        throw std::invalid_argument("weighted_cross_entropy: p must sum to 1");
    double loss = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
        if (target[j] != 0.0) loss -= w[j] * target[j] * std::log(std::max(p[j], kLogClamp));
    return loss;
}

// Partial derivatives w.r.t. p, treating the components as free variables
// (zero below the clamp, matching the loss exactly).
inline Vec weighted_cross_entropy_grad(std::span<const double> p, std::span<const double> target,
                                       std::span<const double> w) {
    Vec g(p.size(), 0.0);
    for (std::size_t j = 0; j < p.size(); ++j)
        if (target[j] != 0.0 && p[j] > kLogClamp) g[j] = -w[j] * target[j] / p[j];
    return g;
}

}  // namespace hawknet::nn
