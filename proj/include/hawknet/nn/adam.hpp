// Adam with bias-corrected first and second moments.

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "hawknet/linalg.hpp"

namespace hawknet::nn {

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamMoments {
    Vec m;
    Vec v;
    long step_count = 0;

    explicit AdamMoments(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(std::span<double> params, std::span<const double> grads,
                      AdamMoments& moments, const AdamHyper& hyper) {
    if (params.size() != grads.size() || params.size() != moments.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    ++moments.step_count;
    const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(moments.step_count));
    const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(moments.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        moments.m[i] = hyper.beta1 * moments.m[i] + (1.0 - hyper.beta1) * g;
        moments.v[i] = hyper.beta2 * moments.v[i] + (1.0 - hyper.beta2) * g * g;
        const double m_hat = moments.m[i] / c1;
        const double v_hat = moments.v[i] / c2;
        params[i] -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
    }
}

}  // namespace hawknet::nn
