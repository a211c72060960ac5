// Central finite-difference gradient checking, independent of any backward
// implementation: the oracle only needs a scalar loss as a function of a
// parameter vector.

#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace hawknet::testsupport {

constexpr double kFdEpsilon = 1e-5;

// max over components of |analytic - central difference| / max(1, |a|, |fd|)
inline double max_relative_gradient_error(std::span<double> params,
                                          std::span<const double> analytic,
                                          const std::function<double()>& loss,
                                          double eps = kFdEpsilon) {
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + eps;
        const double up = loss();
        params[i] = saved - eps;
        const double down = loss();
        params[i] = saved;
        const double fd = (up - down) / (2.0 * eps);
        const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(fd)});
        worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
    }
    return worst;
}

}  // namespace hawknet::testsupport
