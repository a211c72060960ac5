// He initialization: zero-mean normal draws with variance 2 / fan_in.
// Biases are initialized to zero by the layers themselves.

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "hawknet/rng.hpp"

namespace hawknet::nn {

inline void he_initialize(std::span<double> out, std::size_t fan_in, Rng& rng) {
    if (fan_in < 1) throw std::invalid_argument("he_initialize: fan_in must be >= 1");
    const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : out) v = sd * rng.normal();
}

}  // namespace hawknet::nn
