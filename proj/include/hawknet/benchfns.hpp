// Catalog of classical unimodal and multimodal benchmark objectives.
//
// Every function is dimension-parameterized, bounded, and minimized. Where a
// global optimum is known the catalog records both its location and value, and
// the self-check in the test suite verifies evaluate(location) == value. The
// quartic function carries additive uniform noise and takes the caller's RNG,
// so runs stay reproducible under a fixed seed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawknet/linalg.hpp"
#include "hawknet/rng.hpp"

namespace hawknet::bench {

enum class Modality { unimodal, multimodal };

inline const char* to_string(Modality m) {
    return m == Modality::unimodal ? "unimodal" : "multimodal";
}

struct ObjectiveFunction {
    std::string id;
    int dim = 0;
    Vec lower;  // per-dimension bounds, lower[i] < upper[i]
    Vec upper;
    std::optional<double> known_optimum;
    std::optional<Vec> optimum_location;
    Modality modality = Modality::unimodal;
    // Noise-free functions ignore the rng argument.
    std::function<double(std::span<const double>, Rng*)> fn;

    bool in_bounds(std::span<const double> x) const {
        for (int i = 0; i < dim; ++i)
            if (x[i] < lower[i] || x[i] > upper[i]) return false;
        return true;
    }
};

struct Evaluation {
    double value = 0.0;
    bool in_bounds = true;
};

inline double evaluate(const ObjectiveFunction& f, std::span<const double> x, Rng* rng = nullptr) {
    if (static_cast<int>(x.size()) != f.dim)
        throw std::invalid_argument("evaluate: position has dimension " + std::to_string(x.size()) +
                                    ", objective '" + f.id + "' expects " + std::to_string(f.dim));
    return f.fn(x, rng);
}

// Out-of-bounds probes are legal (optimizers test before clamping); the flag
// tells the caller the value came from outside the box.
inline Evaluation evaluate_flagged(const ObjectiveFunction& f, std::span<const double> x,
                                   Rng* rng = nullptr) {
    return {evaluate(f, x, rng), f.in_bounds(x)};
}

namespace detail {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Stationary point of x*sin(sqrt(x)) near 421; the pair below is consistent
// to full double precision so the shifted Schwefel 2.26 evaluates to ~0 there.
constexpr double kSchwefelArg = 420.96874635998205;
constexpr double kSchwefelOffset = 418.98288727243369;

inline double sphere(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

inline double sum_squares(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<double>(i + 1) * x[i] * x[i];
    return s;
}

inline double schwefel_222(std::span<const double> x) {
    double s = 0.0, p = 1.0;
    for (double v : x) {
        s += std::abs(v);
        p *= std::abs(v);
    }
    return s + p;
}

inline double schwefel_12(std::span<const double> x) {
    double s = 0.0, prefix = 0.0;
    for (double v : x) {
        prefix += v;
        s += prefix * prefix;
    }
    return s;
}

inline double schwefel_221(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

inline double rosenbrock(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = x[i] - 1.0;
        s += 100.0 * a * a + b * b;
    }
    return s;
}

inline double step(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
        const double t = std::floor(v + 0.5);
        s += t * t;
    }
    return s;
}

inline double quartic_noise(std::span<const double> x, Rng* rng) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += static_cast<double>(i + 1) * x[i] * x[i] * x[i] * x[i];
    return s + (rng ? rng->uniform() : 0.0);
}

inline double schwefel_226(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += kSchwefelOffset - v * std::sin(std::sqrt(std::abs(v)));
    return s;
}

inline double rastrigin(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v - 10.0 * std::cos(kTwoPi * v) + 10.0;
    return s;
}

inline double ackley(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    double sq = 0.0, cs = 0.0;
    for (double v : x) {
        sq += v * v;
        cs += std::cos(kTwoPi * v);
    }
    return -20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 + std::numbers::e;
}

inline double griewank(std::span<const double> x) {
    double s = 0.0, p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += x[i] * x[i];
        p *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
    }
    return s / 4000.0 - p + 1.0;
}

inline double penalty_u(double v, double a, double k, double m) {
    if (v > a) return k * std::pow(v - a, m);
    if (v < -a) return k * std::pow(-v - a, m);
    return 0.0;
}

inline double penalized_1(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    auto y = [&](std::size_t i) { return 1.0 + (x[i] + 1.0) / 4.0; };
    double s = 10.0 * std::pow(std::sin(std::numbers::pi * y(0)), 2.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double yi = y(i) - 1.0;
        s += yi * yi * (1.0 + 10.0 * std::pow(std::sin(std::numbers::pi * y(i + 1)), 2.0));
    }
    const double yn = y(x.size() - 1) - 1.0;
    s += yn * yn;
    s *= std::numbers::pi / n;
    for (double v : x) s += penalty_u(v, 10.0, 100.0, 4.0);
    return s;
}

inline double penalized_2(std::span<const double> x) {
    double s = std::pow(std::sin(3.0 * std::numbers::pi * x[0]), 2.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double xi = x[i] - 1.0;
        s += xi * xi * (1.0 + std::pow(std::sin(3.0 * std::numbers::pi * x[i + 1]), 2.0));
    }
    const double xn = x[x.size() - 1] - 1.0;
    s += xn * xn * (1.0 + std::pow(std::sin(kTwoPi * x[x.size() - 1]), 2.0));
    s *= 0.1;
    for (double v : x) s += penalty_u(v, 5.0, 100.0, 4.0);
    return s;
}

inline double alpine(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::abs(v * std::sin(v) + 0.1 * v);
    return s;
}

inline double sum_powers(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += std::pow(std::abs(x[i]), static_cast<double>(i + 2));
    return s;
}

inline double zakharov(std::span<const double> x) {
    double sq = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sq += x[i] * x[i];
        lin += 0.5 * static_cast<double>(i + 1) * x[i];
    }
    return sq + lin * lin + lin * lin * lin * lin;
}

inline ObjectiveFunction make(std::string id, int dim, double lo, double hi, Modality mod,
                              std::optional<double> fstar, std::optional<double> xstar,
                              std::function<double(std::span<const double>, Rng*)> fn) {
    ObjectiveFunction f;
    f.id = std::move(id);
    f.dim = dim;
    f.lower.assign(static_cast<std::size_t>(dim), lo);
    f.upper.assign(static_cast<std::size_t>(dim), hi);
    f.known_optimum = fstar;
    if (xstar) f.optimum_location = Vec(static_cast<std::size_t>(dim), *xstar);
    f.modality = mod;
    f.fn = std::move(fn);
    return f;
}

inline auto pure(double (*g)(std::span<const double>)) {
    return [g](std::span<const double> x, Rng*) { return g(x); };
}

}  // namespace detail

// All entries of the suite at a given dimension. Contains ten unimodal and
// seven multimodal functions; quartic has no exact optimum value because of
// its additive noise term.
inline std::vector<ObjectiveFunction> suite_catalog(int dim) {
    if (dim < 1) throw std::invalid_argument("suite_catalog: dim must be >= 1");
    using namespace detail;
    const auto U = Modality::unimodal;
    const auto M = Modality::multimodal;
    std::vector<ObjectiveFunction> fns;
    fns.push_back(make("sphere", dim, -100.0, 100.0, U, 0.0, 0.0, pure(sphere)));
    fns.push_back(make("schwefel222", dim, -10.0, 10.0, U, 0.0, 0.0, pure(schwefel_222)));
    fns.push_back(make("schwefel12", dim, -100.0, 100.0, U, 0.0, 0.0, pure(schwefel_12)));
    fns.push_back(make("schwefel221", dim, -100.0, 100.0, U, 0.0, 0.0, pure(schwefel_221)));
    fns.push_back(make("rosenbrock", dim, -30.0, 30.0, U, 0.0, 1.0, pure(rosenbrock)));
    fns.push_back(make("step", dim, -100.0, 100.0, U, 0.0, 0.0, pure(step)));
    fns.push_back(make("quartic", dim, -1.28, 1.28, U, std::nullopt, 0.0,
                       [](std::span<const double> x, Rng* r) { return quartic_noise(x, r); }));
    fns.push_back(make("sumsquares", dim, -10.0, 10.0, U, 0.0, 0.0, pure(sum_squares)));
    fns.push_back(make("zakharov", dim, -5.0, 10.0, U, 0.0, 0.0, pure(zakharov)));
    fns.push_back(make("schwefel226", dim, -500.0, 500.0, M, 0.0, kSchwefelArg, pure(schwefel_226)));
    fns.push_back(make("rastrigin", dim, -5.12, 5.12, M, 0.0, 0.0, pure(rastrigin)));
    fns.push_back(make("ackley", dim, -32.0, 32.0, M, 0.0, 0.0, pure(ackley)));
    fns.push_back(make("griewank", dim, -600.0, 600.0, M, 0.0, 0.0, pure(griewank)));
    fns.push_back(make("penalized1", dim, -50.0, 50.0, M, 0.0, -1.0, pure(penalized_1)));
    fns.push_back(make("penalized2", dim, -50.0, 50.0, M, 0.0, 1.0, pure(penalized_2)));
    fns.push_back(make("alpine", dim, -10.0, 10.0, M, 0.0, 0.0, pure(alpine)));
    fns.push_back(make("sumpowers", dim, -1.0, 1.0, U, 0.0, 0.0, pure(sum_powers)));
    return fns;
}

inline const ObjectiveFunction& find_function(const std::vector<ObjectiveFunction>& suite,
                                              const std::string& id) {
    for (const auto& f : suite)
        if (f.id == id) return f;
    throw std::invalid_argument("unknown objective function: " + id);
}

}  // namespace hawknet::bench
