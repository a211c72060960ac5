// Population-based metaheuristics with deterministic seeded runs.
//
// Implements classical Harris hawks optimization (HHO), the extended variant
// hho_plus that adds two per-iteration candidate passes (a Gaussian position
// update gated by a decaying tanh threshold, and a quasi-opposite resampling
// pass, both refining the best-so-far record), plus two thin comparators:
// uniform random search and a grey-wolf-style baseline.
//
// Random draw layout is fixed and documented per update function so tests can
// drive branches with scripted generators. A run is single threaded; all
// parallelism belongs to the caller across independent runs.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawknet/benchfns.hpp"
#include "hawknet/linalg.hpp"
#include "hawknet/rng.hpp"

namespace hawknet::opt {

enum class Algorithm { hho, hho_plus, random_search, gwo_baseline };

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::hho: return "hho";
        case Algorithm::hho_plus: return "hho_plus";
        case Algorithm::random_search: return "random_search";
        case Algorithm::gwo_baseline: return "gwo_baseline";
    }
    return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "hho") return Algorithm::hho;
    if (s == "hho_plus") return Algorithm::hho_plus;
    if (s == "random_search") return Algorithm::random_search;
    if (s == "gwo_baseline") return Algorithm::gwo_baseline;
    throw std::invalid_argument("unknown algorithm: " + s);
}

enum class BoundaryPolicy { clamp };

struct OptimizerConfig {
    int population_size = 30;
    int max_iterations = 500;
    std::uint64_t seed = 0;
    BoundaryPolicy boundary_policy = BoundaryPolicy::clamp;
    Algorithm algorithm = Algorithm::hho_plus;
};

struct HawkPopulation {
    Matrix positions;      // N x D
    Vec fitness;           // length N
    Vec rabbit_position;   // best-so-far location
    double rabbit_fitness = std::numeric_limits<double>::infinity();
    int iteration = 0;
};

// Per-hawk stochastic state of one HHO iteration. initial_energy is drawn in
// (-1,1), escaping_energy decays with the iteration ratio, escape_chance and
// perch_choice are uniform gates, jump_strength lies in (0,2).
struct HhoPhaseState {
    double initial_energy = 0.0;
    double escaping_energy = 0.0;
    double escape_chance = 0.0;
    double perch_choice = 0.0;
    double jump_strength = 0.0;
};

struct RunRecord {
    std::string algorithm;
    std::string objective_id;
    int dim = 0;
    Vec best_trace;  // rabbit fitness after each iteration, length T
    Vec final_position;
    double final_fitness = std::numeric_limits<double>::infinity();
    long evaluations = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
};

// Called on every objective evaluation: (iteration, hawk, position, fitness).
// Iteration is -1 for the initial population sweep.
using EvalObserver = std::function<void(int, int, std::span<const double>, double)>;

// Decaying exploration threshold: tanh(-t/T) + 1, strictly decreasing in t,
// equal to 1 at t=0 and tanh(-1)+1 at t=T.
inline double adaptive_threshold(int t, int T) {
    if (T < 1) throw std::invalid_argument("adaptive_threshold: T must be >= 1");
    if (t < 0 || t > T) throw std::invalid_argument("adaptive_threshold: need 0 <= t <= T");
    return std::tanh(-static_cast<double>(t) / static_cast<double>(T)) + 1.0;
}

// dim independent standard-normal draws; dim == 0 yields an empty vector.
template <class R>
Vec gaussian_perturbation_vector(std::size_t dim, R& rng) {
    Vec v(dim);
    for (double& x : v) x = rng.normal();
    return v;
}

// Heavy-tailed step vector (Mantegna scheme, beta = 1.5, scale 0.01).
// Per component: draw u then v, each standard normal.
template <class R>
Vec levy_flight_vector(std::size_t dim, R& rng) {
    constexpr double beta = 1.5;
    static const double sigma_u = std::pow(
        std::tgamma(1.0 + beta) * std::sin(std::numbers::pi * beta / 2.0) /
            (std::tgamma((1.0 + beta) / 2.0) * beta * std::pow(2.0, (beta - 1.0) / 2.0)),
        1.0 / beta);
    Vec step(dim);
    for (double& s : step) {
        const double u = rng.normal() * sigma_u;
        const double v = rng.normal();
        s = 0.01 * u / std::pow(std::abs(v), 1.0 / beta);
    }
    return step;
}

inline double opposite_point(double x, double lo, double hi) { return lo + hi - x; }

// Quasi-opposite point: per component, uniform between the bound center and
// the opposite point (one fresh uniform per component).
template <class R>
Vec quasi_opposite(std::span<const double> x, std::span<const double> lower,
                   std::span<const double> upper, R& rng) {
    Vec q(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double center = 0.5 * (lower[j] + upper[j]);
        const double opp = opposite_point(x[j], lower[j], upper[j]);
        q[j] = center + rng.uniform() * (opp - center);
    }
    return q;
}

namespace detail {

inline void clamp_to_bounds(std::span<double> x, std::span<const double> lo,
                            std::span<const double> hi) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], lo[j], hi[j]);
}

inline std::string format_position(std::span<const double> x) {
    std::ostringstream os;
    os << "[";
    const std::size_t shown = std::min<std::size_t>(x.size(), 8);
    for (std::size_t j = 0; j < shown; ++j) os << (j ? ", " : "") << x[j];
    if (shown < x.size()) os << ", ...";
    os << "]";
    return os.str();
}

}  // namespace detail

// Counts evaluations, feeds the noise stream to noisy objectives, rejects
// non-finite fitness values, and reports to an optional observer.
struct EvalContext {
    const bench::ObjectiveFunction& objective;
    Rng noise_rng;
    long evaluations = 0;
    int iteration = -1;
    EvalObserver observer;

    EvalContext(const bench::ObjectiveFunction& obj, std::uint64_t noise_seed)
        : objective(obj), noise_rng(noise_seed) {}

    double operator()(std::span<const double> x, int hawk) {
        const double f = bench::evaluate(objective, x, &noise_rng);
        ++evaluations;
        if (!std::isfinite(f))
            throw std::runtime_error("objective '" + objective.id +
                                     "' returned non-finite fitness at position " +
                                     detail::format_position(x));
        if (observer) observer(iteration, hawk, x, f);
        return f;
    }
};

inline void update_rabbit(HawkPopulation& pop) {
    for (std::size_t i = 0; i < pop.fitness.size(); ++i) {
        if (pop.fitness[i] < pop.rabbit_fitness) {
            pop.rabbit_fitness = pop.fitness[i];
            const auto row = pop.positions.row(i);
            pop.rabbit_position.assign(row.begin(), row.end());
        }
    }
}

// Draws the per-hawk phase state. Fixed consumption: four uniforms in the
// order initial_energy, perch_choice, escape_chance, jump_strength.
template <class R>
HhoPhaseState draw_phase_state(int t, int T, R& rng) {
    HhoPhaseState s;
    s.initial_energy = 2.0 * rng.uniform() - 1.0;
    s.escaping_energy =
        2.0 * s.initial_energy * (1.0 - static_cast<double>(t) / static_cast<double>(T));
    s.perch_choice = rng.uniform();
    s.escape_chance = rng.uniform();
    s.jump_strength = 2.0 * (1.0 - rng.uniform());
    return s;
}

// Classical HHO position update, one full pass over the population.
//
// |E| >= 1 explores: perch on a random hawk (q >= 0.5) or drift from the
// rabbit relative to the population mean (q < 0.5). |E| < 1 exploits: soft or
// hard besiege, with progressive rapid dives (Levy steps) when the escape
// chance is low. Non-dive moves replace the hawk unconditionally; dive moves
// keep the hawk unless the probe improves its stored fitness. Positions are
// clamped to the bounds and re-evaluated, so population fitness stays in sync.
// The rabbit is frozen for the duration of the pass.
//
// Extra draws past the phase state, per hawk: exploration/perch consumes one
// index + two uniforms; exploration/mean consumes two uniforms; each dive
// consumes (after a failed first probe) dim uniforms plus 2*dim normals.
template <class R>
void hho_phase_update(HawkPopulation& pop, EvalContext& eval, int t, int T, R& rng) {
    const std::size_t n = pop.positions.rows;
    const std::size_t dim = pop.positions.cols;
    const auto& lo = eval.objective.lower;
    const auto& hi = eval.objective.upper;
    const Vec& rabbit = pop.rabbit_position;

    Vec cand(dim), probe(dim), mean_pos(dim);
    auto population_mean = [&](Vec& out) {
        out.assign(dim, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = pop.positions.row(i);
            for (std::size_t j = 0; j < dim; ++j) out[j] += row[j];
        }
        for (double& v : out) v /= static_cast<double>(n);
    };

    for (std::size_t i = 0; i < n; ++i) {
        const HhoPhaseState st = draw_phase_state(t, T, rng);
        const double E = st.escaping_energy;
        const double absE = std::abs(E);
        auto xi = pop.positions.row(i);

        if (absE >= 1.0) {
            if (st.perch_choice >= 0.5) {
                const std::size_t k = static_cast<std::size_t>(rng.uniform_below(n));
                const auto xr = pop.positions.row(k);
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                for (std::size_t j = 0; j < dim; ++j)
                    cand[j] = xr[j] - r1 * std::abs(xr[j] - 2.0 * r2 * xi[j]);
            } else {
                population_mean(mean_pos);
                const double r3 = rng.uniform();
                const double r4 = rng.uniform();
                for (std::size_t j = 0; j < dim; ++j)
                    cand[j] = (rabbit[j] - mean_pos[j]) - r3 * (lo[j] + r4 * (hi[j] - lo[j]));
            }
            detail::clamp_to_bounds(cand, lo, hi);
            std::copy(cand.begin(), cand.end(), xi.begin());
            pop.fitness[i] = eval(xi, static_cast<int>(i));
            continue;
        }

        const bool soft = absE >= 0.5;
        if (st.escape_chance >= 0.5) {
            if (soft) {
                const double J = st.jump_strength;
                for (std::size_t j = 0; j < dim; ++j)
                    cand[j] = (rabbit[j] - xi[j]) - E * std::abs(J * rabbit[j] - xi[j]);
            } else {
                for (std::size_t j = 0; j < dim; ++j)
                    cand[j] = rabbit[j] - E * std::abs(rabbit[j] - xi[j]);
            }
            detail::clamp_to_bounds(cand, lo, hi);
            std::copy(cand.begin(), cand.end(), xi.begin());
            pop.fitness[i] = eval(xi, static_cast<int>(i));
            continue;
        }

        // Progressive rapid dives: probe Y, then Y + S .* Levy, keep the
        // first probe that beats the hawk's current fitness.
        const double J = st.jump_strength;
        if (soft) {
            for (std::size_t j = 0; j < dim; ++j)
                cand[j] = rabbit[j] - E * std::abs(J * rabbit[j] - xi[j]);
        } else {
            population_mean(mean_pos);
            for (std::size_t j = 0; j < dim; ++j)
                cand[j] = rabbit[j] - E * std::abs(J * rabbit[j] - mean_pos[j]);
        }
        detail::clamp_to_bounds(cand, lo, hi);
        const double f_first = eval(cand, static_cast<int>(i));
        if (f_first < pop.fitness[i]) {
            std::copy(cand.begin(), cand.end(), xi.begin());
            pop.fitness[i] = f_first;
            continue;
        }
        probe = cand;
        const Vec levy = [&] {
            Vec scale(dim);
            for (double& s : scale) s = rng.uniform();
            Vec step = levy_flight_vector(dim, rng);
            for (std::size_t j = 0; j < dim; ++j) step[j] *= scale[j];
            return step;
        }();
        for (std::size_t j = 0; j < dim; ++j) probe[j] += levy[j];
        detail::clamp_to_bounds(probe, lo, hi);
        const double f_second = eval(probe, static_cast<int>(i));
        if (f_second < pop.fitness[i]) {
            std::copy(probe.begin(), probe.end(), xi.begin());
            pop.fitness[i] = f_second;
        }
    }
}

// How the extra per-iteration passes consume their candidates.
//
// rabbit_probe evaluates each candidate as a pure probe: the best-so-far
// record improves when a probe beats it, and hawk positions are untouched, so
// the besiege dynamics keep their population diversity. greedy_hawk replaces
// a hawk by its candidate whenever the candidate's fitness is better. The
// default is rabbit_probe: with greedy_hawk the quasi-opposite pass teleports
// the whole population near the bound center within a few iterations (any
// center-ward point beats a random initial one), which measurably degrades
// results on objectives whose optimum is away from the center.
enum class Acceptance { rabbit_probe, greedy_hawk };

namespace detail {

inline void accept_candidate(HawkPopulation& pop, std::size_t i, std::span<const double> cand,
                             double f, Acceptance rule) {
    if (rule == Acceptance::greedy_hawk) {
        if (f < pop.fitness[i]) {
            std::copy(cand.begin(), cand.end(), pop.positions.row(i).begin());
            pop.fitness[i] = f;
        }
    } else if (f < pop.rabbit_fitness) {
        pop.rabbit_fitness = f;
        pop.rabbit_position.assign(cand.begin(), cand.end());
    }
}

}  // namespace detail

// Gaussian-perturbed update gated by the adaptive threshold. Per hawk: one
// uniform gate (reused as the step multiplier), then 2*dim normals (outer
// factor first, then inner factor, per component).
template <class R>
void ieea_update(HawkPopulation& pop, EvalContext& eval, int t, int T, R& rng,
                 Acceptance rule = Acceptance::rabbit_probe) {
    const std::size_t n = pop.positions.rows;
    const std::size_t dim = pop.positions.cols;
    const auto& lo = eval.objective.lower;
    const auto& hi = eval.objective.upper;
    const Vec rabbit = pop.rabbit_position;  // frozen for the pass
    const double a = adaptive_threshold(t, T);

    Vec cand(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double gate = rng.uniform();
        const auto xi = pop.positions.row(i);
        if (gate < a) {
            for (std::size_t j = 0; j < dim; ++j) {
                const double g_outer = rng.normal();
                const double g_inner = rng.normal();
                cand[j] = xi[j] + gate * g_outer * (rabbit[j] - g_inner * xi[j]);
            }
        } else {
            for (std::size_t j = 0; j < dim; ++j) {
                const double g_outer = rng.normal();
                const double g_inner = rng.normal();
                cand[j] = rabbit[j] + gate * g_outer * (g_inner * rabbit[j] - xi[j]);
            }
        }
        detail::clamp_to_bounds(cand, lo, hi);
        const double f = eval(cand, static_cast<int>(i));
        detail::accept_candidate(pop, i, cand, f, rule);
    }
}

// Quasi-opposite resampling of every hawk. Consumes dim uniforms per hawk.
template <class R>
void qobl_update(HawkPopulation& pop, EvalContext& eval, R& rng,
                 Acceptance rule = Acceptance::rabbit_probe) {
    const std::size_t n = pop.positions.rows;
    const auto& lo = eval.objective.lower;
    const auto& hi = eval.objective.upper;
    for (std::size_t i = 0; i < n; ++i) {
        Vec q = quasi_opposite(pop.positions.row(i), lo, hi, rng);
        const double f = eval(q, static_cast<int>(i));
        detail::accept_candidate(pop, i, q, f, rule);
    }
}

namespace detail {

template <class R>
void random_search_pass(HawkPopulation& pop, EvalContext& eval, R& rng) {
    const std::size_t n = pop.positions.rows;
    const std::size_t dim = pop.positions.cols;
    const auto& lo = eval.objective.lower;
    const auto& hi = eval.objective.upper;
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = pop.positions.row(i);
        for (std::size_t j = 0; j < dim; ++j) xi[j] = rng.uniform(lo[j], hi[j]);
        pop.fitness[i] = eval(xi, static_cast<int>(i));
    }
}

struct GwoLeaders {
    Vec alpha, beta, delta;
    double f_alpha = std::numeric_limits<double>::infinity();
    double f_beta = std::numeric_limits<double>::infinity();
    double f_delta = std::numeric_limits<double>::infinity();

    void offer(std::span<const double> x, double f) {
        if (f < f_alpha) {
            f_delta = f_beta; delta = beta;
            f_beta = f_alpha; beta = alpha;
            f_alpha = f; alpha.assign(x.begin(), x.end());
        } else if (f < f_beta) {
            f_delta = f_beta; delta = beta;
            f_beta = f; beta.assign(x.begin(), x.end());
        } else if (f < f_delta) {
            f_delta = f; delta.assign(x.begin(), x.end());
        }
    }
};

// One grey-wolf iteration: every wolf moves to the mean of three leader-guided
// positions; 6 uniforms per (wolf, component).
template <class R>
void gwo_pass(HawkPopulation& pop, EvalContext& eval, GwoLeaders& leaders, int t, int T, R& rng) {
    const std::size_t n = pop.positions.rows;
    const std::size_t dim = pop.positions.cols;
    const auto& lo = eval.objective.lower;
    const auto& hi = eval.objective.upper;
    const double a = 2.0 - 2.0 * static_cast<double>(t) / static_cast<double>(T);

    for (std::size_t i = 0; i < n; ++i) {
        auto xi = pop.positions.row(i);
        for (std::size_t j = 0; j < dim; ++j) {
            double acc = 0.0;
            for (const Vec* leader : {&leaders.alpha, &leaders.beta, &leaders.delta}) {
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                const double A = 2.0 * a * r1 - a;
                const double C = 2.0 * r2;
                const double d = std::abs(C * (*leader)[j] - xi[j]);
                acc += (*leader)[j] - A * d;
            }
            xi[j] = acc / 3.0;
        }
        clamp_to_bounds(xi, lo, hi);
        pop.fitness[i] = eval(xi, static_cast<int>(i));
        leaders.offer(xi, pop.fitness[i]);
    }
}

}  // namespace detail

// Run one seeded optimization to completion. The iteration budget is the only
// stopping criterion. The trace records the best-so-far fitness after each
// iteration and is non-increasing by construction.
inline RunRecord run(const bench::ObjectiveFunction& objective, const OptimizerConfig& config,
                     EvalObserver observer = nullptr) {
    if (config.population_size < 2)
        throw std::invalid_argument("run: population_size must be >= 2");
    if (config.max_iterations < 1)
        throw std::invalid_argument("run: max_iterations must be >= 1");

    const auto t_start = std::chrono::steady_clock::now();
    const std::size_t n = static_cast<std::size_t>(config.population_size);
    const std::size_t dim = static_cast<std::size_t>(objective.dim);
    const int T = config.max_iterations;

    Rng rng(derive_seed(config.seed, 0x6d61696eULL));
    EvalContext eval(objective, derive_seed(config.seed, 0x6e6f697365ULL));
    eval.observer = std::move(observer);

    HawkPopulation pop;
    pop.positions = Matrix(n, dim);
    pop.fitness.assign(n, 0.0);
    pop.rabbit_position.assign(dim, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        auto row = pop.positions.row(i);
        for (std::size_t j = 0; j < dim; ++j)
            row[j] = rng.uniform(objective.lower[j], objective.upper[j]);
        pop.fitness[i] = eval(row, static_cast<int>(i));
    }
    update_rabbit(pop);

    detail::GwoLeaders leaders;
    if (config.algorithm == Algorithm::gwo_baseline)
        for (std::size_t i = 0; i < n; ++i) leaders.offer(pop.positions.row(i), pop.fitness[i]);

    RunRecord rec;
    rec.algorithm = to_string(config.algorithm);
    rec.objective_id = objective.id;
    rec.dim = objective.dim;
    rec.seed = config.seed;
    rec.best_trace.reserve(static_cast<std::size_t>(T));

    for (int t = 0; t < T; ++t) {
        pop.iteration = t;
        eval.iteration = t;
        switch (config.algorithm) {
            case Algorithm::hho:
                hho_phase_update(pop, eval, t, T, rng);
                update_rabbit(pop);
                break;
            case Algorithm::hho_plus:
                hho_phase_update(pop, eval, t, T, rng);
                update_rabbit(pop);
                ieea_update(pop, eval, t, T, rng);
                update_rabbit(pop);
                qobl_update(pop, eval, rng);
                update_rabbit(pop);
                break;
            case Algorithm::random_search:
                detail::random_search_pass(pop, eval, rng);
                update_rabbit(pop);
                break;
            case Algorithm::gwo_baseline:
                detail::gwo_pass(pop, eval, leaders, t, T, rng);
                update_rabbit(pop);
                break;
        }
        rec.best_trace.push_back(pop.rabbit_fitness);
    }

    rec.final_position = pop.rabbit_position;
    rec.final_fitness = pop.rabbit_fitness;
    rec.evaluations = eval.evaluations;
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rec;
}

// One run per dimension, each with the same seed so a single-dimension sweep
// reproduces a direct run() call bit for bit.
inline std::vector<RunRecord> scalability_sweep(const std::string& function_id,
                                                std::span<const int> dims,
                                                const OptimizerConfig& config) {
    if (dims.empty()) throw std::invalid_argument("scalability_sweep: dims must be non-empty");
    std::vector<RunRecord> out;
    out.reserve(dims.size());
    for (int d : dims) {
        const auto suite = bench::suite_catalog(d);
        out.push_back(run(bench::find_function(suite, function_id), config));
    }
    return out;
}

}  // namespace hawknet::opt
