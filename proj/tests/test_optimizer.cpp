#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "hawknet/optimizer.hpp"
#include "hawknet/stats.hpp"
#include "support/scripted_rng.hpp"

using namespace hawknet;
using testing_rng = hawknet::testsupport::ScriptedRng;

namespace {

const bench::ObjectiveFunction& sphere(int dim) {
    static std::map<int, std::vector<bench::ObjectiveFunction>> cache;
    auto [it, inserted] = cache.try_emplace(dim);
    if (inserted) it->second = bench::suite_catalog(dim);
    return bench::find_function(it->second, "sphere");
}

opt::HawkPopulation make_population(const std::vector<Vec>& positions,
                                    const bench::ObjectiveFunction& objective) {
    opt::HawkPopulation pop;
    pop.positions = Matrix(positions.size(), positions.front().size());
    pop.fitness.resize(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        std::copy(positions[i].begin(), positions[i].end(), pop.positions.row(i).begin());
        pop.fitness[i] = bench::evaluate(objective, positions[i]);
    }
    opt::update_rabbit(pop);
    return pop;
}

}  // namespace

// --- adaptive threshold ---

TEST(AdaptiveThreshold, Endpoints) {
    EXPECT_EQ(opt::adaptive_threshold(0, 500), 1.0);
    EXPECT_NEAR(opt::adaptive_threshold(500, 500), 0.23840584404423511, 1e-12);
    EXPECT_NEAR(opt::adaptive_threshold(250, 500), 0.53788284273999024, 1e-12);
}

TEST(AdaptiveThreshold, StrictlyDecreasing) {
    double prev = 2.0;
    for (int t = 0; t <= 500; ++t) {
        const double a = opt::adaptive_threshold(t, 500);
        ASSERT_LT(a, prev);
        prev = a;
    }
}

TEST(AdaptiveThreshold, ContractViolations) {
    EXPECT_THROW(opt::adaptive_threshold(0, 0), std::invalid_argument);
    EXPECT_THROW(opt::adaptive_threshold(-1, 10), std::invalid_argument);
    EXPECT_THROW(opt::adaptive_threshold(11, 10), std::invalid_argument);
}

// --- gaussian perturbation ---

TEST(GaussianPerturbation, DeterministicAndSized) {
    Rng a(5), b(5);
    const Vec va = opt::gaussian_perturbation_vector(16, a);
    const Vec vb = opt::gaussian_perturbation_vector(16, b);
    EXPECT_EQ(va, vb);
    EXPECT_TRUE(opt::gaussian_perturbation_vector(0, a).empty());
}

TEST(GaussianPerturbation, Moments) {
    Rng rng(21);
    const int n = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (int chunk = 0; chunk < n / 100; ++chunk)
        for (double v : opt::gaussian_perturbation_vector(100, rng)) {
            sum += v;
            sumsq += v * v;
        }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(sumsq / n - mean * mean, 1.0, 0.02);
}

// --- quasi-opposition ---

TEST(QuasiOpposite, DirectSubstitution) {
    const Vec lo{0.0}, hi{10.0};
    EXPECT_EQ(opt::opposite_point(2.0, 0.0, 10.0), 8.0);
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        const Vec q = opt::quasi_opposite(Vec{2.0}, lo, hi, rng);
        ASSERT_GE(q[0], 5.0);
        ASSERT_LE(q[0], 8.0);
    }
}

TEST(QuasiOpposite, CenterIsFixedPoint) {
    Rng rng(4);
    const Vec q = opt::quasi_opposite(Vec{5.0}, Vec{0.0}, Vec{10.0}, rng);
    EXPECT_EQ(q[0], 5.0);
}

TEST(QuasiOpposite, NegativeBounds) {
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        const Vec q = opt::quasi_opposite(Vec{1.0}, Vec{-1.0}, Vec{1.0}, rng);
        ASSERT_GE(q[0], -1.0);
        ASSERT_LE(q[0], 0.0);
    }
}

// On a dyadic grid every intermediate of lo + hi - x is exact, so the
// algebraic involution must hold bit for bit.
TEST(QuasiOpposite, OppositeOfOppositeOnDyadicGrid) {
    Rng rng(6);
    constexpr double grid = 0x1.0p-20;
    auto dyadic = [&](double lo, double hi) {
        return std::floor(rng.uniform(lo / grid, hi / grid)) * grid;
    };
    for (int i = 0; i < 20000; ++i) {
        const double a = dyadic(-1000.0, 1000.0);
        const double b = a + dyadic(0.5, 1000.0);
        const double x = a + dyadic(0.0, b - a);
        const double o = opt::opposite_point(x, a, b);
        EXPECT_EQ(opt::opposite_point(o, a, b), x);
    }
}

TEST(QuasiOpposite, ContainmentOnContinuousDraws) {
    Rng rng(7);
    for (int i = 0; i < 20000; ++i) {
        const double a = rng.uniform(-100.0, 100.0);
        const double b = a + rng.uniform(0.1, 100.0);
        const double x = rng.uniform(a, b);
        const double center = 0.5 * (a + b);
        const double o = opt::opposite_point(x, a, b);
        const Vec q = opt::quasi_opposite(Vec{x}, Vec{a}, Vec{b}, rng);
        ASSERT_GE(q[0], std::min(center, o) - 1e-12);
        ASSERT_LE(q[0], std::max(center, o) + 1e-12);
    }
}

// --- IEEA update ---

TEST(Ieea, ZeroGaussianFirstBranchKeepsPosition) {
    const auto& obj = sphere(2);
    auto pop = make_population({{1.0, 1.0}, {3.0, 4.0}}, obj);
    opt::EvalContext eval(obj, 0);
    testing_rng rng;
    rng.uniform_default = 0.3;  // gate < a(0,T) = 1 -> first branch
    rng.normal_default = 0.0;
    const Vec before(pop.positions.row(1).begin(), pop.positions.row(1).end());
    opt::ieea_update(pop, eval, 0, 500, rng, opt::Acceptance::greedy_hawk);
    EXPECT_EQ(Vec(pop.positions.row(1).begin(), pop.positions.row(1).end()), before);
}

TEST(Ieea, ZeroGaussianSecondBranchMovesToRabbit) {
    const auto& obj = sphere(2);
    auto pop = make_population({{0.5, 0.5}, {3.0, 4.0}}, obj);
    opt::EvalContext eval(obj, 0);
    testing_rng rng;
    rng.uniform_default = 0.9;  // gate >= a(500,500) = 0.2384 -> second branch
    rng.normal_default = 0.0;
    opt::ieea_update(pop, eval, 500, 500, rng, opt::Acceptance::greedy_hawk);
    const Vec rabbit{0.5, 0.5};
    EXPECT_EQ(Vec(pop.positions.row(1).begin(), pop.positions.row(1).end()), rabbit);
}

TEST(Ieea, HandEvaluatedCandidate) {
    // gate = 0.5, both gaussian factors 1, x = (1,1), rabbit = (0,0):
    // candidate = 1 + 0.5*1*(0 - 1*1) = 0.5 per component, accepted under
    // greedy acceptance because sphere(0.5,0.5) < sphere(1,1).
    const auto& obj = sphere(2);
    auto pop = make_population({{0.0, 0.0}, {1.0, 1.0}}, obj);
    opt::EvalContext eval(obj, 0);
    testing_rng rng;
    rng.uniform_default = 0.5;
    rng.normal_default = 1.0;
    opt::ieea_update(pop, eval, 0, 500, rng, opt::Acceptance::greedy_hawk);
    const Vec expected{0.5, 0.5};
    EXPECT_EQ(Vec(pop.positions.row(1).begin(), pop.positions.row(1).end()), expected);
}

TEST(Ieea, ProbeModeLeavesPositionsAndRefinesRabbit) {
    const auto& obj = sphere(2);
    auto pop = make_population({{1.0, 1.0}, {2.0, 2.0}}, obj);
    opt::EvalContext eval(obj, 0);
    testing_rng rng;
    rng.uniform_default = 0.5;
    rng.normal_default = 1.0;
    // candidate for hawk 0: 1 + 0.5*(1 - 1) = 1 -> stays; for hawk 1:
    // 2 + 0.5*1*(1 - 2) = 1.5 -> f = 4.5 > rabbit 2, no refinement; positions
    // must be untouched in probe mode either way.
    const double rabbit_before = pop.rabbit_fitness;
    opt::ieea_update(pop, eval, 0, 500, rng, opt::Acceptance::rabbit_probe);
    EXPECT_EQ(pop.positions(1, 0), 2.0);
    EXPECT_LE(pop.rabbit_fitness, rabbit_before);
}

// --- classical phase update ---

TEST(HhoPhase, TerminalEnergyHardBesiegeReachesRabbit) {
    const auto& obj = sphere(2);
    auto pop = make_population({{0.25, -0.5}, {3.0, 4.0}}, obj);
    opt::EvalContext eval(obj, 0);
    testing_rng rng;
    // per-hawk preamble: E0, q, r, J. E = 2*E0*(1 - T/T) = 0 regardless.
    rng.uniforms = {0.9, 0.1, 0.9, 0.1, 0.9, 0.1, 0.9, 0.1};  // r = 0.9 -> hard besiege
    opt::hho_phase_update(pop, eval, 500, 500, rng);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(pop.positions(i, 0), 0.25);
        EXPECT_EQ(pop.positions(i, 1), -0.5);
    }
}

TEST(HhoPhase, IdenticalHawksAtOptimumKeepRabbit) {
    const auto& obj = sphere(3);
    auto pop = make_population(std::vector<Vec>(6, Vec{0.0, 0.0, 0.0}), obj);
    opt::EvalContext eval(obj, 0);
    Rng rng(9);
    for (int t = 0; t < 40; ++t) {
        opt::hho_phase_update(pop, eval, t, 40, rng);
        opt::update_rabbit(pop);
        ASSERT_EQ(pop.rabbit_fitness, 0.0);
    }
}

// --- Levy flight ---

TEST(Levy, DeterministicHeavyTailedSymmetric) {
    Rng a(31), b(31);
    EXPECT_EQ(opt::levy_flight_vector(32, a), opt::levy_flight_vector(32, b));

    Rng rng(32);
    const int n = 1000000;
    Vec steps(n);
    for (int chunk = 0; chunk < n / 100; ++chunk) {
        const Vec v = opt::levy_flight_vector(100, rng);
        std::copy(v.begin(), v.end(), steps.begin() + chunk * 100);
    }
    double mean = 0.0;
    for (double s : steps) mean += s;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double s : steps) {
        const double d = s - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    EXPECT_GT(m4 / (m2 * m2), 9.0);  // far beyond the Gaussian kurtosis of 3

    // sign symmetry: rank-sum test between first half and the negated second half
    Vec first(steps.begin(), steps.begin() + n / 2);
    Vec second(steps.begin() + n / 2, steps.end());
    for (double& v : second) v = -v;
    const auto w = stats::wilcoxon_rank_sum({first, "a"}, {second, "b"});
    EXPECT_FALSE(w.degenerate);
    EXPECT_GT(w.p_value, 0.01);
}

// --- full runs ---

TEST(Run, SphereDim10ReachesTinyFitness) {
    opt::OptimizerConfig cfg;
    cfg.algorithm = opt::Algorithm::hho_plus;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        cfg.seed = seed;
        const auto rec = opt::run(sphere(10), cfg);
        EXPECT_LT(rec.final_fitness, 1e-10) << "seed " << seed;
    }
}

TEST(Run, DeterministicExceptWallTime) {
    opt::OptimizerConfig cfg;
    cfg.algorithm = opt::Algorithm::hho;
    cfg.max_iterations = 60;
    cfg.seed = 77;
    const auto a = opt::run(sphere(8), cfg);
    const auto b = opt::run(sphere(8), cfg);
    EXPECT_EQ(a.best_trace, b.best_trace);
    EXPECT_EQ(a.final_position, b.final_position);
    EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Run, TraceNonIncreasingForEveryAlgorithm) {
    for (auto alg : {opt::Algorithm::hho, opt::Algorithm::hho_plus, opt::Algorithm::random_search,
                     opt::Algorithm::gwo_baseline}) {
        opt::OptimizerConfig cfg;
        cfg.algorithm = alg;
        cfg.max_iterations = 50;
        cfg.population_size = 10;
        cfg.seed = 5;
        const auto rec = opt::run(sphere(5), cfg);
        ASSERT_EQ(rec.best_trace.size(), 50u);
        for (std::size_t t = 1; t < rec.best_trace.size(); ++t)
            ASSERT_LE(rec.best_trace[t], rec.best_trace[t - 1]) << opt::to_string(alg);
        EXPECT_EQ(rec.final_fitness, rec.best_trace.back());
    }
}

TEST(Run, RandomSearchImproves) {
    opt::OptimizerConfig cfg;
    cfg.algorithm = opt::Algorithm::random_search;
    cfg.max_iterations = 100;
    cfg.seed = 1;
    const auto rec = opt::run(sphere(2), cfg);
    EXPECT_LT(rec.final_fitness, rec.best_trace.front());
    EXPECT_EQ(rec.evaluations, 30 + 100 * 30);
}

TEST(Run, EvaluationBudgetAndBounds) {
    opt::OptimizerConfig cfg;
    cfg.algorithm = opt::Algorithm::hho_plus;
    cfg.max_iterations = 40;
    cfg.population_size = 12;
    cfg.seed = 3;
    const auto& obj = sphere(6);
    long observed = 0;
    bool in_bounds = true;
    const auto rec = opt::run(obj, cfg, [&](int, int, std::span<const double> x, double) {
        ++observed;
        for (std::size_t j = 0; j < x.size(); ++j)
            in_bounds = in_bounds && x[j] >= obj.lower[j] && x[j] <= obj.upper[j];
    });
    EXPECT_TRUE(in_bounds);
    EXPECT_EQ(rec.evaluations, observed);
    EXPECT_GE(rec.evaluations, 12 + 40 * 3 * 12);
    EXPECT_LE(rec.evaluations, 12 + 40 * 4 * 12);
}

TEST(Run, NonFiniteObjectiveAborts) {
    bench::ObjectiveFunction bad;
    bad.id = "bad";
    bad.dim = 2;
    bad.lower = {-1.0, -1.0};
    bad.upper = {1.0, 1.0};
    bad.fn = [](std::span<const double>, Rng*) { return std::numeric_limits<double>::infinity(); };
    opt::OptimizerConfig cfg;
    cfg.max_iterations = 5;
    try {
        opt::run(bad, cfg);
        FAIL() << "expected abort";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("position"), std::string::npos);
    }
}

TEST(Run, ConfigValidation) {
    opt::OptimizerConfig cfg;
    cfg.population_size = 1;
    EXPECT_THROW(opt::run(sphere(2), cfg), std::invalid_argument);
    cfg.population_size = 4;
    cfg.max_iterations = 0;
    EXPECT_THROW(opt::run(sphere(2), cfg), std::invalid_argument);
}

// --- scalability sweep ---

TEST(Sweep, SingleDimMatchesDirectRun) {
    opt::OptimizerConfig cfg;
    cfg.algorithm = opt::Algorithm::hho;
    cfg.max_iterations = 30;
    cfg.seed = 10;
    const int dims[] = {10};
    const auto sweep = opt::scalability_sweep("sphere", dims, cfg);
    const auto direct = opt::run(sphere(10), cfg);
    ASSERT_EQ(sweep.size(), 1u);
    EXPECT_EQ(sweep[0].best_trace, direct.best_trace);
    EXPECT_EQ(sweep[0].final_position, direct.final_position);
}

TEST(Sweep, LowerDimensionIsNoHarderOnSphere) {
    // median over 10 seeds of the final fitness: dim 10 <= dim 100
    const int dims[] = {10, 100};
    Vec d10, d100;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        opt::OptimizerConfig cfg;
        cfg.algorithm = opt::Algorithm::hho_plus;
        cfg.seed = seed;
        const auto sweep = opt::scalability_sweep("sphere", dims, cfg);
        d10.push_back(sweep[0].final_fitness);
        d100.push_back(sweep[1].final_fitness);
    }
    std::sort(d10.begin(), d10.end());
    std::sort(d100.begin(), d100.end());
    const double med10 = 0.5 * (d10[4] + d10[5]);
    const double med100 = 0.5 * (d100[4] + d100[5]);
    EXPECT_LE(med10, med100);
}

TEST(Sweep, TraceLengthsAndDimTags) {
    opt::OptimizerConfig cfg;
    cfg.max_iterations = 25;
    cfg.seed = 4;
    const int dims[] = {10, 50};
    const auto sweep = opt::scalability_sweep("sphere", dims, cfg);
    ASSERT_EQ(sweep.size(), 2u);
    EXPECT_EQ(sweep[0].dim, 10);
    EXPECT_EQ(sweep[1].dim, 50);
    for (const auto& rec : sweep) EXPECT_EQ(rec.best_trace.size(), 25u);
    EXPECT_THROW(opt::scalability_sweep("sphere", std::span<const int>{}, cfg),
                 std::invalid_argument);
}
