#include <gtest/gtest.h>

#include <cmath>

#include "hawknet/nn/adam.hpp"
#include "hawknet/nn/init.hpp"
#include "hawknet/nn/loss.hpp"
#include "support/gradcheck.hpp"

using namespace hawknet;

TEST(ClassWeights, ImbalancedCounts) {
    const long counts[] = {459, 1338};
    const auto cw = nn::class_weights(counts);
    EXPECT_NEAR(cw.weights[0], 0.7445743, 1e-6);
    EXPECT_NEAR(cw.weights[1], 0.2554256, 1e-6);
    EXPECT_NEAR(cw.weights[0] + cw.weights[1], 1.0, 1e-12);
    EXPECT_FALSE(cw.has_empty_class);
}

TEST(ClassWeights, Balanced) {
    const long counts[] = {100, 100};
    const auto cw = nn::class_weights(counts);
    EXPECT_EQ(cw.weights[0], 0.5);
    EXPECT_EQ(cw.weights[1], 0.5);
}

TEST(ClassWeights, EmptyClassFlagged) {
    const long counts[] = {1, 0};
    const auto cw = nn::class_weights(counts);
    EXPECT_EQ(cw.weights[0], 0.0);
    EXPECT_EQ(cw.weights[1], 1.0);
    EXPECT_TRUE(cw.has_empty_class);
}

TEST(ClassWeights, MulticlassRenormalizes) {
    const long counts[] = {10, 20, 70};
    const auto cw = nn::class_weights(counts);
    double sum = 0.0;
    for (double w : cw.weights) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_GT(cw.weights[0], cw.weights[2]);  // rarer class weighs more
}

TEST(ClassWeights, Validation) {
    const long one[] = {5};
    EXPECT_THROW(nn::class_weights(one), std::invalid_argument);
    const long zeros[] = {0, 0};
    EXPECT_THROW(nn::class_weights(zeros), std::invalid_argument);
    const long negative[] = {-1, 2};
    EXPECT_THROW(nn::class_weights(negative), std::invalid_argument);
}

TEST(WeightedCrossEntropy, PerfectPredictionIsZero) {
    EXPECT_EQ(nn::weighted_cross_entropy(Vec{1.0, 0.0}, Vec{1.0, 0.0}, Vec{0.9, 0.1}), 0.0);
}

TEST(WeightedCrossEntropy, HalfHalf) {
    EXPECT_NEAR(nn::weighted_cross_entropy(Vec{0.5, 0.5}, Vec{1.0, 0.0}, Vec{0.5, 0.5}),
                0.34657359027997264, 1e-15);
}

TEST(WeightedCrossEntropy, UniformWeightsScaleStandardCrossEntropy) {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const int K = 2 + static_cast<int>(rng.uniform_below(4));
        Vec p(K);
        double z = 0.0;
        for (auto& v : p) {
            v = 0.01 + rng.uniform();
            z += v;
        }
        for (auto& v : p) v /= z;
        Vec target(K, 0.0);
        target[rng.uniform_below(K)] = 1.0;
        const Vec uniform(K, 1.0 / K);
        double standard = 0.0;
        for (int j = 0; j < K; ++j)
            if (target[j] != 0.0) standard -= std::log(p[j]);
        EXPECT_NEAR(nn::weighted_cross_entropy(p, target, uniform), standard / K, 1e-12);
    }
}

TEST(WeightedCrossEntropy, ClampKeepsLossFinite) {
    const double loss = nn::weighted_cross_entropy(Vec{1.0, 0.0}, Vec{0.0, 1.0}, Vec{0.5, 0.5});
    EXPECT_TRUE(std::isfinite(loss));
    EXPECT_NEAR(loss, -0.5 * std::log(1e-12), 1e-9);
}

TEST(WeightedCrossEntropy, Validation) {
    EXPECT_THROW(nn::weighted_cross_entropy(Vec{0.7, 0.7}, Vec{1.0, 0.0}, Vec{0.5, 0.5}),
                 std::invalid_argument);
    EXPECT_THROW(nn::weighted_cross_entropy(Vec{-0.1, 1.1}, Vec{1.0, 0.0}, Vec{0.5, 0.5}),
                 std::invalid_argument);
}

TEST(WeightedCrossEntropy, GradientMatchesFiniteDifferences) {
    Rng rng(2);
    for (int instance = 0; instance < 20; ++instance) {
        const int K = 2 + static_cast<int>(rng.uniform_below(3));
        Vec p(K);
        double z = 0.0;
        for (auto& v : p) {
            v = 0.05 + rng.uniform();
            z += v;
        }
        for (auto& v : p) v /= z;
        Vec target(K, 0.0);
        target[rng.uniform_below(K)] = 1.0;
        Vec w(K);
        double wz = 0.0;
        for (auto& v : w) {
            v = 0.1 + rng.uniform();
            wz += v;
        }
        for (auto& v : w) v /= wz;

        const Vec grad = nn::weighted_cross_entropy_grad(p, target, w);
        // treat components as free variables; the loss formula does not
        // renormalize, so partials are well-defined
        auto loss = [&] {
            double acc = 0.0;
            for (int j = 0; j < K; ++j)
                if (target[j] != 0.0) acc -= w[j] * target[j] * std::log(std::max(p[j], 1e-12));
            return acc;
        };
        EXPECT_LT(testsupport::max_relative_gradient_error(p, grad, loss), 1e-5);
    }
}

TEST(Softmax, BackwardMatchesJacobian) {
    Rng rng(3);
    for (int instance = 0; instance < 20; ++instance) {
        const int K = 2 + static_cast<int>(rng.uniform_below(3));
        Vec logits(K), dy(K);
        for (auto& v : logits) v = rng.normal();
        for (auto& v : dy) v = rng.normal();
        const Vec y = nn::softmax(logits);
        const Vec da = nn::softmax_backward(y, dy);
        auto loss = [&] {
            const Vec yy = nn::softmax(logits);
            double acc = 0.0;
            for (int j = 0; j < K; ++j) acc += yy[j] * dy[j];
            return acc;
        };
        EXPECT_LT(testsupport::max_relative_gradient_error(logits, da, loss), 1e-5);
    }
}

TEST(Adam, FirstStepIsSignedLearningRate) {
    Vec params{1.0, -2.0, 3.0};
    const Vec grads{0.3, -0.2, 0.0001};
    nn::AdamMoments m(3);
    nn::AdamHyper h;
    h.lr = 0.01;
    nn::adam_step(params, grads, m, h);
    EXPECT_NEAR(params[0], 1.0 - 0.01, 1e-6);
    EXPECT_NEAR(params[1], -2.0 + 0.01, 1e-6);
    EXPECT_NEAR(params[2], 3.0 - 0.01, 1e-4);  // eps is relatively larger here
}

TEST(Adam, ZeroGradientAtZeroMomentsIsNoOp) {
    Vec params{1.0, 2.0};
    const Vec grads{0.0, 0.0};
    nn::AdamMoments m(2);
    nn::adam_step(params, grads, m, nn::AdamHyper{});
    EXPECT_EQ(params[0], 1.0);
    EXPECT_EQ(params[1], 2.0);
}

TEST(Adam, ConvergesOnQuadratic) {
    Vec x{1.0};
    nn::AdamMoments m(1);
    nn::AdamHyper h;
    h.lr = 0.1;
    for (int i = 0; i < 100; ++i) {
        const Vec g{2.0 * x[0]};
        nn::adam_step(x, g, m, h);
    }
    EXPECT_LT(std::abs(x[0]), 0.1);
}

TEST(Adam, SizeMismatchThrows) {
    Vec params{1.0};
    const Vec grads{1.0, 2.0};
    nn::AdamMoments m(1);
    EXPECT_THROW(nn::adam_step(params, grads, m, nn::AdamHyper{}), std::invalid_argument);
}

TEST(HeInit, VarianceAndDeterminism) {
    Rng a(9), b(9);
    Vec va(1000000), vb(16);
    nn::he_initialize(va, 50, a);
    nn::he_initialize(vb, 50, b);
    for (int i = 0; i < 16; ++i) EXPECT_EQ(va[i], vb[i]);

    double mean = 0.0;
    for (double v : va) mean += v;
    mean /= va.size();
    double var = 0.0;
    for (double v : va) var += (v - mean) * (v - mean);
    var /= va.size();
    EXPECT_NEAR(var, 0.04, 0.002);  // 2/50, within 5%
    EXPECT_NEAR(mean, 0.0, 0.001);

    EXPECT_THROW(nn::he_initialize(vb, 0, a), std::invalid_argument);
}
