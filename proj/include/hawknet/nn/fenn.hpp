// Fully-connected Elman recurrent cell with three context paths and exact
// backpropagation through time.
//
// Step t (zero-based) consumes input u_t and the state carried out of step
// t-1 (all-zero at the start of a sequence):
//
//   x_c(t)  = w4 * x_c(t-1)  + w5 * x(t-1)          hidden-side context
//   y_c1(t) = w6 * y_c1(t-1) + w7 * y(t-1)          output-to-hidden context
//   y_c2(t) = w8 * y_c2(t-1) + w9 * y(t-1)          output-to-output context
//   x(t)    = tanh(x_c(t) + w1 * u_t + y_c1(t) + b1)
//   y(t)    = softmax(w2 * x(t) + w3 * u_t + y_c2(t) + b2)
//
// The backward pass propagates adjoints through all three context recurrences
// and both direct connections, supports loss injection at arbitrary steps and
// state resets at arbitrary step boundaries, and returns gradients for every
// parameter tensor plus the per-step input gradients.
//
// Ablation heads reuse this cell: a plain Elman network freezes w3 and
// w6..w9 at zero, a feedforward head freezes w3..w9 at zero.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawknet/linalg.hpp"
#include "hawknet/nn/init.hpp"
#include "hawknet/nn/loss.hpp"
#include "hawknet/rng.hpp"

namespace hawknet::nn {

struct FennParameters {
    int hidden = 0;   // h
    int inputs = 0;   // m
    int classes = 0;  // K

    Matrix w1;  // h x m, input -> hidden
    Matrix w2;  // K x h, hidden -> output
    Matrix w3;  // K x m, input -> output direct
    Matrix w4;  // h x h, hidden-context self
    Matrix w5;  // h x h, hidden -> hidden-context
    Matrix w6;  // h x h, output-context-1 self
    Matrix w7;  // h x K, output -> hidden-side context
    Matrix w8;  // K x K, output-context-2 self
    Matrix w9;  // K x K, output -> output-side context
    Vec b1;     // h
    Vec b2;     // K

    FennParameters() = default;
    FennParameters(int h, int m, int k)
        : hidden(h), inputs(m), classes(k), w1(h, m), w2(k, h), w3(k, m), w4(h, h), w5(h, h),
          w6(h, h), w7(h, k), w8(k, k), w9(k, k), b1(h, 0.0), b2(k, 0.0) {}

    // Visit every tensor in a fixed order (used by flattening, serialization
    // and gradient checks).
    template <class F>
    void for_each_tensor(F&& f) {
        f("w1", std::span<double>(w1.data));
        f("w2", std::span<double>(w2.data));
        f("w3", std::span<double>(w3.data));
        f("w4", std::span<double>(w4.data));
        f("w5", std::span<double>(w5.data));
        f("w6", std::span<double>(w6.data));
        f("w7", std::span<double>(w7.data));
        f("w8", std::span<double>(w8.data));
        f("w9", std::span<double>(w9.data));
        f("b1", std::span<double>(b1));
        f("b2", std::span<double>(b2));
    }

    template <class F>
    void for_each_tensor(F&& f) const {
        auto& self = const_cast<FennParameters&>(*this);
        self.for_each_tensor([&](const char* name, std::span<double> s) {
            f(name, std::span<const double>(s));
        });
    }
};

using FennGradients = FennParameters;

struct FennState {
    Vec x_c;     // h
    Vec y_c1;    // h
    Vec y_c2;    // K
    Vec x_prev;  // h
    Vec y_prev;  // K

    FennState() = default;
    FennState(int h, int k) : x_c(h, 0.0), y_c1(h, 0.0), y_c2(k, 0.0), x_prev(h, 0.0), y_prev(k, 0.0) {}
};

struct FennStepResult {
    Vec y;
    FennState state;
};

namespace detail {

inline void check_finite(std::span<const double> v, const char* stage) {
    for (double x : v)
        if (!std::isfinite(x))
            throw std::runtime_error(std::string("fenn_step: non-finite value in ") + stage);
}

}  // namespace detail

// One recurrence step from an explicit state. Throws if any intermediate
// goes non-finite, naming the stage.
inline FennStepResult fenn_step(const FennParameters& p, const FennState& state,
                                std::span<const double> u) {
    if (static_cast<int>(u.size()) != p.inputs)
        throw std::invalid_argument("fenn_step: input size mismatch");

    FennState next(p.hidden, p.classes);

    matvec(p.w4, state.x_c, next.x_c);
    matvec_add(p.w5, state.x_prev, next.x_c);
    detail::check_finite(next.x_c, "hidden context");

    matvec(p.w6, state.y_c1, next.y_c1);
    matvec_add(p.w7, state.y_prev, next.y_c1);
    detail::check_finite(next.y_c1, "output-to-hidden context");

    matvec(p.w8, state.y_c2, next.y_c2);
    matvec_add(p.w9, state.y_prev, next.y_c2);
    detail::check_finite(next.y_c2, "output-to-output context");

    Vec a_x = next.x_c;
    matvec_add(p.w1, u, a_x);
    vec_add(a_x, next.y_c1);
    vec_add(a_x, p.b1);
    for (int i = 0; i < p.hidden; ++i) next.x_prev[i] = std::tanh(a_x[i]);
    detail::check_finite(next.x_prev, "hidden activation");

    Vec a_y(p.classes, 0.0);
    matvec(p.w2, next.x_prev, a_y);
    matvec_add(p.w3, u, a_y);
    vec_add(a_y, next.y_c2);
    vec_add(a_y, p.b2);
    detail::check_finite(a_y, "output pre-activation");
    next.y_prev = softmax(a_y);

    return {next.y_prev, std::move(next)};
}

// Full forward trace of a sequence; keeps the state entering each step (after
// any reset) and the step's hidden/output activations for the backward pass.
struct FennTrace {
    std::vector<FennState> state_in;  // state consumed by step t
    std::vector<Vec> x;               // hidden activation per step
    std::vector<Vec> y;               // output distribution per step
    std::vector<bool> reset;          // state zeroed before step t
};

inline FennTrace fenn_sequence_forward(const FennParameters& p, const Matrix& inputs,
                                       std::span<const int> resets = {}) {
    if (static_cast<int>(inputs.cols) != p.inputs)
        throw std::invalid_argument("fenn_sequence_forward: input width mismatch");
    if (inputs.rows < 1) throw std::invalid_argument("fenn_sequence_forward: empty sequence");

    const std::size_t T = inputs.rows;
    FennTrace trace;
    trace.state_in.reserve(T);
    trace.x.reserve(T);
    trace.y.reserve(T);
    trace.reset.assign(T, false);
    for (int r : resets) {
        if (r < 0 || r >= static_cast<int>(T))
            throw std::invalid_argument("fenn_sequence_forward: reset step out of range");
        trace.reset[static_cast<std::size_t>(r)] = true;
    }

    FennState state(p.hidden, p.classes);
    for (std::size_t t = 0; t < T; ++t) {
        if (trace.reset[t]) state = FennState(p.hidden, p.classes);
        trace.state_in.push_back(state);
        auto res = fenn_step(p, state, inputs.row(t));
        state = std::move(res.state);
        trace.x.push_back(Vec(state.x_prev));
        trace.y.push_back(std::move(res.y));
    }
    return trace;
}

struct FennBackwardResult {
    FennGradients grads;
    Matrix d_inputs;  // T x m
};

// Loss gradient injected at a given step, as d(loss)/dy(step).
struct FennStepGrad {
    int step = 0;
    Vec dy;
};

// Exact BPTT given a forward trace and per-step output-gradient injections.
inline FennBackwardResult fenn_backward_from_dy(const FennParameters& p, const Matrix& inputs,
                                                const FennTrace& trace,
                                                std::span<const FennStepGrad> step_grads) {
    const std::size_t T = inputs.rows;
    const int h = p.hidden, K = p.classes;

    std::vector<Vec> inject(T);
    for (const auto& sg : step_grads) {
        if (sg.step < 0 || sg.step >= static_cast<int>(T))
            throw std::invalid_argument("fenn_backward_from_dy: step out of range");
        if (inject[static_cast<std::size_t>(sg.step)].empty())
            inject[static_cast<std::size_t>(sg.step)].assign(K, 0.0);
        vec_add(inject[static_cast<std::size_t>(sg.step)], sg.dy);
    }

    FennBackwardResult out;
    out.grads = FennGradients(h, p.inputs, K);
    out.d_inputs = Matrix(T, p.inputs);

    Vec dxc_next(h, 0.0), dyc1_next(h, 0.0), dyc2_next(K, 0.0);

    for (std::size_t ti = T; ti-- > 0;) {
        const FennState& in = trace.state_in[ti];
        const Vec& x_t = trace.x[ti];
        const Vec& y_t = trace.y[ti];
        const auto u_t = inputs.row(ti);

        // d(loss)/dy(t): injected loss plus the two output-context paths.
        Vec dy(K, 0.0);
        if (!inject[ti].empty()) vec_add(dy, inject[ti]);
        matvec_transpose_add(p.w7, dyc1_next, dy);
        matvec_transpose_add(p.w9, dyc2_next, dy);

        Vec da_y = softmax_backward(y_t, dy);

        // d(loss)/dx(t): output weights plus the hidden-context path.
        Vec dx(h, 0.0);
        matvec_transpose_add(p.w2, da_y, dx);
        matvec_transpose_add(p.w5, dxc_next, dx);

        Vec da_x(h);
        for (int i = 0; i < h; ++i) da_x[i] = dx[i] * (1.0 - x_t[i] * x_t[i]);

        // Context adjoints: appear in this step's pre-activations and in the
        // next step's self-recurrences.
        Vec dxc = da_x;
        matvec_transpose_add(p.w4, dxc_next, dxc);
        Vec dyc1 = da_x;
        matvec_transpose_add(p.w6, dyc1_next, dyc1);
        Vec dyc2 = da_y;
        matvec_transpose_add(p.w8, dyc2_next, dyc2);

        outer_add(out.grads.w1, da_x, u_t);
        vec_add(out.grads.b1, da_x);
        outer_add(out.grads.w2, da_y, x_t);
        outer_add(out.grads.w3, da_y, u_t);
        vec_add(out.grads.b2, da_y);
        outer_add(out.grads.w4, dxc, in.x_c);
        outer_add(out.grads.w5, dxc, in.x_prev);
        outer_add(out.grads.w6, dyc1, in.y_c1);
        outer_add(out.grads.w7, dyc1, in.y_prev);
        outer_add(out.grads.w8, dyc2, in.y_c2);
        outer_add(out.grads.w9, dyc2, in.y_prev);

        auto du = out.d_inputs.row(ti);
        matvec_transpose_add(p.w1, da_x, du);
        matvec_transpose_add(p.w3, da_y, du);

        if (trace.reset[ti]) {
            // State entering this step was zeroed; nothing flows further back.
            std::fill(dxc_next.begin(), dxc_next.end(), 0.0);
            std::fill(dyc1_next.begin(), dyc1_next.end(), 0.0);
            std::fill(dyc2_next.begin(), dyc2_next.end(), 0.0);
        } else {
            dxc_next = std::move(dxc);
            dyc1_next = std::move(dyc1);
            dyc2_next = std::move(dyc2);
        }
    }
    return out;
}

// Weighted cross-entropy against a one-hot target at the final step; the
// common training configuration.
struct FennLossBackwardResult {
    double loss = 0.0;
    FennGradients grads;
    Matrix d_inputs;
};

inline FennLossBackwardResult fenn_backward(const FennParameters& p, const Matrix& inputs,
                                            std::span<const double> target,
                                            std::span<const double> weights) {
    const FennTrace trace = fenn_sequence_forward(p, inputs);
    const Vec& y_final = trace.y.back();

    FennLossBackwardResult out;
    out.loss = weighted_cross_entropy(y_final, target, weights);
    FennStepGrad sg{static_cast<int>(inputs.rows) - 1,
                    weighted_cross_entropy_grad(y_final, target, weights)};
    auto bw = fenn_backward_from_dy(p, inputs, trace, std::span<const FennStepGrad>(&sg, 1));
    out.grads = std::move(bw.grads);
    out.d_inputs = std::move(bw.d_inputs);
    return out;
}

}  // namespace hawknet::nn
