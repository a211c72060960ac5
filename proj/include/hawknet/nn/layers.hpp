// 1-D building blocks for the convolutional front end: valid cross-correlation
// conv, per-channel batch normalization (batch statistics over samples and
// positions), leaky ReLU, max pooling with argmax-routed gradients, and
// inverted dropout. The math lives in free functions; thin layer classes wrap
// them for network assembly.

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawknet/linalg.hpp"
#include "hawknet/nn/init.hpp"
#include "hawknet/rng.hpp"

namespace hawknet::nn {

struct Tensor {
    int channels = 0;
    int length = 0;
    Vec data;

    Tensor() = default;
    Tensor(int c, int l) : channels(c), length(l), data(static_cast<std::size_t>(c) * l, 0.0) {}

    double& at(int c, int i) { return data[static_cast<std::size_t>(c) * length + i]; }
    double at(int c, int i) const { return data[static_cast<std::size_t>(c) * length + i]; }
    std::span<double> channel(int c) { return {data.data() + static_cast<std::size_t>(c) * length,
                                               static_cast<std::size_t>(length)}; }
    std::span<const double> channel(int c) const {
        return {data.data() + static_cast<std::size_t>(c) * length, static_cast<std::size_t>(length)};
    }
};

using Batch = std::vector<Tensor>;

inline int conv_output_length(int length, int kernel, int stride) {
    return (length - kernel) / stride + 1;
}

// kernels laid out as [out_channel][in_channel][tap].
struct ConvKernel {
    int out_channels = 0, in_channels = 0, taps = 0;
    Vec weights;
    Vec bias;

    ConvKernel() = default;
    ConvKernel(int co, int ci, int k)
        : out_channels(co), in_channels(ci), taps(k),
          weights(static_cast<std::size_t>(co) * ci * k, 0.0), bias(co, 0.0) {}

    double& w(int o, int c, int j) {
        return weights[(static_cast<std::size_t>(o) * in_channels + c) * taps + j];
    }
    double w(int o, int c, int j) const {
        return weights[(static_cast<std::size_t>(o) * in_channels + c) * taps + j];
    }
};

inline Tensor conv1d_forward(const Tensor& in, const ConvKernel& k, int stride) {
    if (in.channels != k.in_channels) throw std::invalid_argument("conv1d: channel mismatch");
    if (in.length < k.taps) throw std::invalid_argument("conv1d: input shorter than kernel");
    if (stride < 1) throw std::invalid_argument("conv1d: stride must be >= 1");
    const int out_len = conv_output_length(in.length, k.taps, stride);
    Tensor out(k.out_channels, out_len);
    for (int o = 0; o < k.out_channels; ++o) {
        for (int l = 0; l < out_len; ++l) {
            double acc = k.bias[o];
            const int base = l * stride;
            for (int c = 0; c < k.in_channels; ++c) {
                const auto ch = in.channel(c);
                for (int j = 0; j < k.taps; ++j) acc += k.w(o, c, j) * ch[base + j];
            }
            out.at(o, l) = acc;
        }
    }
    return out;
}

struct ConvGrads {
    Tensor d_input;
    Vec d_weights;
    Vec d_bias;
};

inline ConvGrads conv1d_backward(const Tensor& in, const ConvKernel& k, int stride,
                                 const Tensor& d_out) {
    ConvGrads g;
    g.d_input = Tensor(in.channels, in.length);
    g.d_weights.assign(k.weights.size(), 0.0);
    g.d_bias.assign(k.bias.size(), 0.0);
    const int out_len = d_out.length;
    for (int o = 0; o < k.out_channels; ++o) {
        for (int l = 0; l < out_len; ++l) {
            const double d = d_out.at(o, l);
            if (d == 0.0) continue;
            g.d_bias[o] += d;
            const int base = l * stride;
            for (int c = 0; c < k.in_channels; ++c) {
                for (int j = 0; j < k.taps; ++j) {
                    g.d_weights[(static_cast<std::size_t>(o) * k.in_channels + c) * k.taps + j] +=
                        d * in.at(c, base + j);
                    g.d_input.at(c, base + j) += d * k.w(o, c, j);
                }
            }
        }
    }
    return g;
}

inline double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }
inline double leaky_relu_grad(double x, double slope) { return x >= 0.0 ? 1.0 : slope; }

struct MaxPoolResult {
    Tensor output;
    std::vector<int> argmax;  // flat source index per output element
};

inline MaxPoolResult maxpool1d_forward(const Tensor& in, int width, int stride) {
    if (width < 1) throw std::invalid_argument("maxpool1d: width must be >= 1");
    if (stride < 1) throw std::invalid_argument("maxpool1d: stride must be >= 1");
    if (in.length < width) throw std::invalid_argument("maxpool1d: input shorter than window");
    const int out_len = conv_output_length(in.length, width, stride);
    MaxPoolResult res;
    res.output = Tensor(in.channels, out_len);
    res.argmax.assign(static_cast<std::size_t>(in.channels) * out_len, 0);
    for (int c = 0; c < in.channels; ++c) {
        const auto ch = in.channel(c);
        for (int l = 0; l < out_len; ++l) {
            const int base = l * stride;
            int best = base;
            for (int j = 1; j < width; ++j)
                if (ch[base + j] > ch[best]) best = base + j;
            res.output.at(c, l) = ch[best];
            res.argmax[static_cast<std::size_t>(c) * out_len + l] = best;
        }
    }
    return res;
}

inline Tensor maxpool1d_backward(const MaxPoolResult& cache, int in_channels, int in_length,
                                 const Tensor& d_out) {
    Tensor d_in(in_channels, in_length);
    const int out_len = d_out.length;
    for (int c = 0; c < in_channels; ++c)
        for (int l = 0; l < out_len; ++l)
            d_in.at(c, cache.argmax[static_cast<std::size_t>(c) * out_len + l]) += d_out.at(c, l);
    return d_in;
}

struct BatchNormCache {
    std::vector<Tensor> xhat;
    Vec inv_std;  // per channel
    long count = 0;
};

// Train mode normalizes by batch statistics (biased variance over samples x
// positions per channel) and updates the running estimates; inference uses
// the running estimates. Requires at least two samples in train mode.
inline Batch batchnorm1d_forward(const Batch& in, std::span<const double> gamma,
                                 std::span<const double> beta, double eps, bool train,
                                 Vec& running_mean, Vec& running_var, double momentum,
                                 BatchNormCache* cache) {
    if (in.empty()) throw std::invalid_argument("batchnorm1d: empty batch");
    const int C = in.front().channels;
    const int L = in.front().length;
    if (train && in.size() < 2)
        throw std::invalid_argument("batchnorm1d: train mode needs batch size >= 2");

    Vec mean(C, 0.0), var(C, 0.0);
    if (train) {
        const double n = static_cast<double>(in.size()) * L;
        for (const Tensor& t : in)
            for (int c = 0; c < C; ++c)
                for (double v : t.channel(c)) mean[c] += v;
        for (double& m : mean) m /= n;
        for (const Tensor& t : in)
            for (int c = 0; c < C; ++c)
                for (double v : t.channel(c)) var[c] += (v - mean[c]) * (v - mean[c]);
        for (double& v : var) v /= n;
        for (int c = 0; c < C; ++c) {
            running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * mean[c];
            running_var[c] = (1.0 - momentum) * running_var[c] + momentum * var[c];
        }
    } else {
        mean = running_mean;
        var = running_var;
    }

    Batch out(in.size(), Tensor(C, L));
    if (cache) {
        cache->xhat.assign(in.size(), Tensor(C, L));
        cache->inv_std.assign(C, 0.0);
        cache->count = static_cast<long>(in.size()) * L;
    }
    for (int c = 0; c < C; ++c) {
        const double inv_std = 1.0 / std::sqrt(var[c] + eps);
        if (cache) cache->inv_std[c] = inv_std;
        for (std::size_t b = 0; b < in.size(); ++b) {
            const auto src = in[b].channel(c);
            auto dst = out[b].channel(c);
            for (int i = 0; i < L; ++i) {
                const double xh = (src[i] - mean[c]) * inv_std;
                if (cache) cache->xhat[b].at(c, i) = xh;
                dst[i] = gamma[c] * xh + beta[c];
            }
        }
    }
    return out;
}

struct BatchNormGrads {
    Batch d_input;
    Vec d_gamma;
    Vec d_beta;
};

inline BatchNormGrads batchnorm1d_backward(const BatchNormCache& cache,
                                           std::span<const double> gamma, const Batch& d_out) {
    const int C = d_out.front().channels;
    const int L = d_out.front().length;
    const double n = static_cast<double>(cache.count);

    BatchNormGrads g;
    g.d_input.assign(d_out.size(), Tensor(C, L));
    g.d_gamma.assign(C, 0.0);
    g.d_beta.assign(C, 0.0);

    for (int c = 0; c < C; ++c) {
        double sum_d = 0.0, sum_dx = 0.0;
        for (std::size_t b = 0; b < d_out.size(); ++b) {
            for (int i = 0; i < L; ++i) {
                const double d = d_out[b].at(c, i);
                sum_d += d;
                sum_dx += d * cache.xhat[b].at(c, i);
            }
        }
        g.d_beta[c] = sum_d;
        g.d_gamma[c] = sum_dx;
        const double scale = gamma[c] * cache.inv_std[c];
        for (std::size_t b = 0; b < d_out.size(); ++b) {
            for (int i = 0; i < L; ++i) {
                const double d = d_out[b].at(c, i);
                g.d_input[b].at(c, i) =
                    scale * (d - sum_d / n - cache.xhat[b].at(c, i) * sum_dx / n);
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Layer wrappers for network assembly.

class Layer {
  public:
    virtual ~Layer() = default;
    virtual Batch forward(const Batch& in, bool train) = 0;
    virtual Batch backward(const Batch& d_out) = 0;
    virtual void collect_params(std::vector<std::span<double>>& params,
                                std::vector<std::span<double>>& grads) {}
    // Non-trainable state that still belongs in a serialized model
    // (batch-norm running statistics).
    virtual void collect_buffers(std::vector<std::span<double>>& buffers) {}
    virtual void zero_grads() {}
    virtual std::pair<int, int> output_shape(std::pair<int, int> in) const = 0;
    virtual std::string name() const = 0;
};

class Conv1dLayer final : public Layer {
  public:
    Conv1dLayer(int in_channels, int out_channels, int kernel, int stride, Rng& rng)
        : kernel_(out_channels, in_channels, kernel), stride_(stride) {
        he_initialize(kernel_.weights, static_cast<std::size_t>(in_channels) * kernel, rng);
        d_weights_.assign(kernel_.weights.size(), 0.0);
        d_bias_.assign(kernel_.bias.size(), 0.0);
    }

    Batch forward(const Batch& in, bool) override {
        input_ = in;
        Batch out;
        out.reserve(in.size());
        for (const Tensor& t : in) out.push_back(conv1d_forward(t, kernel_, stride_));
        return out;
    }

    Batch backward(const Batch& d_out) override {
        Batch d_in(d_out.size());
        for (std::size_t b = 0; b < d_out.size(); ++b) {
            ConvGrads g = conv1d_backward(input_[b], kernel_, stride_, d_out[b]);
            d_in[b] = std::move(g.d_input);
            for (std::size_t i = 0; i < d_weights_.size(); ++i) d_weights_[i] += g.d_weights[i];
            for (std::size_t i = 0; i < d_bias_.size(); ++i) d_bias_[i] += g.d_bias[i];
        }
        return d_in;
    }

    void collect_params(std::vector<std::span<double>>& params,
                        std::vector<std::span<double>>& grads) override {
        params.push_back(kernel_.weights);
        grads.push_back(d_weights_);
        params.push_back(kernel_.bias);
        grads.push_back(d_bias_);
    }

    void zero_grads() override {
        std::fill(d_weights_.begin(), d_weights_.end(), 0.0);
        std::fill(d_bias_.begin(), d_bias_.end(), 0.0);
    }

    std::pair<int, int> output_shape(std::pair<int, int> in) const override {
        return {kernel_.out_channels, conv_output_length(in.second, kernel_.taps, stride_)};
    }

    std::string name() const override { return "conv1d"; }

  private:
    ConvKernel kernel_;
    int stride_;
    Batch input_;
    Vec d_weights_, d_bias_;
};

class BatchNorm1dLayer final : public Layer {
  public:
    explicit BatchNorm1dLayer(int channels, double eps = 1e-5, double momentum = 0.1)
        : gamma_(channels, 1.0), beta_(channels, 0.0), running_mean_(channels, 0.0),
          running_var_(channels, 1.0), d_gamma_(channels, 0.0), d_beta_(channels, 0.0),
          eps_(eps), momentum_(momentum) {}

    Batch forward(const Batch& in, bool train) override {
        return batchnorm1d_forward(in, gamma_, beta_, eps_, train, running_mean_, running_var_,
                                   momentum_, &cache_);
    }

    Batch backward(const Batch& d_out) override {
        BatchNormGrads g = batchnorm1d_backward(cache_, gamma_, d_out);
        for (std::size_t i = 0; i < d_gamma_.size(); ++i) {
            d_gamma_[i] += g.d_gamma[i];
            d_beta_[i] += g.d_beta[i];
        }
        return std::move(g.d_input);
    }

    void collect_params(std::vector<std::span<double>>& params,
                        std::vector<std::span<double>>& grads) override {
        params.push_back(gamma_);
        grads.push_back(d_gamma_);
        params.push_back(beta_);
        grads.push_back(d_beta_);
    }

    void collect_buffers(std::vector<std::span<double>>& buffers) override {
        buffers.push_back(running_mean_);
        buffers.push_back(running_var_);
    }

    void zero_grads() override {
        std::fill(d_gamma_.begin(), d_gamma_.end(), 0.0);
        std::fill(d_beta_.begin(), d_beta_.end(), 0.0);
    }

    std::pair<int, int> output_shape(std::pair<int, int> in) const override { return in; }
    std::string name() const override { return "batchnorm"; }

    Vec& running_mean() { return running_mean_; }
    Vec& running_var() { return running_var_; }

  private:
    Vec gamma_, beta_, running_mean_, running_var_, d_gamma_, d_beta_;
    double eps_, momentum_;
    BatchNormCache cache_;
};

class LeakyReluLayer final : public Layer {
  public:
    explicit LeakyReluLayer(double slope = 0.01) : slope_(slope) {}

    Batch forward(const Batch& in, bool) override {
        input_ = in;
        Batch out = in;
        for (Tensor& t : out)
            for (double& v : t.data) v = leaky_relu(v, slope_);
        return out;
    }

    Batch backward(const Batch& d_out) override {
        Batch d_in = d_out;
        for (std::size_t b = 0; b < d_out.size(); ++b)
            for (std::size_t i = 0; i < d_in[b].data.size(); ++i)
                d_in[b].data[i] *= leaky_relu_grad(input_[b].data[i], slope_);
        return d_in;
    }

    std::pair<int, int> output_shape(std::pair<int, int> in) const override { return in; }
    std::string name() const override { return "leaky_relu"; }

  private:
    double slope_;
    Batch input_;
};

class MaxPool1dLayer final : public Layer {
  public:
    MaxPool1dLayer(int width, int stride) : width_(width), stride_(stride) {}

    Batch forward(const Batch& in, bool) override {
        in_channels_ = in.front().channels;
        in_length_ = in.front().length;
        caches_.clear();
        Batch out;
        out.reserve(in.size());
        for (const Tensor& t : in) {
            caches_.push_back(maxpool1d_forward(t, width_, stride_));
            out.push_back(caches_.back().output);
        }
        return out;
    }

    Batch backward(const Batch& d_out) override {
        Batch d_in(d_out.size());
        for (std::size_t b = 0; b < d_out.size(); ++b)
            d_in[b] = maxpool1d_backward(caches_[b], in_channels_, in_length_, d_out[b]);
        return d_in;
    }

    std::pair<int, int> output_shape(std::pair<int, int> in) const override {
        return {in.first, conv_output_length(in.second, width_, stride_)};
    }

    std::string name() const override { return "maxpool"; }

  private:
    int width_, stride_;
    int in_channels_ = 0, in_length_ = 0;
    std::vector<MaxPoolResult> caches_;
};

// Inverted dropout; identity at inference.
class DropoutLayer final : public Layer {
  public:
    DropoutLayer(double p, std::uint64_t seed) : p_(p), rng_(seed) {
        if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: need 0 <= p < 1");
    }

    Batch forward(const Batch& in, bool train) override {
        if (!train || p_ == 0.0) {
            masks_.clear();
            return in;
        }
        const double keep = 1.0 - p_;
        masks_.assign(in.size(), Vec());
        Batch out = in;
        for (std::size_t b = 0; b < in.size(); ++b) {
            masks_[b].resize(in[b].data.size());
            for (std::size_t i = 0; i < masks_[b].size(); ++i) {
                masks_[b][i] = rng_.uniform() < p_ ? 0.0 : 1.0 / keep;
                out[b].data[i] *= masks_[b][i];
            }
        }
        return out;
    }

    Batch backward(const Batch& d_out) override {
        if (masks_.empty()) return d_out;
        Batch d_in = d_out;
        for (std::size_t b = 0; b < d_out.size(); ++b)
            for (std::size_t i = 0; i < d_in[b].data.size(); ++i) d_in[b].data[i] *= masks_[b][i];
        return d_in;
    }

    std::pair<int, int> output_shape(std::pair<int, int> in) const override { return in; }
    std::string name() const override { return "dropout"; }

    void set_p(double p) { p_ = p; }

  private:
    double p_;
    Rng rng_;
    std::vector<Vec> masks_;
};

}  // namespace hawknet::nn
