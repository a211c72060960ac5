// Network assembly: an ordered convolutional front end followed by exactly one
// classification head. The head is always the recurrent cell from fenn.hpp,
// fed one feature vector (all channels) per retained time index; the mlp and
// enn variants freeze the corresponding connection tensors at zero:
//   mlp  - w3..w9 zero (per-step feedforward, final step classifies)
//   enn  - w3, w6..w9 zero (hidden-side contexts only)
//   fenn - everything trainable
//
// Parameters serialize to a versioned JSON description plus a raw
// little-endian float64 blob whose FNV-1a checksum is recorded in the JSON.

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hawknet/io.hpp"
#include "hawknet/linalg.hpp"
#include "hawknet/nn/fenn.hpp"
#include "hawknet/nn/layers.hpp"
#include "hawknet/rng.hpp"

namespace hawknet::nn {

enum class HeadKind { mlp, enn, fenn };

inline const char* to_string(HeadKind h) {
    switch (h) {
        case HeadKind::mlp: return "mlp";
        case HeadKind::enn: return "enn";
        case HeadKind::fenn: return "fenn";
    }
    return "?";
}

inline HeadKind head_from_string(const std::string& s) {
    if (s == "mlp") return HeadKind::mlp;
    if (s == "enn") return HeadKind::enn;
    if (s == "fenn") return HeadKind::fenn;
    throw std::invalid_argument("unknown head kind: " + s);
}

struct LayerSpec {
    enum class Kind { conv1d, batchnorm, leaky_relu, maxpool, dropout };
    Kind kind = Kind::conv1d;
    int out_channels = 0;  // conv1d
    int kernel = 0;        // conv1d
    int stride = 1;        // conv1d / maxpool
    int width = 0;         // maxpool
    double slope = 0.01;   // leaky_relu
    double p = 0.0;        // dropout

    static LayerSpec conv(int out_channels, int kernel, int stride) {
        LayerSpec s;
        s.kind = Kind::conv1d;
        s.out_channels = out_channels;
        s.kernel = kernel;
        s.stride = stride;
        return s;
    }
    static LayerSpec batchnorm() { return {.kind = Kind::batchnorm}; }
    static LayerSpec leaky_relu(double slope = 0.01) {
        LayerSpec s;
        s.kind = Kind::leaky_relu;
        s.slope = slope;
        return s;
    }
    static LayerSpec maxpool(int width, int stride) {
        LayerSpec s;
        s.kind = Kind::maxpool;
        s.width = width;
        s.stride = stride;
        return s;
    }
    static LayerSpec dropout(double p) {
        LayerSpec s;
        s.kind = Kind::dropout;
        s.p = p;
        return s;
    }
};

struct NetworkSpec {
    int input_channels = 1;
    int input_length = 300;
    std::vector<LayerSpec> layers;
    HeadKind head = HeadKind::fenn;
    int hidden = 20;
    int classes = 2;
};

// Desk-scale default topology for 300-sample segments: two conv blocks with
// batch normalization, leaky ReLU and pooling, dropout, then the recurrent
// head over the 17 remaining time steps.
inline NetworkSpec default_network_spec(HeadKind head) {
    NetworkSpec spec;
    spec.head = head;
    spec.layers = {
        LayerSpec::conv(6, 7, 2),  LayerSpec::batchnorm(), LayerSpec::leaky_relu(),
        LayerSpec::maxpool(2, 2),  LayerSpec::conv(12, 5, 2), LayerSpec::batchnorm(),
        LayerSpec::leaky_relu(),   LayerSpec::maxpool(2, 2),  LayerSpec::dropout(0.2),
    };
    return spec;
}

namespace detail {

inline const char* kind_name(LayerSpec::Kind k) {
    switch (k) {
        case LayerSpec::Kind::conv1d: return "conv1d";
        case LayerSpec::Kind::batchnorm: return "batchnorm";
        case LayerSpec::Kind::leaky_relu: return "leaky_relu";
        case LayerSpec::Kind::maxpool: return "maxpool";
        case LayerSpec::Kind::dropout: return "dropout";
    }
    return "?";
}

inline LayerSpec::Kind kind_from_name(const std::string& s) {
    if (s == "conv1d") return LayerSpec::Kind::conv1d;
    if (s == "batchnorm") return LayerSpec::Kind::batchnorm;
    if (s == "leaky_relu") return LayerSpec::Kind::leaky_relu;
    if (s == "maxpool") return LayerSpec::Kind::maxpool;
    if (s == "dropout") return LayerSpec::Kind::dropout;
    throw std::invalid_argument("unknown layer kind: " + s);
}

}  // namespace detail

inline nlohmann::json network_spec_to_json(const NetworkSpec& spec) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : spec.layers) {
        nlohmann::json j{{"kind", detail::kind_name(l.kind)}};
        switch (l.kind) {
            case LayerSpec::Kind::conv1d:
                j["out_channels"] = l.out_channels;
                j["kernel"] = l.kernel;
                j["stride"] = l.stride;
                break;
            case LayerSpec::Kind::maxpool:
                j["width"] = l.width;
                j["stride"] = l.stride;
                break;
            case LayerSpec::Kind::leaky_relu: j["slope"] = l.slope; break;
            case LayerSpec::Kind::dropout: j["p"] = l.p; break;
            case LayerSpec::Kind::batchnorm: break;
        }
        layers.push_back(j);
    }
    return nlohmann::json{{"input_channels", spec.input_channels},
                          {"input_length", spec.input_length},
                          {"layers", layers},
                          {"head", to_string(spec.head)},
                          {"hidden", spec.hidden},
                          {"classes", spec.classes}};
}

inline NetworkSpec network_spec_from_json(const nlohmann::json& j) {
    NetworkSpec spec;
    spec.input_channels = j.at("input_channels").get<int>();
    spec.input_length = j.at("input_length").get<int>();
    spec.head = head_from_string(j.at("head").get<std::string>());
    spec.hidden = j.at("hidden").get<int>();
    spec.classes = j.at("classes").get<int>();
    for (const auto& lj : j.at("layers")) {
        LayerSpec l;
        l.kind = detail::kind_from_name(lj.at("kind").get<std::string>());
        switch (l.kind) {
            case LayerSpec::Kind::conv1d:
                l.out_channels = lj.at("out_channels").get<int>();
                l.kernel = lj.at("kernel").get<int>();
                l.stride = lj.at("stride").get<int>();
                break;
            case LayerSpec::Kind::maxpool:
                l.width = lj.at("width").get<int>();
                l.stride = lj.at("stride").get<int>();
                break;
            case LayerSpec::Kind::leaky_relu: l.slope = lj.at("slope").get<double>(); break;
            case LayerSpec::Kind::dropout: l.p = lj.at("p").get<double>(); break;
            case LayerSpec::Kind::batchnorm: break;
        }
        spec.layers.push_back(l);
    }
    return spec;
}

// Recurrent head over the feature map: time index -> one length-C feature
// vector. Classification reads the final step's output distribution.
class FennHead {
  public:
    FennHead() = default;
    FennHead(HeadKind kind, int hidden, int feature_channels, int classes, Rng& rng)
        : kind_(kind), params_(hidden, feature_channels, classes),
          grads_(hidden, feature_channels, classes) {
        he_initialize(params_.w1.data, static_cast<std::size_t>(feature_channels), rng);
        he_initialize(params_.w2.data, static_cast<std::size_t>(hidden), rng);
        if (kind == HeadKind::fenn)
            he_initialize(params_.w3.data, static_cast<std::size_t>(feature_channels), rng);
        if (kind != HeadKind::mlp) {
            he_initialize(params_.w4.data, static_cast<std::size_t>(hidden), rng);
            he_initialize(params_.w5.data, static_cast<std::size_t>(hidden), rng);
        }
        if (kind == HeadKind::fenn) {
            he_initialize(params_.w6.data, static_cast<std::size_t>(hidden), rng);
            he_initialize(params_.w7.data, static_cast<std::size_t>(classes), rng);
            he_initialize(params_.w8.data, static_cast<std::size_t>(classes), rng);
            he_initialize(params_.w9.data, static_cast<std::size_t>(classes), rng);
        }
        // Recurrent tensors start small so early sequences stay well-scaled.
        for (Matrix* m : {&params_.w4, &params_.w5, &params_.w6, &params_.w7, &params_.w8,
                          &params_.w9})
            for (double& v : m->data) v *= 0.3;
    }

    // One trace per batch sample.
    std::vector<Vec> forward(const Batch& features, bool train) {
        traces_.clear();
        inputs_.clear();
        std::vector<Vec> probs;
        probs.reserve(features.size());
        for (const Tensor& t : features) {
            Matrix seq(t.length, t.channels);
            for (int step = 0; step < t.length; ++step)
                for (int c = 0; c < t.channels; ++c) seq(step, c) = t.at(c, step);
            FennTrace trace = fenn_sequence_forward(params_, seq);
            probs.push_back(trace.y.back());
            if (train) {
                traces_.push_back(std::move(trace));
                inputs_.push_back(std::move(seq));
            }
        }
        return probs;
    }

    // dy per sample, injected at the final step.
    Batch backward(const std::vector<Vec>& dy_final) {
        Batch d_features(dy_final.size());
        for (std::size_t b = 0; b < dy_final.size(); ++b) {
            FennStepGrad sg{static_cast<int>(inputs_[b].rows) - 1, dy_final[b]};
            auto bw = fenn_backward_from_dy(params_, inputs_[b], traces_[b],
                                            std::span<const FennStepGrad>(&sg, 1));
            accumulate(bw.grads);
            Tensor d(static_cast<int>(inputs_[b].cols), static_cast<int>(inputs_[b].rows));
            for (std::size_t step = 0; step < inputs_[b].rows; ++step)
                for (std::size_t c = 0; c < inputs_[b].cols; ++c)
                    d.at(static_cast<int>(c), static_cast<int>(step)) = bw.d_inputs(step, c);
            d_features[b] = std::move(d);
        }
        mask_frozen();
        return d_features;
    }

    void collect_params(std::vector<std::span<double>>& params,
                        std::vector<std::span<double>>& grads) {
        params_.for_each_tensor([&](const char*, std::span<double> s) { params.push_back(s); });
        grads_.for_each_tensor([&](const char*, std::span<double> s) { grads.push_back(s); });
    }

    void zero_grads() {
        grads_.for_each_tensor(
            [](const char*, std::span<double> s) { std::fill(s.begin(), s.end(), 0.0); });
    }

    FennParameters& parameters() { return params_; }
    const FennParameters& parameters() const { return params_; }
    HeadKind kind() const { return kind_; }

  private:
    void accumulate(FennGradients& g) {
        std::vector<std::span<double>> mine;
        grads_.for_each_tensor([&](const char*, std::span<double> s) { mine.push_back(s); });
        std::size_t idx = 0;
        g.for_each_tensor([&](const char*, std::span<double> s) {
            for (std::size_t i = 0; i < s.size(); ++i) mine[idx][i] += s[i];
            ++idx;
        });
    }

    // Frozen tensors (zero-initialized by construction) keep zero gradients so
    // the ablation heads never grow the disabled connections.
    void mask_frozen() {
        if (kind_ == HeadKind::fenn) return;
        std::fill(grads_.w3.data.begin(), grads_.w3.data.end(), 0.0);
        std::fill(grads_.w6.data.begin(), grads_.w6.data.end(), 0.0);
        std::fill(grads_.w7.data.begin(), grads_.w7.data.end(), 0.0);
        std::fill(grads_.w8.data.begin(), grads_.w8.data.end(), 0.0);
        std::fill(grads_.w9.data.begin(), grads_.w9.data.end(), 0.0);
        if (kind_ == HeadKind::mlp) {
            std::fill(grads_.w4.data.begin(), grads_.w4.data.end(), 0.0);
            std::fill(grads_.w5.data.begin(), grads_.w5.data.end(), 0.0);
        }
    }

    HeadKind kind_ = HeadKind::fenn;
    FennParameters params_;
    FennGradients grads_;
    std::vector<FennTrace> traces_;
    std::vector<Matrix> inputs_;
};

class Network {
  public:
    Network() = default;

    Network(const NetworkSpec& spec, std::uint64_t init_seed) : spec_(spec) {
        Rng rng(derive_seed(init_seed, 0x696e6974ULL));
        std::pair<int, int> shape{spec.input_channels, spec.input_length};
        int dropout_index = 0;
        for (const auto& l : spec.layers) {
            switch (l.kind) {
                case LayerSpec::Kind::conv1d:
                    layers_.push_back(
                        std::make_unique<Conv1dLayer>(shape.first, l.out_channels, l.kernel,
                                                      l.stride, rng));
                    break;
                case LayerSpec::Kind::batchnorm:
                    layers_.push_back(std::make_unique<BatchNorm1dLayer>(shape.first));
                    break;
                case LayerSpec::Kind::leaky_relu:
                    layers_.push_back(std::make_unique<LeakyReluLayer>(l.slope));
                    break;
                case LayerSpec::Kind::maxpool:
                    layers_.push_back(std::make_unique<MaxPool1dLayer>(l.width, l.stride));
                    break;
                case LayerSpec::Kind::dropout:
                    layers_.push_back(std::make_unique<DropoutLayer>(
                        l.p, derive_seed(init_seed, 0x64726f70ULL + dropout_index++)));
                    break;
            }
            shape = layers_.back()->output_shape(shape);
            if (shape.second < 1)
                throw std::invalid_argument("network: layer '" + layers_.back()->name() +
                                            "' collapses the sequence below length 1");
        }
        feature_shape_ = shape;
        head_ = FennHead(spec.head, spec.hidden, shape.first, spec.classes, rng);
    }

    // Probability vectors, one per sample.
    std::vector<Vec> forward(const Batch& batch, bool train) {
        Batch cur = batch;
        for (auto& l : layers_) cur = l->forward(cur, train);
        return head_.forward(cur, train);
    }

    // dy per sample (gradient of the mean batch loss w.r.t. the final-step
    // output distribution). Accumulates parameter gradients.
    void backward(const std::vector<Vec>& dy) {
        Batch d = head_.backward(dy);
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) d = (*it)->backward(d);
    }

    void zero_grads() {
        for (auto& l : layers_) l->zero_grads();
        head_.zero_grads();
    }

    void collect_params(std::vector<std::span<double>>& params,
                        std::vector<std::span<double>>& grads) {
        for (auto& l : layers_) l->collect_params(params, grads);
        head_.collect_params(params, grads);
    }

    // Trainable parameters followed by persistent buffers: everything a
    // serialized model needs to reproduce inference.
    std::vector<std::span<double>> serializable_state() {
        std::vector<std::span<double>> params, grads;
        collect_params(params, grads);
        for (auto& l : layers_) l->collect_buffers(params);
        return params;
    }

    std::size_t parameter_count() {
        std::vector<std::span<double>> p, g;
        collect_params(p, g);
        std::size_t n = 0;
        for (const auto& s : p) n += s.size();
        return n;
    }

    const NetworkSpec& spec() const { return spec_; }
    std::pair<int, int> feature_shape() const { return feature_shape_; }
    FennHead& head() { return head_; }

    // Versioned JSON description + raw float64 blob with recorded checksum.
    void save(const std::filesystem::path& prefix) {
        const std::vector<std::span<double>> params = serializable_state();
        Vec flat;
        nlohmann::json tensors = nlohmann::json::array();
        std::size_t offset = 0;
        for (std::size_t i = 0; i < params.size(); ++i) {
            tensors.push_back({{"index", i}, {"offset", offset}, {"count", params[i].size()}});
            flat.insert(flat.end(), params[i].begin(), params[i].end());
            offset += params[i].size();
        }
        const std::string blob = io::doubles_to_bytes(flat);
        nlohmann::json j{{"format_version", 1},
                         {"dtype", "f64le"},
                         {"spec", network_spec_to_json(spec_)},
                         {"tensors", tensors},
                         {"checksum_fnv1a64", io::to_hex(io::fnv1a64(blob.data(), blob.size()))}};
        io::write_file_atomic(prefix.string() + ".json", j.dump(2) + "\n");
        io::write_file_atomic(prefix.string() + ".bin", blob);
    }

    static Network load(const std::filesystem::path& prefix) {
        const auto j = nlohmann::json::parse(io::read_file(prefix.string() + ".json"));
        if (j.at("format_version").get<int>() != 1)
            throw std::runtime_error("unsupported model format version");
        const std::string blob = io::read_file(prefix.string() + ".bin");
        const std::string checksum = io::to_hex(io::fnv1a64(blob.data(), blob.size()));
        if (checksum != j.at("checksum_fnv1a64").get<std::string>())
            throw std::runtime_error("model blob checksum mismatch");
        Network net(network_spec_from_json(j.at("spec")), 0);
        const Vec flat = io::bytes_to_doubles(blob);
        const std::vector<std::span<double>> params = net.serializable_state();
        std::size_t offset = 0;
        for (auto& s : params) {
            if (offset + s.size() > flat.size()) throw std::runtime_error("model blob too short");
            std::copy(flat.begin() + offset, flat.begin() + offset + s.size(), s.begin());
            offset += s.size();
        }
        if (offset != flat.size()) throw std::runtime_error("model blob size mismatch");
        return net;
    }

    void set_dropout(double p) {
        for (auto& l : layers_)
            if (auto* d = dynamic_cast<DropoutLayer*>(l.get())) d->set_p(p);
    }

  private:
    NetworkSpec spec_;
    std::vector<std::unique_ptr<Layer>> layers_;
    FennHead head_;
    std::pair<int, int> feature_shape_{0, 0};
};

}  // namespace hawknet::nn
