#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicelab/core/rng.hpp"

namespace slicelab::rlcore {

enum class Activation { identity, tanh, relu, softmax };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

struct LayerSpec {
    int in = 0;
    int out = 0;
    Activation act = Activation::identity;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Layer chain of a dense network. Parameters are laid out layer by layer,
/// each as a row-major (out x in) weight matrix followed by its bias.
struct Architecture {
    std::vector<LayerSpec> layers;

    int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
    std::size_t num_params() const;
    /// Throws Error when consecutive dimensions do not chain.
    void validate() const;

    nlohmann::json to_json() const;
    static Architecture from_json(const nlohmann::json& j);

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Architecture descriptor plus flat parameter vector.
struct PolicyParams {
    Architecture arch;
    std::vector<double> flat;

    friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

/// Multilayer perceptron with hand-written reverse-mode gradients.
class DenseNet {
public:
    /// Activations of one forward pass: values[0] is the input, values[l+1]
    /// the post-activation output of layer l.
    struct Tape {
        std::vector<std::vector<double>> values;
    };

    DenseNet() = default;
    /// Zero-initialised network.
    explicit DenseNet(Architecture arch);
    explicit DenseNet(PolicyParams p);

    /// Glorot-uniform weights (times `out_gain` on the last layer), zero biases.
    static DenseNet mlp(int input_dim, std::span<const int> hidden, int output_dim, Activation hidden_act,
                        Activation output_act, Rng& rng, double out_gain = 1.0);

    const Architecture& arch() const { return arch_; }
    int input_dim() const { return arch_.input_dim(); }
    int output_dim() const { return arch_.output_dim(); }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }
    std::size_t num_params() const { return params_.size(); }

    PolicyParams policy_params() const { return {arch_, params_}; }

    /// Throws Error on a dimension mismatch or non-finite input.
    std::vector<double> forward(std::span<const double> x) const;
    std::vector<double> forward(std::span<const double> x, Tape& tape) const;

    /// Adds d<upstream, forward(x)>/d(params) into `grad`, using the tape of
    /// that forward pass.
    void backward(const Tape& tape, std::span<const double> upstream, std::span<double> grad) const;
    /// Convenience: runs forward itself and returns a fresh gradient vector.
    std::vector<double> backward(std::span<const double> x, std::span<const double> upstream) const;

private:
    Architecture arch_;
    std::vector<double> params_;
    std::vector<std::size_t> offsets_;
};

}  // namespace slicelab::rlcore
