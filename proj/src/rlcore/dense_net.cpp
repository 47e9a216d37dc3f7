#include "slicelab/rlcore/dense_net.hpp"

#include <algorithm>
#include <cmath>

#include "slicelab/core/types.hpp"

namespace slicelab::rlcore {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::softmax: return "softmax";
    }
    return "identity";
}

Activation parse_activation(const std::string& s) {
    if (s == "identity") return Activation::identity;
    if (s == "tanh") return Activation::tanh;
    if (s == "relu") return Activation::relu;
    if (s == "softmax") return Activation::softmax;
    throw Error("unknown activation '" + s + "'");
}

std::size_t Architecture::num_params() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.out) * (l.in + 1);
    return n;
}

void Architecture::validate() const {
    if (layers.empty()) throw Error("network needs at least one layer");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].in <= 0 || layers[i].out <= 0) throw Error("layer dimensions must be positive");
        if (i > 0 && layers[i].in != layers[i - 1].out)
            throw Error("layer " + std::to_string(i) + " input does not match previous output");
    }
}

nlohmann::json Architecture::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& l : layers) arr.push_back({{"in", l.in}, {"out", l.out}, {"act", to_string(l.act)}});
    return {{"layers", arr}};
}

Architecture Architecture::from_json(const nlohmann::json& j) {
    Architecture a;
    for (const auto& l : j.at("layers"))
        a.layers.push_back({l.at("in").get<int>(), l.at("out").get<int>(), parse_activation(l.at("act"))});
    a.validate();
    return a;
}

DenseNet::DenseNet(Architecture arch) : arch_(std::move(arch)) {
    arch_.validate();
    params_.assign(arch_.num_params(), 0.0);
    std::size_t off = 0;
    for (const auto& l : arch_.layers) {
        offsets_.push_back(off);
        off += static_cast<std::size_t>(l.out) * (l.in + 1);
    }
}

DenseNet::DenseNet(PolicyParams p) : DenseNet(std::move(p.arch)) {
    if (p.flat.size() != params_.size())
        throw Error("parameter vector has " + std::to_string(p.flat.size()) + " entries, architecture needs " +
                    std::to_string(params_.size()));
    for (double v : p.flat)
        if (!std::isfinite(v)) throw Error("non-finite network parameter");
    params_ = std::move(p.flat);
}

DenseNet DenseNet::mlp(int input_dim, std::span<const int> hidden, int output_dim, Activation hidden_act,
                       Activation output_act, Rng& rng, double out_gain) {
    Architecture a;
    int prev = input_dim;
    for (int h : hidden) {
        a.layers.push_back({prev, h, hidden_act});
        prev = h;
    }
    a.layers.push_back({prev, output_dim, output_act});
    DenseNet net(a);
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        const auto& spec = a.layers[l];
        const double gain = (l + 1 == a.layers.size()) ? out_gain : 1.0;
        const double limit = gain * std::sqrt(6.0 / (spec.in + spec.out));
        double* w = net.params_.data() + net.offsets_[l];
        for (int i = 0; i < spec.out * spec.in; ++i) w[i] = rng.uniform(-limit, limit);
    }
    return net;
}

std::vector<double> DenseNet::forward(std::span<const double> x) const {
    Tape tape;
    return forward(x, tape);
}

std::vector<double> DenseNet::forward(std::span<const double> x, Tape& tape) const {
    if (static_cast<int>(x.size()) != input_dim())
        throw Error("network expects input of size " + std::to_string(input_dim()) + ", got " +
                    std::to_string(x.size()));
    for (double v : x)
        if (!std::isfinite(v)) throw Error("non-finite network input");

    tape.values.resize(arch_.layers.size() + 1);
    tape.values[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < arch_.layers.size(); ++l) {
        const auto& spec = arch_.layers[l];
        const double* w = params_.data() + offsets_[l];
        const double* b = w + static_cast<std::size_t>(spec.out) * spec.in;
        const auto& in = tape.values[l];
        auto& out = tape.values[l + 1];
        out.resize(spec.out);
        for (int o = 0; o < spec.out; ++o) {
            const double* row = w + static_cast<std::size_t>(o) * spec.in;
            double s = b[o];
            for (int i = 0; i < spec.in; ++i) s += row[i] * in[i];
            out[o] = s;
        }
        switch (spec.act) {
            case Activation::identity: break;
            case Activation::tanh:
                for (auto& v : out) v = std::tanh(v);
                break;
            case Activation::relu:
                for (auto& v : out) v = v > 0.0 ? v : 0.0;
                break;
            case Activation::softmax: {
                const double m = *std::max_element(out.begin(), out.end());
                double z = 0.0;
                for (auto& v : out) z += (v = std::exp(v - m));
                for (auto& v : out) v /= z;
                break;
            }
        }
    }
    return tape.values.back();
}

void DenseNet::backward(const Tape& tape, std::span<const double> upstream, std::span<double> grad) const {
    if (static_cast<int>(upstream.size()) != output_dim())
        throw Error("upstream gradient has size " + std::to_string(upstream.size()) + ", network output is " +
                    std::to_string(output_dim()));
    if (grad.size() != params_.size()) throw Error("gradient buffer does not match parameter count");
    if (tape.values.size() != arch_.layers.size() + 1) throw Error("tape does not match network");

    std::vector<double> delta(upstream.begin(), upstream.end());
    std::vector<double> below;
    for (std::size_t l = arch_.layers.size(); l-- > 0;) {
        const auto& spec = arch_.layers[l];
        const auto& y = tape.values[l + 1];
        switch (spec.act) {
            case Activation::identity: break;
            case Activation::tanh:
                for (int o = 0; o < spec.out; ++o) delta[o] *= 1.0 - y[o] * y[o];
                break;
            case Activation::relu:
                for (int o = 0; o < spec.out; ++o)
                    if (!(y[o] > 0.0)) delta[o] = 0.0;
                break;
            case Activation::softmax: {
                double dot = 0.0;
                for (int o = 0; o < spec.out; ++o) dot += delta[o] * y[o];
                for (int o = 0; o < spec.out; ++o) delta[o] = y[o] * (delta[o] - dot);
                break;
            }
        }
        const auto& in = tape.values[l];
        const double* w = params_.data() + offsets_[l];
        double* gw = grad.data() + offsets_[l];
        double* gb = gw + static_cast<std::size_t>(spec.out) * spec.in;
        below.assign(spec.in, 0.0);
        for (int o = 0; o < spec.out; ++o) {
            const double d = delta[o];
            gb[o] += d;
            if (d == 0.0) continue;
            const double* row = w + static_cast<std::size_t>(o) * spec.in;
            double* grow = gw + static_cast<std::size_t>(o) * spec.in;
            for (int i = 0; i < spec.in; ++i) {
                grow[i] += d * in[i];
                below[i] += d * row[i];
            }
        }
        delta.swap(below);
    }
}

std::vector<double> DenseNet::backward(std::span<const double> x, std::span<const double> upstream) const {
    Tape tape;
    forward(x, tape);
    std::vector<double> grad(params_.size(), 0.0);
    backward(tape, upstream, grad);
    return grad;
}

}  // namespace slicelab::rlcore
