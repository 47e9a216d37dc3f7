#include "slicelab/rlcore/batch_grad.hpp"

#include <cmath>

#include <omp.h>

#include "slicelab/core/types.hpp"

namespace slicelab::rlcore {

namespace {

void check_inputs(const DenseNet& net, std::span<const double> inputs, std::size_t batch) {
    if (inputs.size() != batch * static_cast<std::size_t>(net.input_dim()))
        throw Error("batch input has " + std::to_string(inputs.size()) + " values, expected " +
                    std::to_string(batch * net.input_dim()));
    // forward() would throw inside the parallel region otherwise.
    for (double v : inputs)
        if (!std::isfinite(v)) throw Error("non-finite network input");
}

}  // namespace

BatchGradient batch_gradient_serial(const DenseNet& net, std::span<const double> inputs, std::size_t batch,
                                    const SampleLossFn& loss) {
    check_inputs(net, inputs, batch);
    const auto in_dim = static_cast<std::size_t>(net.input_dim());
    const auto p = net.num_params();
    BatchGradient out{std::vector<double>(p, 0.0), 0.0};
    std::vector<double> sample_grad(p);
    std::vector<double> upstream(net.output_dim());
    DenseNet::Tape tape;
    for (std::size_t i = 0; i < batch; ++i) {
        const auto y = net.forward(inputs.subspan(i * in_dim, in_dim), tape);
        std::fill(upstream.begin(), upstream.end(), 0.0);
        out.loss += loss(i, y, upstream);
        std::fill(sample_grad.begin(), sample_grad.end(), 0.0);
        net.backward(tape, upstream, sample_grad);
        for (std::size_t k = 0; k < p; ++k) out.grad[k] += sample_grad[k];
    }
    return out;
}

BatchGradient batch_gradient_parallel(const DenseNet& net, std::span<const double> inputs, std::size_t batch,
                                      const SampleLossFn& loss) {
    check_inputs(net, inputs, batch);
    const auto in_dim = static_cast<std::size_t>(net.input_dim());
    const auto p = net.num_params();
    std::vector<double> slots(batch * p, 0.0);
    std::vector<double> losses(batch, 0.0);

#pragma omp parallel
    {
        DenseNet::Tape tape;
        std::vector<double> upstream(net.output_dim());
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(batch); ++i) {
            const auto s = static_cast<std::size_t>(i);
            const auto y = net.forward(inputs.subspan(s * in_dim, in_dim), tape);
            std::fill(upstream.begin(), upstream.end(), 0.0);
            losses[s] = loss(s, y, upstream);
            net.backward(tape, upstream, std::span<double>(slots).subspan(s * p, p));
        }
    }

    BatchGradient out{std::vector<double>(p, 0.0), 0.0};
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(p); ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < batch; ++i) acc += slots[i * p + static_cast<std::size_t>(k)];
        out.grad[static_cast<std::size_t>(k)] = acc;
    }
    for (double l : losses) out.loss += l;
    return out;
}

BatchGradient batch_gradient(const DenseNet& net, std::span<const double> inputs, std::size_t batch,
                             const SampleLossFn& loss) {
    if (omp_get_max_threads() > 1 && batch >= 16) return batch_gradient_parallel(net, inputs, batch, loss);
    return batch_gradient_serial(net, inputs, batch, loss);
}

double clip_grad_norm(std::span<double> grad, double max_norm) {
    double sq = 0.0;
    for (double g : grad) sq += g * g;
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / (norm + 1e-12);
        for (double& g : grad) g *= scale;
    }
    return norm;
}

}  // namespace slicelab::rlcore
