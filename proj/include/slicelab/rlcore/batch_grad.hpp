#pragma once

#include <functional>
#include <span>
#include <vector>

#include "slicelab/rlcore/dense_net.hpp"

namespace slicelab::rlcore {

/// Per-sample loss hook: given the sample index and the network output,
/// writes dLoss/dOutput into `upstream` and returns the sample's loss.
/// Must be safe to call concurrently for different samples.
using SampleLossFn =
    std::function<double(std::size_t sample, std::span<const double> output, std::span<double> upstream)>;

struct BatchGradient {
    std::vector<double> grad;  // summed over samples
    double loss = 0.0;         // summed over samples
};

/// Reference implementation: one sample at a time.
BatchGradient batch_gradient_serial(const DenseNet& net, std::span<const double> inputs, std::size_t batch,
                                    const SampleLossFn& loss);

/// OpenMP version. Per-sample gradients are computed in parallel and then
/// reduced in sample order, so the result is bit-identical to the serial
/// kernel for any thread count.
BatchGradient batch_gradient_parallel(const DenseNet& net, std::span<const double> inputs, std::size_t batch,
                                      const SampleLossFn& loss);

/// Dispatches to the parallel kernel when more than one thread is available.
BatchGradient batch_gradient(const DenseNet& net, std::span<const double> inputs, std::size_t batch,
                             const SampleLossFn& loss);

/// Scales `grad` so its L2 norm is at most `max_norm` (no-op for max_norm <= 0).
/// Returns the norm before clipping.
double clip_grad_norm(std::span<double> grad, double max_norm);

}  // namespace slicelab::rlcore
