#include <cmath>
#include <string>

#include "slicelab/core/types.hpp"
#include "slicelab/rlcore/optim.hpp"

namespace slicelab::rlcore {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg) {
    if (grads.size() != params.size())
        throw Error("gradient has " + std::to_string(grads.size()) + " entries, parameters " +
                    std::to_string(params.size()));
    if (state.m.size() != params.size()) state = AdamState(params.size());

    ++state.t;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

}  // namespace slicelab::rlcore
