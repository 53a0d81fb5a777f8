#pragma once

// Adam and SGD-with-momentum over flat parameter vectors. State lives
// per tensor; the caller pairs each state with the matching parameter
// span and its gradient.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cheby {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t t = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One Adam update in place. Increments the step counter first so the
/// bias correction uses t = 1 on the first call.
inline void adam_step(std::vector<double>& params, const std::vector<double>& grads,
                      AdamState& state, const AdamConfig& cfg = {}) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

struct SgdConfig {
    double lr = 0.01;
    double momentum = 0.0;
};

struct SgdState {
    std::vector<double> velocity;

    explicit SgdState(std::size_t n = 0) : velocity(n, 0.0) {}
};

/// v <- momentum * v + g; theta <- theta - lr * v.
inline void sgd_step(std::vector<double>& params, const std::vector<double>& grads,
                     SgdState& state, const SgdConfig& cfg = {}) {
    if (params.size() != grads.size() || params.size() != state.velocity.size())
        throw std::invalid_argument("sgd_step: size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.velocity[i] = cfg.momentum * state.velocity[i] + grads[i];
        params[i] -= cfg.lr * state.velocity[i];
    }
}

} // namespace cheby
