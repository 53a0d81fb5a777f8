#pragma once

// Shared fixtures for the unit and acceptance suites: paired dense/k=0
// networks with byte-identical parameters, and a finite-difference
// gradient checker.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cheby/network.hpp"

namespace testutil {

using namespace cheby;

// Small uniform draws keep every activation inside [-1,1] so identity
// input maps stay valid through the whole net.
inline void fill_uniform(Network& net, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (auto& l : net.layers) {
        if (auto* d = std::get_if<DenseLayer>(&l)) {
            for (auto& w : d->W) w = dist(rng);
            for (auto& b : d->b) b = dist(rng);
        } else {
            auto& c = std::get<ChebyAdaptiveLayer>(l);
            for (auto& v : c.C) v = dist(rng);
            for (auto& b : c.b) b = dist(rng);
        }
    }
}

struct MirrorPair {
    Network dense;
    Network cheby0;
};

/// Dense net and weight-form k=0 net with shared parameters; identical
/// draw order makes the parameter tensors byte-equal.
inline MirrorPair mirrored_k0(std::size_t in, const std::vector<std::size_t>& hidden,
                              std::size_t classes, std::uint64_t seed) {
    MirrorPair p;
    p.dense = make_mlp(in, hidden, classes);
    p.cheby0 = make_cheby_net(in, hidden, classes, 0, ChebyMode::WeightForm, InputMap::Identity,
                              InputMap::Identity);
    fill_uniform(p.dense, seed, 0.2);
    fill_uniform(p.cheby0, seed, 0.2);
    return p;
}

inline double batch_loss(const Network& net, const Matrix& X, const std::vector<int>& y) {
    auto [logits, trace] = network_forward(net, X);
    auto [loss, dlogits] = softmax_cross_entropy(logits, y);
    return loss;
}

/// Largest relative disagreement between analytic gradients and centered
/// finite differences over every parameter (weights and biases).
inline double max_fd_gradient_error(Network& net, const Matrix& X, const std::vector<int>& y,
                                    double h = 1e-5) {
    auto [logits, trace] = network_forward(net, X);
    auto [loss, dlogits] = softmax_cross_entropy(logits, y);
    GradientSet grads = network_backward(net, trace, dlogits);

    double worst = 0.0;
    auto probe = [&](std::vector<double>& params, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            double keep = params[i];
            params[i] = keep + h;
            double hi = batch_loss(net, X, y);
            params[i] = keep - h;
            double lo = batch_loss(net, X, y);
            params[i] = keep;
            double fd = (hi - lo) / (2 * h);
            double err = std::abs(fd - analytic[i]) / std::max(1.0, std::abs(analytic[i]));
            worst = std::max(worst, err);
        }
    };
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        if (auto* d = std::get_if<DenseLayer>(&net.layers[li])) {
            probe(d->W, grads.layers[li].dW);
            probe(d->b, grads.layers[li].db);
        } else {
            auto& c = std::get<ChebyAdaptiveLayer>(net.layers[li]);
            probe(c.C, grads.layers[li].dW);
            probe(c.b, grads.layers[li].db);
        }
    }
    return worst;
}

inline Matrix random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed,
                           double lo = -0.9, double hi = 0.9) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(rows, cols);
    for (auto& v : m.data) v = dist(rng);
    return m;
}

inline std::vector<int> random_labels(std::size_t n, std::size_t classes, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0xabcdef);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng() % classes);
    return y;
}

} // namespace testutil
