#pragma once

// Training loop: softmax cross-entropy, Adam, optional minibatching,
// optional sparsity masks. A masked parameter is held at exactly zero:
// its gradient is zeroed before the optimizer step and the parameter is
// re-zeroed after, so optimizer state never moves it.

#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "cheby/network.hpp"
#include "cheby/optim.hpp"

namespace cheby {

// keep[layer][i] covers the layer's weight/coefficient vector, 1 meaning
// trainable. Biases are never masked.
struct MaskSet {
    std::vector<std::vector<std::uint8_t>> keep;

    static MaskSet all_ones(const Network& net) {
        MaskSet m;
        for (const auto& l : net.layers)
            m.keep.push_back(std::vector<std::uint8_t>(layer_weight_count(l), 1));
        return m;
    }

    std::size_t zero_count() const {
        std::size_t n = 0;
        for (const auto& layer : keep)
            for (auto v : layer) n += v == 0;
        return n;
    }
};

inline void enforce_mask(Network& net, const MaskSet& mask) {
    if (mask.keep.size() != net.layers.size())
        throw std::invalid_argument("enforce_mask: mask does not match network");
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        auto& keep = mask.keep[li];
        std::vector<double>* params = nullptr;
        if (auto* d = std::get_if<DenseLayer>(&net.layers[li])) params = &d->W;
        else params = &std::get<ChebyAdaptiveLayer>(net.layers[li]).C;
        if (keep.size() != params->size())
            throw std::invalid_argument("enforce_mask: size mismatch at layer " + std::to_string(li));
        for (std::size_t i = 0; i < keep.size(); ++i)
            if (!keep[i]) (*params)[i] = 0.0;
    }
}

struct TrainConfig {
    std::size_t epochs = 500;
    double lr = 0.001;
    std::size_t batch_size = 0; // 0 means full batch
    std::uint64_t shuffle_seed = 0;
};

struct TrainLog {
    std::vector<double> epoch_loss;
};

/// Train in place; returns the per-epoch mean loss. Pass a mask to keep
/// pruned parameters frozen at zero throughout.
inline TrainLog train_network(Network& net, const Matrix& X, const std::vector<int>& y,
                              const TrainConfig& cfg, const MaskSet* mask = nullptr) {
    if (X.rows != y.size()) throw std::invalid_argument("train_network: X/y size mismatch");
    if (X.rows == 0) throw std::invalid_argument("train_network: empty training set");

    AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;
    std::vector<AdamState> w_state, b_state;
    for (const auto& l : net.layers) {
        w_state.emplace_back(layer_weight_count(l));
        b_state.emplace_back(layer_out(l));
    }
    if (mask) enforce_mask(net, *mask);

    const std::size_t n = X.rows;
    const std::size_t bs = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.shuffle_seed);

    TrainLog log;
    log.epoch_loss.reserve(cfg.epochs);
    Matrix xb(bs, X.cols);
    std::vector<int> yb(bs);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (bs < n) std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t m = std::min(bs, n - start);
            if (xb.rows != m) { xb = Matrix(m, X.cols); yb.resize(m); }
            for (std::size_t r = 0; r < m; ++r) {
                std::size_t src = order[start + r];
                for (std::size_t j = 0; j < X.cols; ++j) xb(r, j) = X(src, j);
                yb[r] = y[src];
            }

            auto [logits, trace] = network_forward(net, xb);
            auto [loss, dlogits] = softmax_cross_entropy(logits, yb);
            GradientSet grads = network_backward(net, trace, dlogits);
            loss_sum += loss * static_cast<double>(m);

            for (std::size_t li = 0; li < net.layers.size(); ++li) {
                std::vector<double>* params = nullptr;
                std::vector<double>* bias = nullptr;
                if (auto* d = std::get_if<DenseLayer>(&net.layers[li])) {
                    params = &d->W;
                    bias = &d->b;
                } else {
                    auto& c = std::get<ChebyAdaptiveLayer>(net.layers[li]);
                    params = &c.C;
                    bias = &c.b;
                }
                if (mask) {
                    const auto& keep = mask->keep[li];
                    for (std::size_t i = 0; i < keep.size(); ++i)
                        if (!keep[i]) grads.layers[li].dW[i] = 0.0;
                }
                adam_step(*params, grads.layers[li].dW, w_state[li], adam_cfg);
                adam_step(*bias, grads.layers[li].db, b_state[li], adam_cfg);
                if (mask) {
                    const auto& keep = mask->keep[li];
                    for (std::size_t i = 0; i < keep.size(); ++i)
                        if (!keep[i]) (*params)[i] = 0.0;
                }
            }
        }
        log.epoch_loss.push_back(loss_sum / static_cast<double>(n));
    }
    return log;
}

} // namespace cheby
