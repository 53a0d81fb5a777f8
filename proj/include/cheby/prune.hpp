#pragma once

// Magnitude pruning with frozen zeros.
//
// Strategy 1: per-parameter thresholding, applied layer by layer in
// ascending order with fine-tuning in between, so each layer is pruned
// against the already-pruned state of its predecessors. Strategy 2:
// grouped pruning, where all k+1 coefficients of a (neuron, feature)
// expansion live or die together by the Euclidean norm of the group.
//
// Counts and compression percentages cover weight/coefficient tensors
// only; biases are never pruned.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cheby/metrics.hpp"
#include "cheby/network.hpp"
#include "cheby/train.hpp"

namespace cheby {

enum class PruneStrategy { Threshold, Group };

inline PruneStrategy prune_strategy_from_string(const std::string& s) {
    if (s == "threshold") return PruneStrategy::Threshold;
    if (s == "group") return PruneStrategy::Group;
    throw std::invalid_argument("unknown prune strategy: " + s);
}

// Threshold given either directly or as a percentile of the layer's
// own magnitude distribution at prune time.
struct TauSpec {
    enum class Kind { Absolute, Percentile } kind = Kind::Absolute;
    double value = 0.0;

    static TauSpec absolute(double tau) { return {Kind::Absolute, tau}; }
    static TauSpec percentile(double q) { return {Kind::Percentile, q}; }
};

/// Nearest-rank percentile of the magnitudes in `values`.
inline double percentile_magnitude(const std::vector<double>& values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile_magnitude: empty input");
    if (q < 0.0 || q > 100.0) throw std::invalid_argument("percentile_magnitude: q outside [0,100]");
    std::vector<double> mags(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) mags[i] = std::abs(values[i]);
    std::sort(mags.begin(), mags.end());
    auto idx = static_cast<std::size_t>(std::floor(q / 100.0 * static_cast<double>(mags.size())));
    return mags[std::min(idx, mags.size() - 1)];
}

/// Per-parameter mask: 0 exactly where |param| < tau.
inline std::vector<std::uint8_t> threshold_prune(const std::vector<double>& params, double tau) {
    if (tau < 0.0) throw std::invalid_argument("threshold_prune: tau must be >= 0");
    std::vector<std::uint8_t> keep(params.size(), 1);
    for (std::size_t i = 0; i < params.size(); ++i)
        if (std::abs(params[i]) < tau) keep[i] = 0;
    return keep;
}

/// Euclidean norm of the coefficient group feeding output o from input i.
inline double group_norm(const ChebyAdaptiveLayer& layer, std::size_t o, std::size_t i) {
    if (o >= layer.out || i >= layer.in) throw std::out_of_range("group_norm: index out of range");
    double s = 0.0;
    for (std::size_t j = 0; j <= layer.k; ++j) {
        double c = layer.c(o, i, j);
        s += c * c;
    }
    return std::sqrt(s);
}

/// Grouped mask over the layer's coefficient tensor: every (o, i) whose
/// group norm is below tau has all k+1 coefficients masked together.
inline std::vector<std::uint8_t> group_prune(const ChebyAdaptiveLayer& layer, double tau) {
    if (tau < 0.0) throw std::invalid_argument("group_prune: tau must be >= 0");
    std::vector<std::uint8_t> keep(layer.C.size(), 1);
    for (std::size_t o = 0; o < layer.out; ++o)
        for (std::size_t i = 0; i < layer.in; ++i)
            if (group_norm(layer, o, i) < tau)
                for (std::size_t j = 0; j <= layer.k; ++j)
                    keep[(o * layer.in + i) * (layer.k + 1) + j] = 0;
    return keep;
}

struct PruneLayerStat {
    std::size_t total = 0;
    std::size_t zeroed = 0;
    double tau = 0.0;
};

struct PruneReport {
    std::size_t total = 0;  // prunable (non-bias) parameters
    std::size_t zeroed = 0;
    double compression = 0.0; // percent
    std::vector<PruneLayerStat> per_layer;
    double accuracy_before = 0.0;
    double accuracy_after = 0.0;
};

struct PruneOutcome {
    MaskSet mask;
    PruneReport report;
};

class prune_divergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<double>& layer_params(Network& net, std::size_t li) {
    if (auto* d = std::get_if<DenseLayer>(&net.layers[li])) return d->W;
    return std::get<ChebyAdaptiveLayer>(net.layers[li]).C;
}

inline double resolve_tau(const TauSpec& spec, const Network& net, std::size_t li,
                          PruneStrategy strategy) {
    if (spec.kind == TauSpec::Kind::Absolute) return spec.value;
    const Layer& l = net.layers[li];
    if (strategy == PruneStrategy::Group) {
        if (const auto* cl = std::get_if<ChebyAdaptiveLayer>(&l)) {
            std::vector<double> norms;
            norms.reserve(cl->out * cl->in);
            for (std::size_t o = 0; o < cl->out; ++o)
                for (std::size_t i = 0; i < cl->in; ++i) norms.push_back(group_norm(*cl, o, i));
            return percentile_magnitude(norms, spec.value);
        }
    }
    if (const auto* d = std::get_if<DenseLayer>(&l)) return percentile_magnitude(d->W, spec.value);
    return percentile_magnitude(std::get<ChebyAdaptiveLayer>(l).C, spec.value);
}

inline std::vector<std::uint8_t> stage_mask(const Network& net, std::size_t li, double tau,
                                            PruneStrategy strategy) {
    const Layer& l = net.layers[li];
    if (strategy == PruneStrategy::Group)
        if (const auto* cl = std::get_if<ChebyAdaptiveLayer>(&l))
            return group_prune(*cl, tau);
    // a dense layer's weights are their own singleton groups
    if (const auto* d = std::get_if<DenseLayer>(&l)) return threshold_prune(d->W, tau);
    return threshold_prune(std::get<ChebyAdaptiveLayer>(l).C, tau);
}

inline bool finite_state(const Network& net, const TrainLog& log) {
    for (double l : log.epoch_loss)
        if (!std::isfinite(l)) return false;
    for (const auto& layer : net.layers) {
        const std::vector<double>* p;
        const std::vector<double>* b;
        if (const auto* d = std::get_if<DenseLayer>(&layer)) { p = &d->W; b = &d->b; }
        else {
            const auto& c = std::get<ChebyAdaptiveLayer>(layer);
            p = &c.C; b = &c.b;
        }
        for (double v : *p)
            if (!std::isfinite(v)) return false;
        for (double v : *b)
            if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace detail

/// Layer-by-layer pruning with fine-tuning between stages. Layers named
/// in `order` are processed ascending; each stage masks by the resolved
/// tau, then (if anything was newly masked) fine-tunes every still-active
/// parameter with the frozen mask in force. A stage whose fine-tune goes
/// non-finite restores the network to the end of the previous stage and
/// throws prune_divergence_error.
inline PruneOutcome forward_prune(Network& net, const Matrix& train_X,
                                  const std::vector<int>& train_y, const Matrix& eval_X,
                                  const std::vector<int>& eval_y, const TauSpec& tau,
                                  PruneStrategy strategy, const TrainConfig& fine_tune,
                                  std::vector<std::size_t> order = {}) {
    if (order.empty()) {
        order.resize(net.layers.size());
        std::iota(order.begin(), order.end(), 0);
    }
    std::sort(order.begin(), order.end());
    if (std::adjacent_find(order.begin(), order.end()) != order.end())
        throw std::invalid_argument("forward_prune: duplicate layer index");
    if (!order.empty() && order.back() >= net.layers.size())
        throw std::invalid_argument("forward_prune: layer index out of range");

    PruneOutcome out;
    out.mask = MaskSet::all_ones(net);
    out.report.per_layer.resize(net.layers.size());
    for (std::size_t li = 0; li < net.layers.size(); ++li)
        out.report.per_layer[li].total = layer_weight_count(net.layers[li]);
    out.report.accuracy_before = accuracy(predict(net, eval_X), eval_y);

    for (std::size_t li : order) {
        Network checkpoint = net;
        double stage_tau = detail::resolve_tau(tau, net, li, strategy);
        std::vector<std::uint8_t> keep = detail::stage_mask(net, li, stage_tau, strategy);
        std::size_t newly_masked = 0;
        for (std::size_t i = 0; i < keep.size(); ++i)
            if (!keep[i] && out.mask.keep[li][i]) {
                out.mask.keep[li][i] = 0;
                ++newly_masked;
            }
        out.report.per_layer[li].tau = stage_tau;
        if (newly_masked == 0) continue;

        enforce_mask(net, out.mask);
        TrainLog log = train_network(net, train_X, train_y, fine_tune, &out.mask);
        if (!detail::finite_state(net, log)) {
            net = checkpoint;
            throw prune_divergence_error("forward_prune: fine-tune diverged at layer " +
                                         std::to_string(li) + "; state restored");
        }
    }

    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        std::size_t zeroed = 0;
        for (auto v : out.mask.keep[li]) zeroed += v == 0;
        out.report.per_layer[li].zeroed = zeroed;
        out.report.total += out.report.per_layer[li].total;
        out.report.zeroed += zeroed;
    }
    out.report.compression = out.report.total == 0
                                 ? 0.0
                                 : 100.0 * static_cast<double>(out.report.zeroed) /
                                       static_cast<double>(out.report.total);
    out.report.accuracy_after = accuracy(predict(net, eval_X), eval_y);
    return out;
}

} // namespace cheby
