#pragma once

// Feed-forward networks built from dense layers and Chebyshev-adaptive
// layers, with hand-derived backpropagation.
//
// A Chebyshev-adaptive layer replaces each fixed weight w[o][i] with an
// input-dependent expansion sum_j C[o][i][j] * T_j(x_i). Two readings of
// the neuron output are supported:
//
//   weight-form    y_o = sum_i x~_i * sum_j C[o][i][j] T_j(x~_i) + b_o
//   expansion-form y_o = sum_i       sum_j C[o][i][j] T_j(x~_i) + b_o
//
// where x~ = input_map(x). Weight-form at k = 0 is exactly a dense layer.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cheby/chebyshev.hpp"
#include "cheby/matrix.hpp"

namespace cheby {

enum class ChebyMode { WeightForm, ExpansionForm };

// Range control applied to a layer's input before basis evaluation.
// Identity asserts the input already lies in [-1, 1]; clamp saturates;
// squash maps smoothly through tanh.
enum class InputMap { Identity, Clamp, Squash };

inline std::string to_string(ChebyMode m) {
    return m == ChebyMode::WeightForm ? "weight" : "expansion";
}
inline std::string to_string(InputMap m) {
    switch (m) {
        case InputMap::Identity: return "identity";
        case InputMap::Clamp: return "clamp";
        default: return "squash";
    }
}
inline ChebyMode cheby_mode_from_string(const std::string& s) {
    if (s == "weight" || s == "weight-form") return ChebyMode::WeightForm;
    if (s == "expansion" || s == "expansion-form") return ChebyMode::ExpansionForm;
    throw std::invalid_argument("unknown mode: " + s);
}
inline InputMap input_map_from_string(const std::string& s) {
    if (s == "identity") return InputMap::Identity;
    if (s == "clamp") return InputMap::Clamp;
    if (s == "squash") return InputMap::Squash;
    throw std::invalid_argument("unknown input map: " + s);
}

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> W; // out x in, row-major
    std::vector<double> b; // out

    DenseLayer() = default;
    DenseLayer(std::size_t in_, std::size_t out_)
        : in(in_), out(out_), W(in_ * out_, 0.0), b(out_, 0.0) {}

    double& w(std::size_t o, std::size_t i) { return W[o * in + i]; }
    double w(std::size_t o, std::size_t i) const { return W[o * in + i]; }
};

struct ChebyAdaptiveLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t k = 0; // polynomial order; k+1 coefficients per (o, i)
    ChebyMode mode = ChebyMode::WeightForm;
    InputMap input_map = InputMap::Identity;
    std::vector<double> C; // out x in x (k+1), row-major
    std::vector<double> b; // out

    ChebyAdaptiveLayer() = default;
    ChebyAdaptiveLayer(std::size_t in_, std::size_t out_, std::size_t k_,
                       ChebyMode mode_ = ChebyMode::WeightForm,
                       InputMap map_ = InputMap::Identity)
        : in(in_), out(out_), k(k_), mode(mode_), input_map(map_),
          C(in_ * out_ * (k_ + 1), 0.0), b(out_, 0.0) {}

    double& c(std::size_t o, std::size_t i, std::size_t j) { return C[(o * in + i) * (k + 1) + j]; }
    double c(std::size_t o, std::size_t i, std::size_t j) const { return C[(o * in + i) * (k + 1) + j]; }
};

using Layer = std::variant<DenseLayer, ChebyAdaptiveLayer>;

inline std::size_t layer_in(const Layer& l) {
    return std::visit([](const auto& x) { return x.in; }, l);
}
inline std::size_t layer_out(const Layer& l) {
    return std::visit([](const auto& x) { return x.out; }, l);
}

/// Weight/coefficient parameter count of one layer, biases excluded.
inline std::size_t layer_weight_count(const Layer& l) {
    if (const auto* d = std::get_if<DenseLayer>(&l)) return d->W.size();
    return std::get<ChebyAdaptiveLayer>(l).C.size();
}

// Hidden activations are ReLU; the output layer emits raw logits and the
// softmax lives inside the loss.
struct Network {
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layer_in(layers.front()); }
    std::size_t output_dim() const { return layers.empty() ? 0 : layer_out(layers.back()); }

    void add(Layer l) {
        if (!layers.empty() && layer_out(layers.back()) != layer_in(l))
            throw std::invalid_argument("Network::add: layer dimensions do not chain");
        layers.push_back(std::move(l));
    }

    /// Trainable parameter count, biases included.
    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers)
            n += layer_weight_count(l) + layer_out(l);
        return n;
    }
};

// Everything the backward pass needs from one forward evaluation.
struct LayerTrace {
    Matrix input_raw;     // batch x in, before input_map
    Matrix input_mapped;  // batch x in, after input_map (cheby layers)
    std::vector<double> basis; // batch x in x (k+1), cheby layers only
    Matrix pre_activation; // batch x out, before any ReLU
};

struct ForwardTrace {
    std::vector<LayerTrace> layers;
};

struct LayerGrads {
    std::vector<double> dW; // matches W or C
    std::vector<double> db;
};

struct GradientSet {
    std::vector<LayerGrads> layers;
};

namespace detail {

inline double apply_input_map(InputMap m, double x, std::size_t feature, std::size_t layer_index) {
    switch (m) {
        case InputMap::Identity:
            if (std::abs(x) > 1.0 + 1e-9)
                throw std::domain_error(
                    "identity input map: value " + std::to_string(x) + " out of [-1,1] at feature " +
                    std::to_string(feature) + " of layer " + std::to_string(layer_index));
            return x;
        case InputMap::Clamp:
            return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x);
        default:
            return squash(x);
    }
}

inline double input_map_deriv(InputMap m, double x_raw) {
    switch (m) {
        case InputMap::Identity: return 1.0;
        case InputMap::Clamp: return std::abs(x_raw) <= 1.0 ? 1.0 : 0.0;
        default: return squash_deriv(x_raw);
    }
}

} // namespace detail

/// Forward pass through one Chebyshev-adaptive layer.
/// Fills `trace` with the mapped input and all T_j(x~_i) for backward.
inline Matrix cheby_forward(const ChebyAdaptiveLayer& layer, const Matrix& x, LayerTrace& trace,
                            std::size_t layer_index = 0) {
    if (x.cols != layer.in)
        throw std::invalid_argument("cheby_forward: input has " + std::to_string(x.cols) +
                                    " columns, layer expects " + std::to_string(layer.in));
    const std::size_t batch = x.rows, in = layer.in, out = layer.out, kp1 = layer.k + 1;

    trace.input_raw = x;
    trace.input_mapped = Matrix(batch, in);
    trace.basis.assign(batch * in * kp1, 0.0);

    for (std::size_t bi = 0; bi < batch; ++bi)
        for (std::size_t i = 0; i < in; ++i) {
            double xm = detail::apply_input_map(layer.input_map, x(bi, i), i, layer_index);
            trace.input_mapped(bi, i) = xm;
            cheb_eval_all_into(layer.k, xm, &trace.basis[(bi * in + i) * kp1]);
        }

    Matrix y(batch, out);
    const bool weight_form = layer.mode == ChebyMode::WeightForm;
    for (std::size_t bi = 0; bi < batch; ++bi)
        for (std::size_t o = 0; o < out; ++o) {
            double acc = layer.b[o];
            for (std::size_t i = 0; i < in; ++i) {
                const double* t = &trace.basis[(bi * in + i) * kp1];
                double w = 0.0;
                for (std::size_t j = 0; j < kp1; ++j) w += layer.c(o, i, j) * t[j];
                acc += weight_form ? trace.input_mapped(bi, i) * w : w;
            }
            y(bi, o) = acc;
        }
    trace.pre_activation = y;
    return y;
}

/// Convenience overload matching the (y, cache) contract.
inline std::pair<Matrix, LayerTrace> cheby_forward(const ChebyAdaptiveLayer& layer, const Matrix& x) {
    LayerTrace trace;
    Matrix y = cheby_forward(layer, x, trace);
    return {std::move(y), std::move(trace)};
}

inline Matrix dense_forward(const DenseLayer& layer, const Matrix& x, LayerTrace& trace) {
    if (x.cols != layer.in)
        throw std::invalid_argument("dense_forward: input has " + std::to_string(x.cols) +
                                    " columns, layer expects " + std::to_string(layer.in));
    trace.input_raw = x;
    Matrix y(x.rows, layer.out);
    for (std::size_t bi = 0; bi < x.rows; ++bi)
        for (std::size_t o = 0; o < layer.out; ++o) {
            double acc = layer.b[o];
            for (std::size_t i = 0; i < layer.in; ++i) acc += x(bi, i) * layer.w(o, i);
            y(bi, o) = acc;
        }
    trace.pre_activation = y;
    return y;
}

/// Full network forward: ReLU between layers, raw logits at the end.
inline std::pair<Matrix, ForwardTrace> network_forward(const Network& net, const Matrix& x) {
    if (net.layers.empty()) throw std::invalid_argument("network_forward: empty network");
    ForwardTrace trace;
    trace.layers.resize(net.layers.size());
    Matrix cur = x;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        if (const auto* d = std::get_if<DenseLayer>(&net.layers[li]))
            cur = dense_forward(*d, cur, trace.layers[li]);
        else
            cur = cheby_forward(std::get<ChebyAdaptiveLayer>(net.layers[li]), cur, trace.layers[li], li);
        if (li + 1 < net.layers.size())
            cur = map_elementwise(cur, [](double v) { return v > 0.0 ? v : 0.0; });
    }
    return {std::move(cur), std::move(trace)};
}

/// Trace-free forward for inference: same math as network_forward, no
/// caches. The basis lives in a small stack buffer, so the cost is the
/// actual per-order arithmetic rather than allocation traffic.
inline Matrix network_infer(const Network& net, const Matrix& x) {
    if (net.layers.empty()) throw std::invalid_argument("network_infer: empty network");
    Matrix cur = x;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        Matrix y;
        if (const auto* d = std::get_if<DenseLayer>(&net.layers[li])) {
            if (cur.cols != d->in)
                throw std::invalid_argument("network_infer: input has " + std::to_string(cur.cols) +
                                            " columns, layer expects " + std::to_string(d->in));
            y = Matrix(cur.rows, d->out);
            for (std::size_t bi = 0; bi < cur.rows; ++bi)
                for (std::size_t o = 0; o < d->out; ++o) {
                    double acc = d->b[o];
                    for (std::size_t i = 0; i < d->in; ++i) acc += cur(bi, i) * d->w(o, i);
                    y(bi, o) = acc;
                }
        } else {
            const auto& cl = std::get<ChebyAdaptiveLayer>(net.layers[li]);
            if (cur.cols != cl.in)
                throw std::invalid_argument("network_infer: input has " + std::to_string(cur.cols) +
                                            " columns, layer expects " + std::to_string(cl.in));
            const std::size_t kp1 = cl.k + 1;
            const bool weight_form = cl.mode == ChebyMode::WeightForm;
            double basis[17]; // k is bounded well below this in practice
            std::vector<double> big;
            double* t = basis;
            if (kp1 > 17) { big.resize(kp1); t = big.data(); }
            y = Matrix(cur.rows, cl.out);
            for (std::size_t bi = 0; bi < cur.rows; ++bi) {
                for (std::size_t o = 0; o < cl.out; ++o) y(bi, o) = cl.b[o];
                for (std::size_t i = 0; i < cl.in; ++i) {
                    double xm = detail::apply_input_map(cl.input_map, cur(bi, i), i, li);
                    cheb_eval_all_into(cl.k, xm, t);
                    for (std::size_t o = 0; o < cl.out; ++o) {
                        double w = 0.0;
                        for (std::size_t j = 0; j < kp1; ++j) w += cl.c(o, i, j) * t[j];
                        y(bi, o) += weight_form ? xm * w : w;
                    }
                }
            }
        }
        if (li + 1 < net.layers.size())
            for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
        cur = std::move(y);
    }
    return cur;
}

/// Mean softmax cross-entropy with max-subtraction; also returns
/// dlogits = (softmax - onehot) / batch.
inline std::pair<double, Matrix> softmax_cross_entropy(const Matrix& logits,
                                                       const std::vector<int>& labels) {
    if (logits.rows != labels.size())
        throw std::invalid_argument("softmax_cross_entropy: batch size mismatch");
    const std::size_t batch = logits.rows, classes = logits.cols;
    Matrix dlogits(batch, classes);
    double loss = 0.0;
    for (std::size_t bi = 0; bi < batch; ++bi) {
        int label = labels[bi];
        if (label < 0 || static_cast<std::size_t>(label) >= classes)
            throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) +
                                    " out of range at row " + std::to_string(bi));
        double mx = logits(bi, 0);
        for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, logits(bi, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) sum += std::exp(logits(bi, c) - mx);
        double log_sum = std::log(sum);
        loss += -(logits(bi, label) - mx - log_sum);
        for (std::size_t c = 0; c < classes; ++c) {
            double p = std::exp(logits(bi, c) - mx) / sum;
            dlogits(bi, c) = (p - (static_cast<int>(c) == label ? 1.0 : 0.0)) / static_cast<double>(batch);
        }
    }
    return {loss / static_cast<double>(batch), std::move(dlogits)};
}

/// Softmax rows (used by the loss; exposed for testing).
inline Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows, logits.cols);
    for (std::size_t bi = 0; bi < logits.rows; ++bi) {
        double mx = logits(bi, 0);
        for (std::size_t c = 1; c < logits.cols; ++c) mx = std::max(mx, logits(bi, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < logits.cols; ++c) sum += std::exp(logits(bi, c) - mx);
        for (std::size_t c = 0; c < logits.cols; ++c) p(bi, c) = std::exp(logits(bi, c) - mx) / sum;
    }
    return p;
}

/// Backward pass. For Chebyshev layers the coefficient gradient is the
/// product of the upstream per-weight gradient with the per-coefficient
/// weight sensitivity:
///   dL/dC[o][i][j] = sum_batch delta_o * g(x~_i, j)
///   g = x~_i * T_j(x~_i)   (weight-form)
///   g = T_j(x~_i)          (expansion-form)
/// Input gradients chain through d/dx [x T_j(x)] = T_j + x T_j' in
/// weight-form (T_j' alone in expansion-form), then the input-map
/// derivative and the ReLU mask.
inline GradientSet network_backward(const Network& net, const ForwardTrace& trace,
                                    const Matrix& dlogits) {
    if (trace.layers.size() != net.layers.size())
        throw std::invalid_argument("network_backward: trace does not match network");
    GradientSet grads;
    grads.layers.resize(net.layers.size());

    Matrix delta = dlogits; // d loss / d (pre-activation of current layer)
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const LayerTrace& lt = trace.layers[li];
        LayerGrads& lg = grads.layers[li];
        Matrix dinput; // d loss / d (raw input of this layer)

        if (const auto* d = std::get_if<DenseLayer>(&net.layers[li])) {
            if (delta.rows != lt.input_raw.rows || delta.cols != d->out)
                throw std::invalid_argument("network_backward: gradient shape mismatch at layer " +
                                            std::to_string(li));
            lg.dW.assign(d->W.size(), 0.0);
            lg.db.assign(d->out, 0.0);
            dinput = Matrix(delta.rows, d->in);
            for (std::size_t bi = 0; bi < delta.rows; ++bi)
                for (std::size_t o = 0; o < d->out; ++o) {
                    double g = delta(bi, o);
                    lg.db[o] += g;
                    for (std::size_t i = 0; i < d->in; ++i) {
                        lg.dW[o * d->in + i] += g * lt.input_raw(bi, i);
                        dinput(bi, i) += g * d->w(o, i);
                    }
                }
        } else {
            const auto& cl = std::get<ChebyAdaptiveLayer>(net.layers[li]);
            if (delta.rows != lt.input_raw.rows || delta.cols != cl.out)
                throw std::invalid_argument("network_backward: gradient shape mismatch at layer " +
                                            std::to_string(li));
            const std::size_t kp1 = cl.k + 1;
            const bool weight_form = cl.mode == ChebyMode::WeightForm;
            lg.dW.assign(cl.C.size(), 0.0);
            lg.db.assign(cl.out, 0.0);
            dinput = Matrix(delta.rows, cl.in);

            std::vector<double> deriv(kp1);
            for (std::size_t bi = 0; bi < delta.rows; ++bi) {
                for (std::size_t i = 0; i < cl.in; ++i) {
                    double xm = lt.input_mapped(bi, i);
                    const double* t = &lt.basis[(bi * cl.in + i) * kp1];
                    cheb_deriv_all_into(cl.k, xm, deriv.data());
                    double dmap = detail::input_map_deriv(cl.input_map, lt.input_raw(bi, i));
                    for (std::size_t o = 0; o < cl.out; ++o) {
                        double g = delta(bi, o);
                        double dxm = 0.0; // d y_o / d x~_i
                        for (std::size_t j = 0; j < kp1; ++j) {
                            double coeff = cl.c(o, i, j);
                            if (weight_form) {
                                lg.dW[(o * cl.in + i) * kp1 + j] += g * xm * t[j];
                                dxm += coeff * (t[j] + xm * deriv[j]);
                            } else {
                                lg.dW[(o * cl.in + i) * kp1 + j] += g * t[j];
                                dxm += coeff * deriv[j];
                            }
                        }
                        dinput(bi, i) += g * dxm * dmap;
                    }
                }
                for (std::size_t o = 0; o < cl.out; ++o) lg.db[o] += delta(bi, o);
            }
        }

        if (li > 0) {
            // ReLU sits between layer li-1 and li.
            const Matrix& z = trace.layers[li - 1].pre_activation;
            delta = Matrix(dinput.rows, dinput.cols);
            for (std::size_t idx = 0; idx < dinput.data.size(); ++idx)
                delta.data[idx] = z.data[idx] > 0.0 ? dinput.data[idx] : 0.0;
        }
    }
    return grads;
}

inline std::vector<int> predict(const Network& net, const Matrix& x) {
    if (x.rows == 0) return {};
    return row_argmax(network_infer(net, x));
}

/// Draw weight/coefficient tensors uniformly from [-s, s] with
/// s = sqrt(6 / (fan_in_effective + out)); biases start at zero.
/// A dense layer and a weight-form k=0 layer consume the generator
/// identically, so shared seeds give identical starts.
inline void init_parameters(Network& net, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& l : net.layers) {
        if (auto* d = std::get_if<DenseLayer>(&l)) {
            double s = std::sqrt(6.0 / (static_cast<double>(d->in) + static_cast<double>(d->out)));
            std::uniform_real_distribution<double> dist(-s, s);
            for (auto& w : d->W) w = dist(rng);
            for (auto& b : d->b) b = 0.0;
        } else {
            auto& c = std::get<ChebyAdaptiveLayer>(l);
            double fan_in_eff = static_cast<double>(c.in) * static_cast<double>(c.k + 1);
            double s = std::sqrt(6.0 / (fan_in_eff + static_cast<double>(c.out)));
            std::uniform_real_distribution<double> dist(-s, s);
            for (auto& v : c.C) v = dist(rng);
            for (auto& b : c.b) b = 0.0;
        }
    }
}

/// Standard MLP: dense layers sized input -> hidden... -> classes.
inline Network make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                        std::size_t classes) {
    Network net;
    std::size_t prev = input_dim;
    for (std::size_t h : hidden) {
        net.add(DenseLayer(prev, h));
        prev = h;
    }
    net.add(DenseLayer(prev, classes));
    return net;
}

/// Chebyshev-adaptive network with the same layer sizes. The first layer
/// sees pre-scaled data and uses the identity map; hidden layers default
/// to squash because ReLU outputs are unbounded.
inline Network make_cheby_net(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                              std::size_t classes, std::size_t k,
                              ChebyMode mode = ChebyMode::WeightForm,
                              InputMap first_map = InputMap::Identity,
                              InputMap hidden_map = InputMap::Squash) {
    Network net;
    std::size_t prev = input_dim;
    bool first = true;
    for (std::size_t h : hidden) {
        net.add(ChebyAdaptiveLayer(prev, h, k, mode, first ? first_map : hidden_map));
        prev = h;
        first = false;
    }
    net.add(ChebyAdaptiveLayer(prev, classes, k, mode, first ? first_map : hidden_map));
    return net;
}

} // namespace cheby
