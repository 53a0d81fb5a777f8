#pragma once

// Classification metrics (reported as percentages) and the per-neuron
// weight-parameter counts of the decomposition families.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cheby {

inline double accuracy(const std::vector<int>& preds, const std::vector<int>& truth) {
    if (preds.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
    if (preds.empty()) throw std::invalid_argument("accuracy: empty input");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == truth[i];
    return 100.0 * static_cast<double>(correct) / static_cast<double>(preds.size());
}

/// Unweighted mean over classes of 2PR/(P+R); a class with no true and
/// no predicted samples contributes 0.
inline double macro_f1(const std::vector<int>& preds, const std::vector<int>& truth,
                       std::size_t classes) {
    if (preds.size() != truth.size()) throw std::invalid_argument("macro_f1: length mismatch");
    if (preds.empty()) throw std::invalid_argument("macro_f1: empty input");
    if (classes == 0) throw std::invalid_argument("macro_f1: zero classes");
    std::vector<std::size_t> tp(classes, 0), fp(classes, 0), fn(classes, 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        int p = preds[i], t = truth[i];
        if (p < 0 || static_cast<std::size_t>(p) >= classes || t < 0 ||
            static_cast<std::size_t>(t) >= classes)
            throw std::out_of_range("macro_f1: label out of range at index " + std::to_string(i));
        if (p == t) ++tp[p];
        else { ++fp[p]; ++fn[t]; }
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        double prec = tp[c] + fp[c] > 0 ? static_cast<double>(tp[c]) / (tp[c] + fp[c]) : 0.0;
        double rec = tp[c] + fn[c] > 0 ? static_cast<double>(tp[c]) / (tp[c] + fn[c]) : 0.0;
        sum += prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    }
    return 100.0 * sum / static_cast<double>(classes);
}

enum class Decomposition { Chebyshev, Gaussian, Fourier, Legendre, Dense };

inline Decomposition decomposition_from_string(const std::string& s) {
    if (s == "chebyshev" || s == "cheby") return Decomposition::Chebyshev;
    if (s == "gaussian") return Decomposition::Gaussian;
    if (s == "fourier") return Decomposition::Fourier;
    if (s == "legendre") return Decomposition::Legendre;
    if (s == "dense" || s == "mlp") return Decomposition::Dense;
    throw std::invalid_argument("unknown decomposition: " + s);
}

/// Weight parameters of one neuron with n inputs at order k, biases
/// excluded. Polynomial families carry k+1 terms per input; Gaussian
/// mixtures carry (amplitude, mean, width) per term; Fourier carries a
/// sine and cosine amplitude per term; a fixed-weight neuron carries
/// one weight per input.
inline std::size_t param_count(Decomposition d, std::size_t n, std::size_t k) {
    if (n < 1) throw std::invalid_argument("param_count: need n >= 1");
    switch (d) {
        case Decomposition::Chebyshev:
        case Decomposition::Legendre: return n * (k + 1);
        case Decomposition::Gaussian: return 3 * n * (k + 1);
        case Decomposition::Fourier: return 2 * n * (k + 1);
        default: return n;
    }
}

} // namespace cheby
