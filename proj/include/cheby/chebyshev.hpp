#pragma once

// Chebyshev polynomials of the first kind: batched evaluation via the
// three-term recurrence, derivatives via the second-kind recurrence,
// roots, and range mapping onto [-1, 1].

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cheby {

/// Values [T_0(x), ..., T_k(x)] at a single evaluation point.
/// values[0] is always exactly 1; on [-1, 1] every entry is bounded by 1.
struct BasisVector {
    std::vector<double> values;

    std::size_t order() const { return values.size() - 1; }
    double operator[](std::size_t j) const { return values[j]; }
};

/// Evaluate T_0..T_k at x with T_j = 2x*T_{j-1} - T_{j-2}, T_0 = 1, T_1 = x.
/// Total on finite inputs; x outside [-1, 1] is computed, not rejected —
/// range policy belongs to the caller.
inline BasisVector cheb_eval_all(std::size_t k, double x) {
    BasisVector out;
    out.values.resize(k + 1);
    out.values[0] = 1.0;
    if (k >= 1) out.values[1] = x;
    for (std::size_t j = 2; j <= k; ++j)
        out.values[j] = 2.0 * x * out.values[j - 1] - out.values[j - 2];
    return out;
}

/// Evaluate into a caller-provided buffer of length k+1 (no allocation).
inline void cheb_eval_all_into(std::size_t k, double x, double* out) {
    out[0] = 1.0;
    if (k >= 1) out[1] = x;
    for (std::size_t j = 2; j <= k; ++j)
        out[j] = 2.0 * x * out[j - 1] - out[j - 2];
}

/// Derivatives [T_0'(x), ..., T_k'(x)] using T_j' = j*U_{j-1} with the
/// second-kind recurrence U_j = 2x*U_{j-1} - U_{j-2}, U_0 = 1, U_1 = 2x.
inline std::vector<double> cheb_deriv_all(std::size_t k, double x) {
    std::vector<double> d(k + 1);
    d[0] = 0.0;
    if (k >= 1) d[1] = 1.0;
    double u_prev = 1.0;        // U_0
    double u_curr = 2.0 * x;    // U_1
    for (std::size_t j = 2; j <= k; ++j) {
        d[j] = static_cast<double>(j) * u_curr;
        double u_next = 2.0 * x * u_curr - u_prev;
        u_prev = u_curr;
        u_curr = u_next;
    }
    return d;
}

inline void cheb_deriv_all_into(std::size_t k, double x, double* d) {
    d[0] = 0.0;
    if (k >= 1) d[1] = 1.0;
    double u_prev = 1.0;
    double u_curr = 2.0 * x;
    for (std::size_t j = 2; j <= k; ++j) {
        d[j] = static_cast<double>(j) * u_curr;
        double u_next = 2.0 * x * u_curr - u_prev;
        u_prev = u_curr;
        u_curr = u_next;
    }
}

/// Roots of T_j: x_m = cos((2m - 1) pi / (2j)) for m = 1..j, in that order.
inline std::vector<double> cheb_roots(std::size_t j) {
    if (j < 1) throw std::invalid_argument("cheb_roots: order must be >= 1");
    std::vector<double> r(j);
    for (std::size_t m = 1; m <= j; ++m)
        r[m - 1] = std::cos((2.0 * static_cast<double>(m) - 1.0) * std::numbers::pi /
                            (2.0 * static_cast<double>(j)));
    return r;
}

/// Affine map [lo, hi] -> [-1, 1]; lo maps to -1, hi to +1.
inline double affine_to_unit(double x, double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("affine_to_unit: degenerate range (hi <= lo)");
    return 2.0 * (x - lo) / (hi - lo) - 1.0;
}

/// Smooth squashing of the real line into (-1, 1).
inline double squash(double x) { return std::tanh(x); }

/// d/dx squash(x) = 1 - squash(x)^2.
inline double squash_deriv(double x) {
    double t = std::tanh(x);
    return 1.0 - t * t;
}

} // namespace cheby
