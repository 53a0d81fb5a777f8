#pragma once

// Multivariate tensor-product Chebyshev series: coefficient recovery by
// explicit cosine sums over the Chebyshev node grid (a DCT written as
// plain loops; desk-scale grids make a fast transform pointless), plus a
// pairwise-decomposition fit for d > 2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cheby/chebyshev.hpp"

namespace cheby {

/// Roots of T_{M+1}: cos((2k+1)π / (2(M+1))), k = 0..M.
inline std::vector<double> cheb_nodes(std::size_t M) {
    std::vector<double> nodes(M + 1);
    for (std::size_t k = 0; k <= M; ++k)
        nodes[k] = std::cos((2.0 * static_cast<double>(k) + 1.0) * std::numbers::pi /
                            (2.0 * static_cast<double>(M + 1)));
    return nodes;
}

// Coefficients are stored lexicographically by (m_1..m_d), the first
// index varying slowest.
struct TensorCoeffs {
    std::size_t dims = 0;
    std::vector<std::size_t> orders;
    std::vector<double> coeffs;

    std::size_t index(const std::vector<std::size_t>& m) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < dims; ++i) idx = idx * (orders[i] + 1) + m[i];
        return idx;
    }
};

using SampleFn = std::function<double(const std::vector<double>&)>;

namespace detail {

inline void check_tensor_shape(const std::vector<std::size_t>& orders) {
    if (orders.empty() || orders.size() > 4)
        throw std::invalid_argument("fit_tensor: dimension must be 1..4");
    for (std::size_t M : orders)
        if (M > 16) throw std::invalid_argument("fit_tensor: order must be <= 16");
}

// Odometer over a mixed-radix multi-index; returns false after the last.
inline bool advance(std::vector<std::size_t>& idx, const std::vector<std::size_t>& radix) {
    for (std::size_t i = idx.size(); i-- > 0;) {
        if (++idx[i] <= radix[i]) return true;
        idx[i] = 0;
    }
    return false;
}

} // namespace detail

/// Project f onto the tensor Chebyshev basis by sampling on the node
/// grid:
///   c_m = (prod_i lambda_{m_i} / (M_i + 1)) * sum_grid f(nodes) * prod_i cos(m_i (2k_i+1)π / (2(M_i+1)))
/// with lambda_0 = 1 and lambda_{m>0} = 2. Exact for polynomials of
/// componentwise degree <= orders.
inline TensorCoeffs fit_tensor(const SampleFn& f, const std::vector<std::size_t>& orders) {
    detail::check_tensor_shape(orders);
    const std::size_t d = orders.size();

    // cos_table[i][m * (M_i+1) + k] = cos(m (2k+1)π / (2(M_i+1))) = T_m(node_k)
    std::vector<std::vector<double>> cos_table(d);
    std::size_t grid_size = 1;
    for (std::size_t i = 0; i < d; ++i) {
        const std::size_t n = orders[i] + 1;
        grid_size *= n;
        cos_table[i].resize(n * n);
        for (std::size_t m = 0; m < n; ++m)
            for (std::size_t k = 0; k < n; ++k)
                cos_table[i][m * n + k] =
                    std::cos(static_cast<double>(m) * (2.0 * static_cast<double>(k) + 1.0) *
                             std::numbers::pi / (2.0 * static_cast<double>(n)));
    }

    std::vector<std::vector<double>> nodes(d);
    for (std::size_t i = 0; i < d; ++i) nodes[i] = cheb_nodes(orders[i]);

    std::vector<double> samples(grid_size);
    std::vector<std::size_t> k(d, 0);
    std::vector<double> point(d);
    std::size_t flat = 0;
    do {
        for (std::size_t i = 0; i < d; ++i) point[i] = nodes[i][k[i]];
        double v = f(point);
        if (!std::isfinite(v))
            throw std::domain_error("fit_tensor: sampler returned a non-finite value");
        samples[flat++] = v;
    } while (detail::advance(k, orders));

    TensorCoeffs tc;
    tc.dims = d;
    tc.orders = orders;
    tc.coeffs.assign(grid_size, 0.0);

    std::vector<std::size_t> m(d, 0);
    do {
        double norm = 1.0;
        for (std::size_t i = 0; i < d; ++i)
            norm *= (m[i] == 0 ? 1.0 : 2.0) / static_cast<double>(orders[i] + 1);
        double acc = 0.0;
        std::fill(k.begin(), k.end(), 0);
        flat = 0;
        do {
            double w = samples[flat++];
            for (std::size_t i = 0; i < d; ++i)
                w *= cos_table[i][m[i] * (orders[i] + 1) + k[i]];
            acc += w;
        } while (detail::advance(k, orders));
        tc.coeffs[tc.index(m)] = norm * acc;
    } while (detail::advance(m, orders));
    return tc;
}

/// Evaluate the series: sum_m c_m prod_i T_{m_i}(x_i).
inline double eval_tensor(const TensorCoeffs& tc, const std::vector<double>& point) {
    if (point.size() != tc.dims)
        throw std::invalid_argument("eval_tensor: point has " + std::to_string(point.size()) +
                                    " coordinates, series has " + std::to_string(tc.dims));
    std::vector<BasisVector> basis(tc.dims);
    for (std::size_t i = 0; i < tc.dims; ++i) basis[i] = cheb_eval_all(tc.orders[i], point[i]);

    double acc = 0.0;
    std::vector<std::size_t> m(tc.dims, 0);
    std::size_t flat = 0;
    do {
        double term = tc.coeffs[flat++];
        for (std::size_t i = 0; i < tc.dims; ++i) term *= basis[i][m[i]];
        acc += term;
    } while (detail::advance(m, tc.orders));
    return acc;
}

// Sum of bivariate series over chosen coordinate pairs. Terms a pair
// shares with an earlier pair (the constant, and univariate slots in a
// shared variable) are owned by the earliest pair and pinned to zero in
// the later ones, which keeps the least-squares system full rank.
struct PairwiseModel {
    std::size_t dims = 0;
    std::size_t order = 0;
    struct Term {
        std::size_t a = 0;
        std::size_t b = 0;
        TensorCoeffs coeffs;
    };
    std::vector<Term> terms;
};

namespace detail {

// Cyclic Jacobi eigendecomposition of a symmetric matrix, A = Q diag(w) Qᵀ.
inline void jacobi_eigen(std::vector<double>& A, std::size_t n, std::vector<double>& Q,
                         std::vector<double>& w) {
    Q.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) Q[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += A[p * n + q] * A[p * n + q];
        if (off < 1e-28) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = A[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                double theta = (A[q * n + q] - A[p * n + p]) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    double aip = A[i * n + p], aiq = A[i * n + q];
                    A[i * n + p] = c * aip - s * aiq;
                    A[i * n + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double api = A[p * n + i], aqi = A[q * n + i];
                    A[p * n + i] = c * api - s * aqi;
                    A[q * n + i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double qip = Q[i * n + p], qiq = Q[i * n + q];
                    Q[i * n + p] = c * qip - s * qiq;
                    Q[i * n + q] = s * qip + c * qiq;
                }
            }
    }
    w.resize(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = A[i * n + i];
}

// Solve the symmetric PSD system G x = r; reports rank deficiency.
inline std::vector<double> solve_normal(std::vector<double> G, std::size_t n,
                                        const std::vector<double>& r) {
    std::vector<double> Q, w;
    jacobi_eigen(G, n, Q, w);
    double wmax = 0.0;
    for (double v : w) wmax = std::max(wmax, std::abs(v));
    if (wmax == 0.0) throw std::runtime_error("fit_pairwise: singular least-squares system");
    const double tol = 1e-12 * wmax;
    std::vector<double> x(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (w[j] <= tol)
            throw std::runtime_error("fit_pairwise: singular least-squares system");
        double qr = 0.0;
        for (std::size_t i = 0; i < n; ++i) qr += Q[i * n + j] * r[i];
        qr /= w[j];
        for (std::size_t i = 0; i < n; ++i) x[i] += Q[i * n + j] * qr;
    }
    return x;
}

} // namespace detail

/// Fit sum-of-bivariate-series coefficients by least squares against f
/// sampled on the full d-dimensional node grid.
inline PairwiseModel fit_pairwise(const SampleFn& f, std::size_t d, std::size_t order,
                                  std::vector<std::pair<std::size_t, std::size_t>> pairs) {
    if (d < 2 || d > 4) throw std::invalid_argument("fit_pairwise: dimension must be 2..4");
    if (order > 16) throw std::invalid_argument("fit_pairwise: order must be <= 16");
    if (pairs.empty()) throw std::invalid_argument("fit_pairwise: no pairs given");
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        auto [a, b] = pairs[p];
        if (a >= b || b >= d) throw std::invalid_argument("fit_pairwise: bad pair (" +
                                                          std::to_string(a) + ", " +
                                                          std::to_string(b) + ")");
        if (p > 0 && pairs[p] == pairs[p - 1])
            throw std::invalid_argument("fit_pairwise: duplicate pair");
    }

    // first pair holding each variable owns that variable's univariate slots
    std::vector<std::size_t> var_owner(d, pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        auto [a, b] = pairs[p];
        var_owner[a] = std::min(var_owner[a], p);
        var_owner[b] = std::min(var_owner[b], p);
    }

    const std::size_t kp1 = order + 1;
    struct Slot {
        std::size_t pair;
        std::size_t ma;
        std::size_t mb;
    };
    std::vector<Slot> slots;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        auto [a, b] = pairs[p];
        for (std::size_t ma = 0; ma < kp1; ++ma)
            for (std::size_t mb = 0; mb < kp1; ++mb) {
                if (ma == 0 && mb == 0 && p != 0) continue;
                if (mb == 0 && ma > 0 && p != var_owner[a]) continue;
                if (ma == 0 && mb > 0 && p != var_owner[b]) continue;
                slots.push_back({p, ma, mb});
            }
    }
    const std::size_t U = slots.size();

    std::vector<double> nodes = cheb_nodes(order);
    std::vector<std::size_t> radix(d, order);
    std::vector<std::size_t> k(d, 0);
    std::vector<double> point(d);

    // basis value per slot at the current grid point
    std::vector<double> G(U * U, 0.0), rhs(U, 0.0), row(U);
    do {
        for (std::size_t i = 0; i < d; ++i) point[i] = nodes[k[i]];
        double y = f(point);
        if (!std::isfinite(y))
            throw std::domain_error("fit_pairwise: sampler returned a non-finite value");
        std::vector<BasisVector> basis(d);
        for (std::size_t i = 0; i < d; ++i) basis[i] = cheb_eval_all(order, point[i]);
        for (std::size_t u = 0; u < U; ++u) {
            const Slot& s = slots[u];
            row[u] = basis[pairs[s.pair].first][s.ma] * basis[pairs[s.pair].second][s.mb];
        }
        for (std::size_t u = 0; u < U; ++u) {
            rhs[u] += row[u] * y;
            for (std::size_t v = u; v < U; ++v) G[u * U + v] += row[u] * row[v];
        }
    } while (detail::advance(k, radix));
    for (std::size_t u = 0; u < U; ++u)
        for (std::size_t v = 0; v < u; ++v) G[u * U + v] = G[v * U + u];

    std::vector<double> x = detail::solve_normal(std::move(G), U, rhs);

    PairwiseModel model;
    model.dims = d;
    model.order = order;
    for (auto [a, b] : pairs) {
        PairwiseModel::Term t;
        t.a = a;
        t.b = b;
        t.coeffs.dims = 2;
        t.coeffs.orders = {order, order};
        t.coeffs.coeffs.assign(kp1 * kp1, 0.0);
        model.terms.push_back(std::move(t));
    }
    for (std::size_t u = 0; u < U; ++u) {
        const Slot& s = slots[u];
        model.terms[s.pair].coeffs.coeffs[s.ma * kp1 + s.mb] = x[u];
    }
    return model;
}

inline double eval_pairwise(const PairwiseModel& model, const std::vector<double>& point) {
    if (point.size() != model.dims)
        throw std::invalid_argument("eval_pairwise: point has " + std::to_string(point.size()) +
                                    " coordinates, model has " + std::to_string(model.dims));
    double acc = 0.0;
    for (const auto& t : model.terms)
        acc += eval_tensor(t.coeffs, {point[t.a], point[t.b]});
    return acc;
}

} // namespace cheby
