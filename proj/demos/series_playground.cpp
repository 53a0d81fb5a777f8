// Multivariate series fitting on paper-and-pencil functions: coefficient
// decay for exp(x), a bivariate tensor fit, and the pairwise
// decomposition of a three-variable function.

#include <cmath>
#include <cstdio>

#include "cheby/multicheb.hpp"

using namespace cheby;

int main() {
    TensorCoeffs e = fit_tensor([](const std::vector<double>& x) { return std::exp(x[0]); }, {10});
    std::printf("exp(x) coefficients (note the decay):\n");
    for (std::size_t m = 0; m <= 10; ++m) std::printf("  c_%-2zu = %+.3e\n", m, e.coeffs[m]);

    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        double x = -1.0 + 2.0 * i / 1000.0;
        worst = std::max(worst, std::abs(eval_tensor(e, {x}) - std::exp(x)));
    }
    std::printf("sup error of the order-10 fit on [-1,1]: %.3e\n\n", worst);

    TensorCoeffs t = fit_tensor(
        [](const std::vector<double>& x) { return x[0] * x[0] * x[1]; }, {2, 1});
    std::printf("x^2 y tensor fit: c_{0,1} = %.6f, c_{2,1} = %.6f\n",
                t.coeffs[t.index({0, 1})], t.coeffs[t.index({2, 1})]);

    PairwiseModel pw = fit_pairwise(
        [](const std::vector<double>& x) { return x[0] * x[1] + x[1] * x[2]; }, 3, 1,
        {{0, 1}, {0, 2}, {1, 2}});
    std::printf("xy + yz via pairwise fit, value at (0.5, 0.5, -1): %.6f (true %.6f)\n",
                eval_pairwise(pw, {0.5, 0.5, -1.0}), 0.25 - 0.5);
    for (const auto& term : pw.terms)
        std::printf("  pair (%zu,%zu) interaction coefficient c_{1,1} = %.6f\n", term.a, term.b,
                    term.coeffs.coeffs[1 * 2 + 1]);
    return 0;
}
