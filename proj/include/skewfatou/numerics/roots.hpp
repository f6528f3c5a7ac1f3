#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "skewfatou/error.hpp"
#include "skewfatou/numerics/big_complex.hpp"
#include "skewfatou/numerics/polynomial.hpp"

namespace skewfatou {

/// All complex roots of p by Aberth-Ehrlich iteration in double precision.
///
/// Multiple roots come back as tight clusters; callers that care about
/// multiplicities should pass a square-free polynomial.
inline std::vector<std::complex<double>> aberth_roots(const std::vector<std::complex<double>>& coeffs,
                                                      int max_iter = 500) {
    std::size_t deg = coeffs.size();
    while (deg > 0 && coeffs[deg - 1] == std::complex<double>{}) --deg;
    if (deg <= 1) return {};
    const std::size_t n = deg - 1;
    const auto lead = coeffs[n];

    auto eval = [&](std::complex<double> z, std::complex<double>& dp) {
        std::complex<double> p = lead;
        dp = 0.0;
        for (std::size_t k = n; k-- > 0;) {
            dp = dp * z + p;
            p = p * z + coeffs[k];
        }
        return p;
    };

    // Cauchy bound for the initial circle.
    double bound = 0.0;
    for (std::size_t k = 0; k < n; ++k) bound = std::max(bound, std::abs(coeffs[k] / lead));
    const double radius = 1.0 + bound;
    std::vector<std::complex<double>> z(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = 2.0 * M_PI * (static_cast<double>(k) + 0.25) / static_cast<double>(n) + 0.4;
        z[k] = std::polar(0.5 * radius, angle);
    }
    for (int it = 0; it < max_iter; ++it) {
        double change = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> dp;
            const auto p = eval(z[k], dp);
            if (p == std::complex<double>{}) continue;
            const auto ratio = p / dp;
            std::complex<double> sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != k) sum += 1.0 / (z[k] - z[j]);
            }
            const auto step = ratio / (1.0 - ratio * sum);
            z[k] -= step;
            change = std::max(change, std::abs(step) / std::max(1.0, std::abs(z[k])));
        }
        if (change < 1e-15) break;
    }
    return z;
}

/// Newton polish of a simple root in BigComplex arithmetic.
inline BigComplex polish_root(const Polynomial<BigComplex>& p, BigComplex z, int max_iter = 200) {
    const auto dp = p.derivative();
    const Precision bits = z.precision();
    for (int it = 0; it < max_iter; ++it) {
        const BigComplex d = dp(z);
        if (d.is_zero()) break;
        const BigComplex step = p(z) / d;
        z -= step;
        if (step.is_zero() || step.log2_abs() < z.log2_abs() - static_cast<double>(bits) + 2.0) break;
    }
    return z;
}

}  // namespace skewfatou
