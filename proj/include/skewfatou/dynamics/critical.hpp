#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <type_traits>
#include <utility>
#include <vector>

#include "skewfatou/error.hpp"
#include "skewfatou/numerics/polynomial.hpp"
#include "skewfatou/numerics/rational.hpp"
#include "skewfatou/numerics/roots.hpp"
#include "skewfatou/numerics/scalar.hpp"

namespace skewfatou {

/// A critical point x0 of p whose orbit lands on a repelling fixed point.
///
/// crit_order is the multiplicity of x0 as a root of p'; local_degree = crit_order + 1
/// is the exponent s in |p(z) - p(x0)| ~ |z - x0|^s.
template <class S>
struct CriticalData {
    S x0;
    int crit_order = 0;
    int local_degree = 0;
    int k = 0;
    S fixed_point;
    S multiplier;
};

struct CriticalOptions {
    int k_max = 16;
    Precision bits = 256;
};

/// Square-free decomposition (Yun): factors[m-1] is the monic product of the
/// irreducible factors of multiplicity m. Exact scalars only.
template <class S>
std::vector<Polynomial<S>> squarefree_factors(const Polynomial<S>& f) {
    static_assert(ScalarTraits<S>::exact, "square-free decomposition needs an exact scalar");
    std::vector<Polynomial<S>> out;
    if (f.degree() == 0) return out;
    const auto df = f.derivative();
    const auto a0 = gcd(f, df);
    auto b = divmod(f, a0).first;
    auto c = divmod(df, a0).first;
    auto d = c - b.derivative();
    while (b.degree() > 0) {
        const auto a = gcd(b, d);
        out.push_back(a);
        b = divmod(b, a).first;
        c = divmod(d, a).first;
        d = c - b.derivative();
    }
    return out;
}

namespace detail {

/// Best rational approximation with bounded denominator (continued fractions).
inline ExactRational rationalize(double x, long max_den = 1000000) {
    long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        const double fl = std::floor(r);
        if (std::fabs(fl) > 1e15) break;
        const long a = static_cast<long>(fl);
        const long h2 = a * h1 + h0;
        const long k2 = a * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        const double frac = r - fl;
        if (frac < 1e-12) break;
        r = 1.0 / frac;
    }
    return {h1, k1};
}

/// Exact scalar for a numerically located root, if one with a small denominator exists.
template <class S>
std::optional<S> recognize_root(const Polynomial<S>& f, std::complex<double> approx) {
    if (f.degree() == 1) return -f.coeffs()[0] / f.coeffs()[1];
    std::optional<S> candidate;
    if constexpr (std::is_same_v<S, ExactRational>) {
        if (std::fabs(approx.imag()) > 1e-9 * std::max(1.0, std::abs(approx))) return std::nullopt;
        candidate = rationalize(approx.real());
    } else if constexpr (std::is_same_v<S, GaussianRational>) {
        candidate = GaussianRational(rationalize(approx.real()), rationalize(approx.imag()));
    }
    if (candidate && ScalarTraits<S>::is_zero(f(*candidate))) return candidate;
    return std::nullopt;
}

template <class S>
std::vector<std::complex<double>> double_coeffs(const Polynomial<S>& p) {
    std::vector<std::complex<double>> out;
    for (const S& c : p.coeffs()) out.push_back(ScalarTraits<S>::to_big_complex(c, 64).to_complex());
    return out;
}

template <class S>
void keep_best(std::optional<CriticalData<S>>& best, CriticalData<S> cand) {
    auto better = [](const CriticalData<S>& a, const CriticalData<S>& b) {
        if (a.crit_order != b.crit_order) return a.crit_order > b.crit_order;
        if (a.k != b.k) return a.k < b.k;
        return ScalarTraits<S>::magnitude(a.x0) < ScalarTraits<S>::magnitude(b.x0);
    };
    if (!best || better(cand, *best)) best = std::move(cand);
}

}  // namespace detail

/// Locates the critical point of highest order whose orbit reaches fixed_point
/// within k_max steps (ties: fewer steps, then smaller modulus).
template <class S>
CriticalData<S> critical_data(const Polynomial<S>& p, const S& fixed_point, const CriticalOptions& opts = {}) {
    using T = ScalarTraits<S>;
    const Precision bits = opts.bits;
    const auto dp = p.derivative();
    const S multiplier = dp(fixed_point);
    if constexpr (T::exact) {
        if (!(p(fixed_point) == fixed_point)) throw Error(ErrorKind::PreconditionFailed, "p does not fix the given point");
    } else {
        const BigComplex gap = p(fixed_point) - fixed_point;
        if (gap.log2_abs() > -static_cast<double>(bits) / 2.0) {
            throw Error(ErrorKind::PreconditionFailed, "p does not fix the given point");
        }
    }
    if (!(T::magnitude(multiplier) > 1.0)) {
        throw Error(ErrorKind::PreconditionFailed, "fixed point is not repelling (|p'| <= 1)");
    }
    if (p.degree() < 2) throw Error(ErrorKind::NotCriticallyFinite, "p has no critical points");

    std::optional<CriticalData<S>> best;
    auto landing_steps = [&](const S& x) -> std::optional<int> {
        S z = x;
        for (int k = 0; k <= opts.k_max; ++k) {
            if constexpr (T::exact) {
                if (z == fixed_point) return k;
            } else {
                const double scale = std::max(1.0, T::magnitude(fixed_point));
                if ((z - fixed_point).log2_abs() < std::log2(scale) - static_cast<double>(bits) / 2.0) return k;
            }
            z = p(z);
        }
        return std::nullopt;
    };

    if constexpr (T::exact) {
        const auto factors = squarefree_factors(dp);
        for (std::size_t m = 0; m < factors.size(); ++m) {
            if (factors[m].degree() == 0) continue;
            for (const auto& approx : aberth_roots(detail::double_coeffs(factors[m]))) {
                const auto root = detail::recognize_root(factors[m], approx);
                if (!root) continue;
                if (const auto k = landing_steps(*root)) {
                    const int order = static_cast<int>(m + 1);
                    detail::keep_best(best, CriticalData<S>{*root, order, order + 1, *k, fixed_point, multiplier});
                }
            }
        }
    } else {
        // Cluster the double-precision roots of p', polish each cluster on the
        // derivative that has a simple root there, then confirm the multiplicity
        // against the relative threshold 2^(-P/2).
        const auto approx = aberth_roots(detail::double_coeffs(dp));
        std::vector<bool> used(approx.size(), false);
        for (std::size_t i = 0; i < approx.size(); ++i) {
            if (used[i]) continue;
            std::complex<double> sum = approx[i];
            int count = 1;
            used[i] = true;
            for (std::size_t j = i + 1; j < approx.size(); ++j) {
                if (!used[j] && std::abs(approx[j] - approx[i]) < 1e-3 * std::max(1.0, std::abs(approx[i]))) {
                    used[j] = true;
                    sum += approx[j];
                    ++count;
                }
            }
            auto simple = dp;
            for (int c = 1; c < count; ++c) simple = simple.derivative();
            const BigComplex x = polish_root(simple, BigComplex(sum / static_cast<double>(count), bits));
            int order = 0;
            auto deriv = dp;
            const double threshold = -static_cast<double>(bits) / 2.0;
            while (deriv.degree() > 0 || !deriv.is_zero()) {
                const double scale = std::log2(std::max(1.0, T::magnitude(deriv.coeffs().back())));
                if (deriv(x).log2_abs() - scale > threshold) break;
                ++order;
                deriv = deriv.derivative();
            }
            if (order == 0) continue;
            if (const auto k = landing_steps(x)) {
                detail::keep_best(best, CriticalData<S>{x, order, order + 1, *k, fixed_point, multiplier});
            }
        }
    }
    if (!best) throw Error(ErrorKind::NotCriticallyFinite, "no critical orbit lands on the fixed point");
    return *best;
}

}  // namespace skewfatou
