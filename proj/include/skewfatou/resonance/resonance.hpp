#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "skewfatou/dynamics/critical.hpp"
#include "skewfatou/dynamics/skew_product.hpp"
#include "skewfatou/error.hpp"
#include "skewfatou/koenigs/koenigs.hpp"
#include "skewfatou/numerics/linear_solve.hpp"
#include "skewfatou/numerics/scalar.hpp"
#include "skewfatou/parallel.hpp"

namespace skewfatou {

/// Quadratic jet of phi_{n,j}(w) at w = 0: C w + D w^2 + O(w^3).
template <class S>
struct JetDecomposition {
    long n = 0;
    long j = 0;
    S C_coeff;
    S D_coeff;
    double E_norm = 0.0;  // |w^3 coefficient|, the first omitted order (0 when not requested)
};

/// Constants of the closed forms
///   C = Y1 l^(j-n) + Ym1 l^(-n-j),
///   D = X2 l^(2j-2n) + X1 l^(j-2n) + X0 l^(-2n) + Xm1 l^(-2n-j) + Xm2 l^(-2n-2j).
template <class S>
struct CoefficientSolution {
    S Y1, Ym1;
    S X2, X1, X0, Xm1, Xm2;
    double fit_residual = 0.0;
};

struct Sample {
    long n = 0;
    long j = 0;
};

namespace detail {

template <class S>
bool negligible(const S& x, const S& like) {
    if constexpr (ScalarTraits<S>::exact) {
        (void)like;
        return ScalarTraits<S>::is_zero(x);
    } else {
        if (x.is_zero()) return true;
        return x.log2_abs() < 16.0 - static_cast<double>(like.precision());
    }
}

template <class S>
void require_resonant(const SkewProduct<S>& F) {
    const S one = ScalarTraits<S>::from_int(1, F.mu());
    if (!negligible(S(F.mu() * F.lambda() - one), F.mu())) {
        throw Error(ErrorKind::NotResonant, "mu must equal 1/lambda");
    }
}

// l^e for a possibly negative exponent, through mu = 1/l.
template <class S>
S lambda_power(const SkewProduct<S>& F, long e) {
    return e >= 0 ? int_power(F.lambda(), e) : int_power(F.mu(), -e);
}

template <class S>
std::vector<S> solve_design(const Matrix<S>& A, const std::vector<S>& y) {
    try {
        if constexpr (ScalarTraits<S>::exact) {
            return exact_solve_linear(A, y);
        } else {
            return least_squares(A, y);
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::SingularSystem) {
            throw Error(ErrorKind::DegenerateSamples, "sample design matrix is singular");
        }
        throw;
    }
}

}  // namespace detail

/// Order-2 jet of phi_{n,j}: full jet propagation through the first crit.k
/// steps, then the linear/quadratic recursions around the fixed point 0.
template <class S>
JetDecomposition<S> jet_coefficients(const SkewProduct<S>& F, const CriticalData<S>& crit, long n, long j,
                                     bool with_remainder = true) {
    detail::require_resonant(F);
    const auto rf = resonant_form(F);
    if (n < 0 || j < crit.k) throw Error(ErrorKind::Usage, "need n >= 0 and j >= k");

    const Jet<S> head = phi_jet(F, crit.x0, n, crit.k, 2);
    if (!detail::negligible(head[0], F.mu())) {
        throw Error(ErrorKind::NotNormalized, "x0 must land on the fixed point 0 after k steps");
    }
    S C = head[1];
    S D = head[2];
    S scale = int_power(F.mu(), n + crit.k);  // 1 / l^(n+s)
    for (long s = crit.k; s < j; ++s) {
        D = rf.lambda * D + rf.gamma * C * C + rf.tau * C * scale + rf.b * scale * scale;
        C = rf.lambda * C + rf.a * scale;
        scale = scale * F.mu();
    }

    JetDecomposition<S> out{n, j, std::move(C), std::move(D), 0.0};
    if (with_remainder) out.E_norm = ScalarTraits<S>::magnitude(phi_jet(F, crit.x0, n, j, 3)[3]);
    return out;
}

/// n = k + 6 and j = k .. k+5: five samples for the fit plus one held out.
inline std::vector<Sample> default_samples(long k) {
    std::vector<Sample> out;
    for (long j = k; j <= k + 5; ++j) out.push_back({k + 6, j});
    return out;
}

/// Fits Y1, Ym1 from the first two samples and the five X constants from the
/// first five (exact path) or from all but the last (float path, least
/// squares). The residual is measured at the remaining samples.
template <class S>
CoefficientSolution<S> fit_X(const SkewProduct<S>& F, const CriticalData<S>& crit, const std::vector<Sample>& samples,
                             unsigned threads = 0) {
    constexpr bool exact = ScalarTraits<S>::exact;
    if (samples.size() < 5) throw Error(ErrorKind::DegenerateSamples, "at least five samples are needed");
    std::vector<JetDecomposition<S>> jets(samples.size());
    parallel_for(
        samples.size(),
        [&](std::size_t i) { jets[i] = jet_coefficients(F, crit, samples[i].n, samples[i].j, false); }, threads);

    auto c_row = [&](const Sample& s) {
        return std::vector<S>{detail::lambda_power(F, s.j - s.n), detail::lambda_power(F, -s.n - s.j)};
    };
    auto d_row = [&](const Sample& s) {
        std::vector<S> row;
        for (long m : {2L, 1L, 0L, -1L, -2L}) row.push_back(detail::lambda_power(F, m * s.j - 2 * s.n));
        return row;
    };

    const std::size_t fit_c = exact ? 2 : std::max<std::size_t>(2, samples.size() - 1);
    const std::size_t fit_d = exact ? 5 : std::max<std::size_t>(5, samples.size() - 1);
    Matrix<S> A;
    std::vector<S> y;
    for (std::size_t i = 0; i < fit_c; ++i) {
        A.push_back(c_row(samples[i]));
        y.push_back(jets[i].C_coeff);
    }
    const auto yc = detail::solve_design(A, y);
    A.clear();
    y.clear();
    for (std::size_t i = 0; i < fit_d; ++i) {
        A.push_back(d_row(samples[i]));
        y.push_back(jets[i].D_coeff);
    }
    const auto xd = detail::solve_design(A, y);

    CoefficientSolution<S> out{yc[0], yc[1], xd[0], xd[1], xd[2], xd[3], xd[4], 0.0};
    for (std::size_t i = std::min(fit_c, fit_d); i < samples.size(); ++i) {
        const auto cr = c_row(samples[i]);
        const auto dr = d_row(samples[i]);
        S c_pred = out.Y1 * cr[0] + out.Ym1 * cr[1];
        S d_pred = xd[0] * dr[0];
        for (std::size_t m = 1; m < 5; ++m) d_pred = d_pred + xd[m] * dr[m];
        out.fit_residual = std::max({out.fit_residual, ScalarTraits<S>::magnitude(S(c_pred - jets[i].C_coeff)),
                                     ScalarTraits<S>::magnitude(S(d_pred - jets[i].D_coeff))});
    }
    return out;
}

/// Resonant map with mu = 1/lambda and g = p(z) + (a + tau z) t + b t^2.
template <class S>
SkewProduct<S> resonant_map(const Polynomial<S>& p, const S& a, const S& tau, const S& b) {
    const S lambda = p.coeff(1);
    if (ScalarTraits<S>::is_zero(lambda)) throw Error(ErrorKind::PreconditionFailed, "p'(0) must be non-zero");
    const S one = ScalarTraits<S>::from_int(1, lambda);
    return SkewProduct<S>(one / lambda, {p, Polynomial<S>({a, tau}), Polynomial<S>({b})});
}

/// The unique b with X1 = 0, from X1 at two trial values of b.
template <class S>
S solve_b(const Polynomial<S>& p, const S& a, const S& tau, const CriticalData<S>& crit,
          const std::vector<Sample>& samples = {}, std::pair<long, long> trial = {0, 1}) {
    const auto& use = samples.empty() ? default_samples(crit.k) : samples;
    const S b0 = ScalarTraits<S>::from_int(trial.first, a);
    const S b1 = ScalarTraits<S>::from_int(trial.second, a);
    if (trial.first == trial.second) throw Error(ErrorKind::Usage, "trial values of b must differ");
    const S x0 = fit_X(resonant_map(p, a, tau, b0), crit, use).X1;
    const S x1 = fit_X(resonant_map(p, a, tau, b1), crit, use).X1;
    const S slope = (x1 - x0) / (b1 - b0);
    if (detail::negligible(slope, a)) {
        throw Error(ErrorKind::NoDegenerateForm, "X1 does not depend on b for this p and x0");
    }
    return b0 - x0 / slope;
}

template <class S>
struct DegeneracyReport {
    bool degenerate = false;
    S X1;
};

/// X1 = 0 exactly, or |X1| < 2^(16 - P/2) on the float path.
template <class S>
DegeneracyReport<S> verify_degenerate(const SkewProduct<S>& F, const CriticalData<S>& crit,
                                      const std::vector<Sample>& samples = {}) {
    const auto sol = fit_X(F, crit, samples.empty() ? default_samples(crit.k) : samples);
    bool ok;
    if constexpr (ScalarTraits<S>::exact) {
        ok = ScalarTraits<S>::is_zero(sol.X1);
    } else {
        ok = sol.X1.is_zero() || sol.X1.log2_abs() < 16.0 - static_cast<double>(sol.X1.precision()) / 2.0;
    }
    return {ok, sol.X1};
}

}  // namespace skewfatou
