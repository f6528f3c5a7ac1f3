#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "skewfatou/dynamics/orbit.hpp"
#include "skewfatou/dynamics/reference_orbit.hpp"
#include "skewfatou/dynamics/skew_product.hpp"
#include "skewfatou/error.hpp"
#include "skewfatou/numerics/jet.hpp"
#include "skewfatou/numerics/precision.hpp"
#include "skewfatou/parallel.hpp"

namespace skewfatou {

template <class S>
S int_power(S x, long n) {
    S out = ScalarTraits<S>::from_int(1, x);
    while (n > 0) {
        if (n & 1L) out = out * x;
        n >>= 1;
        if (n > 0) x = x * x;
    }
    return out;
}

struct KoenigsOptions {
    Precision bits = 0;      // 0: precision_for_depth(n_max, |lambda|)
    long n_min = 4;
    long n_max = 96;
    double delta = 0.0;      // sample domain radius; 0: 1/(4|lambda|)
    double bailout = 1e50;   // phi_nj reports Escaped beyond this modulus
    int k_max = 64;          // pullbacks allowed by extend_global
};

/// The map, a base point and a reference orbit at a fixed working precision.
///
/// phi(n, j, w) = pi_2 F^j(w / lambda^n, x0), iterated as an offset from the
/// exact orbit of x0 so that depth n costs only the policy precision.
template <class S>
class KoenigsContext {
public:
    /// `horizon` bounds the depth when the orbit of x0 is not pre-periodic.
    KoenigsContext(SkewProduct<S> F, S x0, Precision bits, double bailout = 1e50, std::size_t horizon = 1024)
        : F_(std::move(F)), x0_(std::move(x0)), bits_(bits), bailout_(bailout) {
        lambda_ = F_.lambda();
        lambda_abs_ = ScalarTraits<S>::magnitude(lambda_);
        ref_ = std::make_shared<ReferenceOrbit<S>>(F_.p(), x0_, bits_, horizon);
    }

    const SkewProduct<S>& map() const noexcept { return F_; }
    const S& x0() const noexcept { return x0_; }
    const S& lambda() const noexcept { return lambda_; }
    double lambda_abs() const noexcept { return lambda_abs_; }
    Precision precision() const noexcept { return bits_; }
    double bailout() const noexcept { return bailout_; }
    std::shared_ptr<const ReferenceOrbit<S>> reference() const { return ref_; }

    /// Exact 1 / lambda^n on exact scalars.
    S inverse_lambda_power(long n) const { return ScalarTraits<S>::from_int(1, lambda_) / int_power(lambda_, n); }

    OffsetOrbit<S> start(long n, const BigComplex& w, Tangent tangent = Tangent::None) const {
        return OffsetOrbit<S>(F_, ref_, w.with_precision(bits_), inverse_lambda_power(n), BigComplex(bits_), tangent);
    }

    BigComplex phi(long n, long j, const BigComplex& w) const {
        auto orb = start(n, w);
        advance(orb, j);
        return orb.z();
    }

    /// phi_{n,j}(w) together with its derivative in w.
    std::pair<BigComplex, BigComplex> phi_with_derivative(long n, long j, const BigComplex& w) const {
        auto orb = start(n, w, Tangent::Fiber);
        advance(orb, j);
        return {orb.z(), orb.dz()};
    }

    void advance(OffsetOrbit<S>& orb, long steps) const {
        if (orb.step_index() + static_cast<std::size_t>(steps) > ref_->horizon()) {
            throw Error(ErrorKind::Usage, "depth exceeds the reference horizon of a non-periodic base point");
        }
        for (long s = 0; s < steps; ++s) {
            orb.step();
            if (orb.beyond(bailout_)) {
                throw EscapedError(orb.step_index(), "orbit left |z| < " + std::to_string(bailout_) + " at step " +
                                                         std::to_string(orb.step_index()));
            }
        }
    }

private:
    SkewProduct<S> F_;
    S x0_;
    Precision bits_;
    double bailout_;
    S lambda_;
    double lambda_abs_ = 0.0;
    std::shared_ptr<const ReferenceOrbit<S>> ref_;
};

/// pi_2 F^j(w / lambda^n, x0) at `bits` of precision.
template <class S>
BigComplex phi_nj(const SkewProduct<S>& F, const S& x0, long n, long j, const BigComplex& w, Precision bits = 0) {
    if (j < 0 || n < 0) throw Error(ErrorKind::Usage, "n and j must be non-negative");
    const double lam = ScalarTraits<S>::magnitude(F.lambda());
    if (bits == 0) bits = precision_for_depth(std::max(1L, n), lam);
    return KoenigsContext<S>(F, x0, bits).phi(n, j, w);
}

/// phi_{n,j} as a truncated power series in w, by direct jet propagation.
template <class S>
Jet<S> phi_jet(const SkewProduct<S>& F, const S& x0, long n, long j, std::size_t order) {
    const S zero = ScalarTraits<S>::from_int(0, x0);
    const Jet<S> zero_jet = Jet<S>::constant(order, zero);
    Jet<S> z = Jet<S>::constant(order, x0);
    S scale = ScalarTraits<S>::from_int(1, x0) / int_power(F.lambda(), n);
    for (long s = 0; s < j; ++s) {
        const Jet<S> t = Jet<S>::affine(order, zero, scale);
        z = F.g(t, z, zero_jet);
        scale = scale * F.mu();
    }
    return z;
}

struct KoenigsTable {
    long n = 0;
    long j = 0;
    std::vector<BigComplex> w;
    std::vector<BigComplex> values;
};

template <class S>
KoenigsTable koenigs_table(const KoenigsContext<S>& ctx, long n, long j, const std::vector<BigComplex>& ws,
                           unsigned threads = 0) {
    KoenigsTable table{n, j, ws, std::vector<BigComplex>(ws.size(), BigComplex(ctx.precision()))};
    parallel_for(ws.size(), [&](std::size_t i) { table.values[i] = ctx.phi(n, j, ws[i]); }, threads);
    return table;
}

struct KoenigsValue {
    BigComplex value;
    double error_bound = 0.0;
    long n = 0;                       // depth that met the tolerance
    std::vector<double> differences;  // |phi_m - phi_{m-1}| for m = n_min .. n
    int pullbacks = 0;                // k used by extend_global (0 for direct evaluation)
};

/// Limit of phi_n(w): the first depth whose geometric tail bound
/// d_n r / (1 - r), r = d_n / d_{n-1}, falls below tol.
template <class S>
KoenigsValue koenigs_limit(const KoenigsContext<S>& ctx, const BigComplex& w, double tol, long n_min = 4,
                           long n_max = 96) {
    if (!(tol > 0.0)) throw Error(ErrorKind::Usage, "tolerance must be positive");
    KoenigsValue out{ctx.phi(n_min - 1, n_min - 1, w), 0.0, n_min - 1, {}, 0};
    double prev_diff = -1.0;
    for (long n = n_min; n <= n_max; ++n) {
        BigComplex cur = ctx.phi(n, n, w);
        const BigComplex diff_c = cur - out.value;
        const double diff = diff_c.is_zero() ? 0.0 : std::exp2(diff_c.log2_abs());
        out.differences.push_back(diff);
        out.value = std::move(cur);
        out.n = n;
        if (diff == 0.0) {
            if (prev_diff == 0.0 || w.is_zero()) {
                out.error_bound = 0.0;
                return out;
            }
        } else if (prev_diff > 0.0) {
            const double r = diff / prev_diff;
            if (r < 1.0) {
                const double bound = diff * r / (1.0 - r);
                if (bound < tol) {
                    out.error_bound = bound;
                    return out;
                }
            }
        }
        prev_diff = diff;
    }
    throw NoConvergenceError(out.differences, "phi_n(w) did not settle below tol by n = " + std::to_string(n_max));
}

template <class S>
KoenigsValue koenigs_limit(const SkewProduct<S>& F, const S& x0, const BigComplex& w, double tol,
                           const KoenigsOptions& opts = {}) {
    const double lam = ScalarTraits<S>::magnitude(F.lambda());
    if (!(lam > 1.0)) throw Error(ErrorKind::PreconditionFailed, "|lambda| must exceed 1");
    const Precision bits = opts.bits ? opts.bits : precision_for_depth(opts.n_max, lam);
    const KoenigsContext<S> ctx(F, x0, bits, opts.bailout);
    return koenigs_limit(ctx, w, tol, opts.n_min, opts.n_max);
}

/// Evaluator for the Koenigs map Phi on |w| < delta, extended globally by the
/// functional equation.
template <class S>
class KoenigsLimit {
public:
    KoenigsLimit(const SkewProduct<S>& F, const S& x0, double tol, const KoenigsOptions& opts = {})
        : opts_(opts), tol_(tol), ctx_(make_context(F, x0, opts)) {
        delta_ = opts.delta > 0.0 ? opts.delta : 1.0 / (4.0 * ctx_.lambda_abs());
        const double mu = ScalarTraits<S>::magnitude(F.mu());
        if (!(mu > 0.0 && mu < 1.0)) throw Error(ErrorKind::PreconditionFailed, "0 < |mu| < 1 is required");
        if (ScalarTraits<S>::is_zero(F.coeff(1, 0))) throw Error(ErrorKind::PreconditionFailed, "a = dg/dt(0,0) must be non-zero");
    }

    const KoenigsContext<S>& context() const noexcept { return ctx_; }
    double domain_radius() const noexcept { return delta_; }
    double tolerance() const noexcept { return tol_; }
    const KoenigsOptions& options() const noexcept { return opts_; }

    /// Direct limit at w (phi_n converges on every compact set).
    KoenigsValue direct(const BigComplex& w) const { return koenigs_limit(ctx_, w, tol_, opts_.n_min, opts_.n_max); }

    /// Direct limit inside the domain, extend_global outside it.
    KoenigsValue operator()(const BigComplex& w) const;

private:
    static KoenigsContext<S> make_context(const SkewProduct<S>& F, const S& x0, const KoenigsOptions& opts) {
        const double lam = ScalarTraits<S>::magnitude(F.lambda());
        if (!(lam > 1.0)) throw Error(ErrorKind::PreconditionFailed, "|lambda| must exceed 1");
        const Precision bits = opts.bits ? opts.bits : precision_for_depth(opts.n_max, lam);
        return KoenigsContext<S>(F, x0, bits, opts.bailout);
    }

    KoenigsOptions opts_;
    double tol_;
    KoenigsContext<S> ctx_;
    double delta_ = 0.0;
};

/// p^k(Phi(w / lambda^k)) for a prescribed number of pullbacks k.
template <class S>
KoenigsValue extend_with_pullbacks(const KoenigsLimit<S>& approx, const BigComplex& w, int k) {
    const auto& ctx = approx.context();
    const Precision bits = ctx.precision();
    const BigComplex inv_lambda_k = ScalarTraits<S>::to_big_complex(ctx.inverse_lambda_power(k), bits);
    KoenigsValue out = approx.direct(w.with_precision(bits) * inv_lambda_k);
    const auto p = ctx.map().p().template map<BigComplex>(
        [bits](const S& c) { return ScalarTraits<S>::to_big_complex(c, bits); });
    const auto dp = p.derivative();
    double bound = out.error_bound;
    for (int i = 0; i < k; ++i) {
        bound *= std::max(1.0, std::exp2(dp(out.value).log2_abs()));
        out.value = p(out.value);
    }
    out.error_bound = bound;
    out.pullbacks = k;
    return out;
}

/// p^k(Phi(w / lambda^k)) with the smallest k that brings w into the domain.
template <class S>
KoenigsValue extend_global(const KoenigsLimit<S>& approx, const BigComplex& w) {
    const double lam = approx.context().lambda_abs();
    const double log_w = w.is_zero() ? -1e9 : w.log2_abs();
    const double log_delta = std::log2(approx.domain_radius());
    int k = 0;
    while (log_w - k * std::log2(lam) >= log_delta) {
        if (++k > approx.options().k_max) {
            throw Error(ErrorKind::OutOfDomain, "w needs more than k_max pullbacks to reach the domain");
        }
    }
    return extend_with_pullbacks(approx, w, k);
}

template <class S>
KoenigsValue KoenigsLimit<S>::operator()(const BigComplex& w) const {
    if (w.is_zero() || w.log2_abs() < std::log2(delta_)) return direct(w);
    return extend_global(*this, w);
}

/// |Phi(lambda w) - p(Phi(w))| with both values taken as direct limits.
template <class S>
double functional_residual(const KoenigsLimit<S>& approx, const Polynomial<S>& p, const BigComplex& w) {
    const auto& ctx = approx.context();
    const Precision bits = ctx.precision();
    const BigComplex lam = ScalarTraits<S>::to_big_complex(ctx.lambda(), bits);
    const auto pn = p.template map<BigComplex>([bits](const S& c) { return ScalarTraits<S>::to_big_complex(c, bits); });
    auto eval = [&](const BigComplex& x) {
        try {
            return approx.direct(x).value;
        } catch (const NoConvergenceError&) {
            return extend_global(approx, x).value;
        }
    };
    const BigComplex r = eval(lam * w.with_precision(bits)) - pn(eval(w.with_precision(bits)));
    return r.is_zero() ? 0.0 : std::exp2(r.log2_abs());
}

/// |phi_n(lambda w) - p(phi_n(w))| for the depth-n approximant.
template <class S>
double functional_residual_at_depth(const KoenigsContext<S>& ctx, long n, const BigComplex& w) {
    const Precision bits = ctx.precision();
    const BigComplex lam = ScalarTraits<S>::to_big_complex(ctx.lambda(), bits);
    const auto pn = ctx.map().p().template map<BigComplex>(
        [bits](const S& c) { return ScalarTraits<S>::to_big_complex(c, bits); });
    const BigComplex r = ctx.phi(n, n, lam * w) - pn(ctx.phi(n, n, w));
    return r.is_zero() ? 0.0 : std::exp2(r.log2_abs());
}

struct SlopeReport {
    std::vector<long> n;
    std::vector<double> log2_diff;  // log2 |phi_{n+1}(w) - phi_n(w)|
    std::vector<BigComplex> phi;    // phi_n(w)
    double slope = 0.0;             // rho in |diff| ~ |lambda|^(rho n)
    double intercept = 0.0;
    long fit_from = 0;
};

/// Least-squares slope of log|phi_{n+1}(w) - phi_n(w)| against n log|lambda|,
/// fitted on the last half of [n_lo, n_hi].
template <class S>
SlopeReport convergence_slope(const KoenigsContext<S>& ctx, const BigComplex& w, long n_lo, long n_hi) {
    if (n_lo < 0 || n_hi <= n_lo) throw Error(ErrorKind::Usage, "need n_lo < n_hi");
    SlopeReport rep;
    const double lam2 = std::log2(ctx.lambda_abs());
    const double floor = -static_cast<double>(ctx.precision()) + 16.0;
    BigComplex prev = ctx.phi(n_lo, n_lo, w);
    for (long n = n_lo; n <= n_hi; ++n) {
        BigComplex next = ctx.phi(n + 1, n + 1, w);
        const BigComplex d = next - prev;
        const double scale = std::max(0.0, next.log2_abs());
        if (d.is_zero() || d.log2_abs() < floor + scale) {
            throw Error(ErrorKind::PrecisionExhausted,
                        "difference at n = " + std::to_string(n) + " is below the working precision");
        }
        rep.n.push_back(n);
        rep.log2_diff.push_back(d.log2_abs());
        rep.phi.push_back(prev);
        prev = std::move(next);
    }
    const std::size_t m = rep.n.size();
    const std::size_t first = m / 2;
    rep.fit_from = rep.n[first];
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double cnt = static_cast<double>(m - first);
    for (std::size_t i = first; i < m; ++i) {
        const double x = static_cast<double>(rep.n[i]) * lam2;
        sx += x;
        sy += rep.log2_diff[i];
        sxx += x * x;
        sxy += x * rep.log2_diff[i];
    }
    const double den = cnt * sxx - sx * sx;
    if (den == 0.0) {
        rep.slope = 0.0;
        rep.intercept = sy / cnt;
    } else {
        rep.slope = (cnt * sxy - sx * sy) / den;
        rep.intercept = (sy - rep.slope * sx) / cnt;
    }
    return rep;
}

template <class S>
SlopeReport convergence_slope(const SkewProduct<S>& F, const S& x0, const BigComplex& w, long n_lo, long n_hi,
                              Precision bits = 0) {
    const double lam = ScalarTraits<S>::magnitude(F.lambda());
    if (bits == 0) bits = precision_for_depth(n_hi + 1, lam);
    return convergence_slope(KoenigsContext<S>(F, x0, bits), w, n_lo, n_hi);
}

}  // namespace skewfatou
