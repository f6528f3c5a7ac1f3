#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "skewfatou/koenigs/koenigs.hpp"

using namespace skewfatou;

namespace {

using Q = ExactRational;

const Q kTunedB(-641, 4165);

SkewProduct<Q> example(const Q& b) { return example_family<Q>(4, Q(1), b); }

BigComplex bc(double re, double im, Precision bits) { return BigComplex({re, im}, bits); }

double rel_err(const BigComplex& a, const BigComplex& b) {
    if (b.is_zero()) return a.is_zero() ? -1e9 : a.log2_abs();
    return (a - b).log2_abs() - b.log2_abs();
}

}  // namespace

TEST(PhiNj, ZeroStepsAndInvariantFiber) {
    const auto F = example(kTunedB);
    const BigComplex w = bc(0.02, -0.01, 256);
    EXPECT_EQ(phi_nj(F, Q(-1), 10, 0, w).to_complex(), std::complex<double>(-1.0, 0.0));
    const BigComplex zero(256);
    EXPECT_EQ(phi_nj(F, Q(-1), 10, 1, zero).to_complex(), std::complex<double>(-2.0, 0.0));
    EXPECT_TRUE(phi_nj(F, Q(-1), 10, 5, zero).is_zero());
}

TEST(PhiNj, LinearClosedForm) {
    // g = 3z + 2t, mu = 1/5: phi_nn(w) = a w (1 - (mu/lambda)^n) / (lambda - mu).
    const auto F = SkewProduct<Q>::linear(Q(3), Q(1, 5), Q(2));
    const Precision P = 256;
    for (long n : {1L, 4L, 11L}) {
        const BigComplex w = bc(0.7, 0.3, P);
        const Q ratio = int_power(Q(1, 15), n);
        const Q factor = Q(2) * (Q(1) - ratio) / (Q(3) - Q(1, 5));
        const BigComplex expect = w * ScalarTraits<Q>::to_big_complex(factor, P);
        EXPECT_LT(rel_err(phi_nj(F, Q(0), n, n, w, P), expect), -240.0) << n;
    }
}

TEST(PhiNj, EscapeCarriesIndex) {
    const auto F = example(Q(0));
    const KoenigsContext<Q> ctx(F, Q(-1), 256, 100.0);
    try {
        (void)ctx.phi(2, 8, bc(500.0, 0.0, 256));
        FAIL();
    } catch (const EscapedError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Escaped);
        EXPECT_GE(e.index(), 1U);
    }
}

TEST(PhiNj, DoublePrecisionAgreement) {
    const auto F = example(kTunedB);
    const long n = 24;
    const Precision P = precision_for_depth(n, 8.0);
    const BigComplex w = bc(0.021, 0.013, 2 * P);
    const BigComplex lo = phi_nj(F, Q(-1), n, n, w, P);
    const BigComplex hi = phi_nj(F, Q(-1), n, n, w, 2 * P);
    const double agree = -(lo.with_precision(2 * P) - hi).log2_abs();
    EXPECT_GE(agree, static_cast<double>(P) - 2.0 * n * 3.0 - 16.0);
}

TEST(PhiJet, MatchesCauchyEstimatesFromValues) {
    // Coefficients of phi_{n,j} recovered from samples on a small circle.
    const auto F = example(kTunedB);
    const long n = 6, j = 5;
    const auto jet = phi_jet(F, Q(-1), n, j, 3);
    const Precision P = 256;
    const KoenigsContext<Q> ctx(F, Q(-1), P);
    const int m = 32;
    const double r = 1e-3;
    std::complex<double> c1 = 0, c2 = 0;
    for (int k = 0; k < m; ++k) {
        const std::complex<double> e = std::polar(1.0, 2.0 * M_PI * k / m);
        const auto v = (ctx.phi(n, j, BigComplex(r * e, P)) - BigComplex(jet[0].to_big_float(P))).to_complex();
        c1 += v / (r * e);
        c2 += v / (r * r * e * e);
    }
    c1 /= m;
    c2 /= m;
    EXPECT_NEAR(c1.real(), jet[1].to_double(), 1e-9 * std::abs(jet[1].to_double()));
    EXPECT_NEAR(c2.real(), jet[2].to_double(), 1e-4 * std::abs(jet[2].to_double()) + 1e-12);
}

TEST(KoenigsLimit, LinearOracle) {
    const auto F = SkewProduct<Q>::linear(Q(2), Q(1, 2), Q(1));
    const auto v = koenigs_limit(F, Q(0), bc(1.0, 0.0, 256), 1e-35, {.bits = 256});
    EXPECT_LT(rel_err(v.value, BigComplex(Q(2, 3).to_big_float(256))), -100.0);
    EXPECT_LT(v.error_bound, 1e-35);
    const auto z = koenigs_limit(F, Q(0), BigComplex(256), 1e-35, {.bits = 256});
    EXPECT_TRUE(z.value.is_zero());
}

TEST(KoenigsLimit, ExampleSelfConsistency) {
    const auto F = example(kTunedB);
    const BigComplex w = bc(0.125, 0.0, 1024);
    const auto a = koenigs_limit(F, Q(-1), w, 1e-30, {.bits = 0, .n_max = 48});
    const auto b = koenigs_limit(F, Q(-1), w, 1e-60, {.bits = 0, .n_max = 96});
    EXPECT_LT(std::exp2((a.value.with_precision(1024) - b.value.with_precision(1024)).log2_abs()), 1e-30);
    EXPECT_GE(b.n, a.n);
}

TEST(KoenigsLimit, NoConvergenceReportsDifferences) {
    const auto F = example(Q(0));
    try {
        (void)koenigs_limit(F, Q(-1), bc(0.03, 0.0, 256), 1e-200, {.bits = 0, .n_max = 12});
        FAIL();
    } catch (const NoConvergenceError& e) {
        EXPECT_EQ(e.differences().size(), 9U);
    }
}

TEST(FunctionalResidual, LinearAndZero) {
    const auto F = SkewProduct<Q>::linear(Q(2), Q(1, 2), Q(1));
    const KoenigsLimit<Q> phi(F, Q(0), 1e-40, {.bits = 256});
    EXPECT_LT(functional_residual(phi, F.p(), bc(0.3, 0.2, 256)), 1e-38);
    EXPECT_EQ(functional_residual(phi, F.p(), BigComplex(256)), 0.0);
}

TEST(FunctionalResidual, DepthResidualDecays) {
    const auto F = example(kTunedB);
    const KoenigsContext<Q> ctx(F, Q(-1), precision_for_depth(40, 8.0));
    const BigComplex w = bc(0.02, 0.011, ctx.precision());
    for (long n = 12; n <= 28; n += 4) {
        const double r0 = functional_residual_at_depth(ctx, n, w);
        const double r1 = functional_residual_at_depth(ctx, n + 4, w);
        EXPECT_GE(r0 / r1, 512.0) << n;
    }
}

TEST(ConvergenceSlope, RateDichotomy) {
    const BigComplex w = bc(1.0 / 32.0, 0.0, 512);
    const auto tuned = convergence_slope(example(kTunedB), Q(-1), w, 16, 40);
    EXPECT_LE(tuned.slope, -1.8);
    const auto generic = convergence_slope(example(Q(0)), Q(-1), w, 16, 40);
    EXPECT_GE(generic.slope, -1.2);
    EXPECT_LE(generic.slope, -0.8);
}

TEST(ConvergenceSlope, LinearIsMinusTwo) {
    const auto F = SkewProduct<Q>::linear(Q(8), Q(1, 8), Q(1));
    const auto rep = convergence_slope(F, Q(0), bc(0.03, 0.0, 256), 4, 30);
    EXPECT_NEAR(rep.slope, -2.0, 1e-9);
}

TEST(ConvergenceSlope, PrecisionExhausted) {
    const auto F = example(kTunedB);
    try {
        (void)convergence_slope(F, Q(-1), bc(0.03, 0.0, 128), 16, 40, 128);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PrecisionExhausted);
    }
}

TEST(ExtendGlobal, InsideDomainAndLinear) {
    const auto F = example(kTunedB);
    const KoenigsLimit<Q> phi(F, Q(-1), 1e-40, {.bits = 600, .n_max = 64});
    const BigComplex w = bc(0.01, 0.02, 600);
    const auto inside = extend_global(phi, w);
    EXPECT_EQ(inside.pullbacks, 0);
    EXPECT_EQ(inside.value, phi.direct(w).value);

    const auto L = SkewProduct<Q>::linear(Q(2), Q(1, 2), Q(1));
    const KoenigsLimit<Q> lin(L, Q(0), 1e-40, {.bits = 256});
    const auto far = extend_global(lin, bc(5.0, 0.0, 256));
    EXPECT_GT(far.pullbacks, 0);
    EXPECT_LT(rel_err(far.value, BigComplex(Q(10, 3).to_big_float(256))), -100.0);
}

TEST(ExtendGlobal, PullbackCountsAgree) {
    const auto F = example(kTunedB);
    const KoenigsLimit<Q> phi(F, Q(-1), 1e-45, {.bits = 600, .n_max = 64});
    const BigComplex w = bc(0.3, 0.4, 600);
    const auto a = extend_with_pullbacks(phi, w, 2);
    const auto b = extend_with_pullbacks(phi, w, 3);
    EXPECT_LT(std::exp2((a.value - b.value).log2_abs()), a.error_bound + b.error_bound + 1e-40);
}

TEST(ExtendGlobal, OutOfDomain) {
    const auto F = example(kTunedB);
    const KoenigsLimit<Q> phi(F, Q(-1), 1e-20, {.bits = 400, .n_max = 48, .delta = 0.0, .bailout = 1e50, .k_max = 1});
    try {
        (void)extend_global(phi, bc(100.0, 0.0, 400));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OutOfDomain);
    }
}

TEST(KoenigsProperty, DependsOnlyOnPX0AndA) {
    const auto F1 = example(kTunedB);
    const auto F2 = example(kTunedB + Q(1, 7));
    const KoenigsLimit<Q> phi1(F1, Q(-1), 1e-30, {.bits = 0, .n_max = 64});
    const KoenigsLimit<Q> phi2(F2, Q(-1), 1e-30, {.bits = 0, .n_max = 64});
    for (int k = 0; k < 6; ++k) {
        const BigComplex w = BigComplex(std::polar(0.02 + 0.003 * k, 1.1 * k), phi1.context().precision());
        const auto a = phi1.direct(w);
        const auto b = phi2.direct(w);
        EXPECT_LE(std::exp2((a.value - b.value).log2_abs()), a.error_bound + b.error_bound);
    }
}

TEST(KoenigsProperty, ResidualTracksDifferences) {
    // Residual decays at least as fast as |lambda|^(rho n) with the measured rho.
    const auto F = example(kTunedB);
    const KoenigsContext<Q> ctx(F, Q(-1), precision_for_depth(41, 8.0));
    const BigComplex w = bc(0.015, -0.02, ctx.precision());
    const auto slope = convergence_slope(ctx, w, 16, 40);
    const double r16 = functional_residual_at_depth(ctx, 16, w);
    const double r32 = functional_residual_at_depth(ctx, 32, w);
    EXPECT_LE(std::log2(r32 / r16), slope.slope * 16 * 3.0 + 3.0);
    // Squared rate with epsilon = 0.2.
    for (std::size_t i = 0; i < slope.n.size(); ++i) {
        EXPECT_LE(slope.log2_diff[i], (0.2 - 2.0) * 3.0 * static_cast<double>(slope.n[i])) << slope.n[i];
    }
}
