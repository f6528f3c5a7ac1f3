#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "skewfatou/dynamics/critical.hpp"
#include "skewfatou/dynamics/orbit.hpp"
#include "skewfatou/dynamics/parse.hpp"
#include "skewfatou/dynamics/reference_orbit.hpp"
#include "skewfatou/dynamics/skew_product.hpp"

using namespace skewfatou;

namespace {

using Q = ExactRational;

SkewProduct<Q> example(const Q& b) { return example_family<Q>(4, Q(1), b); }

Polynomial<Q> poly(std::vector<long> c) {
    std::vector<Q> out;
    for (long v : c) out.emplace_back(v);
    return Polynomial<Q>(out);
}

}  // namespace

TEST(EvalMap, ExampleFamily) {
    const Q b(3, 5);
    const auto F = example(b);
    auto r = eval_map(F, Point<Q>{Q(0), Q(-1)});
    EXPECT_EQ(r.t, Q(0));
    EXPECT_EQ(r.z, Q(-2));
    r = eval_map(F, Point<Q>{Q(0), Q(-2)});
    EXPECT_EQ(r.z, Q(0));
    r = eval_map(F, Point<Q>{Q(8), Q(0)});
    EXPECT_EQ(r.t, Q(1));
    EXPECT_EQ(r.z, Q(8) + Q(64) * b);
}

TEST(ResonantForm, Coefficients) {
    const Q b(-641, 4165);
    const auto rf = resonant_form(example(b));
    EXPECT_EQ(rf.lambda, Q(8));
    EXPECT_EQ(rf.a, Q(1));
    EXPECT_EQ(rf.gamma, Q(12));
    EXPECT_EQ(rf.tau, Q(0));
    EXPECT_EQ(rf.b, b);

    const auto lin = resonant_form(SkewProduct<Q>::linear(Q(3), Q(1, 3), Q(2)));
    EXPECT_EQ(lin.gamma, Q(0));
    EXPECT_EQ(lin.tau, Q(0));
    EXPECT_EQ(lin.b, Q(0));

    const SkewProduct<Q> mixed(Q(1, 2), {poly({0, 2}), poly({1, 5})});
    EXPECT_EQ(resonant_form(mixed).tau, Q(5));
}

TEST(ResonantForm, NotNormalized) {
    const SkewProduct<Q> F(Q(1, 2), {poly({1, 2})});
    try {
        (void)resonant_form(F);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotNormalized);
    }
}

TEST(ResonantForm, NumericPathMatchesExact) {
    const auto F = example(Q(-641, 4165));
    const auto rf = resonant_form(F.to_numeric(128));
    EXPECT_EQ(rf.lambda.to_complex(), std::complex<double>(8.0, 0.0));
    EXPECT_NEAR(rf.b.to_complex().real(), -641.0 / 4165.0, 1e-15);
}

TEST(CriticalData, ExampleDegreeFour) {
    const auto F = example(Q(0));
    const auto cd = critical_data(F.p(), Q(0));
    EXPECT_EQ(cd.x0, Q(-1));
    EXPECT_EQ(cd.crit_order, 3);
    EXPECT_EQ(cd.local_degree, 4);
    EXPECT_EQ(cd.k, 2);
    EXPECT_EQ(cd.multiplier, Q(8));
}

TEST(CriticalData, DegreeSix) {
    const auto F = example_family<Q>(6, Q(1), Q(0));
    const auto cd = critical_data(F.p(), Q(0));
    EXPECT_EQ(cd.x0, Q(-1));
    EXPECT_EQ(cd.crit_order, 5);
    EXPECT_EQ(cd.k, 2);
    EXPECT_EQ(cd.multiplier, Q(12));
}

TEST(CriticalData, SuperattractingFixedPointIsRejected) {
    try {
        (void)critical_data(poly({0, 0, 1}), Q(0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PreconditionFailed);
    }
}

TEST(CriticalData, NothingLands) {
    // z^2 + 3z: critical point -3/2 escapes.
    try {
        (void)critical_data(poly({0, 3, 1}), Q(0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotCriticallyFinite);
    }
}

TEST(CriticalData, NumericPath) {
    const auto F = example(Q(0)).to_numeric(256);
    const auto cd = critical_data(F.p(), BigComplex(256));
    EXPECT_NEAR(cd.x0.to_complex().real(), -1.0, 1e-30);
    EXPECT_EQ(cd.crit_order, 3);
    EXPECT_EQ(cd.k, 2);
}

TEST(Orbit, Examples) {
    const auto F = example(Q(0));
    auto rec = orbit(F, {BigComplex(128), BigComplex(128)}, 5, 128);
    for (const auto& pt : rec.points) EXPECT_TRUE(pt.z.is_zero());

    rec = orbit(F, {BigComplex(128), BigComplex(-1, 128)}, 3, 128);
    ASSERT_EQ(rec.points.size(), 4U);
    EXPECT_EQ(rec.points[0].z.to_complex().real(), -1.0);
    EXPECT_EQ(rec.points[1].z.to_complex().real(), -2.0);
    EXPECT_EQ(rec.points[2].z.to_complex().real(), 0.0);
    EXPECT_EQ(rec.points[3].z.to_complex().real(), 0.0);
    EXPECT_FALSE(rec.escaped);

    rec = orbit(F, {BigComplex(128), BigComplex(1000000, 128)}, 2, 128);
    EXPECT_TRUE(rec.escaped);
}

TEST(VerticalDerivativeProduct, FixedPointAndCriticalPoint) {
    const auto F = example(Q(0));
    auto rec = orbit(F, {BigComplex(128), BigComplex(128)}, 6, 128);
    EXPECT_EQ(vertical_derivative_product(F, rec, 1, 6).to_complex().real(), std::pow(8.0, 5));
    EXPECT_EQ(rec.vertical_products[6].to_complex().real(), std::pow(8.0, 6));
    rec = orbit(F, {BigComplex(128), BigComplex(-1, 128)}, 4, 128);
    EXPECT_TRUE(vertical_derivative_product(F, rec, 0, 4).is_zero());
}

TEST(VerticalDerivativeProduct, ChainRuleAgainstFiniteDifferences) {
    const Precision P = 256;
    const auto F = example(Q(-641, 4165));
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t j = 1 + static_cast<std::size_t>(trial % 20);
        const BigComplex t({u(rng) * 1e-3, u(rng) * 1e-3}, P);
        const BigComplex z({-0.3 + u(rng), u(rng)}, P);
        const auto rec = orbit(F, {t, z}, j, P, {.bailout = 1e300});
        if (rec.escaped) continue;
        const BigComplex prod = vertical_derivative_product(F, rec, 0, j);
        // Central difference with step 2^(-P/3).
        const BigComplex h(ldexp(BigFloat(1L, P), -static_cast<long>(P / 3)));
        const auto plus = orbit(F, {t, z + h}, j, P, {.bailout = 1e300});
        const auto minus = orbit(F, {t, z - h}, j, P, {.bailout = 1e300});
        const BigComplex fd = (plus.points.back().z - minus.points.back().z) / (h * 2L);
        const double rel = (fd - prod).log2_abs() - prod.log2_abs();
        EXPECT_LT(rel, 20.0 - static_cast<double>(P) / 2.0) << "j=" << j;
    }
}

TEST(Orbit, DoublePrecisionAgreement) {
    const auto F = example(Q(-641, 4165));
    const BigComplex t({1e-6, 2e-6}, 512);
    const BigComplex z({-0.9, 0.05}, 512);
    const auto lo = orbit(F, {t, z}, 6, 256, {.bailout = 1e300});
    const auto hi = orbit(F, {t, z}, 6, 512, {.bailout = 1e300});
    ASSERT_FALSE(lo.escaped);
    for (std::size_t j = 0; j < lo.points.size(); ++j) {
        const BigComplex a = lo.points[j].z.with_precision(512);
        const double rel = (a - hi.points[j].z).log2_abs() - hi.points[j].z.log2_abs();
        // Budget: 2 j log2|lambda| bits for error growth.
        EXPECT_LT(rel, -256.0 + 6.0 * static_cast<double>(j) + 16.0);
    }
}

TEST(OffsetOrbit, MatchesDirectIteration) {
    const Precision P = 512;
    const auto F = example(Q(-641, 4165));
    auto ref = std::make_shared<ReferenceOrbit<Q>>(F.p(), Q(-1), P);
    EXPECT_TRUE(ref->periodic());
    const BigComplex w({0.3, -0.2}, P);
    OffsetOrbit<Q> off(F, ref, w, Q(1, 8 * 8 * 8), BigComplex({1e-4, 2e-4}, P), Tangent::Vertical);
    const BigComplex z0 = BigComplex(-1, P) + BigComplex({1e-4, 2e-4}, P);
    const auto rec = orbit(F, {w * ScalarTraits<Q>::to_big_complex(Q(1, 512), P), z0}, 6, P);
    for (std::size_t j = 1; j <= 6; ++j) {
        off.step();
        const double err = (off.z() - rec.points[j].z).log2_abs();
        EXPECT_LT(err, -400.0) << j;
        EXPECT_EQ(off.t(), rec.points[j].t);
    }
    const BigComplex prod = vertical_derivative_product(F, rec, 0, 6);
    EXPECT_LT((off.dz() - prod).log2_abs() - prod.log2_abs(), -400.0);
}

TEST(Parse, ExpressionsAndConfig) {
    const auto p = parse_polynomial("2*(z+1)^4-2");
    EXPECT_EQ(p.coeffs().size(), 5U);
    EXPECT_EQ(p.coeff(1), GaussianRational(8));
    EXPECT_EQ(p.coeff(0), GaussianRational(0));
    const auto F = skew_product_from_expression(GaussianRational(Q(1, 8)), "2(z+1)^4 - 2 + t - 641/4165 t^2");
    EXPECT_TRUE(F.is_split());
    EXPECT_EQ(F.coeff(2, 0), GaussianRational(Q(-641, 4165)));
    EXPECT_EQ(parse_polynomial("0.5i z").coeff(1), GaussianRational(Q(0), Q(1, 2)));

    std::istringstream cfg("# example\nmu = 1/8\np = 2*(z+1)^4 - 2\nq = t - 641/4165*t^2\nc_1_1 = 5\n");
    const auto G = load_map_config(read_key_values(cfg));
    EXPECT_FALSE(G.is_split());
    EXPECT_EQ(G.coeff(1, 1), GaussianRational(5));
    EXPECT_EQ(G.mu(), GaussianRational(Q(1, 8)));

    std::istringstream cfg2("mu = 0.125\ndegree = 2\np0 = 0\np1 = 3\np2 = 1.5\nq1 = 1\n");
    const auto H = load_map_config(read_key_values(cfg2));
    EXPECT_EQ(H.coeff(0, 2), GaussianRational(Q(3, 2)));
    EXPECT_EQ(H.coeff(1, 0), GaussianRational(1));

    try {
        (void)parse_polynomial("z^");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
    }
}
