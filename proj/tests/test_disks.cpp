#include <gtest/gtest.h>

#include <filesystem>

#include "skewfatou/disks/disks.hpp"
#include "skewfatou/render/render.hpp"

using namespace skewfatou;

namespace {

using Q = ExactRational;

SkewProduct<Q> tuned() { return example_family<Q>(4, Q(1), Q(-641, 4165)); }

CriticalData<Q> crit() { return critical_data(tuned().p(), Q(0)); }

const W0Result& example_w0() {
    static const W0Result r = find_w0(tuned(), crit(), BigComplex(-1, 64));
    return r;
}

DiskSpec<Q> disk(long n) { return make_disk(n, example_w0().w0, crit(), Q(8)); }

}  // namespace

TEST(FindW0, ZeroTargetGivesZero) {
    const auto r = find_w0(tuned(), crit(), BigComplex(0, 64));
    EXPECT_TRUE(r.w0.is_zero());
}

TEST(FindW0, LinearClosedForm) {
    const auto F = SkewProduct<Q>::linear(Q(3), Q(1, 3), Q(2));
    const CriticalData<Q> lin{Q(0), 0, 1, 0, Q(0), Q(3)};
    const auto r = find_w0(F, lin, BigComplex(5, 256));
    const BigComplex expected = ScalarTraits<Q>::to_big_complex(Q(20, 3), r.precision);
    EXPECT_LT((r.w0 - expected).log2_abs(), -200.0);
}

TEST(FindW0, ExampleCertified) {
    const auto& r = example_w0();
    EXPECT_FALSE(r.w0.is_zero());
    EXPECT_LT(r.residual, 1e-20);
    EXPECT_NEAR(r.w0.to_complex().real(), 10.717885192130808, 1e-12);
    EXPECT_NEAR(r.w0.to_complex().imag(), 0.0, 1e-12);
    ASSERT_FALSE(r.candidates.empty());
    for (const auto& c : r.candidates) EXPECT_GE(c.log2_abs(), r.w0.log2_abs());
}

TEST(MakeDisk, RadiusFormula) {
    const auto d8 = disk(8);
    EXPECT_DOUBLE_EQ(d8.radius, std::pow(8.0, -6.0));
    EXPECT_EQ(d8.scale, Q(1) / int_power(Q(8), 8));
    EXPECT_EQ(d8.fiber_t, example_w0().w0 * ScalarTraits<Q>::to_big_complex(Q(1, 16777216), example_w0().w0.precision()));
    EXPECT_DOUBLE_EQ(disk(4).radius, 1.0 / 512.0);
    for (long n = 1; n <= 12; ++n) EXPECT_DOUBLE_EQ(disk(2 * n).radius, disk(n).radius * disk(n).radius);
}

TEST(Nesting, PositiveOnThresholdRange) {
    double previous = -1.0;
    for (long n = 4; n <= 8; ++n) {
        const auto rep = verify_nesting(tuned(), disk(n));
        EXPECT_TRUE(rep.fiber_ok);
        EXPECT_TRUE(rep.escaped.empty());
        EXPECT_GT(rep.margin, 0.0) << n;
        EXPECT_LT(rep.center_distance, rep.target_radius);
        EXPECT_GT(rep.relative_margin, previous);
        previous = rep.relative_margin;
    }
    EXPECT_EQ(find_nesting_threshold(tuned(), example_w0().w0, Q(-1), 4, 32), 4L);
}

TEST(Nesting, SecondApplication) {
    // Images of D_8 after 8 steps land in D_16; the same check at 8 repeats it one level down.
    const auto a = verify_nesting(tuned(), disk(4));
    const auto b = verify_nesting(tuned(), disk(8));
    EXPECT_GT(a.margin, 0.0);
    EXPECT_GT(b.margin, 0.0);
    EXPECT_LT(b.max_image_distance, a.max_image_distance);
}

TEST(Nesting, GenericBFails) {
    // Without the tuned coefficient the center lands only |lambda|^-n from x0.
    const auto F = example_family<Q>(4, Q(1), Q(0));
    const auto w = find_w0(F, crit(), BigComplex(-1, 64));
    const auto rep = verify_nesting(F, make_disk(16, w.w0, crit(), Q(8)));
    EXPECT_LT(rep.margin, 0.0);
}

TEST(Accumulate, DecreasingWithExactFibers) {
    const Precision bits = precision_for_depth(32, 8.0);
    const auto rep = accumulate(tuned(), disk(4), 3, {.bits = bits});
    ASSERT_EQ(rep.levels.size(), 3u);
    EXPECT_TRUE(rep.strictly_decreasing);
    EXPECT_LT(rep.levels.back().distance, 1e-6);
    for (const auto& lv : rep.levels) {
        EXPECT_TRUE(lv.t_exact);
        EXPECT_TRUE(lv.inside);
        EXPECT_EQ(lv.step, ((1L << lv.level) - 1) * 4);
    }
    const auto nest = verify_nesting(tuned(), disk(4), {.bits = bits});
    EXPECT_DOUBLE_EQ(std::exp2(rep.levels[0].log2_z_distance), nest.center_distance);
}

TEST(Accumulate, PrecisionBudget) {
    try {
        (void)accumulate(tuned(), disk(4), 3, {.bits = 128});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PrecisionExhausted);
    }
}

TEST(Accumulate, ResumesFromCheckpoints) {
    const auto dir = std::filesystem::temp_directory_path() / "skewfatou_test_ckpt";
    std::filesystem::remove_all(dir);
    CheckpointStore store(dir);
    const auto first = accumulate(tuned(), disk(4), 3, {.bits = 0, .bailout = 1e50, .store = &store});
    EXPECT_EQ(store.load(accumulation_key(tuned(), disk(4))).size(), 3u);
    const auto again = accumulate(tuned(), disk(4), 3, {.bits = 0, .bailout = 1e50, .store = &store});
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_FALSE(first.levels[i].resumed);
        EXPECT_TRUE(again.levels[i].resumed);
        EXPECT_EQ(hex_scalar(first.levels[i].offset), hex_scalar(again.levels[i].offset));
        EXPECT_EQ(hex_scalar(first.levels[i].t), hex_scalar(again.levels[i].t));
    }
    // A deeper run at higher precision ignores the coarser records.
    const auto deeper = accumulate(tuned(), disk(4), 4, {.bits = 0, .bailout = 1e50, .store = &store});
    EXPECT_FALSE(deeper.levels[0].resumed);
    EXPECT_TRUE(deeper.strictly_decreasing);
    std::filesystem::remove_all(dir);
}

TEST(Checkpoint, RoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "skewfatou_test_ckpt_rt";
    std::filesystem::remove_all(dir);
    CheckpointStore store(dir);
    const BigComplex a(BigFloat::parse("-1.25e-40", 200), BigFloat::parse("3.5", 200));
    store.append({42, 200, 7, a, BigComplex(2, 200)});
    store.append({42, 100, 9, a, a});
    const auto all = store.load(42);
    ASSERT_EQ(all.size(), 2u);
    EXPECT_TRUE(all[0].offset == a);
    EXPECT_EQ(all[1].step, 9u);
    EXPECT_EQ(store.latest(42, 150, 100)->step, 7u);
    EXPECT_FALSE(store.latest(42, 300, 100).has_value());
    EXPECT_TRUE(store.load(43).empty());
    std::filesystem::remove_all(dir);
}

TEST(FatouProxy, BoundedAndShrinking) {
    const auto rep = fatou_proxy(tuned(), disk(4), 3);
    EXPECT_TRUE(rep.bounded);
    EXPECT_TRUE(rep.shrinking);
    EXPECT_EQ(rep.log2_diameters.size(), 3u);
}

TEST(OmegaLimit, ZeroIsFixed) {
    const auto om = omega_limit(tuned(), crit(), BigComplex(0, 256), 6);
    for (const auto& x : om.points) EXPECT_TRUE(x.is_zero());
    EXPECT_EQ(om.max_chain_error, 0.0);
}

TEST(OmegaLimit, ChainThroughCriticalPoint) {
    const Precision P = 192;
    const BigComplex w = example_w0().w0 * BigComplex(64, P);
    const auto om = omega_limit(tuned(), crit(), w, 24, {.bits = P});
    EXPECT_EQ(om.first_index, -2);
    // x_{-1} = Phi(lambda w0) = p(x0) = -2 and x_{-2} = Phi(w0) = x0.
    EXPECT_LT((om.points[3] - BigComplex(-2, P)).log2_abs(), -60.0);
    EXPECT_LT((om.points[4] - BigComplex(-1, P)).log2_abs(), -60.0);
    EXPECT_LT(om.max_chain_error, std::exp2(24.0 - P));
    EXPECT_NEAR(om.contraction, 0.125, 1e-3);
    EXPECT_LE(om.monotone_from, 8);
    EXPECT_LT(om.convergence_tail, 1e-15);
}

TEST(JuliaEvidence, OffsetFiberGrowsCenterDecays) {
    // Blocks shorter than about s log2(1/gap) / log2|lambda| are pre-asymptotic for a
    // gap |Phi(v) - x0| near 2^-14, so the measurement starts at D_16.
    const int levels = 4;
    const Precision P = precision_for_depth((1L << levels) * 16, 8.0);
    const long depth = w0_refine_depth(P, 8.0);
    const auto w0 = find_w0(tuned(), crit(), BigComplex(-1, 64), {.n_refine = depth, .bits = precision_for_depth(depth, 8.0)}).w0;
    const auto d = make_disk(16, w0, crit(), Q(8));
    const BigComplex v = w0 + BigComplex(std::complex<double>(1e-3, 0.0), 64);
    const auto ev = julia_evidence(tuned(), d, v, levels);
    EXPECT_TRUE(ev.positive);
    EXPECT_EQ(ev.s, 4);
    ASSERT_EQ(ev.blocks.size(), 4u);
    for (std::size_t l = 1; l < ev.blocks.size(); ++l) {
        EXPECT_GT(ev.blocks[l].log2_cumulative, ev.blocks[l - 1].log2_cumulative);
        EXPECT_GT(ev.blocks[l].log2_block_product, ev.blocks[l - 1].log2_block_product);
    }
    EXPECT_NEAR(ev.center_rate, -2.0, 0.05);
    for (std::size_t l = 1; l < ev.center_log2_distances.size(); ++l) {
        EXPECT_LT(ev.center_log2_distances[l], ev.center_log2_distances[l - 1]);
    }
}

TEST(JuliaEvidence, RequiresCriticalPoint) {
    const auto F = SkewProduct<Q>::linear(Q(3), Q(1, 3), Q(2));
    const auto d = make_disk(4, BigComplex(1, 256), Q(0), Q(3));
    EXPECT_THROW((void)julia_evidence(F, d, BigComplex(2, 256), 3), Error);
}
