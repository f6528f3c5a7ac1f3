#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "skewfatou/disks/disks.hpp"
#include "skewfatou/render/render.hpp"

using namespace skewfatou;

namespace {

using Q = ExactRational;

SkewProduct<Q> tuned() { return example_family<Q>(4, Q(1), Q(-641, 4165)); }

RenderJob<Q> job_at(const BigComplex& t, const BigComplex& center, double h, int size, int max_iter) {
    RenderJob<Q> job{tuned(), t, center, h, size, size, max_iter};
    return job;
}

}  // namespace

TEST(Render, FarPixelEscapesImmediately) {
    auto job = job_at(BigComplex(64), BigComplex(1e6, 64), 1.0, 1, 10);
    job.bailout = 1e3;
    EXPECT_EQ(render_fiber(job).at(0, 0), 0);
}

TEST(Render, FixedPointStaysBounded) {
    const auto grid = render_fiber(job_at(BigComplex(64), BigComplex(64), 1e-3, 1, 5000));
    EXPECT_EQ(grid.at(0, 0), EscapeGrid::kBounded);
}

TEST(Render, DefaultBailout) {
    // 2 * max(2, 0 + 8 + 12 + 8 + 2)
    EXPECT_DOUBLE_EQ(default_render_bailout(tuned()), 60.0);
}

TEST(BoundedFraction, Examples) {
    const auto far = render_fiber(job_at(BigComplex(64), BigComplex(100, 64), 1.0, 8, 50));
    EXPECT_EQ(bounded_fraction(far), 0.0);
    // The centre pixel of an odd grid is z = 0 exactly, a fixed point in the fiber t = 0.
    const auto near = render_fiber(job_at(BigComplex(64), BigComplex(64), 0.01, 5, 500));
    EXPECT_EQ(near.at(2, 2), EscapeGrid::kBounded);
    EXPECT_GT(bounded_fraction(near), 0.0);
    EXPECT_THROW((void)bounded_fraction(near, {0, 0, 6, 1}), Error);
    EXPECT_THROW((void)bounded_fraction(near, {2, 2, 2, 3}), Error);
}

TEST(Render, MonotoneInMaxIter) {
    const BigComplex t(std::complex<double>(0.01, 0.002), 64);
    const auto a = render_fiber(job_at(t, BigComplex(-1, 64), 1.5, 16, 40));
    const auto b = render_fiber(job_at(t, BigComplex(-1, 64), 1.5, 16, 160));
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        if (a.steps[i] != EscapeGrid::kBounded) EXPECT_EQ(b.steps[i], a.steps[i]);
    }
    EXPECT_LE(bounded_fraction(b), bounded_fraction(a));
}

TEST(Render, DeterministicAcrossThreads) {
    const BigComplex t(std::complex<double>(0.3, -0.1), 64);
    auto job = job_at(t, BigComplex(-1, 64), 1.5, 20, 100);
    const auto one = render_fiber(job, 1);
    const auto many = render_fiber(job, 8);
    EXPECT_EQ(one.steps, many.steps);
    job.precision = 160;
    EXPECT_EQ(render_fiber(job, 1).steps, render_fiber(job, 3).steps);
}

TEST(Render, FiberColumnIsExact) {
    const BigComplex t(BigFloat::parse("10.717885192130808", 256), BigFloat(0L, 256));
    auto job = job_at(t, BigComplex(-1, 256), 1.0, 1, 40);
    const auto column = fiber_column(job, 256);
    ASSERT_EQ(column.size(), 40u);
    for (int j = 0; j < 40; ++j) {
        const BigComplex expected = t * ScalarTraits<Q>::to_big_complex(Q(1) / int_power(Q(8), j), 256);
        EXPECT_TRUE(column[static_cast<std::size_t>(j)] == expected) << j;
    }
}

TEST(Render, DeepFiberFallsBackToBigComplex) {
    // |t| = 8^-400 is far below the double range.
    const BigComplex t = ScalarTraits<Q>::to_big_complex(Q(1) / int_power(Q(8), 400), 128);
    auto job = job_at(t, BigComplex(-1, 128), 0.5, 6, 60);
    const auto fast = render_fiber(job);
    job.precision = 128;
    const auto big = render_fiber(job);
    EXPECT_EQ(fast.steps, big.steps);
}

TEST(Render, PrecisionRule) {
    EXPECT_EQ(last_passage(4, 2000), 1024);
    EXPECT_EQ(last_passage(4, 4), 8);
    EXPECT_EQ(last_passage(4, 3), 4);
    EXPECT_EQ(critical_fiber_precision(4, 2000, 8.0), 3136u);
    EXPECT_EQ(w0_refine_depth(3136, 8.0), 539);
}

TEST(Render, CriticalFiberKeepsDiskOffsetFiberLosesIt) {
    const auto F = tuned();
    const auto crit = critical_data(F.p(), Q(0));
    const int max_iter = 200;
    const Precision P = critical_fiber_precision(4, max_iter, 8.0);
    const long depth = w0_refine_depth(P, 8.0);
    const auto w0 = find_w0(F, crit, BigComplex(-1, 64), {.n_refine = depth, .bits = precision_for_depth(depth, 8.0)}).w0;
    const auto disk = make_disk(4, w0, crit, Q(8));
    const BigComplex scale = ScalarTraits<Q>::to_big_complex(disk.scale, w0.precision());
    auto job = job_at(disk.fiber_t, BigComplex(-1, P), 2.0 * disk.radius, 12, max_iter);
    job.precision = P;
    const auto critical = render_fiber(job);
    job.fiber_t = (w0 + BigComplex(std::complex<double>(1e-3, 0.0), w0.precision())) * scale;
    const auto offset = render_fiber(job);
    const auto inner = subwindow(critical, {0.0, 0.0}, disk.radius / std::sqrt(2.0));
    EXPECT_EQ(bounded_fraction(critical, inner), 1.0);
    EXPECT_LT(bounded_fraction(offset, inner), 1.0);
}

TEST(Render, WritesPpm) {
    const auto grid = render_fiber(job_at(BigComplex(64), BigComplex(64), 2.0, 7, 30));
    const auto path = std::filesystem::temp_directory_path() / "skewfatou_test.ppm";
    write_ppm(grid, path);
    std::ifstream in(path, std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    EXPECT_EQ(magic, "P6");
    EXPECT_EQ(w, 7);
    EXPECT_EQ(h, 7);
    EXPECT_EQ(maxval, 255);
    EXPECT_EQ(std::filesystem::file_size(path), 11u + 7u * 7u * 3u);
    const auto gray = grayscale(grid);
    EXPECT_EQ(gray[3 * 7 + 3], 0);  // z = 0 is bounded
    std::filesystem::remove(path);
}
