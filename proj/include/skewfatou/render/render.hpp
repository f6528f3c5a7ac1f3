#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "skewfatou/dynamics/skew_product.hpp"
#include "skewfatou/error.hpp"
#include "skewfatou/numerics/big_complex.hpp"
#include "skewfatou/numerics/precision.hpp"
#include "skewfatou/numerics/scalar.hpp"
#include "skewfatou/parallel.hpp"

#ifdef SKEWFATOU_HAVE_PNG
#include <png.h>
#endif

namespace skewfatou {

/// 2 max(2, sum |p_k|).
template <class S>
double default_render_bailout(const SkewProduct<S>& F) {
    double sum = 0.0;
    for (const auto& c : F.p().coeffs()) sum += ScalarTraits<S>::magnitude(c);
    return 2.0 * std::max(2.0, sum);
}

/// Last passage start T = N 2^l with T <= N + max_iter, for a critical fiber w0 / lambda^N.
inline long last_passage(long N, long max_iter) {
    if (N < 1) throw Error(ErrorKind::Usage, "fiber depth must be at least 1");
    long T = N;
    while (2 * T <= N + max_iter) T *= 2;
    return T;
}

/// Working bits for a critical-fiber render: the orbit returns to within
/// |lambda|^(-T) of x0 at the last passage T, and that offset must stay resolved.
inline Precision critical_fiber_precision(long N, long max_iter, double lambda_abs) {
    return precision_for_depth((last_passage(N, max_iter) + 1) / 2, lambda_abs);
}

/// Refinement depth for w0 so that its error stays below 2^-bits.
inline long w0_refine_depth(Precision bits, double lambda_abs) {
    return static_cast<long>(std::ceil(static_cast<double>(bits) / (2.0 * std::log2(lambda_abs)))) + 16;
}

/// Escape-time job for the vertical fiber through fiber_t.
///
/// precision <= 53 selects the double fast path, which switches a pixel to
/// BigComplex at `fallback_precision` once |t| leaves the double range.
/// Larger precisions iterate in BigComplex throughout.
template <class S>
struct RenderJob {
    SkewProduct<S> F;
    BigComplex fiber_t;
    BigComplex center;
    double half_width = 1.0;
    int width = 64;
    int height = 64;
    int max_iter = 2000;
    double bailout = 0.0;  // 0: default_render_bailout(F)
    Precision precision = 53;
    Precision fallback_precision = 128;
};

struct EscapeGrid {
    static constexpr std::int32_t kBounded = -1;

    int width = 0;
    int height = 0;
    int max_iter = 0;
    double bailout = 0.0;
    Precision precision = 0;
    std::complex<double> center;
    double half_width = 0.0;
    std::string fiber_t;              // hex pair
    std::vector<std::int32_t> steps;  // row-major; kBounded or the escape step

    std::int32_t at(int x, int y) const { return steps[static_cast<std::size_t>(y) * width + x]; }
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

/// Pixel (x, y) samples center + h ((2x + 1)/W - 1) + i h (1 - (2y + 1)/H) H/W.
inline std::complex<double> pixel_offset(int x, int y, int width, int height, double half_width) {
    const double hy = half_width * height / width;
    return {half_width * ((2.0 * x + 1.0) / width - 1.0), hy * (1.0 - (2.0 * y + 1.0) / height)};
}

/// t_j = fiber_t * mu^j for j < max_iter, each rounded once from the exact power.
template <class S>
std::vector<BigComplex> fiber_column(const RenderJob<S>& job, Precision bits) {
    std::vector<BigComplex> out;
    out.reserve(static_cast<std::size_t>(std::max(0, job.max_iter)));
    S mu_power = ScalarTraits<S>::from_int(1, job.F.mu());
    const BigComplex t0 = job.fiber_t.with_precision(bits);
    for (int j = 0; j < job.max_iter; ++j) {
        out.push_back(t0 * ScalarTraits<S>::to_big_complex(mu_power, bits));
        mu_power = mu_power * job.F.mu();
    }
    return out;
}

namespace detail {

template <class S>
struct StepCoefficients {
    std::vector<std::vector<BigComplex>> big;                   // per step, z-coefficients of g(t_j, .)
    std::vector<std::vector<std::complex<double>>> fast;
    int switch_step = 0;                                        // first step whose t leaves the double range
};

template <class S>
StepCoefficients<S> step_coefficients(const RenderJob<S>& job, Precision bits) {
    const auto& F = job.F;
    StepCoefficients<S> out;
    out.switch_step = job.max_iter;
    std::size_t deg = 0;
    for (const auto& part : F.parts()) deg = std::max(deg, part.coeffs().size());
    const auto column = fiber_column(job, bits);
    for (int j = 0; j < job.max_iter; ++j) {
        const BigComplex& t = column[static_cast<std::size_t>(j)];
        std::vector<BigComplex> c(deg, BigComplex(bits));
        BigComplex tp(1, bits);
        for (std::size_t i = 0; i < F.parts().size(); ++i) {
            const auto& part = F.parts()[i];
            for (std::size_t m = 0; m < part.coeffs().size(); ++m) {
                c[m] += tp * ScalarTraits<S>::to_big_complex(part.coeffs()[m], bits);
            }
            tp = tp * t;
        }
        if (out.switch_step == job.max_iter && !t.is_zero() && t.log2_abs() < -960.0) out.switch_step = j;
        std::vector<std::complex<double>> f;
        for (const auto& x : c) f.push_back(x.to_complex());
        out.big.push_back(std::move(c));
        out.fast.push_back(std::move(f));
    }
    return out;
}

inline bool beyond(const BigComplex& z, double bailout) {
    const double re = z.real().to_double(), im = z.imag().to_double();
    return std::hypot(re, im) > bailout;
}

}  // namespace detail

/// Escape step per pixel: -1 when |z_j| <= bailout for all j < max_iter.
template <class S>
EscapeGrid render_fiber(const RenderJob<S>& job, unsigned threads = 0) {
    if (job.width <= 0 || job.height <= 0) throw Error(ErrorKind::Usage, "resolution must be positive");
    if (job.max_iter < 0) throw Error(ErrorKind::Usage, "max_iter must be non-negative");
    const double bailout = job.bailout > 0.0 ? job.bailout : default_render_bailout(job.F);
    const bool fast = job.precision <= 53;
    const Precision bits = fast ? job.fallback_precision : job.precision;
    const auto coeffs = detail::step_coefficients(job, bits);
    const BigComplex center = job.center.with_precision(bits);

    EscapeGrid grid;
    grid.width = job.width;
    grid.height = job.height;
    grid.max_iter = job.max_iter;
    grid.bailout = bailout;
    grid.precision = job.precision;
    grid.center = job.center.to_complex();
    grid.half_width = job.half_width;
    grid.fiber_t = job.fiber_t.real().to_hex() + " " + job.fiber_t.imag().to_hex();
    grid.steps.assign(static_cast<std::size_t>(job.width) * job.height, EscapeGrid::kBounded);

    auto horner_big = [&](const std::vector<BigComplex>& c, const BigComplex& z) {
        BigComplex acc(bits);
        for (std::size_t m = c.size(); m-- > 0;) acc = acc * z + c[m];
        return acc;
    };

    parallel_for(
        static_cast<std::size_t>(job.height),
        [&](std::size_t row) {
            const int y = static_cast<int>(row);
            for (int x = 0; x < job.width; ++x) {
                const std::complex<double> off = pixel_offset(x, y, job.width, job.height, job.half_width);
                std::int32_t result = EscapeGrid::kBounded;
                int j = 0;
                BigComplex zb = center + BigComplex(off, bits);
                if (detail::beyond(zb, bailout)) {
                    result = 0;
                } else {
                    if (fast) {
                        std::complex<double> z = zb.to_complex();
                        for (; j < coeffs.switch_step; ++j) {
                            const auto& c = coeffs.fast[static_cast<std::size_t>(j)];
                            std::complex<double> acc = 0.0;
                            for (std::size_t m = c.size(); m-- > 0;) acc = acc * z + c[m];
                            z = acc;
                            if (std::abs(z) > bailout) {
                                result = j + 1;
                                break;
                            }
                        }
                        zb = BigComplex(z, bits);
                    }
                    if (result == EscapeGrid::kBounded) {
                        for (; j < job.max_iter; ++j) {
                            zb = horner_big(coeffs.big[static_cast<std::size_t>(j)], zb);
                            if (detail::beyond(zb, bailout)) {
                                result = j + 1;
                                break;
                            }
                        }
                    }
                }
                grid.steps[row * static_cast<std::size_t>(job.width) + static_cast<std::size_t>(x)] = result;
            }
        },
        threads);
    return grid;
}

inline double bounded_fraction(const EscapeGrid& grid, const PixelRect& r) {
    if (r.x0 < 0 || r.y0 < 0 || r.x1 > grid.width || r.y1 > grid.height || r.x0 >= r.x1 || r.y0 >= r.y1) {
        throw Error(ErrorKind::Usage, "subwindow must be a non-empty rectangle inside the grid");
    }
    long bounded = 0;
    for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) bounded += grid.at(x, y) == EscapeGrid::kBounded;
    }
    return static_cast<double>(bounded) / (static_cast<double>(r.x1 - r.x0) * (r.y1 - r.y0));
}

inline double bounded_fraction(const EscapeGrid& grid) {
    return bounded_fraction(grid, {0, 0, grid.width, grid.height});
}

/// Pixels whose sample points lie in the square |Re(z - c)|, |Im(z - c)| <= h,
/// with c the grid center plus `offset`.
inline PixelRect subwindow(const EscapeGrid& grid, std::complex<double> offset, double h) {
    PixelRect r{grid.width, grid.height, 0, 0};
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            const auto d = pixel_offset(x, y, grid.width, grid.height, grid.half_width) - offset;
            if (std::abs(d.real()) <= h && std::abs(d.imag()) <= h) {
                r.x0 = std::min(r.x0, x);
                r.y0 = std::min(r.y0, y);
                r.x1 = std::max(r.x1, x + 1);
                r.y1 = std::max(r.y1, y + 1);
            }
        }
    }
    if (r.x0 >= r.x1) throw Error(ErrorKind::Usage, "subwindow contains no pixel centers");
    return r;
}

/// Bounded pixels black; escape steps shaded by log(1 + step) / log(1 + max_iter).
inline std::vector<std::uint8_t> grayscale(const EscapeGrid& grid) {
    std::vector<std::uint8_t> out(grid.steps.size());
    const double top = std::log1p(static_cast<double>(std::max(1, grid.max_iter)));
    for (std::size_t i = 0; i < grid.steps.size(); ++i) {
        const std::int32_t s = grid.steps[i];
        out[i] = s == EscapeGrid::kBounded ? 0 : static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - 0.8 * std::log1p(s) / top)));
    }
    return out;
}

inline void write_ppm(const EscapeGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << "P6\n" << grid.width << " " << grid.height << "\n255\n";
    for (std::uint8_t g : grayscale(grid)) {
        const char px[3] = {static_cast<char>(g), static_cast<char>(g), static_cast<char>(g)};
        out.write(px, 3);
    }
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

constexpr bool png_available() {
#ifdef SKEWFATOU_HAVE_PNG
    return true;
#else
    return false;
#endif
}

/// Writes an 8-bit grayscale PNG; returns false when built without libpng.
inline bool write_png(const EscapeGrid& grid, const std::filesystem::path& path) {
#ifdef SKEWFATOU_HAVE_PNG
    FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw Error(ErrorKind::Io, "cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw Error(ErrorKind::Io, "libpng failed on " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(grid.width), static_cast<png_uint_32>(grid.height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    auto gray = grayscale(grid);
    for (int y = 0; y < grid.height; ++y) png_write_row(png, gray.data() + static_cast<std::size_t>(y) * grid.width);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    return true;
#else
    (void)grid;
    (void)path;
    return false;
#endif
}

}  // namespace skewfatou
