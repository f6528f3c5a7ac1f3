#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skewfatou/disks/checkpoint.hpp"
#include "skewfatou/dynamics/critical.hpp"
#include "skewfatou/dynamics/reference_orbit.hpp"
#include "skewfatou/dynamics/skew_product.hpp"
#include "skewfatou/error.hpp"
#include "skewfatou/koenigs/koenigs.hpp"
#include "skewfatou/numerics/precision.hpp"
#include "skewfatou/parallel.hpp"

namespace skewfatou {

namespace detail {

inline double log2_or_floor(const BigComplex& z) {
    return z.is_zero() ? -std::numeric_limits<double>::infinity() : z.log2_abs();
}

template <class S>
BigComplex big(const S& x, Precision bits) {
    return ScalarTraits<S>::to_big_complex(x, bits);
}

template <class S>
std::string scalar_text(const S& x) {
    if constexpr (ScalarTraits<S>::exact) {
        return x.to_string();
    } else {
        return hex_scalar(ScalarTraits<S>::to_big_complex(x, x.precision()));
    }
}

template <class S>
std::uint64_t map_hash(const SkewProduct<S>& F) {
    return fnv1a(F.to_string([](const S& c) { return scalar_text(c); }));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// w0

struct SearchRegion {
    double radius = 2.0;       // first scan covers |Re w|, |Im w| <= radius
    double max_radius = 64.0;  // the radius doubles up to this bound
    int grid = 40;             // points per half-axis
};

struct W0Options {
    SearchRegion region;
    long n_refine = 64;      // Newton runs on phi_{n_refine}
    Precision bits = 0;      // 0: precision_for_depth(n_refine)
    double tol = 1e-20;      // certification tolerance
    long certify_n = 40;
    int max_newton = 200;
    unsigned threads = 0;
};

struct W0Result {
    BigComplex w0;
    std::vector<BigComplex> candidates;  // distinct roots in the final region, by modulus
    double residual = 0.0;               // |phi_{certify_n}(w0) - target|
    long n_refine = 0;
    Precision precision = 0;
    double search_radius = 0.0;
};

namespace detail {

// Newton on phi_n(w) = target. Empty when it does not settle.
template <class S>
std::optional<BigComplex> newton_phi(const KoenigsContext<S>& ctx, long n, const BigComplex& target, BigComplex w,
                                     int max_iter) {
    const double eps = 24.0 - static_cast<double>(ctx.precision());
    try {
        for (int it = 0; it < max_iter; ++it) {
            auto [v, d] = ctx.phi_with_derivative(n, n, w);
            const BigComplex r = v - target;
            if (r.is_zero()) return w;
            if (d.is_zero()) return std::nullopt;
            const BigComplex step = r / d;
            w = w - step;
            if (step.is_zero() || step.log2_abs() < eps + std::max(0.0, log2_or_floor(w))) return w;
            if (!w.is_finite() || w.log2_abs() > 64.0) return std::nullopt;
        }
    } catch (const EscapedError&) {
    }
    return std::nullopt;
}

}  // namespace detail

/// A root of Phi(w) = target: grid scan of Phi, then Newton on phi_{n_refine}
/// with its fiber derivative, certified at depth certify_n.
template <class S>
W0Result find_w0(const SkewProduct<S>& F, const CriticalData<S>& crit, const BigComplex& target,
                 const W0Options& opts = {}) {
    const double lam = ScalarTraits<S>::magnitude(F.lambda());
    const Precision bits = opts.bits ? opts.bits : precision_for_depth(opts.n_refine, lam);
    const KoenigsContext<S> ctx(F, crit.x0, bits);
    const BigComplex tgt = target.with_precision(bits);
    const KoenigsLimit<S> coarse(F, crit.x0, 1e-8, {.bits = 0, .n_min = 4, .n_max = 32});
    const int m = std::max(4, opts.region.grid);

    for (double R = opts.region.radius; R <= opts.region.max_radius; R *= 2.0) {
        const std::size_t side = static_cast<std::size_t>(2 * m + 1);
        std::vector<double> dist(side * side, std::numeric_limits<double>::infinity());
        auto at = [&](std::size_t a, std::size_t b) { return std::complex<double>(R * (double(a) - m) / m, R * (double(b) - m) / m); };
        parallel_for(
            dist.size(),
            [&](std::size_t idx) {
                try {
                    const BigComplex w(at(idx / side, idx % side), coarse.context().precision());
                    dist[idx] = std::abs(coarse(w).value.to_complex() - target.to_complex());
                } catch (const Error&) {
                }
            },
            opts.threads);

        // Local minima of |Phi - target| seed Newton.
        std::vector<std::complex<double>> seeds;
        for (std::size_t a = 0; a < side; ++a) {
            for (std::size_t b = 0; b < side; ++b) {
                const double d = dist[a * side + b];
                if (!std::isfinite(d)) continue;
                bool minimum = true;
                for (int da = -1; da <= 1 && minimum; ++da) {
                    for (int db = -1; db <= 1; ++db) {
                        if (da == 0 && db == 0) continue;
                        const long aa = static_cast<long>(a) + da, bb = static_cast<long>(b) + db;
                        if (aa < 0 || bb < 0 || aa >= long(side) || bb >= long(side)) continue;
                        if (dist[std::size_t(aa) * side + std::size_t(bb)] < d) {
                            minimum = false;
                            break;
                        }
                    }
                }
                if (minimum) seeds.push_back(at(a, b));
            }
        }

        std::vector<std::optional<BigComplex>> roots(seeds.size());
        parallel_for(
            seeds.size(),
            [&](std::size_t i) {
                roots[i] = detail::newton_phi(ctx, opts.n_refine, tgt, BigComplex(seeds[i], bits), opts.max_newton);
            },
            opts.threads);

        std::vector<BigComplex> found;
        for (auto& r : roots) {
            if (!r) continue;
            if (!r->is_zero() && r->log2_abs() > std::log2(R) + 1e-12) continue;
            bool dup = false;
            for (const auto& f : found) {
                const BigComplex d = f - *r;
                if (d.is_zero() || d.log2_abs() < -40.0 + std::max(0.0, detail::log2_or_floor(f))) {
                    dup = true;
                    break;
                }
            }
            if (!dup) found.push_back(*r);
        }
        if (found.empty()) continue;
        std::sort(found.begin(), found.end(), [](const BigComplex& a, const BigComplex& b) {
            const double ma = detail::log2_or_floor(a), mb = detail::log2_or_floor(b);
            if (ma != mb) return ma < mb;
            if (a.real() != b.real()) return a.real() < b.real();
            return a.imag() < b.imag();
        });

        W0Result out{found.front(), found, 0.0, opts.n_refine, bits, R};
        const Precision cbits = std::max(bits, precision_for_depth(opts.certify_n, lam));
        const BigComplex check = KoenigsContext<S>(F, crit.x0, cbits).phi(opts.certify_n, opts.certify_n, out.w0) -
                                 target.with_precision(cbits);
        out.residual = check.is_zero() ? 0.0 : std::exp2(check.log2_abs());
        if (!(out.residual < opts.tol)) {
            throw Error(ErrorKind::NotFound, "forward-orbit certification failed: residual " + std::to_string(out.residual));
        }
        return out;
    }
    throw Error(ErrorKind::NotFound, "no solution of Phi(w) = target up to the maximal search radius");
}

// ---------------------------------------------------------------------------
// Disks

/// Vertical disk { (w0 / lambda^n, z) : |z - x0| < |lambda|^(-3n/4) }.
template <class S>
struct DiskSpec {
    long n = 0;
    BigComplex w0;
    S scale;                // exact 1 / lambda^n
    BigComplex fiber_t;     // w0 / lambda^n, rounded once
    S x0;
    BigComplex center_z;
    double log2_radius = 0.0;
    double radius = 0.0;
    int boundary_samples = 64;
};

inline double disk_log2_radius(long n, double lambda_abs) {
    return -0.75 * static_cast<double>(n) * std::log2(lambda_abs);
}

template <class S>
DiskSpec<S> make_disk(long n, const BigComplex& w0, const S& x0, const S& lambda, int samples = 64) {
    if (n < 1) throw Error(ErrorKind::Usage, "disk index n must be at least 1");
    if (samples < 1) throw Error(ErrorKind::Usage, "need at least one boundary sample");
    const Precision bits = w0.precision();
    DiskSpec<S> d;
    d.n = n;
    d.w0 = w0;
    d.scale = ScalarTraits<S>::from_int(1, lambda) / int_power(lambda, n);
    d.fiber_t = w0 * detail::big(d.scale, bits);
    d.x0 = x0;
    d.center_z = detail::big(x0, bits);
    d.log2_radius = disk_log2_radius(n, ScalarTraits<S>::magnitude(lambda));
    d.radius = std::exp2(d.log2_radius);
    d.boundary_samples = samples;
    return d;
}

template <class S>
DiskSpec<S> make_disk(long n, const BigComplex& w0, const CriticalData<S>& crit, const S& lambda, int samples = 64) {
    return make_disk(n, w0, crit.x0, lambda, samples);
}

struct NestingOptions {
    Precision bits = 0;  // 0: precision_for_depth(2n)
    double bailout = 1e50;
    unsigned threads = 0;
};

struct NestingReport {
    long n = 0;
    double max_image_distance = 0.0;  // over boundary samples and the center
    double log2_max_image_distance = 0.0;
    double center_distance = 0.0;
    double target_radius = 0.0;       // radius of D_2n
    double margin = 0.0;              // target_radius - max_image_distance
    double relative_margin = 0.0;     // margin / target_radius
    bool fiber_ok = false;
    std::vector<std::size_t> escaped; // sample indices that left the bailout disk
    Precision precision = 0;
};

namespace detail {

template <class S>
std::vector<BigComplex> disk_offsets(const DiskSpec<S>& disk, Precision bits, double log2_r) {
    std::vector<BigComplex> out{BigComplex(bits)};
    const double r = std::exp2(log2_r);
    for (int i = 0; i < disk.boundary_samples; ++i) {
        const double theta = 2.0 * M_PI * i / disk.boundary_samples;
        out.emplace_back(std::polar(r, theta), bits);
    }
    return out;
}

}  // namespace detail

/// Iterates the center and equi-angular boundary points of D_n for n steps
/// and compares the image with D_2n.
template <class S>
NestingReport verify_nesting(const SkewProduct<S>& F, const DiskSpec<S>& disk, const NestingOptions& opts = {}) {
    F.require_split("verify_nesting");
    const double lam = ScalarTraits<S>::magnitude(F.lambda());
    const Precision bits = opts.bits ? opts.bits : precision_for_depth(2 * disk.n, lam);
    auto ref = std::make_shared<const ReferenceOrbit<S>>(F.p(), disk.x0, bits, static_cast<std::size_t>(disk.n) + 1);
    const BigComplex w0 = disk.w0.with_precision(bits);
    const BigComplex x0 = detail::big(disk.x0, bits);
    const auto offsets = detail::disk_offsets(disk, bits, disk.log2_radius);

    std::vector<double> log2_dist(offsets.size(), 0.0);
    std::vector<char> escaped(offsets.size(), 0);
    BigComplex t_end(bits);
    parallel_for(
        offsets.size(),
        [&](std::size_t i) {
            OffsetOrbit<S> orb(F, ref, w0, disk.scale, offsets[i]);
            for (long s = 0; s < disk.n; ++s) {
                orb.step();
                if (orb.beyond(opts.bailout)) {
                    escaped[i] = 1;
                    return;
                }
            }
            log2_dist[i] = detail::log2_or_floor(orb.offset_from(x0));
            if (i == 0) t_end = orb.t();
        },
        opts.threads);

    NestingReport rep;
    rep.n = disk.n;
    rep.precision = bits;
    const double log2_target = disk_log2_radius(2 * disk.n, lam);
    rep.target_radius = std::exp2(log2_target);
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        if (escaped[i]) rep.escaped.push_back(i);
    }
    const S scale_2n = disk.scale * int_power(F.mu(), disk.n);
    rep.fiber_ok = !escaped[0] && t_end == w0 * detail::big(scale_2n, bits);
    if (!rep.escaped.empty()) {
        rep.margin = -std::numeric_limits<double>::infinity();
        rep.relative_margin = rep.margin;
        rep.max_image_distance = std::numeric_limits<double>::infinity();
        rep.log2_max_image_distance = rep.max_image_distance;
        return rep;
    }
    rep.log2_max_image_distance = *std::max_element(log2_dist.begin(), log2_dist.end());
    rep.max_image_distance = std::exp2(rep.log2_max_image_distance);
    rep.center_distance = std::exp2(log2_dist[0]);
    rep.relative_margin = 1.0 - std::exp2(rep.log2_max_image_distance - log2_target);
    rep.margin = rep.target_radius * rep.relative_margin;
    return rep;
}

/// Smallest n in [n_lo, n_hi] with positive nesting margin on all of [n, 2n].
template <class S>
std::optional<long> find_nesting_threshold(const SkewProduct<S>& F, const BigComplex& w0, const S& x0, long n_lo,
                                           long n_hi, int samples = 64, unsigned threads = 0) {
    std::map<long, bool> ok;
    auto positive = [&](long n) {
        auto it = ok.find(n);
        if (it != ok.end()) return it->second;
        const auto rep = verify_nesting(F, make_disk(n, w0, x0, F.lambda(), samples), {.bits = 0, .bailout = 1e50, .threads = threads});
        return ok[n] = rep.margin > 0.0;
    };
    for (long n = n_lo; n <= n_hi; ++n) {
        bool all = true;
        for (long m = n; m <= 2 * n && all; ++m) all = positive(m);
        if (all) return n;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Accumulation

struct AccumulationLevel {
    int level = 0;
    long step = 0;                // (2^level - 1) n
    BigComplex t;
    bool t_exact = false;         // t == w0 / lambda^(2^level n) as one rounding of the exact scale
    BigComplex offset;            // z - x0
    double log2_t = 0.0;
    double log2_z_distance = 0.0;
    double log2_distance = 0.0;   // |(t, z) - (0, x0)|
    double distance = 0.0;
    bool inside = false;          // |z - x0| < radius(D_{2^level n})
    bool resumed = false;         // restored from a checkpoint
};

struct AccumulationReport {
    long n = 0;
    Precision precision = 0;
    std::vector<AccumulationLevel> levels;
    bool strictly_decreasing = false;
};

struct AccumulateOptions {
    Precision bits = 0;  // 0: precision_for_depth(2^levels n)
    double bailout = 1e50;
    CheckpointStore* store = nullptr;
};

template <class S>
std::uint64_t accumulation_key(const SkewProduct<S>& F, const DiskSpec<S>& disk) {
    return fnv1a(hex_scalar(disk.w0) + "|" + std::to_string(disk.n), detail::map_hash(F));
}

/// Distances of F^((2^l - 1) n)(center of D_n) from (0, x0), l = 1 .. levels.
template <class S>
AccumulationReport accumulate(const SkewProduct<S>& F, const DiskSpec<S>& disk, int levels,
                              const AccumulateOptions& opts = {}) {
    F.require_split("accumulate");
    if (levels < 1 || levels > 24) throw Error(ErrorKind::Usage, "levels must be in [1, 24]");
    const double lam = ScalarTraits<S>::magnitude(F.lambda());
    const long deepest = (1L << levels) * disk.n;
    const Precision need = precision_for_depth(deepest, lam);
    const Precision bits = opts.bits ? opts.bits : need;
    if (bits < need) {
        throw Error(ErrorKind::PrecisionExhausted, "accumulate needs " + std::to_string(need) + " bits for depth " +
                                                       std::to_string(deepest));
    }
    auto ref = std::make_shared<const ReferenceOrbit<S>>(F.p(), disk.x0, bits, static_cast<std::size_t>(deepest) + 1);
    const BigComplex w0 = disk.w0.with_precision(bits);
    const BigComplex x0 = detail::big(disk.x0, bits);
    const std::uint64_t key = accumulation_key(F, disk);

    std::map<std::uint64_t, Checkpoint> saved;
    if (opts.store) {
        for (auto& c : opts.store->load(key)) {
            if (c.precision < bits) continue;
            auto it = saved.find(c.step);
            if (it == saved.end() || c.precision > it->second.precision) saved[c.step] = std::move(c);
        }
    }

    AccumulationReport rep;
    rep.n = disk.n;
    rep.precision = bits;
    auto orb = std::make_unique<OffsetOrbit<S>>(F, ref, w0, disk.scale, BigComplex(bits), Tangent::Vertical);
    long at = 0;
    for (int l = 1; l <= levels; ++l) {
        const long step = ((1L << l) - 1) * disk.n;
        const S scale = disk.scale * int_power(F.mu(), step);
        AccumulationLevel lv;
        lv.level = l;
        lv.step = step;
        auto hit = saved.find(static_cast<std::uint64_t>(step));
        if (hit != saved.end()) {
            orb = std::make_unique<OffsetOrbit<S>>(F, ref, w0, scale, BigComplex(bits), Tangent::Vertical);
            orb->restore(hit->second.offset.with_precision(bits), hit->second.derivative.with_precision(bits));
            lv.resumed = true;
        } else {
            for (; at < step; ++at) {
                orb->step();
                if (orb->beyond(opts.bailout)) {
                    throw EscapedError(static_cast<std::size_t>(at + 1), "center orbit escaped during accumulation");
                }
            }
            orb->rebase();
            if (opts.store) opts.store->append({key, bits, static_cast<std::uint64_t>(step), orb->delta(), orb->dz()});
        }
        at = step;
        lv.t = orb->t();
        lv.t_exact = lv.t == w0 * detail::big(ScalarTraits<S>::from_int(1, disk.scale) /
                                                   int_power(F.lambda(), (1L << l) * disk.n), bits);
        lv.offset = orb->offset_from(x0);
        lv.log2_t = detail::log2_or_floor(lv.t);
        lv.log2_z_distance = detail::log2_or_floor(lv.offset);
        const double hi = std::max(lv.log2_t, lv.log2_z_distance);
        const double lo = std::min(lv.log2_t, lv.log2_z_distance);
        lv.log2_distance = std::isfinite(lo) ? hi + 0.5 * std::log2(1.0 + std::exp2(2.0 * (lo - hi))) : hi;
        lv.distance = std::exp2(lv.log2_distance);
        lv.inside = lv.log2_z_distance < disk_log2_radius((1L << l) * disk.n, lam);
        rep.levels.push_back(std::move(lv));
    }
    rep.strictly_decreasing = true;
    for (std::size_t i = 1; i < rep.levels.size(); ++i) {
        if (!(rep.levels[i].log2_distance < rep.levels[i - 1].log2_distance)) rep.strictly_decreasing = false;
    }
    return rep;
}

/// Normality proxy: boundary orbits of D_n stay bounded for 2^levels n steps and
/// their spread at the passage steps (2^l - 1) n shrinks.
struct FatouProxyReport {
    bool bounded = false;
    std::vector<double> log2_diameters;  // l = 1 .. levels
    bool shrinking = false;
};

template <class S>
FatouProxyReport fatou_proxy(const SkewProduct<S>& F, const DiskSpec<S>& disk, int levels, Precision bits = 0,
                             unsigned threads = 0, double bailout = 1e50) {
    const double lam = ScalarTraits<S>::magnitude(F.lambda());
    const long deepest = (1L << levels) * disk.n;
    if (bits == 0) bits = precision_for_depth(deepest, lam);
    auto ref = std::make_shared<const ReferenceOrbit<S>>(F.p(), disk.x0, bits, static_cast<std::size_t>(deepest) + 1);
    const BigComplex w0 = disk.w0.with_precision(bits);
    const auto offsets = detail::disk_offsets(disk, bits, disk.log2_radius);
    std::vector<std::vector<BigComplex>> images(offsets.size());
    std::vector<char> escaped(offsets.size(), 0);
    parallel_for(
        offsets.size(),
        [&](std::size_t i) {
            OffsetOrbit<S> orb(F, ref, w0, disk.scale, offsets[i]);
            long at = 0;
            for (int l = 1; l <= levels; ++l) {
                const long step = ((1L << l) - 1) * disk.n;
                for (; at < step; ++at) {
                    orb.step();
                    if (orb.beyond(bailout)) {
                        escaped[i] = 1;
                        return;
                    }
                }
                orb.rebase();
                images[i].push_back(orb.delta());
            }
            for (; at < deepest; ++at) {
                orb.step();
                if (orb.beyond(bailout)) {
                    escaped[i] = 1;
                    return;
                }
            }
        },
        threads);
    FatouProxyReport rep;
    rep.bounded = std::none_of(escaped.begin(), escaped.end(), [](char c) { return c != 0; });
    if (!rep.bounded) return rep;
    for (int l = 0; l < levels; ++l) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < images.size(); ++a) {
            for (std::size_t b = a + 1; b < images.size(); ++b) {
                best = std::max(best, detail::log2_or_floor(images[a][l] - images[b][l]));
            }
        }
        rep.log2_diameters.push_back(best);
    }
    rep.shrinking = true;
    for (std::size_t i = 1; i < rep.log2_diameters.size(); ++i) {
        if (!(rep.log2_diameters[i] < rep.log2_diameters[i - 1])) rep.shrinking = false;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// omega-limit chains

struct OmegaLimit {
    long first_index = 0;               // points[i] is x_{-(first_index + i)}
    std::vector<BigComplex> points;     // x_{-l} = Phi(w / lambda^l)
    std::vector<double> chain_errors;   // |p(x_{-l}) - x_{-l+1}|
    double max_chain_error = 0.0;
    double convergence_tail = 0.0;      // |x_{-L}|
    long monotone_from = 0;             // |x_{-l}| decreases for every l >= monotone_from
    double contraction = 0.0;           // |x_{-L}| / |x_{-L+1}|
    Precision precision = 0;
};

struct OmegaOptions {
    Precision bits = 256;  // output precision P; the chain check uses 2^(24 - P)
    unsigned threads = 0;
};

/// The backward chain x_{-l} = Phi(w / lambda^l), l = -k .. L.
template <class S>
OmegaLimit omega_limit(const SkewProduct<S>& F, const CriticalData<S>& crit, const BigComplex& w, long L,
                       const OmegaOptions& opts = {}) {
    const double lam = ScalarTraits<S>::magnitude(F.lambda());
    if (!(lam > 1.0)) throw Error(ErrorKind::PreconditionFailed, "|p'(0)| > 1 is required for the local inverse branch");
    if (L < 1) throw Error(ErrorKind::Usage, "L must be positive");
    const Precision P = opts.bits;
    const Precision inner = P + 64;
    const double tol = std::exp2(-static_cast<double>(P) - 8.0);
    const long n_max = static_cast<long>(std::ceil(2.0 * (static_cast<double>(P) + 8.0) / std::log2(lam))) + 8;
    const KoenigsLimit<S> approx(F, crit.x0, tol, {.bits = inner, .n_min = 4, .n_max = n_max});
    const long first = -static_cast<long>(crit.k);
    const std::size_t count = static_cast<std::size_t>(L - first + 1);
    std::vector<BigComplex> xs(count, BigComplex(inner));
    parallel_for(
        count,
        [&](std::size_t i) {
            const long l = first + static_cast<long>(i);
            const S factor = l >= 0 ? ScalarTraits<S>::from_int(1, F.lambda()) / int_power(F.lambda(), l)
                                    : int_power(F.lambda(), -l);
            xs[i] = approx(w.with_precision(inner) * detail::big(factor, inner)).value;
        },
        opts.threads);

    const auto p = F.p().template map<BigComplex>([inner](const S& c) { return detail::big(c, inner); });
    OmegaLimit out;
    out.first_index = first;
    out.precision = P;
    for (std::size_t i = 1; i < count; ++i) {
        const BigComplex e = p(xs[i]) - xs[i - 1];
        const double err = e.is_zero() ? 0.0 : std::exp2(e.log2_abs());
        out.chain_errors.push_back(err);
        out.max_chain_error = std::max(out.max_chain_error, err);
    }
    if (!(out.max_chain_error < std::exp2(24.0 - static_cast<double>(P)))) {
        throw Error(ErrorKind::InconsistentOrbit, "p(x_{-l}) != x_{-l+1} beyond 2^(24 - P)");
    }
    for (auto& x : xs) out.points.push_back(x.with_precision(P));
    out.convergence_tail = out.points.back().is_zero() ? 0.0 : std::exp2(out.points.back().log2_abs());
    out.monotone_from = L;
    for (std::size_t i = count - 1; i > 0; --i) {
        const double a = detail::log2_or_floor(out.points[i]);
        const double b = detail::log2_or_floor(out.points[i - 1]);
        const bool ok = a < b || (std::isinf(a) && std::isinf(b));
        if (!ok) break;
        out.monotone_from = first + static_cast<long>(i) - 1;
    }
    const double a = detail::log2_or_floor(out.points[count - 1]);
    const double b = detail::log2_or_floor(out.points[count - 2]);
    out.contraction = std::isfinite(a) && std::isfinite(b) ? std::exp2(a - b) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Julia evidence

struct JuliaBlock {
    int level = 0;
    long start = 0;                   // absolute step 2^l N
    long length = 0;                  // 2^l N
    double log2_block_product = 0.0;  // log2 |prod p'(z_j)| over the block
    double log2_distance = 0.0;       // log2 |z_{2^(l+1) N} - x0|
    double log2_profile = 0.0;        // log2 |lambda|^(-2^(l+1) N / s)
    double log2_cumulative = 0.0;     // log2 |dF_2^j/dz| from step N to the block end
};

struct JuliaEvidence {
    long N = 0;
    int levels = 0;
    int s = 0;
    Precision precision = 0;
    BigComplex v;
    BigComplex start_offset;                 // z_N - x0 of the shadow orbit
    double log2_phi_gap = 0.0;               // log2 |phi(v) - x0| on the deepest block
    std::vector<JuliaBlock> blocks;
    std::vector<double> center_log2_distances;  // v = w0: log2 |z_{2^l N} - x0|, l = 1 .. levels
    double center_rate = 0.0;                   // slope against block length, in powers of |lambda|
    std::vector<long> natural_escape_steps;     // -1 when bounded over the whole window
    bool positive = false;
};

struct JuliaOptions {
    Precision bits = 0;          // 0: precision_for_depth(2^levels N)
    int natural_samples = 16;
    double sample_log2_radius = std::numeric_limits<double>::quiet_NaN();  // NaN: the disk radius
    double bailout = 1e50;
    int max_newton = 200;
    unsigned threads = 0;
};

namespace detail {

template <class S>
struct BlockEval {
    BigComplex offset;  // z_end - x0
    BigComplex dz;
};

template <class S>
BlockEval<S> run_block(const SkewProduct<S>& F, const std::shared_ptr<const ReferenceOrbit<S>>& ref, const BigComplex& v,
                       const S& scale, const BigComplex& eps, long len, const BigComplex& x0, double bailout) {
    OffsetOrbit<S> orb(F, ref, v, scale, eps, Tangent::Vertical);
    for (long s = 0; s < len; ++s) {
        orb.step();
        if (orb.beyond(bailout)) throw EscapedError(orb.step_index(), "shadow orbit escaped");
    }
    return {orb.offset_from(x0), orb.dz()};
}

inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

}  // namespace detail

/// Growth of the vertical derivative along an orbit in the fiber v / lambda^N
/// that returns near x0 at the passage steps 2^l N.
///
/// The orbit is built backwards: z_{2^levels N} = x0, and on each doubling
/// block Newton solves pi_2 F^(2^l N)(v / lambda^(2^l N), z) = z_{2^(l+1) N}
/// for z near x0. The measurements come from a forward re-run of the result.
template <class S>
JuliaEvidence julia_evidence(const SkewProduct<S>& F, const DiskSpec<S>& disk, const BigComplex& v, int levels,
                             const JuliaOptions& opts = {}) {
    F.require_split("julia_evidence");
    if (levels < 1 || levels > 20) throw Error(ErrorKind::Usage, "levels must be in [1, 20]");
    const double lam = ScalarTraits<S>::magnitude(F.lambda());
    const long N = disk.n;
    const long deepest = (1L << levels) * N;
    const Precision need = precision_for_depth(deepest, lam);
    const Precision bits = opts.bits ? opts.bits : need;
    if (bits < need) throw Error(ErrorKind::PrecisionExhausted, "julia_evidence needs " + std::to_string(need) + " bits");

    auto ref = std::make_shared<const ReferenceOrbit<S>>(F.p(), disk.x0, bits, static_cast<std::size_t>(deepest) + 1);
    const S px0 = F.p()(disk.x0);
    auto ref1 = std::make_shared<const ReferenceOrbit<S>>(F.p(), px0, bits, static_cast<std::size_t>(deepest) + 1);
    const BigComplex x0 = detail::big(disk.x0, bits);
    const BigComplex vb = v.with_precision(bits);
    const BigComplex w0 = disk.w0.with_precision(bits);

    // Local degree s and leading coefficient c of p(x0 + e) - p(x0).
    const auto& shift = ref->at(0).shift;
    int s = 0;
    for (std::size_t m = 1; m < shift.size(); ++m) {
        if (!shift[m].is_zero() && shift[m].log2_abs() > -static_cast<double>(bits) / 2.0) {
            s = static_cast<int>(m);
            break;
        }
    }
    if (s < 2) throw Error(ErrorKind::PreconditionFailed, "x0 is not a critical point of p");
    const BigComplex c = shift[static_cast<std::size_t>(s)];

    auto start_of = [&](int l) { return (1L << l) * N; };
    auto scale_at = [&](long absolute) { return disk.scale * int_power(F.mu(), absolute - N); };

    // Backward shooting.
    std::vector<BigComplex> eps(static_cast<std::size_t>(levels) + 1, BigComplex(bits));
    double log2_gap = 0.0;
    const double stop = 16.0 - static_cast<double>(bits);
    for (int l = levels - 1; l >= 0; --l) {
        const long len = start_of(l);
        const S scale = scale_at(start_of(l));
        const BigComplex& target = eps[static_cast<std::size_t>(l) + 1];
        const auto y = detail::run_block(F, ref, vb, scale, BigComplex(bits), len, x0, opts.bailout);
        if (l == levels - 1) log2_gap = detail::log2_or_floor(y.offset);
        // dz of the block after its first step, started from p(x0) + q(t).
        OffsetOrbit<S> first(F, ref, vb, scale, BigComplex(bits));
        first.step();
        OffsetOrbit<S> rest(F, ref1, vb, scale * F.mu(), first.delta(), Tangent::Vertical);
        for (long j = 1; j < len; ++j) rest.step();
        BigComplex e = principal_root((target - y.offset) / (c * rest.dz()), static_cast<unsigned long>(s));
        bool done = false;
        std::vector<double> history;
        for (int it = 0; it < opts.max_newton && !done; ++it) {
            const auto g = detail::run_block(F, ref, vb, scale, e, len, x0, opts.bailout);
            const BigComplex r = g.offset - target;
            history.push_back(r.is_zero() ? 0.0 : std::exp2(r.log2_abs()));
            if (r.is_zero() || g.dz.is_zero()) break;
            const BigComplex step = r / g.dz;
            e = e - step;
            done = step.is_zero() || step.log2_abs() < stop + detail::log2_or_floor(e);
        }
        if (!done) throw NoConvergenceError(history, "shadow orbit Newton did not settle on level " + std::to_string(l));
        eps[static_cast<std::size_t>(l)] = e;
    }

    JuliaEvidence out;
    out.N = N;
    out.levels = levels;
    out.s = s;
    out.precision = bits;
    out.v = vb;
    out.start_offset = eps[0];
    out.log2_phi_gap = log2_gap;

    // Forward re-run of the shadow orbit.
    {
        OffsetOrbit<S> orb(F, ref, vb, disk.scale, eps[0], Tangent::Vertical);
        double log2_dz = 0.0;
        for (int l = 0; l < levels; ++l) {
            const long len = start_of(l);
            for (long j = 0; j < len; ++j) {
                orb.step();
                if (orb.beyond(opts.bailout)) throw EscapedError(orb.step_index(), "shadow orbit escaped on re-run");
            }
            JuliaBlock b;
            b.level = l;
            b.start = start_of(l);
            b.length = len;
            b.log2_cumulative = detail::log2_or_floor(orb.dz());
            b.log2_block_product = b.log2_cumulative - log2_dz;
            log2_dz = b.log2_cumulative;
            b.log2_distance = detail::log2_or_floor(orb.offset_from(x0));
            b.log2_profile = -static_cast<double>(start_of(l + 1)) / s * std::log2(lam);
            out.blocks.push_back(b);
            orb.rebase();
        }
    }

    // The critical fiber itself: v = w0, started at x0.
    {
        OffsetOrbit<S> orb(F, ref, w0, disk.scale, BigComplex(bits));
        std::vector<double> xs, ys;
        for (int l = 0; l < levels; ++l) {
            for (long j = 0; j < start_of(l); ++j) {
                orb.step();
                if (orb.beyond(opts.bailout)) throw EscapedError(orb.step_index(), "center orbit escaped");
            }
            const double d = detail::log2_or_floor(orb.offset_from(x0));
            out.center_log2_distances.push_back(d);
            xs.push_back(static_cast<double>(start_of(l)));
            ys.push_back(d / std::log2(lam));
            orb.rebase();
        }
        out.center_rate = xs.size() >= 2 ? detail::fit_slope(xs, ys) : 0.0;
    }

    // Naturally sampled z near x0 in the same fiber.
    const double log2_r = std::isnan(opts.sample_log2_radius) ? disk.log2_radius : opts.sample_log2_radius;
    out.natural_escape_steps.assign(static_cast<std::size_t>(std::max(0, opts.natural_samples)), -1);
    parallel_for(
        out.natural_escape_steps.size(),
        [&](std::size_t i) {
            const double theta = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(opts.natural_samples);
            OffsetOrbit<S> orb(F, ref, vb, disk.scale, BigComplex(std::polar(std::exp2(log2_r), theta), bits));
            long at = 0;
            for (int l = 0; l < levels; ++l) {
                for (long j = 0; j < start_of(l); ++j, ++at) {
                    orb.step();
                    if (orb.beyond(opts.bailout)) {
                        out.natural_escape_steps[i] = at + 1;
                        return;
                    }
                }
                orb.rebase();
            }
        },
        opts.threads);

    out.positive = levels >= 3 && std::all_of(out.blocks.begin(), out.blocks.end(),
                                              [](const JuliaBlock& b) { return b.log2_block_product > 0.0; });
    return out;
}

}  // namespace skewfatou
