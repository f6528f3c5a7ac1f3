// One PASS/FAIL line per acceptance criterion. The whole suite runs twice, with
// 1 and 8 threads, and criterion 12 compares the serialized outputs of both.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "skewfatou/cli/reports.hpp"
#include "skewfatou/dynamics/parse.hpp"

using namespace skewfatou;
using json = nlohmann::ordered_json;
using Q = ExactRational;

namespace {

struct Result {
    bool pass = false;
    std::string detail;
    json output;
    double seconds = 0.0;
};

struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds, 0: none
};

const std::vector<Criterion> kCriteria{
    {1, "solve-b returns -641/4165 exactly", 10.0},
    {2, "rate dichotomy: tuned slope <= -1.8, b = 0 slope in [-1.2, -0.8]", 60.0},
    {3, "linear Koenigs map matches a w / (lambda - mu) to 1e-30", 0.0},
    {4, "functional-equation residual drops by >= |lambda|^3 per 4 steps", 0.0},
    {5, "Koenigs map unchanged by b -> b + 1/7", 0.0},
    {6, "closed form reproduces 10 held-out jets exactly", 0.0},
    {7, "nesting margins positive on [N, 2N] and increasing", 300.0},
    {8, "accumulation decreasing, final < 1e-6, exact t", 0.0},
    {9, "omega chain error < 2^(24-P), tail monotone to 0", 0.0},
    {10, "Julia evidence: derivative growth off fiber, center decay on it", 0.0},
    {11, "offset fiber bounded fraction below critical, non-increasing in max_iter", 0.0},
};

SkewProduct<Q> family(const Q& b) { return example_family<Q>(4, Q(1), b); }

const Q kTunedB(-641, 4165);

BigComplex point(double r, double theta, Precision bits) { return BigComplex(std::polar(r, theta), bits); }

/// Shared per-run state: the critical parameter and nesting threshold.
struct Run {
    unsigned threads;
    SkewProduct<Q> F = family(kTunedB);
    CriticalData<Q> crit = critical_data(F.p(), Q(0));
    BigComplex w0;
    long N = 0;
    int max_iter = 2000;
};

Result c1(Run&) {
    const auto p = parse_polynomial("2*(z+1)^4-2");
    using G = GaussianRational;
    const G b = solve_b(p, G(1), G(0), critical_data(p, G(0)));
    Result r;
    r.output = b.to_string();
    r.pass = b.to_string() == "-641/4165";
    r.detail = "b = " + b.to_string();
    return r;
}

Result c2(Run& run) {
    const Precision bits = precision_for_depth(40, 8.0);
    const BigComplex w = BigComplex(1, bits) / BigComplex(32, bits);
    const auto tuned = convergence_slope(run.F, run.crit.x0, w, 16, 40, bits);
    const auto plain = convergence_slope(family(Q(0)), run.crit.x0, w, 16, 40, bits);
    Result r;
    r.output = {{"tuned", report::to_json(tuned)}, {"b0", report::to_json(plain)}};
    r.pass = tuned.slope <= -1.8 && plain.slope >= -1.2 && plain.slope <= -0.8;
    char buf[96];
    std::snprintf(buf, sizeof buf, "rho tuned %.4f, rho b=0 %.4f", tuned.slope, plain.slope);
    r.detail = buf;
    return r;
}

Result c3(Run&) {
    const Precision bits = 256;
    const auto F = SkewProduct<Q>::linear(Q(2), Q(1, 2), Q(1));
    const KoenigsLimit<Q> phi(F, Q(0), 1e-45, {.bits = bits});
    const BigComplex scale = ScalarTraits<Q>::to_big_complex(Q(2, 3), bits);  // a / (lambda - mu)
    double worst = 0.0;
    json vals = json::array();
    for (int i = 0; i < 20; ++i) {
        const BigComplex w = point(0.1 * (i + 1), 2.0 * std::numbers::pi * i / 20.0 + 0.3, bits);
        const auto v = phi(w);
        const BigComplex expect = w * scale;
        worst = std::max(worst, std::exp2((v.value - expect).log2_abs() - expect.log2_abs()));
        vals.push_back(report::big(v.value));
    }
    Result r;
    r.output = {{"values", vals}, {"max_relative_error", report::number(worst)}};
    r.pass = worst < 1e-30;
    char buf[64];
    std::snprintf(buf, sizeof buf, "max relative error %.3e", worst);
    r.detail = buf;
    return r;
}

Result c4(Run& run) {
    const KoenigsContext<Q> ctx(run.F, run.crit.x0, precision_for_depth(40, 8.0));
    double worst = INFINITY;
    json rows = json::array();
    for (int i = 0; i < 8; ++i) {
        const BigComplex w = point(1.0 / 33.0 * (0.25 + 0.75 * i / 7.0), 0.7 * i + 0.1, ctx.precision());
        json res = json::array();
        double prev = 0.0;
        for (long n = 16; n <= 32; n += 4) {
            const double rn = functional_residual_at_depth(ctx, n, w);
            res.push_back(report::number(rn));
            if (n > 16) worst = std::min(worst, prev / rn);
            prev = rn;
        }
        rows.push_back(res);
    }
    Result r;
    r.output = {{"residuals", rows}, {"min_ratio", report::number(worst)}};
    r.pass = worst >= 512.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "min drop per 4 steps %.3e", worst);
    r.detail = buf;
    return r;
}

Result c5(Run& run) {
    const KoenigsLimit<Q> a(run.F, run.crit.x0, 1e-30);
    const KoenigsLimit<Q> b(family(kTunedB + Q(1, 7)), run.crit.x0, 1e-30);
    double worst = -INFINITY;  // max of |Phi_a - Phi_b| - (err_a + err_b)
    json rows = json::array();
    for (int i = 0; i < 20; ++i) {
        const Precision bits = a.context().precision();
        const BigComplex w = point(a.domain_radius() * (0.05 + 0.9 * i / 19.0), 2.0 * std::numbers::pi * i / 20.0, bits);
        const auto va = a(w), vb = b(w);
        const BigComplex d = va.value - vb.value;
        const double diff = d.is_zero() ? 0.0 : std::exp2(d.log2_abs());
        worst = std::max(worst, diff - (va.error_bound + vb.error_bound));
        rows.push_back({{"diff", report::number(diff)}, {"bound", report::number(va.error_bound + vb.error_bound)}});
    }
    Result r;
    r.output = rows;
    r.pass = worst <= 0.0;
    r.detail = worst <= 0.0 ? "all 20 within summed error bounds" : "difference exceeds error bounds";
    return r;
}

Result c6(Run& run) {
    const long k = run.crit.k;
    auto samples = default_samples(k);
    samples.resize(5);
    for (long n : {k + 7, k + 8}) {
        for (long j = k; j <= k + 4; ++j) samples.push_back({n, j});
    }
    const auto sol = fit_X(run.F, run.crit, samples, run.threads);
    Result r;
    r.output = report::to_json(sol);
    r.pass = samples.size() == 15 && sol.fit_residual == 0.0;
    r.detail = "held-out residual " + std::to_string(sol.fit_residual) + ", X1 = " + sol.X1.to_string();
    return r;
}

Result c7(Run& run) {
    Result r;
    const auto N = find_nesting_threshold(run.F, run.w0, run.crit.x0, 4, 32, 64, run.threads);
    if (!N) {
        r.detail = "no threshold in [4, 32]";
        return r;
    }
    run.N = *N;
    bool ok = true;
    double prev = -INFINITY;
    json reps = json::array();
    for (long n = *N; n <= 2 * *N; ++n) {
        const auto rep = verify_nesting(run.F, make_disk(n, run.w0, run.crit, Q(8)), {.threads = run.threads});
        ok = ok && rep.margin > 0.0 && rep.relative_margin > prev;
        prev = rep.relative_margin;
        reps.push_back(report::to_json(rep));
    }
    r.output = {{"N", *N}, {"reports", reps}};
    r.pass = ok;
    r.detail = "N = " + std::to_string(*N) + (ok ? ", relative margins increasing" : ", check failed");
    return r;
}

Result c8(Run& run) {
    Result r;
    if (run.N == 0) {
        r.detail = "needs the threshold from criterion 7";
        return r;
    }
    const auto rep = accumulate(run.F, make_disk(run.N, run.w0, run.crit, Q(8)), 3);
    bool exact = true;
    for (const auto& lv : rep.levels) {
        const long depth = (1L << lv.level) * run.N;
        const Precision bits = lv.t.precision();
        const BigComplex expect =
            run.w0.with_precision(bits) * ScalarTraits<Q>::to_big_complex(Q(1) / int_power(Q(8), depth), bits);
        const BigComplex d = lv.t - expect;
        exact = exact && lv.t_exact && (d.is_zero() || d.log2_abs() - lv.t.log2_abs() < 8.0 - bits);
    }
    const double last = rep.levels.back().distance;
    r.output = report::to_json(rep);
    r.pass = rep.levels.size() == 3 && rep.strictly_decreasing && last < 1e-6 && exact;
    char buf[96];
    std::snprintf(buf, sizeof buf, "final distance %.3e", last);
    r.detail = buf;
    return r;
}

Result c9(Run& run) {
    const Precision P = 256;
    const BigComplex w = run.w0.with_precision(P + 64) * BigComplex(64, P + 64);  // lambda^k w0
    const long L = 24;
    const auto om = omega_limit(run.F, run.crit, w, L, {.bits = P, .threads = run.threads});
    const double bound = std::exp2(24.0 - static_cast<double>(P));
    Result r;
    r.output = report::to_json(om);
    r.pass = om.max_chain_error < bound && om.monotone_from < L - 4 && om.convergence_tail < 1e-15;
    char buf[128];
    std::snprintf(buf, sizeof buf, "chain error %.3e < %.3e, monotone from l = %ld", om.max_chain_error, bound,
                  om.monotone_from);
    r.detail = buf;
    return r;
}

Result c10(Run& run) {
    const long N = 16;
    const int levels = 4;
    const BigComplex v = run.w0 + BigComplex(std::complex<double>(1e-3, 0.0), 64);
    JuliaOptions jo;
    jo.threads = run.threads;
    const auto ev = julia_evidence(run.F, make_disk(N, run.w0, run.crit, Q(8)), v, levels, jo);
    bool growth = ev.blocks.size() >= 3;
    for (std::size_t l = 0; l < ev.blocks.size(); ++l) {
        growth = growth && ev.blocks[l].log2_block_product > 0.0;
        if (l > 0) growth = growth && ev.blocks[l].log2_cumulative > ev.blocks[l - 1].log2_cumulative;
    }
    Result r;
    r.output = report::to_json(ev);
    r.pass = ev.positive && growth && ev.center_rate <= -1.8;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu growing levels, center rate %.4f", ev.blocks.size(), ev.center_rate);
    r.detail = buf;
    return r;
}

Result c11(Run& run) {
    const long N = 4;
    const auto disk = make_disk(N, run.w0, run.crit, Q(8));
    const Precision P = critical_fiber_precision(N, run.max_iter, 8.0);
    const BigComplex scale = ScalarTraits<Q>::to_big_complex(disk.scale, run.w0.precision());
    RenderJob<Q> job{run.F, disk.fiber_t, BigComplex(-1, P), 2.0 * disk.radius, 32, 32, run.max_iter};
    job.precision = P;
    const auto critical = render_fiber(job, run.threads);
    const auto inner = subwindow(critical, {0.0, 0.0}, disk.radius / std::sqrt(2.0));
    const double fc = bounded_fraction(critical, inner);
    job.fiber_t = (run.w0 + BigComplex(std::complex<double>(1e-3, 0.0), run.w0.precision())) * scale;
    std::vector<double> fo;
    json grids = json::array({{{"fiber", "critical"}, {"digest", report::grid_digest(critical)}, {"disk_fraction", fc}}});
    for (int it : {run.max_iter, 2 * run.max_iter, 4 * run.max_iter}) {
        job.max_iter = it;
        const auto g = render_fiber(job, run.threads);
        fo.push_back(bounded_fraction(g, inner));
        grids.push_back({{"fiber", "offset"}, {"max_iter", it}, {"digest", report::grid_digest(g)}, {"disk_fraction", fo.back()}});
    }
    Result r;
    r.output = grids;
    r.pass = fo[0] < fc && fo[1] <= fo[0] && fo[2] <= fo[1];
    char buf[128];
    std::snprintf(buf, sizeof buf, "critical %.4f, offset %.4f / %.4f / %.4f", fc, fo[0], fo[1], fo[2]);
    r.detail = buf;
    return r;
}

std::vector<Result> run_all(unsigned threads) {
    Run run{threads};
    const Precision P = critical_fiber_precision(4, run.max_iter, 8.0);
    const long depth = w0_refine_depth(P, 8.0);
    run.w0 = find_w0(run.F, run.crit, BigComplex(-1, 64),
                     {.n_refine = depth, .bits = precision_for_depth(depth, 8.0), .threads = threads})
                 .w0;
    const std::vector<std::function<Result(Run&)>> fns{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11};
    std::vector<Result> out;
    for (const auto& fn : fns) {
        const auto t0 = std::chrono::steady_clock::now();
        Result r;
        try {
            r = fn(run);
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("threw: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

int main() {
    const auto one = run_all(1);
    const auto eight = run_all(8);
    int failures = 0;
    for (std::size_t i = 0; i < kCriteria.size(); ++i) {
        const auto& c = kCriteria[i];
        const auto& r = one[i];
        const bool in_time = c.time_limit == 0.0 || r.seconds < c.time_limit;
        const bool pass = r.pass && eight[i].pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s %2d  %s: %s (%.1f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, r.detail.c_str(), r.seconds,
                    in_time ? "" : ", over time limit");
    }
    std::size_t differing = 0;
    for (std::size_t i = 0; i < one.size(); ++i) {
        if (one[i].output.dump() != eight[i].output.dump() || one[i].detail != eight[i].detail) ++differing;
    }
    const bool det = differing == 0;
    failures += det ? 0 : 1;
    std::printf("%s 12  determinism: outputs of 1-11 byte-identical for 1 and 8 threads (%zu differ)\n",
                det ? "PASS" : "FAIL", differing);
    return failures == 0 ? 0 : 1;
}
