#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skewfatou/cli/reports.hpp"
#include "skewfatou/dynamics/parse.hpp"

namespace skewfatou::cli {

using json = nlohmann::ordered_json;
using G = GaussianRational;

/// Everything needed to account for one invocation.
struct RunManifest {
    std::string subcommand;
    std::string config;
    std::vector<std::string> argv;
    json parameters = json::object();
    std::vector<std::string> outputs;
    double wall_clock_seconds = 0.0;
    Precision precision = 0;
};

inline json to_json(const RunManifest& m) {
    return {{"subcommand", m.subcommand},
            {"config", m.config},
            {"argv", m.argv},
            {"parameters", m.parameters},
            {"outputs", m.outputs},
            {"wall_clock_seconds", m.wall_clock_seconds},
            {"precision", m.precision}};
}

/// How the map is given on the command line.
struct MapArgs {
    std::string map_file;
    bool linear = false;
    std::string g;
    std::string p = "2*(z+1)^4-2";
    std::string a = "1";
    std::string tau = "0";
    std::string b;  // empty: solved for degeneracy
    std::string lambda = "2";
    std::string mu;  // empty: 1/lambda
    std::string x0;  // empty: the critical point found by critical_data
};

struct Options {
    Precision precision_bits = 0;
    long n = 0;
    int levels = 0;
    double tol = 0.0;
    std::string out_dir;
    unsigned threads = 0;
    bool exact = false;
    bool print_json = false;
    std::string config;

    std::string w;
    std::string target;
    std::string v;
    std::string v_offset = "1/1000";
    std::string center;
    std::string fiber_t;
    std::string fiber_offset = "0";
    std::string name = "fiber";
    long n_lo = 0;
    long n_hi = 0;
    int samples = 64;
    int max_iter = 2000;
    int width = 48;
    int height = 0;
    double half_width = 0.0;
    double radius = 2.0;
};

struct Outcome {
    json report = json::object();
    std::string line;
    std::vector<std::string> outputs;
    Precision precision = 0;
};

inline G parse_scalar(const std::string& text) {
    const auto poly = parse_bivariate(text);
    if (!poly.is_constant()) throw Error(ErrorKind::Parse, "expected a number: '" + text + "'");
    return poly.constant_term();
}

inline BigComplex parse_big(const std::string& text, Precision bits) { return parse_scalar(text).to_big_complex(bits); }

inline double lambda_abs(const SkewProduct<G>& F) { return ScalarTraits<G>::magnitude(F.lambda()); }

inline SkewProduct<G> build_map(const MapArgs& m) {
    if (!m.map_file.empty()) return load_map_file(m.map_file);
    if (m.linear) {
        const G lam = parse_scalar(m.lambda);
        const G mu = m.mu.empty() ? G(1) / lam : parse_scalar(m.mu);
        return SkewProduct<G>::linear(lam, mu, parse_scalar(m.a));
    }
    if (!m.g.empty()) {
        if (m.mu.empty()) throw Error(ErrorKind::Usage, "--g needs --mu");
        return skew_product_from_expression(parse_scalar(m.mu), m.g);
    }
    const auto p = parse_polynomial(m.p);
    const G a = parse_scalar(m.a);
    const G tau = parse_scalar(m.tau);
    G b;
    if (m.b.empty()) {
        b = solve_b(p, a, tau, critical_data(p, G(0)));
    } else {
        b = parse_scalar(m.b);
    }
    return resonant_map(p, a, tau, b);
}

/// Critical data of p at the fixed point 0, or the fixed point itself when p has no critical point to use.
inline CriticalData<G> base_point(const SkewProduct<G>& F, const MapArgs& m) {
    std::optional<CriticalData<G>> crit;
    try {
        crit = critical_data(F.p(), G(0));
    } catch (const Error&) {
    }
    if (!m.x0.empty()) {
        CriticalData<G> c = crit.value_or(CriticalData<G>{G(0), 0, 1, 0, G(0), F.lambda()});
        c.x0 = parse_scalar(m.x0);
        return c;
    }
    if (crit) return *crit;
    return {G(0), 0, 1, 0, G(0), F.lambda()};
}

/// w0 accurate enough for orbits that return to x0 up to absolute step `deepest`.
inline W0Result accurate_w0(const SkewProduct<G>& F, const CriticalData<G>& crit, long deepest, unsigned threads,
                            const BigComplex* target = nullptr) {
    const double lam = lambda_abs(F);
    const long depth = std::max(64L, w0_refine_depth(precision_for_depth((deepest + 1) / 2, lam), lam));
    W0Options opts;
    opts.n_refine = depth;
    opts.bits = precision_for_depth(depth, lam);
    opts.threads = threads;
    const BigComplex tgt = target ? *target : crit.x0.to_big_complex(opts.bits);
    return find_w0(F, crit, tgt, opts);
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(2) << "\n";
}

namespace detail {

inline std::filesystem::path out_path(const Options& o, const std::string& file) {
    const std::filesystem::path dir = o.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(o.out_dir);
    std::filesystem::create_directories(dir);
    return dir / file;
}

inline long threshold_or(const SkewProduct<G>& F, const CriticalData<G>& crit, const BigComplex& w0, const Options& o,
                         long fallback_lo, long fallback_hi, int samples) {
    const auto N = find_nesting_threshold(F, w0, crit.x0, o.n_lo ? o.n_lo : fallback_lo, o.n_hi ? o.n_hi : fallback_hi,
                                          samples, o.threads);
    if (!N) throw Error(ErrorKind::NotFound, "no nesting threshold in the scanned range");
    return *N;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stages

inline Outcome run_koenigs(const Options& o, const MapArgs& m) {
    const auto F = build_map(m);
    const auto crit = base_point(F, m);
    const double lam = lambda_abs(F);
    Outcome out;
    const std::string wt = o.w.empty() ? "1/8" : o.w;
    out.report["map_b"] = report::scalar(F.coeff(2, 0));
    out.report["x0"] = report::scalar(crit.x0);
    if (o.n > 0) {
        const Precision bits = o.precision_bits ? o.precision_bits : precision_for_depth(o.n, lam);
        const BigComplex v = phi_nj(F, crit.x0, o.n, o.n, parse_big(wt, bits), bits);
        out.report["mode"] = "depth";
        out.report["n"] = o.n;
        out.report["value"] = report::big(v);
        out.line = report::decimal(v, report::digits_for(bits));
        out.precision = bits;
        return out;
    }
    KoenigsOptions ko;
    ko.bits = o.precision_bits;
    const KoenigsLimit<G> approx(F, crit.x0, o.tol > 0 ? o.tol : 1e-30, ko);
    const auto v = approx(parse_big(wt, approx.context().precision()));
    out.report["mode"] = "limit";
    out.report["result"] = report::to_json(v);
    const double tol = approx.tolerance();
    const std::size_t digits = std::min(report::digits_for(approx.context().precision()),
                                        static_cast<std::size_t>(std::max(1.0, std::ceil(-std::log10(tol)) - 1)));
    out.line = report::decimal(v.value, digits);
    out.precision = approx.context().precision();
    return out;
}

inline Outcome run_slope(const Options& o, const MapArgs& m) {
    const auto F = build_map(m);
    const auto crit = base_point(F, m);
    const long lo = o.n_lo ? o.n_lo : 16, hi = o.n_hi ? o.n_hi : 40;
    const Precision bits = o.precision_bits ? o.precision_bits : precision_for_depth(hi + 1, lambda_abs(F));
    const auto rep = convergence_slope(F, crit.x0, parse_big(o.w.empty() ? "1/32" : o.w, bits), lo, hi, bits);
    Outcome out;
    out.report = report::to_json(rep);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", rep.slope);
    out.line = buf;
    out.precision = bits;
    return out;
}

inline Outcome run_resonance(const Options& o, const MapArgs& m) {
    const auto F = build_map(m);
    const auto crit = base_point(F, m);
    Outcome out;
    out.report["b"] = report::scalar(F.coeff(2, 0));
    if (o.exact) {
        const auto sol = fit_X(F, crit, default_samples(crit.k), o.threads);
        out.report["coefficients"] = report::to_json(sol);
        out.report["degenerate"] = sol.X1.is_zero();
        out.line = "X1 = " + sol.X1.to_string() + (sol.X1.is_zero() ? " (degenerate)" : "");
        return out;
    }
    const Precision bits = o.precision_bits ? o.precision_bits : 256;
    const auto Fn = F.to_numeric(bits);
    const auto cn = critical_data(Fn.p(), BigComplex(bits));
    const auto sol = fit_X(Fn, cn, default_samples(cn.k), o.threads);
    const auto deg = verify_degenerate(Fn, cn);
    out.report["coefficients"] = report::to_json(sol);
    out.report["degenerate"] = deg.degenerate;
    out.line = "X1 = " + report::decimal(sol.X1, 20) + (deg.degenerate ? " (degenerate)" : "");
    out.precision = bits;
    return out;
}

inline Outcome run_solve_b(const Options& o, const MapArgs& m) {
    const auto p = parse_polynomial(m.p);
    const G a = parse_scalar(m.a), tau = parse_scalar(m.tau);
    Outcome out;
    if (o.exact) {
        const G b = solve_b(p, a, tau, critical_data(p, G(0)));
        out.report["b"] = b.to_string();
        out.line = b.to_string();
        return out;
    }
    const Precision bits = o.precision_bits ? o.precision_bits : 256;
    const auto pn = p.template map<BigComplex>([bits](const G& c) { return c.to_big_complex(bits); });
    const auto crit = critical_data(pn, BigComplex(bits));
    const BigComplex b = solve_b(pn, a.to_big_complex(bits), tau.to_big_complex(bits), crit);
    out.report["b"] = report::big(b);
    out.line = report::decimal(b, report::digits_for(bits));
    out.precision = bits;
    return out;
}

inline Outcome run_find_w0(const Options& o, const MapArgs& m) {
    const auto F = build_map(m);
    const auto crit = base_point(F, m);
    const double lam = lambda_abs(F);
    W0Options wo;
    wo.n_refine = o.n ? o.n : 64;
    wo.bits = o.precision_bits;
    if (o.tol > 0) wo.tol = o.tol;
    wo.region.radius = o.radius;
    wo.threads = o.threads;
    const Precision bits = wo.bits ? wo.bits : precision_for_depth(wo.n_refine, lam);
    const BigComplex target = o.target.empty() ? crit.x0.to_big_complex(bits) : parse_big(o.target, bits);
    const auto r = find_w0(F, crit, target, wo);
    Outcome out;
    out.report = report::to_json(r);
    out.line = report::decimal(r.w0, 30);
    out.precision = r.precision;
    return out;
}

inline Outcome run_verify_disk(const Options& o, const MapArgs& m) {
    const auto F = build_map(m);
    const auto crit = base_point(F, m);
    Outcome out;
    const long hi = o.n ? o.n : (o.n_hi ? o.n_hi : 32);
    const auto w0 = accurate_w0(F, crit, 4 * hi, o.threads).w0;
    long first = o.n, last = o.n;
    if (!o.n) {
        first = detail::threshold_or(F, crit, w0, o, 4, 32, o.samples);
        last = 2 * first;
        out.report["threshold"] = first;
    }
    json reps = json::array();
    bool all_positive = true;
    for (long n = first; n <= last; ++n) {
        const auto rep = verify_nesting(F, make_disk(n, w0, crit, F.lambda(), o.samples),
                                        {.bits = o.precision_bits, .bailout = 1e50, .threads = o.threads});
        all_positive = all_positive && rep.margin > 0.0;
        reps.push_back(report::to_json(rep));
        out.precision = std::max(out.precision, rep.precision);
    }
    out.report["w0"] = report::big(w0);
    out.report["reports"] = reps;
    out.report["all_positive"] = all_positive;
    out.line = (o.n ? "n = " + std::to_string(o.n) : "N = " + std::to_string(first)) +
               (all_positive ? " nested" : " not nested");
    return out;
}

inline Outcome run_accumulate(const Options& o, const MapArgs& m) {
    const auto F = build_map(m);
    const auto crit = base_point(F, m);
    const int levels = o.levels ? o.levels : 3;
    long N = o.n;
    const auto w0 = accurate_w0(F, crit, (1L << levels) * std::max(N, 32L), o.threads).w0;
    if (!N) N = detail::threshold_or(F, crit, w0, o, 4, 32, o.samples);
    std::optional<CheckpointStore> store;
    if (!o.out_dir.empty()) store.emplace(std::filesystem::path(o.out_dir) / "checkpoints");
    const auto rep = accumulate(F, make_disk(N, w0, crit, F.lambda()), levels,
                                {.bits = o.precision_bits, .bailout = 1e50, .store = store ? &*store : nullptr});
    Outcome out;
    out.report = report::to_json(rep);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.6e", rep.levels.back().distance);
    out.line = std::string(buf) + (rep.strictly_decreasing ? " (strictly decreasing)" : " (not decreasing)");
    out.precision = rep.precision;
    return out;
}

inline Outcome run_omega(const Options& o, const MapArgs& m) {
    const auto F = build_map(m);
    const auto crit = base_point(F, m);
    const Precision P = o.precision_bits ? o.precision_bits : 256;
    const long L = o.levels ? o.levels : 24;
    BigComplex w(P);
    Outcome out;
    if (o.w.empty()) {
        // Default chain through the critical point: w = lambda^k w0, so x_{-k} = x0.
        const auto w0 = accurate_w0(F, crit, 2 * static_cast<long>(P), o.threads).w0;
        w = w0.with_precision(P + 64) * int_power(F.lambda(), crit.k).to_big_complex(P + 64);
        out.report["w0"] = report::big(w0);
    } else {
        w = parse_big(o.w, P + 64);
    }
    const auto om = omega_limit(F, crit, w, L, {.bits = P, .threads = o.threads});
    out.report["omega"] = report::to_json(om);
    char buf[96];
    std::snprintf(buf, sizeof buf, "max chain error %.3e, contraction %.6f", om.max_chain_error, om.contraction);
    out.line = buf;
    out.precision = P;
    return out;
}

inline Outcome run_julia(const Options& o, const MapArgs& m) {
    const auto F = build_map(m);
    const auto crit = base_point(F, m);
    const long N = o.n ? o.n : 16;
    const int levels = o.levels ? o.levels : 4;
    const auto w0 = accurate_w0(F, crit, (1L << levels) * N, o.threads).w0;
    const BigComplex v = o.v.empty() ? w0 + parse_big(o.v_offset, w0.precision()) : parse_big(o.v, w0.precision());
    JuliaOptions jo;
    jo.bits = o.precision_bits;
    jo.threads = o.threads;
    const auto ev = julia_evidence(F, make_disk(N, w0, crit, F.lambda()), v, levels, jo);
    Outcome out;
    out.report = report::to_json(ev);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s, center rate %.4f", ev.positive ? "positive" : "not positive", ev.center_rate);
    out.line = buf;
    out.precision = ev.precision;
    return out;
}

/// Fiber job around x0 for the disk D_N, critical or offset.
struct FiberSetup {
    RenderJob<G> job;
    double disk_radius = 0.0;
};

inline FiberSetup fiber_setup(const SkewProduct<G>& F, const CriticalData<G>& crit, const BigComplex& w0, long N,
                              const BigComplex& offset, const Options& o) {
    const double lam = lambda_abs(F);
    const auto disk = make_disk(N, w0, crit, F.lambda());
    FiberSetup s{RenderJob<G>{F, BigComplex(), BigComplex(), 0.0, o.width, o.height ? o.height : o.width, o.max_iter},
                 disk.radius};
    s.job.precision = o.precision_bits ? o.precision_bits : critical_fiber_precision(N, o.max_iter, lam);
    const Precision bits = std::max(s.job.precision, w0.precision());
    s.job.fiber_t = (w0.with_precision(bits) + offset.with_precision(bits)) * disk.scale.to_big_complex(bits);
    s.job.center = o.center.empty() ? crit.x0.to_big_complex(bits) : parse_big(o.center, bits);
    s.job.half_width = o.half_width > 0 ? o.half_width : 2.0 * disk.radius;
    return s;
}

inline json write_grid(const EscapeGrid& grid, const Options& o, const std::string& stem, double disk_radius,
                       Outcome& out) {
    const auto ppm = detail::out_path(o, stem + ".ppm");
    write_ppm(grid, ppm);
    out.outputs.push_back(ppm.string());
    if (png_available()) {
        const auto png = detail::out_path(o, stem + ".png");
        write_png(grid, png);
        out.outputs.push_back(png.string());
    }
    json side = report::to_json(grid);
    side["digest"] = report::grid_digest(grid);
    if (disk_radius > 0.0) {
        const auto inner = subwindow(grid, {0.0, 0.0}, disk_radius / std::sqrt(2.0));
        side["disk_window"] = {inner.x0, inner.y0, inner.x1, inner.y1};
        side["disk_bounded_fraction"] = report::number(bounded_fraction(grid, inner));
    }
    const auto sidecar = detail::out_path(o, stem + ".json");
    write_json(sidecar, side);
    out.outputs.push_back(sidecar.string());
    return side;
}

inline Outcome run_render(const Options& o, const MapArgs& m) {
    const auto F = build_map(m);
    const auto crit = base_point(F, m);
    Outcome out;
    RenderJob<G> job{F, BigComplex(), BigComplex(), 0.0, o.width, o.height ? o.height : o.width, o.max_iter};
    double radius = 0.0;
    if (!o.fiber_t.empty()) {
        job.precision = o.precision_bits ? o.precision_bits : 53;
        const Precision bits = std::max<Precision>(job.precision, 128);
        job.fiber_t = parse_big(o.fiber_t, bits);
        job.center = o.center.empty() ? crit.x0.to_big_complex(bits) : parse_big(o.center, bits);
        job.half_width = o.half_width > 0 ? o.half_width : 2.0;
    } else {
        const long N = o.n ? o.n : 4;
        const Precision P = o.precision_bits ? o.precision_bits : critical_fiber_precision(N, o.max_iter, lambda_abs(F));
        const auto w0 = accurate_w0(F, crit, last_passage(N, o.max_iter), o.threads).w0;
        auto s = fiber_setup(F, crit, w0, N, parse_big(o.fiber_offset, std::max(P, w0.precision())), o);
        job = s.job;
        radius = s.disk_radius;
        out.report["w0"] = report::big(w0);
        out.report["fiber_depth"] = N;
    }
    const auto grid = render_fiber(job, o.threads);
    out.report["grid"] = write_grid(grid, o, o.name, radius, out);
    char buf[96];
    std::snprintf(buf, sizeof buf, "bounded fraction %.6f", bounded_fraction(grid));
    out.line = buf;
    out.precision = job.precision;
    return out;
}

/// The full example-family pipeline, figures included.
inline Outcome run_reproduce(const Options& o, const MapArgs& m) {
    Outcome out;
    json& r = out.report;
    const auto p = parse_polynomial(m.p);
    const G a = parse_scalar(m.a), tau = parse_scalar(m.tau);
    const auto crit = critical_data(p, G(0));
    const G b = solve_b(p, a, tau, crit);
    const auto F = resonant_map(p, a, tau, b);
    const auto F0 = resonant_map(p, a, tau, G(0));
    const double lam = lambda_abs(F);
    r["b"] = b.to_string();

    r["coefficients_tuned"] = report::to_json(fit_X(F, crit, default_samples(crit.k), o.threads));
    r["coefficients_b0"] = report::to_json(fit_X(F0, crit, default_samples(crit.k), o.threads));

    const Precision sbits = precision_for_depth(41, lam);
    const BigComplex w32 = parse_big("1/32", sbits);
    r["slope_tuned"] = report::to_json(convergence_slope(F, crit.x0, w32, 16, 40, sbits));
    r["slope_b0"] = report::to_json(convergence_slope(F0, crit.x0, w32, 16, 40, sbits));

    const long N0 = 4;
    const auto w0r = accurate_w0(F, crit, last_passage(N0, o.max_iter), o.threads);
    const BigComplex& w0 = w0r.w0;
    r["w0"] = report::to_json(w0r);

    const long N = detail::threshold_or(F, crit, w0, o, 4, 32, o.samples);
    r["nesting_threshold"] = N;
    json nest = json::array();
    for (long n = N; n <= 2 * N; ++n) {
        nest.push_back(report::to_json(
            verify_nesting(F, make_disk(n, w0, crit, F.lambda(), o.samples), {.bits = 0, .bailout = 1e50, .threads = o.threads})));
    }
    r["nesting"] = nest;
    const auto disk = make_disk(N, w0, crit, F.lambda());
    r["accumulate"] = report::to_json(accumulate(F, disk, 3));
    r["fatou_proxy"] = report::to_json(fatou_proxy(F, disk, 3, 0, o.threads));

    const Precision P = 256;
    const BigComplex w_chain = w0.with_precision(P + 64) * int_power(F.lambda(), crit.k).to_big_complex(P + 64);
    r["omega"] = report::to_json(omega_limit(F, crit, w_chain, 24, {.bits = P, .threads = o.threads}));

    const long NJ = std::max(16L, N);
    const BigComplex v = w0 + parse_big("1/1000", w0.precision());
    JuliaOptions jo;
    jo.threads = o.threads;
    r["julia_evidence"] = report::to_json(julia_evidence(F, make_disk(NJ, w0, crit, F.lambda()), v, 4, jo));

    const BigComplex off = parse_big("1/1000", w0.precision());
    auto left = fiber_setup(F, crit, w0, N, BigComplex(w0.precision()), o);
    auto right = fiber_setup(F, crit, w0, N, off, o);
    const auto gl = render_fiber(left.job, o.threads);
    const auto gr = render_fiber(right.job, o.threads);
    r["figure1_left"] = write_grid(gl, o, "figure1_left", left.disk_radius, out);
    r["figure1_right"] = write_grid(gr, o, "figure1_right", right.disk_radius, out);
    json refine = json::array();
    const auto inner = subwindow(gr, {0.0, 0.0}, right.disk_radius / std::sqrt(2.0));
    for (int it : {o.max_iter, 2 * o.max_iter, 4 * o.max_iter}) {
        auto job = right.job;
        job.max_iter = it;
        const auto g = it == o.max_iter ? gr : render_fiber(job, o.threads);
        refine.push_back({{"max_iter", it}, {"disk_bounded_fraction", report::number(bounded_fraction(g, inner))}});
    }
    r["offset_refinement"] = refine;

    const auto path = detail::out_path(o, "report.json");
    write_json(path, r);
    out.outputs.push_back(path.string());
    out.line = "b = " + b.to_string() + ", N = " + std::to_string(N) + ", wrote " + path.string();
    out.precision = left.job.precision;
    return out;
}

// ---------------------------------------------------------------------------
// Dispatch

namespace detail {

inline void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--precision-bits", o.precision_bits, "Working precision in bits (0: policy)");
    sub->add_option("--n", o.n, "Depth or disk index");
    sub->add_option("--levels", o.levels, "Doubling levels or chain length");
    sub->add_option("--tol", o.tol, "Tolerance");
    sub->add_option("--out-dir", o.out_dir, "Directory for JSON reports, images and the manifest");
    sub->add_option("--threads", o.threads, "Worker threads (0: SKEWFATOU_THREADS or hardware)");
    sub->add_flag("--exact", o.exact, "Exact rational arithmetic where supported");
    sub->add_flag("--json", o.print_json, "Print the JSON report instead of the summary line");
}

inline void add_map(CLI::App* sub, MapArgs& m) {
    sub->add_option("--map", m.map_file, "Map definition file (key = value)");
    sub->add_flag("--linear", m.linear, "Use g = lambda z + a t");
    sub->add_option("--g", m.g, "g(t, z) as an expression");
    sub->add_option("--p", m.p, "Fiber polynomial p(z) with p(0) = 0");
    sub->add_option("--a", m.a, "Coefficient of t");
    sub->add_option("--tau", m.tau, "Coefficient of t z");
    sub->add_option("--b", m.b, "Coefficient of t^2 (default: the degenerate value)");
    sub->add_option("--lambda", m.lambda, "Multiplier for --linear");
    sub->add_option("--mu", m.mu, "Horizontal multiplier (default 1/lambda)");
    sub->add_option("--x0", m.x0, "Base point (default: the critical point)");
}

}  // namespace detail

/// Runs one subcommand. Exit codes: 0 success, 2 usage error, 1 computational failure.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Koenigs maps, Fatou disks and fiber renders for resonant polynomial skew products", "skewfatou"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file: key = value, with [subcommand] sections");
    app.set_help_all_flag("--help-all");
    Options o;
    MapArgs m;
    std::string replay;
    app.add_option("--replay", replay, "Re-run the invocation recorded in a manifest");

    using Runner = Outcome (*)(const Options&, const MapArgs&);
    const std::vector<std::tuple<std::string, std::string, Runner>> stages{
        {"koenigs", "Koenigs map value at w", run_koenigs},
        {"slope", "Convergence slope of phi_n(w)", run_slope},
        {"resonance", "Fitted closed-form coefficients", run_resonance},
        {"solve-b", "The t^2 coefficient that makes the map degenerate", run_solve_b},
        {"find-w0", "Solve Phi(w0) = target", run_find_w0},
        {"verify-disk", "Nesting F^n(D_n) in D_2n", run_verify_disk},
        {"accumulate", "Distances of the disk orbit at passage times", run_accumulate},
        {"omega", "Backward chain x_{-l} = Phi(w / lambda^l)", run_omega},
        {"julia-evidence", "Derivative growth off the critical fiber", run_julia},
        {"render", "Escape-time image of a vertical fiber", run_render},
        {"reproduce-paper", "Full example-family pipeline with both fiber images", run_reproduce},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help, fn] : stages) {
        CLI::App* sub = app.add_subcommand(name, help);
        detail::add_common(sub, o);
        detail::add_map(sub, m);
        subs.push_back(sub);
        if (name == "koenigs" || name == "slope" || name == "omega") sub->add_option("--w", o.w, "Koenigs coordinate");
        if (name == "slope" || name == "verify-disk" || name == "accumulate" || name == "reproduce-paper") {
            sub->add_option("--n-lo", o.n_lo, "Lower end of the depth range");
            sub->add_option("--n-hi", o.n_hi, "Upper end of the depth range");
        }
        if (name == "find-w0") {
            sub->add_option("--target", o.target, "Target value (default x0)");
            sub->add_option("--radius", o.radius, "Initial search radius");
        }
        if (name == "verify-disk" || name == "accumulate" || name == "reproduce-paper") {
            sub->add_option("--samples", o.samples, "Boundary samples");
        }
        if (name == "julia-evidence") {
            sub->add_option("--v", o.v, "Fiber parameter v");
            sub->add_option("--v-offset", o.v_offset, "v = w0 + offset when --v is absent");
        }
        if (name == "render" || name == "reproduce-paper") {
            sub->add_option("--max-iter", o.max_iter, "Escape-time iteration cap");
            sub->add_option("--width", o.width, "Image width in pixels");
            sub->add_option("--height", o.height, "Image height (default: width)");
            sub->add_option("--half-width", o.half_width, "Window half-width (default: twice the disk radius)");
            sub->add_option("--center", o.center, "Window center (default x0)");
        }
        if (name == "render") {
            sub->add_option("--fiber-t", o.fiber_t, "Explicit fiber t (otherwise w0 / lambda^n)");
            sub->add_option("--fiber-offset", o.fiber_offset, "Offset added to w0 before scaling");
            sub->add_option("--name", o.name, "Output file stem");
        }
    }

    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        if (!replay.empty()) {
        } else {
            out << app.help();
            return 0;
        }
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (replay.empty() || app.get_subcommands().size() > 0) {
            err << "error: " << e.what() << "\n" << app.help();
            return 2;
        }
    }
    if (!replay.empty()) {
        std::ifstream in(replay);
        if (!in) {
            err << "error: cannot read manifest " << replay << "\n";
            return 2;
        }
        json man;
        try {
            in >> man;
        } catch (const json::exception& e) {
            err << "error: malformed manifest: " << e.what() << "\n";
            return 2;
        }
        std::vector<std::string> again{"skewfatou"};
        for (const auto& a : man.at("argv")) again.push_back(a.get<std::string>());
        std::vector<const char*> ptrs;
        for (const auto& a : again) ptrs.push_back(a.c_str());
        return dispatch(static_cast<int>(ptrs.size()), ptrs.data(), out, err);
    }

    std::size_t which = 0;
    for (; which < subs.size(); ++which) {
        if (subs[which]->parsed()) break;
    }
    if (which == subs.size()) {
        err << "error: a subcommand is required\n" << app.help();
        return 2;
    }
    const auto& [name, help, fn] = stages[which];
    (void)help;
    RunManifest manifest;
    manifest.subcommand = name;
    manifest.argv = args;
    if (const auto* cfg = app.get_option("--config"); cfg && cfg->count() > 0) manifest.config = cfg->as<std::string>();
    for (const CLI::Option* opt : subs[which]->get_options()) {
        if (opt->get_name() == "--help" || opt->count() == 0) continue;
        const auto& res = opt->results();
        manifest.parameters[opt->get_name()] = res.size() == 1 ? json(res.front()) : json(res);
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        Outcome res = fn(o, m);
        manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        manifest.precision = res.precision;
        if (!o.out_dir.empty() && name != "reproduce-paper") {
            const auto path = detail::out_path(o, name + ".json");
            write_json(path, res.report);
            res.outputs.push_back(path.string());
        }
        manifest.outputs = res.outputs;
        if (!o.out_dir.empty()) write_json(detail::out_path(o, "manifest.json"), to_json(manifest));
        out << (o.print_json ? res.report.dump(2) : res.line) << "\n";
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::Usage || e.kind() == ErrorKind::Parse ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace skewfatou::cli
