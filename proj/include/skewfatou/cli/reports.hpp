#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "skewfatou/disks/disks.hpp"
#include "skewfatou/koenigs/koenigs.hpp"
#include "skewfatou/render/render.hpp"
#include "skewfatou/resonance/resonance.hpp"

namespace skewfatou::report {

using json = nlohmann::ordered_json;

/// Positional decimal for moderate exponents, scientific otherwise.
inline std::string decimal(const BigFloat& x, std::size_t digits) {
    const std::string s = x.to_string(digits);
    if (s == "0" || s == "nan" || s == "inf" || s == "-inf") return s;
    const bool neg = s.front() == '-';
    const std::string body = neg ? s.substr(1) : s;
    const auto epos = body.find('e');
    const long e = epos == std::string::npos ? 0 : std::stol(body.substr(epos + 1));
    if (e < -8 || e > 24) return s;
    std::string digs;
    for (char c : body.substr(0, epos)) {
        if (c != '.') digs += c;
    }
    std::string out;
    if (e < 0) {
        out = "0." + std::string(static_cast<std::size_t>(-e - 1), '0') + digs;
    } else if (static_cast<std::size_t>(e) + 1 >= digs.size()) {
        out = digs + std::string(static_cast<std::size_t>(e) + 1 - digs.size(), '0');
    } else {
        out = digs.substr(0, static_cast<std::size_t>(e) + 1) + "." + digs.substr(static_cast<std::size_t>(e) + 1);
    }
    return neg ? "-" + out : out;
}

inline std::size_t digits_for(Precision bits) {
    return std::max<std::size_t>(6, std::min<std::size_t>(60, static_cast<std::size_t>(bits * 0.30103) - 2));
}

/// Real values print without an imaginary part.
inline std::string decimal(const BigComplex& z, std::size_t digits) {
    if (z.imag().is_zero()) return decimal(z.real(), digits);
    const std::string im = decimal(z.imag(), digits);
    return decimal(z.real(), digits) + (im.front() == '-' ? "" : "+") + im + "i";
}

inline json number(double x) {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

inline json numbers(const std::vector<double>& xs) {
    json out = json::array();
    for (double x : xs) out.push_back(number(x));
    return out;
}

inline json big(const BigComplex& z) {
    const std::size_t d = digits_for(z.precision());
    return {{"re", decimal(z.real(), d)}, {"im", decimal(z.imag(), d)}, {"hex", hex_scalar(z)}};
}

template <class S>
json scalar(const S& x) {
    if constexpr (std::is_same_v<S, BigComplex>) {
        return big(x);
    } else {
        return x.to_string();
    }
}

inline json to_json(const KoenigsValue& v) {
    return {{"value", big(v.value)},
            {"error_bound", number(v.error_bound)},
            {"n", v.n},
            {"pullbacks", v.pullbacks},
            {"differences", numbers(v.differences)}};
}

inline json to_json(const SlopeReport& r) {
    return {{"slope", number(r.slope)}, {"intercept", number(r.intercept)}, {"fit_from", r.fit_from},
            {"n", r.n},               {"log2_diff", numbers(r.log2_diff)}};
}

template <class S>
json to_json(const CoefficientSolution<S>& c) {
    return {{"Y1", scalar(c.Y1)},   {"Ym1", scalar(c.Ym1)}, {"X2", scalar(c.X2)},
            {"X1", scalar(c.X1)},   {"X0", scalar(c.X0)},   {"Xm1", scalar(c.Xm1)},
            {"Xm2", scalar(c.Xm2)}, {"fit_residual", number(c.fit_residual)}};
}

inline json to_json(const W0Result& r) {
    json cands = json::array();
    for (const auto& c : r.candidates) cands.push_back(big(c));
    return {{"w0", big(r.w0)},          {"candidates", cands},    {"residual", number(r.residual)},
            {"n_refine", r.n_refine},   {"precision", r.precision}, {"search_radius", number(r.search_radius)}};
}

inline json to_json(const NestingReport& r) {
    return {{"n", r.n},
            {"max_image_distance", number(r.max_image_distance)},
            {"log2_max_image_distance", number(r.log2_max_image_distance)},
            {"center_distance", number(r.center_distance)},
            {"target_radius", number(r.target_radius)},
            {"margin", number(r.margin)},
            {"relative_margin", number(r.relative_margin)},
            {"fiber_ok", r.fiber_ok},
            {"escaped", r.escaped},
            {"precision", r.precision}};
}

inline json to_json(const AccumulationReport& r) {
    json levels = json::array();
    for (const auto& l : r.levels) {
        levels.push_back({{"level", l.level},
                          {"step", l.step},
                          {"t", big(l.t)},
                          {"t_exact", l.t_exact},
                          {"offset", big(l.offset)},
                          {"log2_t", number(l.log2_t)},
                          {"log2_z_distance", number(l.log2_z_distance)},
                          {"log2_distance", number(l.log2_distance)},
                          {"distance", number(l.distance)},
                          {"inside", l.inside},
                          {"resumed", l.resumed}});
    }
    return {{"n", r.n}, {"precision", r.precision}, {"levels", levels}, {"strictly_decreasing", r.strictly_decreasing}};
}

inline json to_json(const FatouProxyReport& r) {
    return {{"bounded", r.bounded}, {"log2_diameters", numbers(r.log2_diameters)}, {"shrinking", r.shrinking}};
}

inline json to_json(const OmegaLimit& o) {
    json pts = json::array();
    for (const auto& p : o.points) pts.push_back(big(p));
    return {{"first_index", o.first_index},
            {"points", pts},
            {"chain_errors", numbers(o.chain_errors)},
            {"max_chain_error", number(o.max_chain_error)},
            {"convergence_tail", number(o.convergence_tail)},
            {"monotone_from", o.monotone_from},
            {"contraction", number(o.contraction)},
            {"precision", o.precision}};
}

inline json to_json(const JuliaEvidence& e) {
    json blocks = json::array();
    for (const auto& b : e.blocks) {
        blocks.push_back({{"level", b.level},
                          {"start", b.start},
                          {"length", b.length},
                          {"log2_block_product", number(b.log2_block_product)},
                          {"log2_distance", number(b.log2_distance)},
                          {"log2_profile", number(b.log2_profile)},
                          {"log2_cumulative", number(b.log2_cumulative)}});
    }
    return {{"N", e.N},
            {"levels", e.levels},
            {"s", e.s},
            {"precision", e.precision},
            {"v", big(e.v)},
            {"start_offset", big(e.start_offset)},
            {"log2_phi_gap", number(e.log2_phi_gap)},
            {"blocks", blocks},
            {"center_log2_distances", numbers(e.center_log2_distances)},
            {"center_rate", number(e.center_rate)},
            {"natural_escape_steps", e.natural_escape_steps},
            {"positive", e.positive}};
}

inline json to_json(const EscapeGrid& g) {
    return {{"width", g.width},
            {"height", g.height},
            {"max_iter", g.max_iter},
            {"bailout", number(g.bailout)},
            {"precision", g.precision},
            {"center", {number(g.center.real()), number(g.center.imag())}},
            {"half_width", number(g.half_width)},
            {"fiber_t", g.fiber_t},
            {"bounded_fraction", number(bounded_fraction(g))}};
}

/// FNV-1a of the escape steps, for compact determinism checks.
inline std::string grid_digest(const EscapeGrid& g) {
    std::string bytes;
    for (std::int32_t s : g.steps) bytes.append(reinterpret_cast<const char*>(&s), sizeof s);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

}  // namespace skewfatou::report
