#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "skewfatou/dynamics/skew_product.hpp"
#include "skewfatou/error.hpp"
#include "skewfatou/numerics/big_complex.hpp"
#include "skewfatou/numerics/scalar.hpp"

namespace skewfatou {

/// max(2, 2 * sum |p_k|).
template <class S>
double default_bailout(const Polynomial<S>& p) {
    double total = 0.0;
    for (const S& c : p.coeffs()) total += ScalarTraits<S>::magnitude(c);
    return std::max(2.0, 2.0 * total);
}

struct OrbitRecord {
    std::vector<Point<BigComplex>> points;
    /// vertical_products[j] = prod_{i<j} dg/dz(t_i, z_i); vertical_products[0] = 1.
    std::vector<BigComplex> vertical_products;
    std::vector<double> distances_to_x0;
    std::vector<double> distances_to_fixed;
    bool escaped = false;
    std::size_t escape_index = 0;
};

struct OrbitOptions {
    double bailout = 0.0;  // 0 selects default_bailout(p)
    std::optional<BigComplex> x0;
    std::optional<BigComplex> fixed_point;  // defaults to 0
};

/// Records `steps` applications of F from `start` at `bits` of precision.
///
/// Stops early with `escaped` set once |z| exceeds the bailout; the escaping
/// point is the last one recorded.
template <class S>
OrbitRecord orbit(const SkewProduct<S>& F, const Point<BigComplex>& start, std::size_t steps, Precision bits,
                  const OrbitOptions& opts = {}) {
    const auto Fn = F.to_numeric(bits);
    const BigComplex zero(bits);
    const double bailout = opts.bailout > 0.0 ? opts.bailout : default_bailout(F.p());
    const double log_bailout = std::log2(bailout);
    const BigComplex fixed = opts.fixed_point ? opts.fixed_point->with_precision(bits) : zero;
    std::vector<Polynomial<BigComplex>> dparts;
    for (const auto& part : Fn.parts()) dparts.push_back(part.derivative());

    OrbitRecord rec;
    Point<BigComplex> pt{start.t.with_precision(bits), start.z.with_precision(bits)};
    BigComplex product(1, bits);
    auto record = [&](const Point<BigComplex>& q) {
        rec.points.push_back(q);
        rec.vertical_products.push_back(product);
        if (opts.x0) rec.distances_to_x0.push_back(std::exp2((q.z - *opts.x0).log2_abs()));
        rec.distances_to_fixed.push_back(std::exp2((q.z - fixed).log2_abs()));
    };
    record(pt);
    if (pt.z.log2_abs() > log_bailout) {
        rec.escaped = true;
        return rec;
    }
    for (std::size_t j = 0; j < steps; ++j) {
        BigComplex gz = zero;
        for (std::size_t i = dparts.size(); i-- > 0;) gz = gz * pt.t + dparts[i].eval(pt.z, zero);
        product = product * gz;
        pt = eval_map(Fn, pt);
        record(pt);
        if (pt.z.log2_abs() > log_bailout) {
            rec.escaped = true;
            rec.escape_index = j + 1;
            break;
        }
    }
    return rec;
}

/// prod_{i=from}^{to-1} dg/dz(t_i, z_i), recomputed from the recorded points.
template <class S>
BigComplex vertical_derivative_product(const SkewProduct<S>& F, const OrbitRecord& rec, std::size_t from,
                                       std::size_t to) {
    if (from > to || to > rec.points.size()) {
        throw Error(ErrorKind::Usage, "index range outside the recorded orbit");
    }
    const Precision bits = rec.points.front().z.precision();
    const auto Fn = F.to_numeric(bits);
    const BigComplex zero(bits);
    BigComplex out(1, bits);
    for (std::size_t i = from; i < to; ++i) out = out * Fn.g_z(rec.points[i].t, rec.points[i].z, zero);
    return out;
}

}  // namespace skewfatou
