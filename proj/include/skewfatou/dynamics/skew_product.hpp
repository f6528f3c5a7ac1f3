#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "skewfatou/error.hpp"
#include "skewfatou/numerics/polynomial.hpp"
#include "skewfatou/numerics/scalar.hpp"

namespace skewfatou {

template <class X>
struct Point {
    X t;
    X z;
};

/// F(t, z) = (mu t, g(t, z)) with g(t, z) = sum_i t^i P_i(z).
///
/// parts[0] is the fiber polynomial p(z) = g(0, z). The map is split when every
/// P_i with i >= 1 is constant, i.e. g = p(z) + q(t).
template <class S>
class SkewProduct {
public:
    SkewProduct(S mu, std::vector<Polynomial<S>> parts) : mu_(std::move(mu)), parts_(std::move(parts)) {
        if (parts_.empty()) parts_.emplace_back();
        while (parts_.size() > 1 && parts_.back().is_zero()) parts_.pop_back();
        if (!(ScalarTraits<S>::magnitude(mu_) > 0.0 && ScalarTraits<S>::magnitude(mu_) < 1.0)) {
            throw Error(ErrorKind::Usage, "horizontal multiplier must satisfy 0 < |mu| < 1");
        }
    }

    /// Split map (mu t, p(z) + q(t)); q(0) is folded into p.
    static SkewProduct split(S mu, const Polynomial<S>& p, const Polynomial<S>& q) {
        const S zero = ScalarTraits<S>::from_int(0, mu);
        std::vector<Polynomial<S>> parts{p + Polynomial<S>::constant(q.coeff(0, zero))};
        for (std::size_t i = 1; i < q.coeffs().size(); ++i) parts.push_back(Polynomial<S>::constant(q.coeffs()[i]));
        return SkewProduct(std::move(mu), std::move(parts));
    }

    /// g = lambda z + a t.
    static SkewProduct linear(const S& lambda, S mu, const S& a) {
        const S zero = ScalarTraits<S>::from_int(0, mu);
        return SkewProduct(std::move(mu), {Polynomial<S>(std::vector<S>{zero, lambda}), Polynomial<S>::constant(a)});
    }

    const S& mu() const noexcept { return mu_; }
    const std::vector<Polynomial<S>>& parts() const noexcept { return parts_; }
    const Polynomial<S>& p() const noexcept { return parts_[0]; }

    /// Coefficient c_{i,j} of t^i z^j.
    S coeff(std::size_t i, std::size_t j) const {
        const S zero = ScalarTraits<S>::from_int(0, mu_);
        return i < parts_.size() ? parts_[i].coeff(j, zero) : zero;
    }

    bool is_split() const {
        for (std::size_t i = 1; i < parts_.size(); ++i) {
            if (parts_[i].degree() > 0) return false;
        }
        return true;
    }

    /// q(t) with q(0) = 0; split maps only.
    Polynomial<S> q() const {
        require_split("q");
        const S zero = ScalarTraits<S>::from_int(0, mu_);
        std::vector<S> out{zero};
        for (std::size_t i = 1; i < parts_.size(); ++i) out.push_back(parts_[i].coeff(0, zero));
        return Polynomial<S>(std::move(out));
    }

    void require_split(const std::string& what) const {
        if (!is_split()) throw Error(ErrorKind::NotSplit, what + " needs a map of the form p(z) + q(t)");
    }

    /// Multiplier of p at z = 0.
    S lambda() const { return coeff(0, 1); }

    template <class X>
    X g(const X& t, const X& z, const X& zero) const {
        X acc = zero;
        for (std::size_t i = parts_.size(); i-- > 0;) acc = acc * t + parts_[i].eval(z, zero);
        return acc;
    }

    template <class X>
    X g_z(const X& t, const X& z, const X& zero) const {
        X acc = zero;
        for (std::size_t i = parts_.size(); i-- > 0;) acc = acc * t + parts_[i].derivative().eval(z, zero);
        return acc;
    }

    template <class X>
    X g_t(const X& t, const X& z, const X& zero) const {
        X acc = zero;
        for (std::size_t i = parts_.size(); i-- > 1;) {
            acc = acc * t + parts_[i].eval(z, zero) * ScalarTraits<X>::from_int(static_cast<long>(i), zero);
        }
        return acc;
    }

    template <class T>
    SkewProduct<T> map(const std::function<T(const S&)>& fn) const {
        std::vector<Polynomial<T>> parts;
        for (const auto& part : parts_) parts.push_back(part.template map<T>(fn));
        return SkewProduct<T>(fn(mu_), std::move(parts));
    }

    SkewProduct<BigComplex> to_numeric(Precision bits) const {
        return map<BigComplex>([bits](const S& c) { return ScalarTraits<S>::to_big_complex(c, bits); });
    }

    std::string to_string(const std::function<std::string(const S&)>& fmt) const {
        std::string out = "F(t,z) = ((" + fmt(mu_) + ")*t, ";
        bool first = true;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (parts_[i].is_zero()) continue;
            if (!first) out += " + ";
            first = false;
            out += "[" + parts_[i].to_string(fmt) + "]";
            if (i >= 1) out += "*t";
            if (i >= 2) out += "^" + std::to_string(i);
        }
        return out + ")";
    }

private:
    S mu_;
    std::vector<Polynomial<S>> parts_;
};

/// F(t, z) = (t/(2d), 2(z+1)^d - 2 + a t + b t^2).
template <class S>
SkewProduct<S> example_family(int d, const S& a, const S& b) {
    Polynomial<S> shift(std::vector<S>{S(1), S(1)});
    Polynomial<S> p = Polynomial<S>::constant(S(1));
    for (int i = 0; i < d; ++i) p = p * shift;
    p = S(2) * p - Polynomial<S>::constant(S(2));
    return SkewProduct<S>::split(S(1) / S(2L * d), p, Polynomial<S>(std::vector<S>{S(0), a, b}));
}

/// (mu t, g(t, z)).
template <class S>
Point<S> eval_map(const SkewProduct<S>& F, const Point<S>& point) {
    const S zero = ScalarTraits<S>::from_int(0, point.z);
    return {F.mu() * point.t, F.g(point.t, point.z, zero)};
}

/// Second-order expansion lambda z + a t + gamma z^2 + tau z t + b t^2 of g at the origin.
template <class S>
struct ResonantForm {
    S lambda;
    S a;
    S gamma;
    S tau;
    S b;
};

template <class S>
ResonantForm<S> resonant_form(const SkewProduct<S>& F) {
    if (!ScalarTraits<S>::is_zero(F.coeff(0, 0))) {
        throw Error(ErrorKind::NotNormalized, "g(0,0) must vanish (move the fixed point to the origin)");
    }
    return {F.coeff(0, 1), F.coeff(1, 0), F.coeff(0, 2), F.coeff(1, 1), F.coeff(2, 0)};
}

}  // namespace skewfatou
