#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "skewfatou/error.hpp"
#include "skewfatou/numerics/jet.hpp"
#include "skewfatou/numerics/scalar.hpp"

namespace skewfatou {

/// Univariate polynomial sum_k coeffs[k] z^k.
///
/// Trailing zero coefficients are removed (exactly-zero test), so the leading
/// coefficient is non-zero unless the polynomial is zero.
template <class S>
class Polynomial {
public:
    Polynomial() = default;

    explicit Polynomial(std::vector<S> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

    static Polynomial constant(const S& c) { return Polynomial(std::vector<S>{c}); }

    /// The monomial z (needs a prototype scalar for the precision of inexact types).
    static Polynomial identity(const S& like) {
        return Polynomial(std::vector<S>{ScalarTraits<S>::from_int(0, like), ScalarTraits<S>::from_int(1, like)});
    }

    bool is_zero() const noexcept { return coeffs_.empty(); }
    /// Degree; the zero polynomial reports 0.
    std::size_t degree() const noexcept { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }
    std::span<const S> coeffs() const noexcept { return coeffs_; }

    /// Coefficient of z^k; zero past the degree (needs `like` for inexact scalars).
    S coeff(std::size_t k, const S& like) const {
        return k < coeffs_.size() ? coeffs_[k] : ScalarTraits<S>::from_int(0, like);
    }
    S coeff(std::size_t k) const {
        if (k < coeffs_.size()) return coeffs_[k];
        if (coeffs_.empty()) {
            if constexpr (ScalarTraits<S>::exact) return S(0);
            throw Error(ErrorKind::Usage, "coefficient of an empty inexact polynomial");
        }
        return ScalarTraits<S>::from_int(0, coeffs_.front());
    }

    /// Horner evaluation at any ring element X that S multiplies into.
    template <class X>
    X eval(const X& x, const X& zero) const {
        X acc = zero;
        for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * x + lift(coeffs_[k], zero);
        return acc;
    }

    S operator()(const S& x) const {
        if (coeffs_.empty()) return ScalarTraits<S>::from_int(0, x);
        S acc = coeffs_.back();
        for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = acc * x + coeffs_[k];
        return acc;
    }

    Polynomial derivative() const {
        if (coeffs_.size() <= 1) return Polynomial();
        std::vector<S> out;
        out.reserve(coeffs_.size() - 1);
        for (std::size_t k = 1; k < coeffs_.size(); ++k) {
            out.push_back(coeffs_[k] * ScalarTraits<S>::from_int(static_cast<long>(k), coeffs_[k]));
        }
        return Polynomial(std::move(out));
    }

    /// Coefficients of p(c + d) as a polynomial in d (Taylor coefficients at c).
    Polynomial taylor_shift(const S& c) const {
        std::vector<S> a = coeffs_;
        const std::size_t n = a.size();
        // Repeated synthetic division by (z - c).
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t k = n - 1; k-- > i;) a[k] += c * a[k + 1];
        }
        return Polynomial(std::move(a));
    }

    template <class T>
    Polynomial<T> map(const std::function<T(const S&)>& fn) const {
        std::vector<T> out;
        out.reserve(coeffs_.size());
        for (const S& c : coeffs_) out.push_back(fn(c));
        return Polynomial<T>(std::move(out));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        const auto& big = a.coeffs_.size() >= b.coeffs_.size() ? a.coeffs_ : b.coeffs_;
        const auto& small = a.coeffs_.size() >= b.coeffs_.size() ? b.coeffs_ : a.coeffs_;
        std::vector<S> out = big;
        for (std::size_t k = 0; k < small.size(); ++k) out[k] += small[k];
        return Polynomial(std::move(out));
    }
    friend Polynomial operator-(const Polynomial& a) {
        std::vector<S> out;
        for (const S& c : a.coeffs_) out.push_back(-c);
        return Polynomial(std::move(out));
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return Polynomial();
        std::vector<S> out(a.coeffs_.size() + b.coeffs_.size() - 1,
                           ScalarTraits<S>::from_int(0, a.coeffs_.front()));
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
        }
        return Polynomial(std::move(out));
    }
    friend Polynomial operator*(const S& s, const Polynomial& a) {
        std::vector<S> out;
        for (const S& c : a.coeffs_) out.push_back(s * c);
        return Polynomial(std::move(out));
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

    /// Quotient and remainder; exact scalars only.
    friend std::pair<Polynomial, Polynomial> divmod(const Polynomial& num, const Polynomial& den) {
        static_assert(ScalarTraits<S>::exact, "polynomial division needs an exact scalar");
        if (den.is_zero()) throw Error(ErrorKind::Usage, "polynomial division by zero");
        std::vector<S> r = num.coeffs_;
        if (r.size() < den.coeffs_.size()) return {Polynomial(), num};
        std::vector<S> q(r.size() - den.coeffs_.size() + 1, S(0));
        const S& lead = den.coeffs_.back();
        for (std::size_t k = q.size(); k-- > 0;) {
            const S f = r[k + den.coeffs_.size() - 1] / lead;
            q[k] = f;
            for (std::size_t j = 0; j < den.coeffs_.size(); ++j) r[k + j] -= f * den.coeffs_[j];
        }
        return {Polynomial(std::move(q)), Polynomial(std::move(r))};
    }

    /// Monic greatest common divisor; exact scalars only.
    friend Polynomial gcd(Polynomial a, Polynomial b) {
        while (!b.is_zero()) {
            auto r = divmod(a, b).second;
            a = std::move(b);
            b = std::move(r);
        }
        if (a.is_zero()) return a;
        return (S(1) / a.coeffs_.back()) * a;
    }

    std::string to_string(const std::function<std::string(const S&)>& fmt, const std::string& var = "z") const {
        if (coeffs_.empty()) return "0";
        std::string out;
        for (std::size_t k = coeffs_.size(); k-- > 0;) {
            if (ScalarTraits<S>::is_zero(coeffs_[k])) continue;
            if (!out.empty()) out += " + ";
            out += "(" + fmt(coeffs_[k]) + ")";
            if (k >= 1) out += "*" + var;
            if (k >= 2) out += "^" + std::to_string(k);
        }
        return out;
    }

private:
    template <class X>
    static X lift(const S& c, const X& zero) {
        if constexpr (std::is_same_v<X, S>) {
            (void)zero;
            return c;
        } else {
            return zero + c;
        }
    }

    void trim() {
        while (!coeffs_.empty() && ScalarTraits<S>::is_zero(coeffs_.back())) coeffs_.pop_back();
    }

    std::vector<S> coeffs_;
};

/// A jet plus a scalar shifts its constant term.
template <class S>
Jet<S> operator+(const Jet<S>& a, const S& c) {
    std::vector<S> out(a.coeffs().begin(), a.coeffs().end());
    out[0] += c;
    return Jet<S>(std::move(out));
}

/// p(a) truncated at a.order(), evaluated by Horner's rule on jets.
template <class S>
Jet<S> jet_compose_poly(const Polynomial<S>& p, const Jet<S>& a) {
    const Jet<S> zero = Jet<S>::constant(a.order(), ScalarTraits<S>::from_int(0, a[0]));
    return p.eval(a, zero);
}

}  // namespace skewfatou
