#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "skewfatou/error.hpp"
#include "skewfatou/numerics/scalar.hpp"

namespace skewfatou {

/// Dense truncated power series c_0 + c_1 w + ... + c_order w^order.
template <class S>
class Jet {
public:
    /// Constant jet `value` of the given order.
    static Jet constant(std::size_t order, const S& value) {
        const S zero = ScalarTraits<S>::from_int(0, value);
        std::vector<S> coeffs(order + 1, zero);
        coeffs[0] = value;
        return Jet(std::move(coeffs));
    }

    /// value + slope * w.
    static Jet affine(std::size_t order, const S& value, const S& slope) {
        Jet out = constant(order, value);
        if (order >= 1) out.coeffs_[1] = slope;
        return out;
    }

    explicit Jet(std::vector<S> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) throw Error(ErrorKind::Usage, "a jet needs at least one coefficient");
    }

    std::size_t order() const noexcept { return coeffs_.size() - 1; }
    const S& operator[](std::size_t k) const { return coeffs_.at(k); }
    std::span<const S> coeffs() const noexcept { return coeffs_; }

    friend Jet operator+(const Jet& a, const Jet& b) {
        check_orders(a, b);
        std::vector<S> out;
        out.reserve(a.coeffs_.size());
        for (std::size_t k = 0; k < a.coeffs_.size(); ++k) out.push_back(a.coeffs_[k] + b.coeffs_[k]);
        return Jet(std::move(out));
    }

    friend Jet operator-(const Jet& a, const Jet& b) {
        check_orders(a, b);
        std::vector<S> out;
        out.reserve(a.coeffs_.size());
        for (std::size_t k = 0; k < a.coeffs_.size(); ++k) out.push_back(a.coeffs_[k] - b.coeffs_[k]);
        return Jet(std::move(out));
    }

    friend Jet operator*(const S& s, const Jet& a) {
        std::vector<S> out;
        out.reserve(a.coeffs_.size());
        for (const S& c : a.coeffs_) out.push_back(s * c);
        return Jet(std::move(out));
    }

    /// Cauchy product truncated at the common order.
    friend Jet operator*(const Jet& a, const Jet& b) {
        check_orders(a, b);
        const std::size_t n = a.coeffs_.size();
        const S zero = ScalarTraits<S>::from_int(0, a.coeffs_[0]);
        std::vector<S> out(n, zero);
        for (std::size_t i = 0; i < n; ++i) {
            if (ScalarTraits<S>::is_zero(a.coeffs_[i])) continue;
            for (std::size_t j = 0; i + j < n; ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
        }
        return Jet(std::move(out));
    }

    Jet& operator+=(const Jet& b) { return *this = *this + b; }
    Jet& operator*=(const Jet& b) { return *this = *this * b; }

    friend bool operator==(const Jet& a, const Jet& b) { return a.coeffs_ == b.coeffs_; }

private:
    static void check_orders(const Jet& a, const Jet& b) {
        if (a.coeffs_.size() != b.coeffs_.size()) {
            throw Error(ErrorKind::Usage, "jet order mismatch: " + std::to_string(a.order()) + " vs " +
                                              std::to_string(b.order()));
        }
    }

    std::vector<S> coeffs_;
};

template <class S>
Jet<S> jet_mul(const Jet<S>& a, const Jet<S>& b) {
    return a * b;
}

}  // namespace skewfatou
