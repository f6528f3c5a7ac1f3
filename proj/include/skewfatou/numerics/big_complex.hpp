#pragma once

#include <algorithm>
#include <complex>
#include <ostream>
#include <string>

#include "skewfatou/numerics/big_float.hpp"

namespace skewfatou {

/// Complex number over BigFloat. Precision is the smaller of the two parts.
class BigComplex {
public:
    explicit BigComplex(Precision bits = kMinPrecisionBits) : re_(bits), im_(bits) {}
    BigComplex(BigFloat re, BigFloat im) : re_(std::move(re)), im_(std::move(im)) {}
    explicit BigComplex(const BigFloat& re) : re_(re), im_(re.precision()) {}
    BigComplex(long re, Precision bits) : re_(re, bits), im_(bits) {}
    BigComplex(std::complex<double> z, Precision bits) : re_(z.real(), bits), im_(z.imag(), bits) {}

    const BigFloat& real() const noexcept { return re_; }
    const BigFloat& imag() const noexcept { return im_; }
    BigFloat& real() noexcept { return re_; }
    BigFloat& imag() noexcept { return im_; }

    Precision precision() const noexcept { return std::min(re_.precision(), im_.precision()); }

    BigComplex with_precision(Precision bits) const {
        return {re_.with_precision(bits), im_.with_precision(bits)};
    }

    bool is_zero() const noexcept { return re_.is_zero() && im_.is_zero(); }
    bool is_finite() const noexcept { return re_.is_finite() && im_.is_finite(); }

    std::complex<double> to_complex() const { return {re_.to_double(), im_.to_double()}; }

    friend BigComplex operator-(const BigComplex& a) { return {-a.re_, -a.im_}; }
    friend BigComplex operator+(const BigComplex& a, const BigComplex& b) {
        return {a.re_ + b.re_, a.im_ + b.im_};
    }
    friend BigComplex operator-(const BigComplex& a, const BigComplex& b) {
        return {a.re_ - b.re_, a.im_ - b.im_};
    }
    friend BigComplex operator*(const BigComplex& a, const BigComplex& b) {
        return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
    }
    friend BigComplex operator*(const BigComplex& a, const BigFloat& s) { return {a.re_ * s, a.im_ * s}; }
    friend BigComplex operator*(const BigFloat& s, const BigComplex& a) { return a * s; }
    friend BigComplex operator*(const BigComplex& a, long k) { return {a.re_ * k, a.im_ * k}; }
    friend BigComplex operator*(long k, const BigComplex& a) { return a * k; }
    friend BigComplex operator/(const BigComplex& a, const BigComplex& b) {
        const BigFloat den = b.re_ * b.re_ + b.im_ * b.im_;
        return {(a.re_ * b.re_ + a.im_ * b.im_) / den, (a.im_ * b.re_ - a.re_ * b.im_) / den};
    }
    friend BigComplex operator/(const BigComplex& a, const BigFloat& s) { return {a.re_ / s, a.im_ / s}; }

    BigComplex& operator+=(const BigComplex& b) {
        re_ += b.re_;
        im_ += b.im_;
        return *this;
    }
    BigComplex& operator-=(const BigComplex& b) {
        re_ -= b.re_;
        im_ -= b.im_;
        return *this;
    }
    BigComplex& operator*=(const BigComplex& b) { return *this = *this * b; }
    BigComplex& operator/=(const BigComplex& b) { return *this = *this / b; }

    friend bool operator==(const BigComplex& a, const BigComplex& b) noexcept {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }

    friend BigComplex conj(const BigComplex& a) { return {a.re_, -a.im_}; }
    friend BigFloat norm(const BigComplex& a) { return a.re_ * a.re_ + a.im_ * a.im_; }
    friend BigFloat abs(const BigComplex& a) { return hypot(a.re_, a.im_); }
    friend BigFloat arg(const BigComplex& a) { return atan2(a.im_, a.re_); }

    /// log2|z| as a double, valid far beyond the double exponent range.
    double log2_abs() const {
        if (is_zero()) return -std::numeric_limits<double>::infinity();
        return abs(*this).log2_abs();
    }

    friend BigComplex ldexp(const BigComplex& a, long k) { return {ldexp(a.re_, k), ldexp(a.im_, k)}; }

    static BigComplex polar(const BigFloat& r, const BigFloat& theta) {
        return {r * cos(theta), r * sin(theta)};
    }

    /// a^k for k >= 0 by repeated squaring.
    friend BigComplex pow(BigComplex a, unsigned long k) {
        BigComplex out(1, a.precision());
        while (k > 0) {
            if (k & 1UL) out = out * a;
            k >>= 1U;
            if (k > 0) a = a * a;
        }
        return out;
    }

    /// Principal k-th root.
    friend BigComplex principal_root(const BigComplex& a, unsigned long k) {
        if (a.is_zero()) return a;
        const BigFloat r = root(abs(a), k);
        const BigFloat theta = arg(a) / BigFloat(static_cast<long>(k), a.precision());
        return polar(r, theta);
    }

    std::string to_string(std::size_t digits = 0) const {
        return re_.to_string(digits) + (im_.sign() < 0 ? "" : "+") + im_.to_string(digits) + "i";
    }

    friend std::ostream& operator<<(std::ostream& os, const BigComplex& z) {
        return os << z.re_ << (z.im_.sign() < 0 ? "" : "+") << z.im_ << "i";
    }

private:
    BigFloat re_;
    BigFloat im_;
};

}  // namespace skewfatou
