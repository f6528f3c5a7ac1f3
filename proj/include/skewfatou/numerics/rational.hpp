#pragma once

#include <gmpxx.h>

#include <cctype>
#include <ostream>
#include <string>
#include <utility>

#include "skewfatou/error.hpp"
#include "skewfatou/numerics/big_complex.hpp"

namespace skewfatou {

/// Exact fraction over big integers, kept in lowest terms with a positive denominator.
class ExactRational {
public:
    ExactRational() = default;
    ExactRational(long v) : q_(v) {}  // NOLINT(google-explicit-constructor): integer literals read naturally
    ExactRational(long num, long den) : ExactRational(mpz_class(num), mpz_class(den)) {}
    ExactRational(const mpz_class& num, const mpz_class& den) {
        if (den == 0) throw Error(ErrorKind::Usage, "zero denominator");
        q_ = mpq_class(num, den);
        q_.canonicalize();
    }
    explicit ExactRational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

    /// Accepts "p", "p/q", and decimal literals such as "-0.125" or "3.5e-2".
    static ExactRational parse(const std::string& raw) {
        std::string text;
        for (char c : raw) {
            if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
        }
        if (text.empty()) throw Error(ErrorKind::Parse, "empty number");
        if (const auto slash = text.find('/'); slash != std::string::npos) {
            const ExactRational num = parse(text.substr(0, slash));
            const ExactRational den = parse(text.substr(slash + 1));
            if (den.is_zero()) throw Error(ErrorKind::Parse, "zero denominator in '" + raw + "'");
            return num / den;
        }
        std::size_t pos = 0;
        bool negative = false;
        if (text[pos] == '+' || text[pos] == '-') {
            negative = text[pos] == '-';
            ++pos;
        }
        std::string digits;
        long scale = 0;
        bool seen_digit = false;
        bool seen_point = false;
        for (; pos < text.size(); ++pos) {
            const char c = text[pos];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                digits.push_back(c);
                seen_digit = true;
                if (seen_point) ++scale;
            } else if (c == '.' && !seen_point) {
                seen_point = true;
            } else {
                break;
            }
        }
        if (!seen_digit) throw Error(ErrorKind::Parse, "not a number: '" + raw + "'");
        long exponent = 0;
        if (pos < text.size()) {
            if (text[pos] != 'e' && text[pos] != 'E') throw Error(ErrorKind::Parse, "not a number: '" + raw + "'");
            try {
                std::size_t used = 0;
                exponent = std::stol(text.substr(pos + 1), &used);
                if (pos + 1 + used != text.size()) throw Error(ErrorKind::Parse, "trailing characters in '" + raw + "'");
            } catch (const std::logic_error&) {
                throw Error(ErrorKind::Parse, "bad exponent in '" + raw + "'");
            }
        }
        mpz_class num(digits, 10);
        if (negative) num = -num;
        const long shift = exponent - scale;
        mpz_class ten_pow;
        mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
        return shift >= 0 ? ExactRational(num * ten_pow, 1) : ExactRational(num, ten_pow);
    }

    mpz_class numerator() const { return q_.get_num(); }
    mpz_class denominator() const { return q_.get_den(); }
    const mpq_class& get() const noexcept { return q_; }

    bool is_zero() const { return q_ == 0; }
    int sign() const { return sgn(q_); }

    BigFloat to_big_float(Precision bits) const { return {q_, bits}; }
    double to_double() const { return q_.get_d(); }

    /// "p/q", or "p" for integers.
    std::string to_string() const {
        if (q_.get_den() == 1) return q_.get_num().get_str();
        return q_.get_num().get_str() + "/" + q_.get_den().get_str();
    }

    friend ExactRational operator-(const ExactRational& a) { return ExactRational(mpq_class(-a.q_)); }
    friend ExactRational operator+(const ExactRational& a, const ExactRational& b) {
        return ExactRational(mpq_class(a.q_ + b.q_));
    }
    friend ExactRational operator-(const ExactRational& a, const ExactRational& b) {
        return ExactRational(mpq_class(a.q_ - b.q_));
    }
    friend ExactRational operator*(const ExactRational& a, const ExactRational& b) {
        return ExactRational(mpq_class(a.q_ * b.q_));
    }
    friend ExactRational operator/(const ExactRational& a, const ExactRational& b) {
        if (b.is_zero()) throw Error(ErrorKind::Usage, "division by zero rational");
        return ExactRational(mpq_class(a.q_ / b.q_));
    }
    ExactRational& operator+=(const ExactRational& b) { return *this = *this + b; }
    ExactRational& operator-=(const ExactRational& b) { return *this = *this - b; }
    ExactRational& operator*=(const ExactRational& b) { return *this = *this * b; }
    ExactRational& operator/=(const ExactRational& b) { return *this = *this / b; }

    friend bool operator==(const ExactRational& a, const ExactRational& b) { return a.q_ == b.q_; }
    friend bool operator<(const ExactRational& a, const ExactRational& b) { return a.q_ < b.q_; }
    friend bool operator>(const ExactRational& a, const ExactRational& b) { return a.q_ > b.q_; }

    friend ExactRational abs(const ExactRational& a) { return ExactRational(mpq_class(abs(a.q_))); }

    friend std::ostream& operator<<(std::ostream& os, const ExactRational& a) { return os << a.to_string(); }

private:
    mpq_class q_{0};
};

/// Gaussian rational re + i*im; the exact scalar of the rational path.
class GaussianRational {
public:
    GaussianRational() = default;
    GaussianRational(long v) : re_(v) {}  // NOLINT(google-explicit-constructor)
    GaussianRational(ExactRational re) : re_(std::move(re)) {}  // NOLINT(google-explicit-constructor)
    GaussianRational(ExactRational re, ExactRational im) : re_(std::move(re)), im_(std::move(im)) {}

    static GaussianRational i() { return {ExactRational(0), ExactRational(1)}; }

    const ExactRational& real() const noexcept { return re_; }
    const ExactRational& imag() const noexcept { return im_; }

    bool is_zero() const { return re_.is_zero() && im_.is_zero(); }
    bool is_real() const { return im_.is_zero(); }

    BigComplex to_big_complex(Precision bits) const { return {re_.to_big_float(bits), im_.to_big_float(bits)}; }
    std::complex<double> to_complex() const { return {re_.to_double(), im_.to_double()}; }

    /// "p/q" for real values, otherwise "re+im*i".
    std::string to_string() const {
        if (im_.is_zero()) return re_.to_string();
        std::string out = re_.is_zero() ? "" : re_.to_string();
        if (!re_.is_zero() && im_.sign() > 0) out += "+";
        return out + im_.to_string() + "*i";
    }

    friend GaussianRational operator-(const GaussianRational& a) { return {-a.re_, -a.im_}; }
    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
        return {a.re_ + b.re_, a.im_ + b.im_};
    }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
        return {a.re_ - b.re_, a.im_ - b.im_};
    }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
        if (a.im_.is_zero() && b.im_.is_zero()) return {a.re_ * b.re_};
        return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
    }
    friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
        if (b.is_zero()) throw Error(ErrorKind::Usage, "division by zero");
        if (b.im_.is_zero()) return {a.re_ / b.re_, a.im_ / b.re_};
        const ExactRational den = b.re_ * b.re_ + b.im_ * b.im_;
        return {(a.re_ * b.re_ + a.im_ * b.im_) / den, (a.im_ * b.re_ - a.re_ * b.im_) / den};
    }
    GaussianRational& operator+=(const GaussianRational& b) { return *this = *this + b; }
    GaussianRational& operator-=(const GaussianRational& b) { return *this = *this - b; }
    GaussianRational& operator*=(const GaussianRational& b) { return *this = *this * b; }
    GaussianRational& operator/=(const GaussianRational& b) { return *this = *this / b; }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }

    friend std::ostream& operator<<(std::ostream& os, const GaussianRational& a) { return os << a.to_string(); }

private:
    ExactRational re_;
    ExactRational im_;
};

}  // namespace skewfatou
