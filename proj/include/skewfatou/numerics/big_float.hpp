#pragma once

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <gmpxx.h>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <utility>

#include "skewfatou/error.hpp"

namespace skewfatou {

using Precision = mpfr_prec_t;

inline constexpr Precision kMinPrecisionBits = 64;

/// RAII handle around an mpfr_t with an explicit precision in bits.
///
/// Binary operations round to the smaller of the two operand precisions, so a
/// result never claims more bits than its least precise input. All rounding is
/// to nearest.
class BigFloat {
public:
    explicit BigFloat(Precision bits = kMinPrecisionBits) {
        mpfr_init2(value_, clamp(bits));
        mpfr_set_zero(value_, 1);
    }

    BigFloat(long v, Precision bits) {
        mpfr_init2(value_, clamp(bits));
        mpfr_set_si(value_, v, MPFR_RNDN);
    }

    BigFloat(double v, Precision bits) {
        mpfr_init2(value_, clamp(bits));
        mpfr_set_d(value_, v, MPFR_RNDN);
    }

    BigFloat(const mpq_class& q, Precision bits) {
        mpfr_init2(value_, clamp(bits));
        mpfr_set_q(value_, q.get_mpq_t(), MPFR_RNDN);
    }

    BigFloat(const mpz_class& z, Precision bits) {
        mpfr_init2(value_, clamp(bits));
        mpfr_set_z(value_, z.get_mpz_t(), MPFR_RNDN);
    }

    /// Parses a decimal (or, with base 16, an MPFR hex) string.
    static BigFloat parse(const std::string& text, Precision bits, int base = 10) {
        BigFloat out(bits);
        if (mpfr_set_str(out.value_, text.c_str(), base, MPFR_RNDN) != 0) {
            throw Error(ErrorKind::Parse, "not a number: '" + text + "'");
        }
        return out;
    }

    BigFloat(const BigFloat& other) {
        mpfr_init2(value_, mpfr_get_prec(other.value_));
        mpfr_set(value_, other.value_, MPFR_RNDN);
    }

    BigFloat(BigFloat&& other) noexcept {
        mpfr_init2(value_, MPFR_PREC_MIN);
        mpfr_swap(value_, other.value_);
    }

    /// Copy-assignment adopts the source precision (value semantics).
    BigFloat& operator=(const BigFloat& other) {
        if (this != &other) {
            mpfr_set_prec(value_, mpfr_get_prec(other.value_));
            mpfr_set(value_, other.value_, MPFR_RNDN);
        }
        return *this;
    }

    BigFloat& operator=(BigFloat&& other) noexcept {
        mpfr_swap(value_, other.value_);
        return *this;
    }

    ~BigFloat() { mpfr_clear(value_); }

    Precision precision() const noexcept { return mpfr_get_prec(value_); }

    /// Same value rounded to `bits`.
    BigFloat with_precision(Precision bits) const {
        BigFloat out(bits);
        mpfr_set(out.value_, value_, MPFR_RNDN);
        return out;
    }

    mpfr_srcptr get() const noexcept { return value_; }
    mpfr_ptr get() noexcept { return value_; }

    bool is_zero() const noexcept { return mpfr_zero_p(value_) != 0; }
    bool is_finite() const noexcept { return mpfr_number_p(value_) != 0; }
    bool is_nan() const noexcept { return mpfr_nan_p(value_) != 0; }
    int sign() const noexcept { return mpfr_sgn(value_); }

    double to_double() const noexcept { return mpfr_get_d(value_, MPFR_RNDN); }

    /// log2|x| as a double; -inf for zero. Safe far outside the double range.
    double log2_abs() const {
        if (is_zero()) return -std::numeric_limits<double>::infinity();
        long exp = 0;
        const double mant = mpfr_get_d_2exp(&exp, value_, MPFR_RNDN);
        return std::log2(std::fabs(mant)) + static_cast<double>(exp);
    }

    /// Decimal rendering with `digits` significant digits (0 = enough to round-trip).
    std::string to_string(std::size_t digits = 0) const { return format(10, digits); }

    /// Exact base-16 rendering; parse(text, bits, 16) restores the value bit-exactly.
    std::string to_hex() const { return format(16, 0); }

    friend BigFloat operator-(const BigFloat& a) {
        BigFloat out(a.precision());
        mpfr_neg(out.value_, a.value_, MPFR_RNDN);
        return out;
    }

#define SKEWFATOU_BIGFLOAT_BINOP(op, fn)                                   \
    friend BigFloat operator op(const BigFloat& a, const BigFloat& b) {    \
        BigFloat out(std::min(a.precision(), b.precision()));              \
        fn(out.value_, a.value_, b.value_, MPFR_RNDN);                     \
        return out;                                                        \
    }                                                                      \
    BigFloat& operator op##=(const BigFloat& b) {                          \
        if (b.precision() < precision()) {                                 \
            *this = *this op b;                                            \
        } else {                                                           \
            fn(value_, value_, b.value_, MPFR_RNDN);                       \
        }                                                                  \
        return *this;                                                      \
    }

    SKEWFATOU_BIGFLOAT_BINOP(+, mpfr_add)
    SKEWFATOU_BIGFLOAT_BINOP(-, mpfr_sub)
    SKEWFATOU_BIGFLOAT_BINOP(*, mpfr_mul)
    SKEWFATOU_BIGFLOAT_BINOP(/, mpfr_div)
#undef SKEWFATOU_BIGFLOAT_BINOP

    friend BigFloat operator*(const BigFloat& a, long k) {
        BigFloat out(a.precision());
        mpfr_mul_si(out.value_, a.value_, k, MPFR_RNDN);
        return out;
    }
    friend BigFloat operator*(long k, const BigFloat& a) { return a * k; }

    friend bool operator==(const BigFloat& a, const BigFloat& b) noexcept {
        return mpfr_equal_p(a.value_, b.value_) != 0;
    }
    friend std::partial_ordering operator<=>(const BigFloat& a, const BigFloat& b) noexcept {
        if (mpfr_unordered_p(a.value_, b.value_)) return std::partial_ordering::unordered;
        const int c = mpfr_cmp(a.value_, b.value_);
        if (c < 0) return std::partial_ordering::less;
        if (c > 0) return std::partial_ordering::greater;
        return std::partial_ordering::equivalent;
    }

    friend BigFloat abs(const BigFloat& a) {
        BigFloat out(a.precision());
        mpfr_abs(out.value_, a.value_, MPFR_RNDN);
        return out;
    }
    friend BigFloat sqrt(const BigFloat& a) {
        BigFloat out(a.precision());
        mpfr_sqrt(out.value_, a.value_, MPFR_RNDN);
        return out;
    }
    friend BigFloat log(const BigFloat& a) {
        BigFloat out(a.precision());
        mpfr_log(out.value_, a.value_, MPFR_RNDN);
        return out;
    }
    friend BigFloat exp(const BigFloat& a) {
        BigFloat out(a.precision());
        mpfr_exp(out.value_, a.value_, MPFR_RNDN);
        return out;
    }
    friend BigFloat cos(const BigFloat& a) {
        BigFloat out(a.precision());
        mpfr_cos(out.value_, a.value_, MPFR_RNDN);
        return out;
    }
    friend BigFloat sin(const BigFloat& a) {
        BigFloat out(a.precision());
        mpfr_sin(out.value_, a.value_, MPFR_RNDN);
        return out;
    }
    friend BigFloat atan2(const BigFloat& y, const BigFloat& x) {
        BigFloat out(std::min(y.precision(), x.precision()));
        mpfr_atan2(out.value_, y.value_, x.value_, MPFR_RNDN);
        return out;
    }
    friend BigFloat hypot(const BigFloat& x, const BigFloat& y) {
        BigFloat out(std::min(y.precision(), x.precision()));
        mpfr_hypot(out.value_, x.value_, y.value_, MPFR_RNDN);
        return out;
    }
    /// x * 2^k, exact.
    friend BigFloat ldexp(const BigFloat& a, long k) {
        BigFloat out(a.precision());
        mpfr_mul_2si(out.value_, a.value_, k, MPFR_RNDN);
        return out;
    }
    /// x^(1/k) for x >= 0.
    friend BigFloat root(const BigFloat& a, unsigned long k) {
        BigFloat out(a.precision());
        mpfr_rootn_ui(out.value_, a.value_, k, MPFR_RNDN);
        return out;
    }
    friend BigFloat pow(const BigFloat& a, const BigFloat& e) {
        BigFloat out(std::min(a.precision(), e.precision()));
        mpfr_pow(out.value_, a.value_, e.value_, MPFR_RNDN);
        return out;
    }

    static BigFloat pi(Precision bits) {
        BigFloat out(bits);
        mpfr_const_pi(out.value_, MPFR_RNDN);
        return out;
    }

    friend std::ostream& operator<<(std::ostream& os, const BigFloat& x) {
        return os << x.to_string(std::min<std::size_t>(40, static_cast<std::size_t>(x.precision() / 3)));
    }

private:
    static Precision clamp(Precision bits) { return std::max<Precision>(bits, MPFR_PREC_MIN); }

    std::string format(int base, std::size_t digits) const {
        if (mpfr_nan_p(value_)) return "nan";
        if (mpfr_inf_p(value_)) return mpfr_sgn(value_) > 0 ? "inf" : "-inf";
        if (mpfr_zero_p(value_)) return "0";
        mpfr_exp_t exp = 0;
        std::unique_ptr<char, void (*)(char*)> raw(
            mpfr_get_str(nullptr, &exp, base, digits, value_, MPFR_RNDN), mpfr_free_str);
        std::string mant(raw.get());
        std::string sign;
        if (!mant.empty() && mant.front() == '-') {
            sign = "-";
            mant.erase(0, 1);
        }
        // Normalize to d.ddd...@(exp-1) in the requested base; '@' works for every base in mpfr_set_str.
        while (mant.size() > 1 && mant.back() == '0') mant.pop_back();
        std::string out = sign + mant.substr(0, 1);
        if (mant.size() > 1) out += "." + mant.substr(1);
        const long e = static_cast<long>(exp) - 1;
        if (e != 0) out += (base == 10 ? "e" : "@") + std::to_string(e);
        return out;
    }

    mpfr_t value_;
};

}  // namespace skewfatou
