#pragma once

#include <cmath>
#include <complex>
#include <cstddef>

#include "skewfatou/numerics/big_complex.hpp"
#include "skewfatou/numerics/rational.hpp"

namespace skewfatou {

/// Uniform surface over the scalar types the templates run on.
///
/// `like` supplies the precision for inexact scalars; exact scalars ignore it.
template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<ExactRational> {
    static constexpr bool exact = true;
    static ExactRational from_int(long v, const ExactRational& /*like*/) { return {v}; }
    static bool is_zero(const ExactRational& x) { return x.is_zero(); }
    static double magnitude(const ExactRational& x) { return std::fabs(x.to_double()); }
    static BigComplex to_big_complex(const ExactRational& x, Precision bits) { return BigComplex(x.to_big_float(bits)); }
    /// Bits in numerator plus denominator.
    static std::size_t height(const ExactRational& x) {
        return mpz_sizeinbase(x.get().get_num_mpz_t(), 2) + mpz_sizeinbase(x.get().get_den_mpz_t(), 2);
    }
};

template <>
struct ScalarTraits<GaussianRational> {
    static constexpr bool exact = true;
    static GaussianRational from_int(long v, const GaussianRational& /*like*/) { return {v}; }
    static bool is_zero(const GaussianRational& x) { return x.is_zero(); }
    static double magnitude(const GaussianRational& x) { return std::abs(x.to_complex()); }
    static BigComplex to_big_complex(const GaussianRational& x, Precision bits) { return x.to_big_complex(bits); }
    static std::size_t height(const GaussianRational& x) {
        return ScalarTraits<ExactRational>::height(x.real()) + ScalarTraits<ExactRational>::height(x.imag());
    }
};

template <>
struct ScalarTraits<BigComplex> {
    static constexpr bool exact = false;
    static BigComplex from_int(long v, const BigComplex& like) { return {v, like.precision()}; }
    static bool is_zero(const BigComplex& x) { return x.is_zero(); }
    static double magnitude(const BigComplex& x) { return std::exp2(x.log2_abs()); }
    static BigComplex to_big_complex(const BigComplex& x, Precision bits) { return x.with_precision(bits); }
};

template <>
struct ScalarTraits<std::complex<double>> {
    static constexpr bool exact = false;
    static std::complex<double> from_int(long v, const std::complex<double>& /*like*/) {
        return {static_cast<double>(v), 0.0};
    }
    static bool is_zero(const std::complex<double>& x) { return x == std::complex<double>{}; }
    static double magnitude(const std::complex<double>& x) { return std::abs(x); }
    static BigComplex to_big_complex(const std::complex<double>& x, Precision bits) { return {x, bits}; }
};

template <class S>
BigComplex to_big_complex(const S& x, Precision bits) {
    return ScalarTraits<S>::to_big_complex(x, bits);
}

}  // namespace skewfatou
