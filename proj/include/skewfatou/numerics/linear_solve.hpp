#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "skewfatou/error.hpp"
#include "skewfatou/numerics/scalar.hpp"

namespace skewfatou {

template <class S>
using Matrix = std::vector<std::vector<S>>;

/// Solves A x = y exactly by fraction-free (Bareiss) elimination.
///
/// Every intermediate division is exact, so on rational input the returned
/// solution satisfies A x - y == 0 identically. Throws SingularSystem.
template <class S>
std::vector<S> exact_solve_linear(const Matrix<S>& A, const std::vector<S>& y) {
    static_assert(ScalarTraits<S>::exact, "exact_solve_linear needs an exact scalar");
    const std::size_t n = A.size();
    if (n == 0 || y.size() != n) throw Error(ErrorKind::Usage, "system dimensions do not match");
    if (n > 8) throw Error(ErrorKind::Usage, "exact_solve_linear supports at most 8 unknowns");
    for (const auto& row : A) {
        if (row.size() != n) throw Error(ErrorKind::Usage, "matrix is not square");
    }

    // Augmented matrix [A | y].
    Matrix<S> m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = A[i];
        m[i].push_back(y[i]);
    }

    S prev_pivot = ScalarTraits<S>::from_int(1, y[0]);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        while (pivot < n && ScalarTraits<S>::is_zero(m[pivot][k])) ++pivot;
        if (pivot == n) throw Error(ErrorKind::SingularSystem, "matrix is singular");
        if (pivot != k) std::swap(m[pivot], m[k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j <= n; ++j) {
                m[i][j] = (m[k][k] * m[i][j] - m[i][k] * m[k][j]) / prev_pivot;
            }
            m[i][k] = ScalarTraits<S>::from_int(0, y[0]);
        }
        prev_pivot = m[k][k];
    }

    std::vector<S> x(n, ScalarTraits<S>::from_int(0, y[0]));
    for (std::size_t ii = n; ii-- > 0;) {
        S acc = m[ii][n];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= m[ii][j] * x[j];
        x[ii] = acc / m[ii][ii];
    }
    return x;
}

/// A x for a square or rectangular matrix.
template <class S>
std::vector<S> mat_vec(const Matrix<S>& A, const std::vector<S>& x) {
    std::vector<S> out;
    out.reserve(A.size());
    for (const auto& row : A) {
        if (row.size() != x.size()) throw Error(ErrorKind::Usage, "dimension mismatch");
        S acc = ScalarTraits<S>::from_int(0, x.front());
        for (std::size_t j = 0; j < x.size(); ++j) acc += row[j] * x[j];
        out.push_back(std::move(acc));
    }
    return out;
}

/// Least-squares solution of an overdetermined system via the normal
/// equations, solved by Gaussian elimination with partial pivoting.
inline std::vector<BigComplex> least_squares(const Matrix<BigComplex>& A, const std::vector<BigComplex>& y) {
    const std::size_t rows = A.size();
    if (rows == 0 || y.size() != rows) throw Error(ErrorKind::Usage, "system dimensions do not match");
    const std::size_t cols = A[0].size();
    if (rows < cols) throw Error(ErrorKind::Usage, "underdetermined system");
    const Precision bits = y[0].precision();

    Matrix<BigComplex> n(cols, std::vector<BigComplex>(cols + 1, BigComplex(bits)));
    for (std::size_t i = 0; i < cols; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            for (std::size_t r = 0; r < rows; ++r) n[i][j] += conj(A[r][i]) * A[r][j];
        }
        for (std::size_t r = 0; r < rows; ++r) n[i][cols] += conj(A[r][i]) * y[r];
    }
    for (std::size_t k = 0; k < cols; ++k) {
        std::size_t pivot = k;
        for (std::size_t i = k + 1; i < cols; ++i) {
            if (abs(n[i][k]) > abs(n[pivot][k])) pivot = i;
        }
        if (n[pivot][k].is_zero()) throw Error(ErrorKind::SingularSystem, "normal equations are singular");
        std::swap(n[pivot], n[k]);
        for (std::size_t i = k + 1; i < cols; ++i) {
            const BigComplex f = n[i][k] / n[k][k];
            for (std::size_t j = k; j <= cols; ++j) n[i][j] -= f * n[k][j];
        }
    }
    std::vector<BigComplex> x(cols, BigComplex(bits));
    for (std::size_t ii = cols; ii-- > 0;) {
        BigComplex acc = n[ii][cols];
        for (std::size_t j = ii + 1; j < cols; ++j) acc -= n[ii][j] * x[j];
        x[ii] = acc / n[ii][ii];
    }
    return x;
}

}  // namespace skewfatou
