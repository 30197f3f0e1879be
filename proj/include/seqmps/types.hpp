#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace seqmps {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Default relative tolerance for sequence comparisons.
inline constexpr double kDefaultTol = 1e-9;

/// Kronecker product with the first factor most significant:
/// (A (x) B)[(i,k),(j,l)] = A[i,j] * B[k,l].
inline Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Vector kron(const Vector &a, const Vector &b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

/// Block-diagonal direct sum.
inline Matrix direct_sum(const Matrix &a, const Matrix &b) {
    Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

inline Vector direct_sum(const Vector &a, const Vector &b) {
    Vector out(a.size() + b.size());
    out << a, b;
    return out;
}

/// Bilinear (non-conjugating) contraction a . b.
inline Complex contract(const Vector &a, const Vector &b) {
    return (a.transpose() * b)(0, 0);
}

/// z^n by binary powering; 0^0 = 1.
inline Complex ipow(Complex z, std::size_t n) {
    Complex result{1.0, 0.0};
    while (n != 0) {
        if (n & 1U)
            result *= z;
        z *= z;
        n >>= 1U;
    }
    return result;
}

/// Binomial coefficient as a double; zero when k > n.
inline double binomial(std::size_t n, std::size_t k) {
    if (k > n)
        return 0.0;
    if (k > n - k)
        k = n - k;
    double result = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
    return result;
}

} // namespace seqmps
