#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "closed_form.hpp"
#include "error.hpp"
#include "types.hpp"

namespace seqmps {

/// A sequence n -> left . core^n . right, an element of the ring of
/// matrix-power sequences. Values are immutable once built.
class SequenceElement {
  public:
    SequenceElement(Vector left, Matrix core, Vector right)
        : left_(std::move(left)), core_(std::move(core)), right_(std::move(right)) {
        const auto m = core_.rows();
        if (m < 1)
            throw Error(ErrorKind::InvalidArgument, "sequence representation needs dim >= 1");
        if (core_.cols() != m || left_.size() != m || right_.size() != m)
            throw Error(ErrorKind::InvalidArgument,
                        "sequence representation shapes disagree (core " +
                            std::to_string(core_.rows()) + "x" + std::to_string(core_.cols()) +
                            ", left " + std::to_string(left_.size()) + ", right " +
                            std::to_string(right_.size()) + ")");
    }

    /// n -> c * lambda^n.
    static SequenceElement geometric(Complex lambda, Complex c = {1.0, 0.0}) {
        Vector l(1), r(1);
        Matrix m(1, 1);
        l(0) = c;
        m(0, 0) = lambda;
        r(0) = 1.0;
        return {l, m, r};
    }

    static SequenceElement constant(Complex c) { return geometric({1.0, 0.0}, c); }
    static SequenceElement one() { return constant({1.0, 0.0}); }
    /// Canonical zero: dim 1, zero boundaries.
    static SequenceElement zero() { return constant({0.0, 0.0}); }

    std::size_t dim() const { return static_cast<std::size_t>(core_.rows()); }
    const Vector &left() const { return left_; }
    const Matrix &core() const { return core_; }
    const Vector &right() const { return right_; }

    /// left . core^n . right by iterated vector-matrix products.
    Complex operator()(std::size_t n) const {
        Eigen::RowVectorXcd row = left_.transpose();
        for (std::size_t i = 0; i < n; ++i)
            row = row * core_;
        return (row * right_)(0, 0);
    }

    /// Same value via binary powering of the core.
    Complex eval_by_squaring(std::size_t n) const {
        Matrix result = Matrix::Identity(core_.rows(), core_.cols());
        Matrix base = core_;
        while (n != 0) {
            if (n & 1U)
                result = result * base;
            base = base * base;
            n >>= 1U;
        }
        return (left_.transpose() * result * right_)(0, 0);
    }

  private:
    Vector left_;
    Matrix core_;
    Vector right_;
};

inline Complex eval(const SequenceElement &f, std::size_t n) { return f(n); }

/// Pointwise sum via direct sums; dim is additive.
inline SequenceElement add(const SequenceElement &f, const SequenceElement &g) {
    return {direct_sum(f.left(), g.left()), direct_sum(f.core(), g.core()),
            direct_sum(f.right(), g.right())};
}

/// Pointwise product via tensor products; dim is multiplicative.
inline SequenceElement mul(const SequenceElement &f, const SequenceElement &g) {
    return {kron(f.left(), g.left()), kron(f.core(), g.core()), kron(f.right(), g.right())};
}

/// c * f(n) for a plain complex c (same dim).
inline SequenceElement scale(Complex c, const SequenceElement &f) {
    return {c * f.left(), f.core(), f.right()};
}

inline SequenceElement operator+(const SequenceElement &f, const SequenceElement &g) { return add(f, g); }
inline SequenceElement operator*(const SequenceElement &f, const SequenceElement &g) { return mul(f, g); }
inline SequenceElement operator-(const SequenceElement &f) { return scale({-1.0, 0.0}, f); }
inline SequenceElement operator-(const SequenceElement &f, const SequenceElement &g) { return add(f, -g); }

/// Decides f == g on n = 0..dim_f+dim_g-1. The difference satisfies a linear
/// recurrence of that order, so agreement on the window is agreement everywhere.
inline bool equals(const SequenceElement &f, const SequenceElement &g, double tol = kDefaultTol) {
    if (tol < 0.0)
        throw Error(ErrorKind::InvalidArgument, "tolerance must be non-negative");
    const std::size_t window = f.dim() + g.dim();
    Eigen::RowVectorXcd row_f = f.left().transpose();
    Eigen::RowVectorXcd row_g = g.left().transpose();
    for (std::size_t n = 0; n < window; ++n) {
        const Complex a = (row_f * f.right())(0, 0);
        const Complex b = (row_g * g.right())(0, 0);
        if (std::abs(a - b) > tol * (1.0 + std::abs(a)))
            return false;
        row_f = row_f * f.core();
        row_g = row_g * g.core();
    }
    return true;
}

/// True iff |f(n)| <= tol on n = dim..2*dim-1. Nilpotent parts have died out
/// by n = dim, and the order-dim recurrence carries a zero window forward.
inline bool is_eventually_zero(const SequenceElement &f, double tol = kDefaultTol) {
    if (tol < 0.0)
        throw Error(ErrorKind::InvalidArgument, "tolerance must be non-negative");
    const std::size_t m = f.dim();
    Eigen::RowVectorXcd row = f.left().transpose();
    for (std::size_t n = 0; n < 2 * m; ++n) {
        if (n >= m && std::abs((row * f.right())(0, 0)) > tol)
            return false;
        row = row * f.core();
    }
    return true;
}

/// Builds a representation of an exponential polynomial plus deltas.
///
/// Each lambda^n * poly(n) with lambda != 0 uses one Jordan block J of size
/// deg+1: since (J^n)[0,k] = C(n,k) lambda^(n-k), writing
/// poly(n) = sum_k b_k C(n,k) gives left = e_0 and right[k] = b_k lambda^k.
/// All deltas share one nilpotent block of size max_location+1 with
/// right[l] = c_l, because (N^n)[0,l] = delta(n,l).
inline SequenceElement from_closed_form(const ClosedForm &cf) {
    std::vector<SequenceElement> parts;
    for (const auto &term : cf.exp_terms) {
        if (term.poly.empty())
            continue;
        if (term.lambda == Complex{0.0, 0.0})
            throw Error(ErrorKind::InvalidArgument,
                        "zero lambda in an exponential term; use delta terms instead");
        const auto size = static_cast<Eigen::Index>(term.poly.size());
        Matrix block = Matrix::Zero(size, size);
        for (Eigen::Index i = 0; i < size; ++i) {
            block(i, i) = term.lambda;
            if (i + 1 < size)
                block(i, i + 1) = 1.0;
        }
        const auto binom = monomial_to_binomial_basis(term.poly);
        Vector left = Vector::Zero(size);
        Vector right(size);
        left(0) = 1.0;
        for (Eigen::Index k = 0; k < size; ++k)
            right(k) = binom[static_cast<std::size_t>(k)] * ipow(term.lambda, static_cast<std::size_t>(k));
        parts.emplace_back(left, block, right);
    }
    if (!cf.delta_terms.empty()) {
        std::size_t max_loc = 0;
        for (const auto &d : cf.delta_terms)
            max_loc = std::max(max_loc, d.location);
        const auto size = static_cast<Eigen::Index>(max_loc + 1);
        Matrix block = Matrix::Zero(size, size);
        for (Eigen::Index i = 0; i + 1 < size; ++i)
            block(i, i + 1) = 1.0;
        Vector left = Vector::Zero(size);
        Vector right = Vector::Zero(size);
        left(0) = 1.0;
        for (const auto &d : cf.delta_terms)
            right(static_cast<Eigen::Index>(d.location)) += d.coeff;
        parts.emplace_back(left, block, right);
    }
    if (parts.empty())
        return SequenceElement::zero();
    SequenceElement total = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i)
        total = add(total, parts[i]);
    return total;
}

/// Lazy pointwise quotient num/den with the extended division rule:
/// 0/0 := 0, x/0 with x != 0 is undefined.
class SequenceQuotient {
  public:
    SequenceQuotient(SequenceElement num, SequenceElement den, double zero_tol = 1e-12)
        : num_(std::move(num)), den_(std::move(den)), zero_tol_(zero_tol) {}

    const SequenceElement &num() const { return num_; }
    const SequenceElement &den() const { return den_; }

    /// Whether the extended rule defines a value at n.
    bool defined_at(std::size_t n) const {
        return std::abs(den_(n)) > zero_tol_ || std::abs(num_(n)) <= zero_tol_;
    }

    Complex operator()(std::size_t n) const {
        const Complex d = den_(n);
        const Complex a = num_(n);
        if (std::abs(d) > zero_tol_)
            return a / d;
        if (std::abs(a) <= zero_tol_)
            return {0.0, 0.0};
        throw Error(ErrorKind::DivisionUndefined,
                    "denominator vanishes at n=" + std::to_string(n) + " but numerator does not");
    }

  private:
    SequenceElement num_;
    SequenceElement den_;
    double zero_tol_;
};

inline SequenceQuotient quotient(const SequenceElement &f, const SequenceElement &g) { return {f, g}; }

} // namespace seqmps
