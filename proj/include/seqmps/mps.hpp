#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "jordan.hpp"
#include "sequence.hpp"
#include "types.hpp"

namespace seqmps {

/// Infinite matrix product state (d, m, L, M(b), R). The amplitude of a
/// length-n word b_1..b_n is L . M(b_1) ... M(b_n) . R.
class MpsState {
  public:
    MpsState(Vector left, std::vector<Matrix> sites, Vector right)
        : left_(std::move(left)), sites_(std::move(sites)), right_(std::move(right)) {
        if (sites_.size() < 2)
            throw Error(ErrorKind::InvalidArgument, "state needs phys_dim >= 2");
        const auto m = left_.size();
        if (m < 1 || right_.size() != m)
            throw Error(ErrorKind::InvalidArgument, "state boundaries must have equal positive length");
        for (std::size_t b = 0; b < sites_.size(); ++b)
            if (sites_[b].rows() != m || sites_[b].cols() != m)
                throw Error(ErrorKind::InvalidArgument,
                            "site matrix for symbol " + std::to_string(b) + " is not " +
                                std::to_string(m) + "x" + std::to_string(m));
    }

    std::size_t phys_dim() const { return sites_.size(); }
    std::size_t bond_dim() const { return static_cast<std::size_t>(left_.size()); }
    const Vector &left() const { return left_; }
    const Vector &right() const { return right_; }
    const Matrix &site(std::size_t b) const { return sites_.at(b); }
    const std::vector<Matrix> &sites() const { return sites_; }

  private:
    Vector left_;
    std::vector<Matrix> sites_;
    Vector right_;
};

inline void require_same_phys_dim(std::size_t a, std::size_t b) {
    if (a != b)
        throw Error(ErrorKind::PhysDimMismatch,
                    "physical dimensions differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

/// Canonical zero state: m = 1, zero boundaries and sites.
inline MpsState zero_state(std::size_t phys_dim = 2) {
    return {Vector::Zero(1), std::vector<Matrix>(phys_dim, Matrix::Zero(1, 1)), Vector::Zero(1)};
}

/// Direct-sum construction; amplitudes add for every word.
inline MpsState state_add(const MpsState &a, const MpsState &b) {
    require_same_phys_dim(a.phys_dim(), b.phys_dim());
    std::vector<Matrix> sites;
    sites.reserve(a.phys_dim());
    for (std::size_t s = 0; s < a.phys_dim(); ++s)
        sites.push_back(direct_sum(a.site(s), b.site(s)));
    return {direct_sum(a.left(), b.left()), std::move(sites), direct_sum(a.right(), b.right())};
}

/// Multiplies every length-n amplitude by c(n) (tensor-product construction).
inline MpsState state_scale(const SequenceElement &c, const MpsState &x) {
    std::vector<Matrix> sites;
    sites.reserve(x.phys_dim());
    for (const auto &m : x.sites())
        sites.push_back(kron(c.core(), m));
    return {kron(c.left(), x.left()), std::move(sites), kron(c.right(), x.right())};
}

inline MpsState operator+(const MpsState &a, const MpsState &b) { return state_add(a, b); }
inline MpsState operator*(const SequenceElement &c, const MpsState &x) { return state_scale(c, x); }

/// <x|y> as a sequence: boundaries conj(L_x) (x) L_y, core sum_b conj(M_x(b)) (x) M_y(b).
inline SequenceElement inner_product(const MpsState &x, const MpsState &y) {
    require_same_phys_dim(x.phys_dim(), y.phys_dim());
    const auto m = static_cast<Eigen::Index>(x.bond_dim() * y.bond_dim());
    Matrix core = Matrix::Zero(m, m);
    for (std::size_t b = 0; b < x.phys_dim(); ++b)
        core += kron(Matrix(x.site(b).conjugate()), y.site(b));
    return {kron(Vector(x.left().conjugate()), y.left()), std::move(core),
            kron(Vector(x.right().conjugate()), y.right())};
}

inline SequenceElement norm_sequence(const MpsState &x) { return inner_product(x, x); }

/// Weight of a finite window; depends only on the window contents.
inline Complex window_weight(const MpsState &x, std::span<const std::size_t> word) {
    Eigen::RowVectorXcd row = x.left().transpose();
    for (auto b : word) {
        if (b >= x.phys_dim())
            throw Error(ErrorKind::SymbolOutOfRange,
                        "symbol " + std::to_string(b) + " not below phys_dim " + std::to_string(x.phys_dim()));
        row = row * x.site(b);
    }
    return (row * x.right())(0, 0);
}

inline Complex window_weight(const MpsState &x, std::initializer_list<std::size_t> word) {
    return window_weight(x, std::span<const std::size_t>(word.begin(), word.size()));
}

/// States are eventually orthogonal when their inner product is eventually zero.
inline bool eventually_orthogonal(const MpsState &x, const MpsState &y, double tol = kDefaultTol) {
    return is_eventually_zero(inner_product(x, y), tol);
}

/// Gauge transform to an equivalent state with left = (1, 0, ..., 0).
///
/// X has first column conj(L)/|L|^2 and an orthonormal basis of the
/// complement of conj(L) in the others; then L.X = e_0, R -> X^-1 R and
/// M(b) -> X^-1 M(b) X.
inline MpsState canonicalize_left(const MpsState &x) {
    const double norm2 = x.left().squaredNorm();
    if (norm2 == 0.0)
        throw Error(ErrorKind::ZeroLeftBoundary, "cannot canonicalize a state with zero left boundary");
    const auto m = static_cast<Eigen::Index>(x.bond_dim());
    const Vector lc = x.left().conjugate();
    Eigen::HouseholderQR<Matrix> qr{Matrix(lc)};
    Matrix q = qr.householderQ() * Matrix::Identity(m, m);
    Matrix transform(m, m);
    transform.col(0) = lc / norm2;
    if (m > 1)
        transform.rightCols(m - 1) = q.rightCols(m - 1);
    const Eigen::FullPivLU<Matrix> lu(transform);
    const Matrix inverse = lu.inverse();

    Vector left = (x.left().transpose() * transform).transpose();
    left(0) = 1.0;
    for (Eigen::Index i = 1; i < m; ++i)
        left(i) = 0.0;
    std::vector<Matrix> sites;
    sites.reserve(x.phys_dim());
    for (const auto &s : x.sites())
        sites.push_back(inverse * s * transform);
    return {std::move(left), std::move(sites), inverse * x.right()};
}

/// Scales x so that <x|x> == 1, possible only when <x|x> = c * lambda^n with
/// c > 0 and lambda > 0. The compensating scalar is n -> c^(-1/2) lambda^(-n/2).
/// Delta terms are transients and are left alone: the result has norm 1
/// everywhere except at their (finitely many) locations.
inline MpsState normalize(const MpsState &x, double tol = 1e-9) {
    const ClosedForm cf = closed_form(norm_sequence(x));
    const auto reject = [](const std::string &why) {
        return Error(ErrorKind::NotNormalizable, "norm is not c*lambda^n with c, lambda > 0: " + why);
    };
    if (cf.exp_terms.size() != 1)
        throw reject(std::to_string(cf.exp_terms.size()) + " exponential terms");
    const auto &term = cf.exp_terms.front();
    if (term.poly.size() != 1)
        throw reject("polynomial factor has degree " + std::to_string(term.degree()));
    const Complex c = term.poly.front();
    const Complex lambda = term.lambda;
    if (std::abs(c.imag()) > tol * std::abs(c) || c.real() <= 0.0)
        throw reject("coefficient is not positive");
    if (std::abs(lambda.imag()) > tol * std::abs(lambda) || lambda.real() <= 0.0)
        throw reject("base is not positive");
    const auto factor = SequenceElement::geometric(1.0 / std::sqrt(lambda.real()), 1.0 / std::sqrt(c.real()));
    return state_scale(factor, x);
}

} // namespace seqmps
