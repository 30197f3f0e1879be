#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "mps.hpp"
#include "sequence.hpp"
#include "types.hpp"

namespace seqmps {

/// Infinite matrix product operator (d, m, L, M(i,j), R). The matrix element
/// for words (i_1..i_n, j_1..j_n) is L . M(i_1,j_1) ... M(i_n,j_n) . R.
/// Site matrices are stored row-major over the symbol pair: index i*d + j.
class MpoOperator {
  public:
    MpoOperator(std::size_t phys_dim, Vector left, std::vector<Matrix> sites, Vector right)
        : phys_dim_(phys_dim), left_(std::move(left)), sites_(std::move(sites)), right_(std::move(right)) {
        if (phys_dim_ < 2)
            throw Error(ErrorKind::InvalidArgument, "operator needs phys_dim >= 2");
        if (sites_.size() != phys_dim_ * phys_dim_)
            throw Error(ErrorKind::InvalidArgument, "operator needs d*d site matrices, got " +
                                                        std::to_string(sites_.size()));
        const auto m = left_.size();
        if (m < 1 || right_.size() != m)
            throw Error(ErrorKind::InvalidArgument, "operator boundaries must have equal positive length");
        for (const auto &s : sites_)
            if (s.rows() != m || s.cols() != m)
                throw Error(ErrorKind::InvalidArgument, "operator site matrix is not " + std::to_string(m) +
                                                            "x" + std::to_string(m));
    }

    std::size_t phys_dim() const { return phys_dim_; }
    std::size_t bond_dim() const { return static_cast<std::size_t>(left_.size()); }
    const Vector &left() const { return left_; }
    const Vector &right() const { return right_; }
    const Matrix &site(std::size_t i, std::size_t j) const { return sites_.at(i * phys_dim_ + j); }
    const std::vector<Matrix> &sites() const { return sites_; }

  private:
    std::size_t phys_dim_;
    Vector left_;
    std::vector<Matrix> sites_;
    Vector right_;
};

/// M(i,j) = I_ij (1x1), the identity on every finite chain.
inline MpoOperator identity_operator(std::size_t phys_dim = 2) {
    std::vector<Matrix> sites;
    for (std::size_t i = 0; i < phys_dim; ++i)
        for (std::size_t j = 0; j < phys_dim; ++j)
            sites.push_back(Matrix::Constant(1, 1, i == j ? 1.0 : 0.0));
    return {phys_dim, Vector::Ones(1), std::move(sites), Vector::Ones(1)};
}

/// y = O x with M_y(i) = sum_j M_O(i,j) (x) M_x(j).
inline MpsState apply(const MpoOperator &o, const MpsState &x) {
    require_same_phys_dim(o.phys_dim(), x.phys_dim());
    const std::size_t d = o.phys_dim();
    const auto m = static_cast<Eigen::Index>(o.bond_dim() * x.bond_dim());
    std::vector<Matrix> sites(d, Matrix::Zero(m, m));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            sites[i] += kron(o.site(i, j), x.site(j));
    return {kron(o.left(), x.left()), std::move(sites), kron(o.right(), x.right())};
}

/// Operator product a*b with M(i,j) = sum_k M_a(i,k) (x) M_b(k,j).
inline MpoOperator compose(const MpoOperator &a, const MpoOperator &b) {
    require_same_phys_dim(a.phys_dim(), b.phys_dim());
    const std::size_t d = a.phys_dim();
    const auto m = static_cast<Eigen::Index>(a.bond_dim() * b.bond_dim());
    std::vector<Matrix> sites(d * d, Matrix::Zero(m, m));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k)
                sites[i * d + j] += kron(a.site(i, k), b.site(k, j));
    return {d, kron(a.left(), b.left()), std::move(sites), kron(a.right(), b.right())};
}

/// tr(O) as a sequence: core sum_i M(i,i).
inline SequenceElement trace(const MpoOperator &o) {
    const auto m = static_cast<Eigen::Index>(o.bond_dim());
    Matrix core = Matrix::Zero(m, m);
    for (std::size_t i = 0; i < o.phys_dim(); ++i)
        core += o.site(i, i);
    return {o.left(), std::move(core), o.right()};
}

/// <psi|O|psi> with the three-way core sum_ij conj(M_psi(i)) (x) M_O(i,j) (x) M_psi(j).
inline SequenceElement expectation(const MpsState &psi, const MpoOperator &o) {
    require_same_phys_dim(psi.phys_dim(), o.phys_dim());
    const std::size_t d = o.phys_dim();
    const auto m = static_cast<Eigen::Index>(psi.bond_dim() * psi.bond_dim() * o.bond_dim());
    Matrix core = Matrix::Zero(m, m);
    for (std::size_t i = 0; i < d; ++i) {
        const Matrix bra = psi.site(i).conjugate();
        for (std::size_t j = 0; j < d; ++j)
            core += kron(kron(bra, o.site(i, j)), psi.site(j));
    }
    const Vector lc = psi.left().conjugate();
    const Vector rc = psi.right().conjugate();
    return {kron(kron(lc, o.left()), psi.left()), std::move(core), kron(kron(rc, o.right()), psi.right())};
}

/// <psi|O|psi> / <psi|psi> under the extended division rule.
inline SequenceQuotient normalized_expectation(const MpsState &psi, const MpoOperator &o) {
    return quotient(expectation(psi, o), inner_product(psi, psi));
}

/// |psi><psi| with M(i,j) = M_psi(i) (x) conj(M_psi(j)).
inline MpoOperator density(const MpsState &psi) {
    const std::size_t d = psi.phys_dim();
    std::vector<Matrix> sites;
    sites.reserve(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            sites.push_back(kron(psi.site(i), Matrix(psi.site(j).conjugate())));
    return {d, kron(psi.left(), Vector(psi.left().conjugate())), std::move(sites),
            kron(psi.right(), Vector(psi.right().conjugate()))};
}

/// Translation-invariant sum of a width-N local operator O_1 (x) ... (x) O_N
/// over all placements: the (N+1)-band construction with identity corners.
inline MpoOperator local_window_mpo(std::span<const Matrix> factors) {
    if (factors.empty())
        throw Error(ErrorKind::EmptyFactorList, "local window needs at least one factor");
    const auto d = static_cast<std::size_t>(factors.front().rows());
    for (const auto &f : factors)
        if (static_cast<std::size_t>(f.rows()) != d || static_cast<std::size_t>(f.cols()) != d)
            throw Error(ErrorKind::InvalidArgument, "window factors must all be d x d");
    const auto width = static_cast<Eigen::Index>(factors.size());
    const Eigen::Index m = width + 1;
    std::vector<Matrix> sites;
    sites.reserve(d * d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            Matrix s = Matrix::Zero(m, m);
            s(0, 0) = i == j ? 1.0 : 0.0;
            s(width, width) = i == j ? 1.0 : 0.0;
            for (Eigen::Index r = 0; r < width; ++r)
                s(r, r + 1) = factors[static_cast<std::size_t>(r)](ii, jj);
            sites.push_back(std::move(s));
        }
    }
    Vector left = Vector::Zero(m), right = Vector::Zero(m);
    left(0) = 1.0;
    right(width) = 1.0;
    return {d, std::move(left), std::move(sites), std::move(right)};
}

inline MpoOperator local_window_mpo(std::initializer_list<Matrix> factors) {
    return local_window_mpo(std::span<const Matrix>(factors.begin(), factors.size()));
}

/// Materialized matrices add at every n (direct sum).
inline MpoOperator op_add(const MpoOperator &a, const MpoOperator &b) {
    require_same_phys_dim(a.phys_dim(), b.phys_dim());
    std::vector<Matrix> sites;
    sites.reserve(a.sites().size());
    for (std::size_t k = 0; k < a.sites().size(); ++k)
        sites.push_back(direct_sum(a.sites()[k], b.sites()[k]));
    return {a.phys_dim(), direct_sum(a.left(), b.left()), std::move(sites), direct_sum(a.right(), b.right())};
}

/// Materialized matrix at n is scaled by c(n).
inline MpoOperator op_scale(const SequenceElement &c, const MpoOperator &o) {
    std::vector<Matrix> sites;
    sites.reserve(o.sites().size());
    for (const auto &s : o.sites())
        sites.push_back(kron(c.core(), s));
    return {o.phys_dim(), kron(c.left(), o.left()), std::move(sites), kron(c.right(), o.right())};
}

inline MpoOperator operator+(const MpoOperator &a, const MpoOperator &b) { return op_add(a, b); }
inline MpoOperator operator*(const SequenceElement &c, const MpoOperator &o) { return op_scale(c, o); }
inline MpoOperator operator*(const MpoOperator &a, const MpoOperator &b) { return compose(a, b); }
inline MpsState operator*(const MpoOperator &o, const MpsState &x) { return apply(o, x); }

} // namespace seqmps
