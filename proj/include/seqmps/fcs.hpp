#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "jordan.hpp"
#include "mpo.hpp"
#include "mps.hpp"
#include "types.hpp"

namespace seqmps {

/// Finitely correlated state (E, rho, e). E is stored by its values on the
/// matrix units: unit(j,k) = E(|j><k|), so E(O) = sum_jk O_jk unit(j,k).
struct FcsState {
    std::size_t phys_dim = 2;
    std::vector<Matrix> units;
    Vector rho;
    Vector e;

    std::size_t aux_dim() const { return static_cast<std::size_t>(rho.size()); }
    const Matrix &unit(std::size_t j, std::size_t k) const { return units.at(j * phys_dim + k); }

    Matrix transfer(const Matrix &op) const {
        const auto m = static_cast<Eigen::Index>(aux_dim());
        Matrix out = Matrix::Zero(m, m);
        for (std::size_t j = 0; j < phys_dim; ++j)
            for (std::size_t k = 0; k < phys_dim; ++k)
                out += op(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * unit(j, k);
        return out;
    }
};

namespace detail {

inline void check_fcs_shapes(const FcsState &f) {
    const auto m = f.rho.size();
    if (m < 1 || f.e.size() != m)
        throw Error(ErrorKind::ShapeMismatch, "rho and e must have equal positive length");
    if (f.units.size() != f.phys_dim * f.phys_dim)
        throw Error(ErrorKind::ShapeMismatch, "transfer map needs d*d matrix units");
    for (const auto &u : f.units)
        if (u.rows() != m || u.cols() != m)
            throw Error(ErrorKind::ShapeMismatch, "transfer matrix unit is not aux_dim x aux_dim");
}

} // namespace detail

struct FcsValidity {
    /// ||E(I) e - e||
    double right_residual = 0.0;
    /// ||rho E(I) - rho||
    double left_residual = 0.0;
    bool passed = false;
};

inline FcsValidity validate_fcs(const FcsState &f, double tol = 1e-9) {
    detail::check_fcs_shapes(f);
    const Matrix e_identity = f.transfer(Matrix::Identity(static_cast<Eigen::Index>(f.phys_dim),
                                                          static_cast<Eigen::Index>(f.phys_dim)));
    FcsValidity out;
    out.right_residual = (e_identity * f.e - f.e).norm();
    out.left_residual = (f.rho.transpose() * e_identity - f.rho.transpose()).norm();
    out.passed = out.right_residual <= tol && out.left_residual <= tol;
    return out;
}

/// <O_1 (x) ... (x) O_N>_C = rho . E(O_1) ... E(O_N) . e.
inline Complex local_expectation(const FcsState &f, std::span<const Matrix> factors) {
    Eigen::RowVectorXcd row = f.rho.transpose();
    for (const auto &o : factors)
        row = row * f.transfer(o);
    return (row * f.e)(0, 0);
}

/// Infinite density operator D = (m, rho, M, e) with M(i,j) = E(|j><i|), so
/// that tr(O D) restricted to a window reproduces rho . E(O) . e.
inline MpoOperator fcs_to_density(const FcsState &f, double tol = 1e-9) {
    const auto validity = validate_fcs(f, tol);
    if (!validity.passed)
        throw Error(ErrorKind::InvalidFcs, "E(I) does not fix rho and e (residuals " +
                                               std::to_string(validity.left_residual) + ", " +
                                               std::to_string(validity.right_residual) + ")");
    std::vector<Matrix> sites;
    sites.reserve(f.units.size());
    for (std::size_t i = 0; i < f.phys_dim; ++i)
        for (std::size_t j = 0; j < f.phys_dim; ++j)
            sites.push_back(f.unit(j, i));
    return {f.phys_dim, f.rho, std::move(sites), f.e};
}

/// Reads a density-style operator as an FCS candidate: rho = L, e = R,
/// E(|j><k|) = M(k,j) (the inverse of fcs_to_density).
inline FcsState fcs_candidate(const MpoOperator &density_op) {
    FcsState f;
    f.phys_dim = density_op.phys_dim();
    for (std::size_t j = 0; j < f.phys_dim; ++j)
        for (std::size_t k = 0; k < f.phys_dim; ++k)
            f.units.push_back(density_op.site(k, j));
    f.rho = density_op.left();
    f.e = density_op.right();
    return f;
}

/// Tensor V: C^m -> C^d (x) C^m given column-wise: column(k) is the d x m
/// matrix V(b_k) with V(b_k)(i, j) = M(i)(j, k).
struct IsometryTensor {
    std::vector<Matrix> columns;

    static IsometryTensor from_sites(const std::vector<Matrix> &sites) {
        if (sites.empty())
            throw Error(ErrorKind::ShapeMismatch, "no site matrices");
        const auto m = sites.front().rows();
        const auto d = static_cast<Eigen::Index>(sites.size());
        IsometryTensor t;
        for (Eigen::Index k = 0; k < m; ++k) {
            Matrix v(d, m);
            for (Eigen::Index i = 0; i < d; ++i) {
                const auto &s = sites[static_cast<std::size_t>(i)];
                if (s.rows() != m || s.cols() != m)
                    throw Error(ErrorKind::ShapeMismatch, "site matrices must share one square shape");
                for (Eigen::Index j = 0; j < m; ++j)
                    v(i, j) = s(j, k);
            }
            t.columns.push_back(std::move(v));
        }
        return t;
    }

    std::size_t aux_dim() const { return columns.size(); }
    std::size_t phys_dim() const { return columns.empty() ? 0 : static_cast<std::size_t>(columns.front().rows()); }

    /// (d*m) x m matrix with row index i*m + j.
    Matrix stacked() const {
        const auto m = static_cast<Eigen::Index>(aux_dim());
        const auto d = static_cast<Eigen::Index>(phys_dim());
        Matrix out(d * m, m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const auto &v = columns[static_cast<std::size_t>(k)];
            if (v.rows() != d || v.cols() != m)
                throw Error(ErrorKind::ShapeMismatch, "isometry column " + std::to_string(k) + " is not d x m");
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < m; ++j)
                    out(i * m + j, k) = v(i, j);
        }
        return out;
    }

    std::vector<Matrix> to_sites() const {
        const Matrix s = stacked();
        const auto m = static_cast<Eigen::Index>(aux_dim());
        std::vector<Matrix> sites;
        for (std::size_t i = 0; i < phys_dim(); ++i)
            sites.push_back(s.middleRows(static_cast<Eigen::Index>(i) * m, m));
        return sites;
    }
};

struct PurelyGeneratedCheck {
    bool isometry = false;
    /// ||V^H V - I|| (Frobenius).
    double residual = 0.0;
};

inline PurelyGeneratedCheck is_purely_generated(const IsometryTensor &t, double tol = 1e-9) {
    if (t.columns.empty())
        throw Error(ErrorKind::ShapeMismatch, "empty isometry tensor");
    const Matrix v = t.stacked();
    PurelyGeneratedCheck out;
    out.residual = (v.adjoint() * v - Matrix::Identity(v.cols(), v.cols())).norm();
    out.isometry = out.residual <= tol;
    return out;
}

enum class BoundaryDiagnostic { MultipleDominant, DefectiveDominant, ZeroDominant };

inline const char *to_string(BoundaryDiagnostic d) {
    switch (d) {
    case BoundaryDiagnostic::MultipleDominant: return "MultipleDominant";
    case BoundaryDiagnostic::DefectiveDominant: return "DefectiveDominant";
    case BoundaryDiagnostic::ZeroDominant: return "ZeroDominant";
    }
    return "Unknown";
}

struct DerivedBoundaries {
    /// Dominant eigenvalue of the original transfer matrix.
    Complex dominant;
    /// Sites rescaled by |dominant|^(-1/2).
    std::vector<Matrix> sites;
    /// Dominant left/right eigenvectors of the rescaled transfer matrix,
    /// normalized so that left . right = 1.
    Vector left;
    Vector right;
};

struct BoundaryResult {
    std::optional<DerivedBoundaries> boundaries;
    std::optional<BoundaryDiagnostic> diagnostic;
    /// Dominant Jordan blocks of the transfer matrix (for reporting).
    std::vector<JordanBlock> dominant_blocks;

    bool ok() const { return boundaries.has_value(); }
};

/// sum_b conj(M(b)) (x) M(b).
inline Matrix transfer_matrix(const std::vector<Matrix> &sites) {
    const auto m = sites.front().rows();
    Matrix t = Matrix::Zero(m * m, m * m);
    for (const auto &s : sites)
        t += kron(Matrix(s.conjugate()), s);
    return t;
}

namespace detail {

inline Vector eigenvector_for(const Matrix &a, Complex lambda) {
    Eigen::ComplexEigenSolver<Matrix> solver(a);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < solver.eigenvalues().size(); ++i)
        if (std::abs(solver.eigenvalues()(i) - lambda) < std::abs(solver.eigenvalues()(best) - lambda))
            best = i;
    return solver.eigenvectors().col(best);
}

} // namespace detail

/// Post-hoc boundaries from the dominant eigenvectors of the transfer matrix.
/// Fails with a diagnostic when the dominant eigenvalue is degenerate,
/// defective, or zero. gap_tol is the relative modulus gap for dominance.
inline BoundaryResult derive_boundaries(const std::vector<Matrix> &sites, double gap_tol = 1e-7) {
    if (sites.empty())
        throw Error(ErrorKind::ShapeMismatch, "no site matrices");
    const Matrix t = transfer_matrix(sites);
    const auto structure = jordan_decompose(t);
    double top = 0.0;
    for (const auto &b : structure.blocks)
        top = std::max(top, std::abs(b.lambda));

    BoundaryResult out;
    if (top <= 1e-12 * std::max(1.0, t.norm())) {
        out.diagnostic = BoundaryDiagnostic::ZeroDominant;
        return out;
    }
    for (const auto &b : structure.blocks)
        if (std::abs(b.lambda) >= top * (1.0 - gap_tol))
            out.dominant_blocks.push_back(b);
    const bool defective = std::any_of(out.dominant_blocks.begin(), out.dominant_blocks.end(),
                                       [](const JordanBlock &b) { return b.size > 1; });
    if (defective) {
        out.diagnostic = BoundaryDiagnostic::DefectiveDominant;
        return out;
    }
    if (out.dominant_blocks.size() > 1) {
        out.diagnostic = BoundaryDiagnostic::MultipleDominant;
        return out;
    }

    const Complex lambda = out.dominant_blocks.front().lambda;
    DerivedBoundaries derived;
    derived.dominant = lambda;
    const double factor = 1.0 / std::sqrt(std::abs(lambda));
    for (const auto &s : sites)
        derived.sites.push_back(factor * s);
    const Matrix scaled = t / std::abs(lambda);
    const Complex target = lambda / std::abs(lambda);
    derived.right = detail::eigenvector_for(scaled, target);
    derived.left = detail::eigenvector_for(scaled.transpose(), target);
    // Fix the free phase: the right fixed point, read as an m x m matrix, gets a positive trace.
    const auto m = sites.front().rows();
    Complex diag_sum{0.0, 0.0};
    for (Eigen::Index p = 0; p < m; ++p)
        diag_sum += derived.right(p * m + p);
    if (std::abs(diag_sum) > 1e-12)
        derived.right *= std::abs(diag_sum) / diag_sum;
    const Complex overlap = contract(derived.left, derived.right);
    if (std::abs(overlap) <= 1e-12)
        throw Error(ErrorKind::IllConditionedSimilarity, "dominant left and right eigenvectors are orthogonal");
    derived.left /= overlap;
    out.boundaries = std::move(derived);
    return out;
}

inline BoundaryResult derive_boundaries(const IsometryTensor &tensor, double gap_tol = 1e-7) {
    return derive_boundaries(tensor.to_sites(), gap_tol);
}

/// FCS generated by a tensor with derived boundaries:
/// E(|j><k|) = conj(M(j)) (x) M(k), so E(I) is the transfer matrix.
inline FcsState fcs_from_boundaries(const DerivedBoundaries &b) {
    FcsState f;
    f.phys_dim = b.sites.size();
    for (std::size_t j = 0; j < f.phys_dim; ++j)
        for (std::size_t k = 0; k < f.phys_dim; ++k)
            f.units.push_back(kron(Matrix(b.sites[j].conjugate()), b.sites[k]));
    f.rho = b.left;
    f.e = b.right;
    return f;
}

/// Pure components of a purely generated FCS with positive-definite boundary
/// matrices: psi_ij has left sqrt(l_i) u_i and right sqrt(r_j) w_j from the
/// eigendecompositions of rho_matrix and e_matrix, and shares the sites.
inline std::vector<MpsState> pure_components(const std::vector<Matrix> &sites, const Matrix &rho_matrix,
                                             const Matrix &e_matrix) {
    Eigen::SelfAdjointEigenSolver<Matrix> rho_eig(rho_matrix);
    Eigen::SelfAdjointEigenSolver<Matrix> e_eig(e_matrix);
    const double floor_rho = -1e-12 * std::max(1.0, rho_matrix.norm());
    const double floor_e = -1e-12 * std::max(1.0, e_matrix.norm());
    if (rho_eig.eigenvalues().minCoeff() < floor_rho || e_eig.eigenvalues().minCoeff() < floor_e)
        throw Error(ErrorKind::InvalidArgument, "boundary matrices must be positive semidefinite");
    std::vector<MpsState> out;
    const auto m = rho_matrix.rows();
    for (Eigen::Index i = 0; i < m; ++i) {
        const Vector left = std::sqrt(std::max(0.0, rho_eig.eigenvalues()(i))) * rho_eig.eigenvectors().col(i);
        for (Eigen::Index j = 0; j < m; ++j) {
            const Vector right = std::sqrt(std::max(0.0, e_eig.eigenvalues()(j))) * e_eig.eigenvectors().col(j);
            out.emplace_back(left, sites, right);
        }
    }
    return out;
}

} // namespace seqmps
