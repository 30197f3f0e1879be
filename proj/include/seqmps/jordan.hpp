#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "closed_form.hpp"
#include "error.hpp"
#include "sequence.hpp"
#include "types.hpp"

namespace seqmps {

struct JordanBlock {
    Complex lambda;
    std::size_t size;
};

/// m = transform * blockdiag(blocks) * transform_inverse.
struct JordanStructure {
    std::vector<JordanBlock> blocks;
    Matrix transform;
    Matrix transform_inverse;

    /// Block-diagonal Jordan matrix, ones on the superdiagonal inside each block.
    Matrix jordan_matrix() const {
        std::size_t total = 0;
        for (const auto &b : blocks)
            total += b.size;
        const auto m = static_cast<Eigen::Index>(total);
        Matrix j = Matrix::Zero(m, m);
        Eigen::Index offset = 0;
        for (const auto &b : blocks) {
            const auto s = static_cast<Eigen::Index>(b.size);
            for (Eigen::Index i = 0; i < s; ++i) {
                j(offset + i, offset + i) = b.lambda;
                if (i + 1 < s)
                    j(offset + i, offset + i + 1) = 1.0;
            }
            offset += s;
        }
        return j;
    }

    Matrix reconstruct() const { return transform * jordan_matrix() * transform_inverse; }
};

/// n-th power of the size x size Jordan block with eigenvalue lambda:
/// entry (i,j) = C(n, j-i) lambda^(n-(j-i)) for j >= i, zero below. For
/// lambda = 0 the entry is delta(n, j-i).
inline Matrix jordan_power(Complex lambda, std::size_t size, std::size_t n) {
    if (size == 0)
        throw Error(ErrorKind::InvalidArgument, "Jordan block size must be positive");
    const auto s = static_cast<Eigen::Index>(size);
    Matrix out = Matrix::Zero(s, s);
    for (Eigen::Index i = 0; i < s; ++i) {
        for (Eigen::Index j = i; j < s; ++j) {
            const auto offset = static_cast<std::size_t>(j - i);
            if (offset > n)
                continue;
            out(i, j) = binomial(n, offset) * ipow(lambda, n - offset);
        }
    }
    return out;
}

namespace detail {

inline double default_cluster_tol(const Matrix &m) { return 1e-7 * m.norm(); }

struct EigenCluster {
    Complex lambda;
    std::size_t multiplicity;
};

/// Single-linkage clustering of eigenvalues within tol; each cluster is
/// represented by its mean, snapped to exactly zero when within tol of 0.
inline std::vector<EigenCluster> cluster_eigenvalues(const Vector &eigenvalues, double tol) {
    const auto count = static_cast<std::size_t>(eigenvalues.size());
    std::vector<std::size_t> parent(count);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i)
            i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = i + 1; j < count; ++j)
            if (std::abs(eigenvalues(static_cast<Eigen::Index>(i)) -
                         eigenvalues(static_cast<Eigen::Index>(j))) <= tol)
                parent[find(i)] = find(j);

    std::vector<EigenCluster> clusters;
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < count; ++i) {
        const auto root = find(i);
        auto it = std::find(roots.begin(), roots.end(), root);
        if (it == roots.end()) {
            roots.push_back(root);
            clusters.push_back({eigenvalues(static_cast<Eigen::Index>(i)), 1});
        } else {
            auto &c = clusters[static_cast<std::size_t>(it - roots.begin())];
            c.lambda += eigenvalues(static_cast<Eigen::Index>(i));
            ++c.multiplicity;
        }
    }
    for (auto &c : clusters) {
        c.lambda /= static_cast<double>(c.multiplicity);
        if (std::abs(c.lambda) <= tol)
            c.lambda = 0.0;
    }
    std::sort(clusters.begin(), clusters.end(), [](const EigenCluster &a, const EigenCluster &b) {
        const double ma = std::abs(a.lambda), mb = std::abs(b.lambda);
        if (ma != mb)
            return ma > mb;
        if (a.lambda.real() != b.lambda.real())
            return a.lambda.real() > b.lambda.real();
        return a.lambda.imag() > b.lambda.imag();
    });
    return clusters;
}

/// Orthonormal basis of the numerical null space of a (columns of V for the
/// `dimension` smallest singular values).
inline Matrix trailing_right_singular_vectors(const Matrix &a, Eigen::Index dimension) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    return svd.matrixV().rightCols(dimension);
}

inline Eigen::Index numerical_rank(const Matrix &a, double threshold) {
    if (a.size() == 0)
        return 0;
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto &sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > threshold)
            ++rank;
    return rank;
}

/// Jordan chains of a (numerically) nilpotent k x k matrix. Returns the chain
/// vectors as columns, grouped per block in order g_1 .. g_s with
/// nil * g_1 = 0 and nil * g_t = g_{t-1}, plus the block sizes.
inline std::pair<Matrix, std::vector<std::size_t>> nilpotent_chains(const Matrix &nil, double threshold) {
    const Eigen::Index k = nil.rows();
    std::vector<Eigen::Index> rank(static_cast<std::size_t>(k) + 1, 0);
    rank[0] = k;
    Matrix power = Matrix::Identity(k, k);
    const double scale = std::max(1.0, nil.norm());
    for (Eigen::Index j = 1; j <= k; ++j) {
        power = power * nil;
        rank[static_cast<std::size_t>(j)] =
            std::min(rank[static_cast<std::size_t>(j) - 1],
                     numerical_rank(power, threshold * std::pow(scale, static_cast<double>(j - 1))));
    }
    rank[static_cast<std::size_t>(k)] = 0;

    // at_least[s] = number of blocks of size >= s.
    std::vector<Eigen::Index> at_least(static_cast<std::size_t>(k) + 2, 0);
    for (Eigen::Index s = 1; s <= k; ++s)
        at_least[static_cast<std::size_t>(s)] =
            rank[static_cast<std::size_t>(s) - 1] - rank[static_cast<std::size_t>(s)];

    struct Chain {
        Vector top;
        std::size_t size;
    };
    std::vector<Chain> chains;
    for (Eigen::Index s = k; s >= 1; --s) {
        const Eigen::Index exact = at_least[static_cast<std::size_t>(s)] -
                                   at_least[static_cast<std::size_t>(s) + 1];
        if (exact <= 0)
            continue;
        // Tops live in ker(nil^s) but outside ker(nil^(s-1)) + span of the
        // longer chains pushed down to level s.
        Matrix pow_s = Matrix::Identity(k, k), pow_s1 = Matrix::Identity(k, k);
        for (Eigen::Index t = 0; t < s; ++t) {
            pow_s1 = pow_s;
            pow_s = pow_s * nil;
        }
        const Matrix kernel_s = trailing_right_singular_vectors(pow_s, k - rank[static_cast<std::size_t>(s)]);
        std::vector<Vector> spanning;
        const Eigen::Index dim_below = k - rank[static_cast<std::size_t>(s) - 1];
        if (dim_below > 0) {
            const Matrix kernel_below = trailing_right_singular_vectors(pow_s1, dim_below);
            for (Eigen::Index c = 0; c < kernel_below.cols(); ++c)
                spanning.emplace_back(kernel_below.col(c));
        }
        for (const auto &chain : chains) {
            Vector v = chain.top;
            for (std::size_t t = static_cast<std::size_t>(s); t < chain.size; ++t)
                v = nil * v;
            spanning.emplace_back(v);
        }
        Matrix projector = Matrix::Identity(k, k);
        if (!spanning.empty()) {
            Matrix span(k, static_cast<Eigen::Index>(spanning.size()));
            for (std::size_t c = 0; c < spanning.size(); ++c)
                span.col(static_cast<Eigen::Index>(c)) = spanning[c];
            Eigen::JacobiSVD<Matrix> svd(span, Eigen::ComputeThinU);
            const auto r = std::min<Eigen::Index>(svd.rank(), span.cols());
            const Matrix basis = svd.matrixU().leftCols(r);
            projector -= basis * basis.adjoint();
        }
        const Matrix candidates = projector * kernel_s;
        Eigen::JacobiSVD<Matrix> svd(candidates, Eigen::ComputeThinU);
        const Eigen::Index take = std::min(exact, candidates.cols());
        for (Eigen::Index c = 0; c < take; ++c)
            chains.push_back({svd.matrixU().col(c), static_cast<std::size_t>(s)});
    }

    Matrix columns(k, k);
    std::vector<std::size_t> sizes;
    Eigen::Index col = 0;
    for (const auto &chain : chains) {
        std::vector<Vector> vs(chain.size);
        vs[chain.size - 1] = chain.top;
        for (std::size_t t = chain.size - 1; t > 0; --t)
            vs[t - 1] = nil * vs[t];
        for (const auto &v : vs) {
            if (col >= k)
                break;
            columns.col(col++) = v;
        }
        sizes.push_back(chain.size);
    }
    if (col != k)
        throw Error(ErrorKind::IllConditionedSimilarity,
                    "Jordan chains do not span the generalized eigenspace");
    return {columns, sizes};
}

} // namespace detail

/// Jordan structure of a square matrix from generalized-eigenvector chains.
/// Eigenvalues closer than cluster_tol are merged to their mean; a negative
/// cluster_tol selects the default 1e-7 * ||m||.
inline JordanStructure jordan_decompose(const Matrix &m, double cluster_tol = -1.0) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw Error(ErrorKind::InvalidArgument, "jordan_decompose needs a non-empty square matrix");
    if (!m.allFinite())
        throw Error(ErrorKind::InvalidArgument, "matrix has non-finite entries");
    const double tol = cluster_tol < 0.0 ? detail::default_cluster_tol(m) : cluster_tol;
    const Eigen::Index dim = m.rows();
    const double norm = m.norm();

    Eigen::ComplexEigenSolver<Matrix> solver(m, false);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::IllConditionedSimilarity, "eigenvalue iteration did not converge");
    const auto clusters = detail::cluster_eigenvalues(solver.eigenvalues(), tol);

    JordanStructure out;
    out.transform = Matrix(dim, dim);
    Eigen::Index col = 0;
    for (const auto &cluster : clusters) {
        const auto k = static_cast<Eigen::Index>(cluster.multiplicity);
        const Matrix shifted = m - cluster.lambda * Matrix::Identity(dim, dim);
        Matrix power = Matrix::Identity(dim, dim);
        for (Eigen::Index t = 0; t < k; ++t)
            power = power * shifted;
        const Matrix basis = detail::trailing_right_singular_vectors(power, k);
        const Matrix nil = basis.adjoint() * shifted * basis;
        const double threshold = std::max(static_cast<double>(k) * tol, 1e-12 * std::max(1.0, norm));
        auto [chains, sizes] = detail::nilpotent_chains(nil, threshold);
        out.transform.middleCols(col, k) = basis * chains;
        col += k;
        for (auto s : sizes)
            out.blocks.push_back({cluster.lambda, s});
    }

    Eigen::FullPivLU<Matrix> lu(out.transform);
    if (!lu.isInvertible())
        throw Error(ErrorKind::IllConditionedSimilarity, "generalized eigenvectors are linearly dependent");
    out.transform_inverse = lu.inverse();
    const double error = (out.reconstruct() - m).norm();
    if (!(error <= 1e-6 * std::max(1.0, norm)))
        throw Error(ErrorKind::IllConditionedSimilarity,
                    "similarity reconstruction error " + std::to_string(error) +
                        " exceeds 1e-6 (eigenvalues too close to separate or merge)");
    return out;
}

struct ClosedFormOptions {
    /// Negative selects the default 1e-7 * ||core|| and enables escalation.
    double cluster_tol = -1.0;
    /// Retry with looser clustering when the default tolerance fails.
    bool escalate = true;
};

namespace detail {

inline ClosedForm closed_form_at(const SequenceElement &f, double cluster_tol) {
    const auto structure = jordan_decompose(f.core(), cluster_tol);

    // Largest block per distinct eigenvalue bounds the polynomial degree.
    struct Group {
        Complex lambda;
        std::size_t width;
    };
    std::vector<Group> groups;
    for (const auto &b : structure.blocks) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group &g) { return g.lambda == b.lambda; });
        if (it == groups.end())
            groups.push_back({b.lambda, b.size});
        else
            it->width = std::max(it->width, b.size);
    }
    std::size_t unknowns = 0;
    for (const auto &g : groups)
        unknowns += g.width;

    const std::size_t dim = f.dim();
    const std::size_t rows = std::max(2 * dim, unknowns);
    std::vector<Complex> values(rows);
    {
        Eigen::RowVectorXcd row = f.left().transpose();
        for (std::size_t n = 0; n < rows; ++n) {
            values[n] = (row * f.right())(0, 0);
            row = row * f.core();
        }
    }

    // Basis C(n,j) lambda^(n-j); for lambda = 0 this is delta(n, j).
    const auto r = static_cast<Eigen::Index>(rows);
    const auto u = static_cast<Eigen::Index>(unknowns);
    Matrix system(r, u);
    Vector rhs(r);
    for (std::size_t n = 0; n < rows; ++n) {
        const double weight = 1.0 / (1.0 + std::abs(values[n]));
        rhs(static_cast<Eigen::Index>(n)) = weight * values[n];
        Eigen::Index c = 0;
        for (const auto &g : groups)
            for (std::size_t j = 0; j < g.width; ++j, ++c)
                system(static_cast<Eigen::Index>(n), c) =
                    j > n ? Complex{0.0, 0.0} : weight * binomial(n, j) * ipow(g.lambda, n - j);
    }
    Eigen::VectorXd column_scale(u);
    for (Eigen::Index c = 0; c < u; ++c) {
        const double norm = system.col(c).norm();
        column_scale(c) = norm > 0.0 ? norm : 1.0;
        system.col(c) /= column_scale(c);
    }
    Vector solution = system.colPivHouseholderQr().solve(rhs);
    for (Eigen::Index c = 0; c < u; ++c)
        solution(c) /= column_scale(c);

    double scale = 1.0;
    for (std::size_t n = 0; n < dim; ++n)
        scale = std::max(scale, std::abs(values[n]));

    ClosedForm cf;
    Eigen::Index c = 0;
    for (const auto &g : groups) {
        if (g.lambda == Complex{0.0, 0.0}) {
            for (std::size_t j = 0; j < g.width; ++j, ++c)
                cf.delta_terms.push_back({j, solution(c)});
            continue;
        }
        std::vector<Complex> poly(g.width, Complex{0.0, 0.0});
        for (std::size_t j = 0; j < g.width; ++j, ++c) {
            // lambda^n C(n,j) lambda^(-j): expand C(n,j) into monomials.
            const Complex b = solution(c) / ipow(g.lambda, j);
            const auto binom = binomial_polynomial(j);
            for (std::size_t i = 0; i < binom.size(); ++i)
                poly[i] += b * binom[i];
        }
        cf.exp_terms.push_back({g.lambda, std::move(poly)});
    }
    cf = canonical_order(strip(std::move(cf), 1e-9 * scale));

    const std::size_t check = 3 * dim;
    Eigen::RowVectorXcd row = f.left().transpose();
    for (std::size_t n = 0; n <= check; ++n) {
        const Complex expected = (row * f.right())(0, 0);
        if (std::abs(cf(n) - expected) > 1e-6 * (1.0 + std::abs(expected)))
            throw Error(ErrorKind::IllConditionedSimilarity,
                        "closed form does not reproduce the sequence at n=" + std::to_string(n));
        row = row * f.core();
    }
    return cf;
}

} // namespace detail

/// Exponential-polynomial-plus-delta closed form of f. Polynomial coefficients
/// come from a least-squares fit over the clustered spectrum.
inline ClosedForm closed_form(const SequenceElement &f, const ClosedFormOptions &options = {}) {
    if (options.cluster_tol >= 0.0 || !options.escalate)
        return detail::closed_form_at(f, options.cluster_tol);
    const double norm = f.core().norm();
    const double base = detail::default_cluster_tol(f.core());
    std::optional<Error> last;
    for (double tol = base; tol <= std::max(1e-3 * norm, base); tol *= 100.0) {
        try {
            return detail::closed_form_at(f, tol);
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::IllConditionedSimilarity)
                throw;
            last = e;
        }
        if (tol == 0.0)
            break;
    }
    throw *last;
}

inline ClosedForm closed_form(const SequenceElement &f, double cluster_tol) {
    return closed_form(f, ClosedFormOptions{cluster_tol, false});
}

/// Closed form assembled directly from the Jordan chains:
/// f(n) = (left . T) J^n (T^-1 . right), each block expanded with jordan_power.
inline ClosedForm closed_form_via_jordan(const SequenceElement &f, const JordanStructure &structure) {
    const Eigen::RowVectorXcd lt = f.left().transpose() * structure.transform;
    const Vector tr = structure.transform_inverse * f.right();
    ClosedForm cf;
    Eigen::Index offset = 0;
    double scale = 1.0;
    for (std::size_t n = 0; n < f.dim(); ++n)
        scale = std::max(scale, std::abs(f(n)));
    for (const auto &b : structure.blocks) {
        const auto s = static_cast<Eigen::Index>(b.size);
        // Coefficient of C(n,d) lambda^(n-d) for each offset d = j-i.
        std::vector<Complex> by_offset(b.size, Complex{0.0, 0.0});
        for (Eigen::Index i = 0; i < s; ++i)
            for (Eigen::Index j = i; j < s; ++j)
                by_offset[static_cast<std::size_t>(j - i)] += lt(offset + i) * tr(offset + j);
        if (b.lambda == Complex{0.0, 0.0}) {
            for (std::size_t d = 0; d < b.size; ++d)
                cf.delta_terms.push_back({d, by_offset[d]});
        } else {
            std::vector<Complex> poly(b.size, Complex{0.0, 0.0});
            for (std::size_t d = 0; d < b.size; ++d) {
                const auto binom = binomial_polynomial(d);
                const Complex coeff = by_offset[d] / ipow(b.lambda, d);
                for (std::size_t i = 0; i < binom.size(); ++i)
                    poly[i] += coeff * binom[i];
            }
            auto it = std::find_if(cf.exp_terms.begin(), cf.exp_terms.end(),
                                   [&](const ExpTerm &t) { return t.lambda == b.lambda; });
            if (it == cf.exp_terms.end()) {
                cf.exp_terms.push_back({b.lambda, std::move(poly)});
            } else {
                if (it->poly.size() < poly.size())
                    it->poly.resize(poly.size(), Complex{0.0, 0.0});
                for (std::size_t i = 0; i < poly.size(); ++i)
                    it->poly[i] += poly[i];
            }
        }
        offset += s;
    }
    return canonical_order(strip(std::move(cf), 1e-9 * scale));
}

enum class GrowthKind { EventuallyZero, Decaying, Bounded, PolynomialGrowth, ExponentialGrowth };

inline const char *to_string(GrowthKind kind) {
    switch (kind) {
    case GrowthKind::EventuallyZero: return "EventuallyZero";
    case GrowthKind::Decaying: return "Decaying";
    case GrowthKind::Bounded: return "Bounded";
    case GrowthKind::PolynomialGrowth: return "PolynomialGrowth";
    case GrowthKind::ExponentialGrowth: return "ExponentialGrowth";
    }
    return "Unknown";
}

struct AsymptoticClass {
    GrowthKind kind = GrowthKind::EventuallyZero;
    /// Largest |lambda| among exponential terms (0 when eventually zero).
    double modulus = 0.0;
    /// Highest polynomial degree among the dominant terms.
    std::size_t degree = 0;
    /// Several distinct lambdas share the maximal modulus.
    bool oscillatory = false;
    std::vector<ExpTerm> dominant;
};

/// Growth class from the dominant exponential terms of a closed form.
inline AsymptoticClass limit_behavior(const ClosedForm &cf, double tol = 1e-9) {
    AsymptoticClass out;
    if (cf.exp_terms.empty())
        return out;
    for (const auto &t : cf.exp_terms)
        out.modulus = std::max(out.modulus, std::abs(t.lambda));
    for (const auto &t : cf.exp_terms) {
        if (std::abs(t.lambda) >= out.modulus * (1.0 - tol)) {
            out.dominant.push_back(t);
            out.degree = std::max(out.degree, t.degree());
        }
    }
    out.oscillatory = out.dominant.size() >= 2;
    if (out.modulus < 1.0 - tol)
        out.kind = GrowthKind::Decaying;
    else if (out.modulus <= 1.0 + tol)
        out.kind = out.degree == 0 ? GrowthKind::Bounded : GrowthKind::PolynomialGrowth;
    else
        out.kind = GrowthKind::ExponentialGrowth;
    return out;
}

} // namespace seqmps
