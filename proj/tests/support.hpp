#pragma once

// Seeded generators and test-side oracles. Nothing here calls the code under
// test except for constructors of value types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include <seqmps/seqmps.hpp>

namespace testing_support {

using seqmps::Complex;
using seqmps::Matrix;
using seqmps::Vector;

using Rng = std::mt19937_64;

inline double uniform(Rng &rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline std::size_t pick(Rng &rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Complex random_complex(Rng &rng, double scale = 1.0) {
    return {scale * uniform(rng, -1.0, 1.0), scale * uniform(rng, -1.0, 1.0)};
}

inline Matrix random_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = random_complex(rng, scale);
    return m;
}

inline Vector random_vector(Rng &rng, Eigen::Index size, double scale = 1.0) {
    return random_matrix(rng, size, 1, scale).col(0);
}

/// Entries scaled by 1/sqrt(dim) so powers stay moderate.
inline seqmps::SequenceElement random_sequence(Rng &rng, std::size_t dim) {
    const auto m = static_cast<Eigen::Index>(dim);
    return {random_vector(rng, m), random_matrix(rng, m, m, 1.0 / std::sqrt(static_cast<double>(dim))),
            random_vector(rng, m)};
}

inline seqmps::MpsState random_state(Rng &rng, std::size_t d, std::size_t m) {
    const auto mm = static_cast<Eigen::Index>(m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m * d));
    std::vector<Matrix> sites;
    for (std::size_t b = 0; b < d; ++b)
        sites.push_back(random_matrix(rng, mm, mm, scale));
    return {random_vector(rng, mm), std::move(sites), random_vector(rng, mm)};
}

inline seqmps::MpoOperator random_operator(Rng &rng, std::size_t d, std::size_t m) {
    const auto mm = static_cast<Eigen::Index>(m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m * d));
    std::vector<Matrix> sites;
    for (std::size_t b = 0; b < d * d; ++b)
        sites.push_back(random_matrix(rng, mm, mm, scale));
    return {d, random_vector(rng, mm), std::move(sites), random_vector(rng, mm)};
}

/// Distinct nonzero lambdas with |lambda| <= 2, kept apart by at least 0.3.
inline seqmps::ClosedForm random_closed_form(Rng &rng, std::size_t max_terms = 3, std::size_t max_degree = 3,
                                             std::size_t max_deltas = 2, std::size_t max_location = 4) {
    seqmps::ClosedForm cf;
    const std::size_t terms = pick(rng, 0, max_terms);
    while (cf.exp_terms.size() < terms) {
        const double radius = uniform(rng, 0.3, 2.0);
        const double angle = uniform(rng, -M_PI, M_PI);
        const Complex lambda = std::polar(radius, angle);
        bool far = true;
        for (const auto &t : cf.exp_terms)
            far = far && std::abs(t.lambda - lambda) > 0.3;
        if (!far)
            continue;
        seqmps::ExpTerm t;
        t.lambda = lambda;
        const std::size_t degree = pick(rng, 0, max_degree);
        for (std::size_t k = 0; k <= degree; ++k)
            t.poly.push_back(random_complex(rng));
        if (std::abs(t.poly.back()) < 0.2)
            t.poly.back() += 0.5;
        cf.exp_terms.push_back(std::move(t));
    }
    const std::size_t deltas = pick(rng, 0, max_deltas);
    std::vector<std::size_t> used;
    while (cf.delta_terms.size() < deltas) {
        const std::size_t l = pick(rng, 0, max_location);
        if (std::find(used.begin(), used.end(), l) != used.end())
            continue;
        used.push_back(l);
        Complex c = random_complex(rng);
        if (std::abs(c) < 0.2)
            c += 0.5;
        cf.delta_terms.push_back({l, c});
    }
    return cf;
}

/// Direct evaluation of a closed form: sum lambda^n poly(n) + sum c delta(n,l).
inline Complex closed_form_oracle(const seqmps::ClosedForm &cf, std::size_t n) {
    Complex total{0.0, 0.0};
    for (const auto &t : cf.exp_terms) {
        Complex p{0.0, 0.0};
        for (std::size_t k = t.poly.size(); k-- > 0;)
            p = p * static_cast<double>(n) + t.poly[k];
        total += std::pow(t.lambda, static_cast<double>(n)) * p;
    }
    for (const auto &d : cf.delta_terms)
        if (d.location == n)
            total += d.coeff;
    return total;
}

/// L M^n R by n explicit matrix-matrix products (no vector shortcut).
inline Complex repeated_multiplication(const Vector &left, const Matrix &core, const Vector &right, std::size_t n) {
    Matrix power = Matrix::Identity(core.rows(), core.cols());
    for (std::size_t i = 0; i < n; ++i)
        power = power * core;
    return (left.transpose() * power * right)(0, 0);
}

inline Matrix matrix_power(const Matrix &m, std::size_t n) {
    Matrix power = Matrix::Identity(m.rows(), m.cols());
    for (std::size_t i = 0; i < n; ++i)
        power = power * m;
    return power;
}

/// Characteristic polynomial coefficients c_0..c_{k-1} (monic, c_k = 1) via
/// Faddeev-LeVerrier.
inline std::vector<Complex> characteristic_polynomial(const Matrix &a) {
    const auto k = a.rows();
    std::vector<Complex> c(static_cast<std::size_t>(k) + 1);
    c[static_cast<std::size_t>(k)] = 1.0;
    Matrix m = Matrix::Zero(k, k);
    for (Eigen::Index j = 1; j <= k; ++j) {
        m = a * m + c[static_cast<std::size_t>(k - j + 1)] * Matrix::Identity(k, k);
        c[static_cast<std::size_t>(k - j)] = -(a * m).trace() / static_cast<double>(j);
    }
    return c;
}

/// Extends seed values f(0..k-1) with the recurrence from the characteristic polynomial.
inline std::vector<Complex> recurrence_extend(const std::vector<Complex> &charpoly, std::vector<Complex> values,
                                              std::size_t count) {
    const std::size_t k = charpoly.size() - 1;
    while (values.size() < count) {
        const std::size_t n = values.size() - k;
        Complex next{0.0, 0.0};
        for (std::size_t j = 0; j < k; ++j)
            next -= charpoly[j] * values[n + j];
        values.push_back(next);
    }
    return values;
}

/// Basis word for index w at length n, site 1 most significant.
inline std::vector<std::size_t> word_of(std::size_t w, std::size_t n, std::size_t d) {
    std::vector<std::size_t> word(n);
    for (std::size_t k = n; k-- > 0;) {
        word[k] = w % d;
        w /= d;
    }
    return word;
}

/// Brute-force amplitude of a word: explicit product over sites.
inline Complex amplitude(const seqmps::MpsState &x, const std::vector<std::size_t> &word) {
    Matrix prod = Matrix::Identity(static_cast<Eigen::Index>(x.bond_dim()), static_cast<Eigen::Index>(x.bond_dim()));
    for (auto b : word)
        prod = prod * x.site(b);
    return (x.left().transpose() * prod * x.right())(0, 0);
}

inline Vector brute_state(const seqmps::MpsState &x, std::size_t n) {
    std::size_t size = 1;
    for (std::size_t i = 0; i < n; ++i)
        size *= x.phys_dim();
    Vector v(static_cast<Eigen::Index>(size));
    for (std::size_t w = 0; w < size; ++w)
        v(static_cast<Eigen::Index>(w)) = amplitude(x, word_of(w, n, x.phys_dim()));
    return v;
}

inline Matrix brute_operator(const seqmps::MpoOperator &o, std::size_t n) {
    std::size_t size = 1;
    for (std::size_t i = 0; i < n; ++i)
        size *= o.phys_dim();
    const auto m = static_cast<Eigen::Index>(o.bond_dim());
    Matrix out(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
    for (std::size_t r = 0; r < size; ++r) {
        const auto rw = word_of(r, n, o.phys_dim());
        for (std::size_t c = 0; c < size; ++c) {
            const auto cw = word_of(c, n, o.phys_dim());
            Matrix prod = Matrix::Identity(m, m);
            for (std::size_t k = 0; k < n; ++k)
                prod = prod * o.site(rw[k], cw[k]);
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                (o.left().transpose() * prod * o.right())(0, 0);
        }
    }
    return out;
}

/// Kronecker sum over sites of a single-site operator: sum_k I..A..I.
inline Matrix kron_sum(const Matrix &a, std::size_t n) {
    const auto d = a.rows();
    Eigen::Index size = 1;
    for (std::size_t i = 0; i < n; ++i)
        size *= d;
    Matrix out = Matrix::Zero(size, size);
    for (std::size_t k = 0; k < n; ++k) {
        Matrix term = Matrix::Identity(1, 1);
        for (std::size_t s = 0; s < n; ++s)
            term = seqmps::kron(term, s == k ? a : Matrix(Matrix::Identity(d, d)));
        out += term;
    }
    return out;
}

/// Random isometry V: C^m -> C^d (x) C^m, returned as site matrices.
inline std::vector<Matrix> random_isometry_sites(Rng &rng, std::size_t d, std::size_t m) {
    const auto mm = static_cast<Eigen::Index>(m);
    const auto dd = static_cast<Eigen::Index>(d);
    const Matrix g = random_matrix(rng, dd * mm, mm);
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ() * Matrix::Identity(dd * mm, mm);
    std::vector<Matrix> sites;
    for (Eigen::Index i = 0; i < dd; ++i)
        sites.push_back(q.middleRows(i * mm, mm));
    return sites;
}

inline double rel_err(Complex got, Complex want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

} // namespace testing_support
