#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <tuple>
#include <vector>

#include "types.hpp"

namespace seqmps {

/// lambda^n * poly(n); poly coefficients low degree first.
struct ExpTerm {
    Complex lambda;
    std::vector<Complex> poly;

    std::size_t degree() const { return poly.empty() ? 0 : poly.size() - 1; }
};

/// coeff * delta(n, location).
struct DeltaTerm {
    std::size_t location;
    Complex coeff;
};

/// Exponential polynomial plus finitely many delta terms:
///   value(n) = sum_k lambda_k^n * poly_k(n) + sum_l c_l * delta(n, l).
/// Empty term lists represent the zero sequence.
struct ClosedForm {
    std::vector<ExpTerm> exp_terms;
    std::vector<DeltaTerm> delta_terms;

    bool is_zero() const { return exp_terms.empty() && delta_terms.empty(); }

    Complex operator()(std::size_t n) const {
        Complex total{0.0, 0.0};
        const double x = static_cast<double>(n);
        for (const auto &term : exp_terms) {
            Complex p{0.0, 0.0};
            for (auto it = term.poly.rbegin(); it != term.poly.rend(); ++it)
                p = p * x + *it;
            total += ipow(term.lambda, n) * p;
        }
        for (const auto &delta : delta_terms)
            if (delta.location == n)
                total += delta.coeff;
        return total;
    }
};

inline Complex value(const ClosedForm &cf, std::size_t n) { return cf(n); }

/// Drops trailing polynomial coefficients and delta terms with |c| <= tol,
/// merges duplicate delta locations and removes empty exponential terms.
inline ClosedForm strip(ClosedForm cf, double tol) {
    for (auto &term : cf.exp_terms)
        while (!term.poly.empty() && std::abs(term.poly.back()) <= tol)
            term.poly.pop_back();
    std::erase_if(cf.exp_terms, [](const ExpTerm &t) { return t.poly.empty(); });

    std::sort(cf.delta_terms.begin(), cf.delta_terms.end(),
              [](const DeltaTerm &a, const DeltaTerm &b) { return a.location < b.location; });
    std::vector<DeltaTerm> merged;
    for (const auto &d : cf.delta_terms) {
        if (!merged.empty() && merged.back().location == d.location)
            merged.back().coeff += d.coeff;
        else
            merged.push_back(d);
    }
    std::erase_if(merged, [tol](const DeltaTerm &d) { return std::abs(d.coeff) <= tol; });
    cf.delta_terms = std::move(merged);
    return cf;
}

/// Canonical order: exponential terms by descending |lambda|, then descending
/// degree, then real part, then imaginary part; deltas by location.
inline ClosedForm canonical_order(ClosedForm cf) {
    auto key = [](const ExpTerm &t) {
        return std::make_tuple(-std::abs(t.lambda), -static_cast<long>(t.degree()),
                               t.lambda.real(), t.lambda.imag());
    };
    std::stable_sort(cf.exp_terms.begin(), cf.exp_terms.end(),
                     [&](const ExpTerm &a, const ExpTerm &b) { return key(a) < key(b); });
    std::stable_sort(cf.delta_terms.begin(), cf.delta_terms.end(),
                     [](const DeltaTerm &a, const DeltaTerm &b) { return a.location < b.location; });
    return cf;
}

/// Monomial coefficients of the binomial polynomial C(n, k) = n(n-1)...(n-k+1)/k!.
inline std::vector<double> binomial_polynomial(std::size_t k) {
    std::vector<double> coeffs{1.0};
    for (std::size_t t = 0; t < k; ++t) {
        std::vector<double> next(coeffs.size() + 1, 0.0);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            next[i + 1] += coeffs[i];
            next[i] -= static_cast<double>(t) * coeffs[i];
        }
        coeffs = std::move(next);
    }
    double factorial = 1.0;
    for (std::size_t t = 2; t <= k; ++t)
        factorial *= static_cast<double>(t);
    for (auto &c : coeffs)
        c /= factorial;
    return coeffs;
}

/// Coefficients b_k with poly(n) = sum_k b_k * C(n, k), via n^j = sum_k S(j,k) k! C(n,k).
inline std::vector<Complex> monomial_to_binomial_basis(const std::vector<Complex> &poly) {
    const std::size_t size = poly.size();
    std::vector<Complex> out(size, Complex{0.0, 0.0});
    // stirling[j][k] for the current j, built row by row.
    std::vector<double> stirling{1.0};
    for (std::size_t j = 0; j < size; ++j) {
        if (j > 0) {
            std::vector<double> next(j + 1, 0.0);
            for (std::size_t k = 1; k <= j; ++k) {
                const double prev_same = k < stirling.size() ? stirling[k] : 0.0;
                next[k] = static_cast<double>(k) * prev_same + stirling[k - 1];
            }
            stirling = std::move(next);
        }
        double factorial = 1.0;
        for (std::size_t k = 0; k <= j; ++k) {
            if (k > 0)
                factorial *= static_cast<double>(k);
            out[k] += poly[j] * stirling[k] * factorial;
        }
    }
    return out;
}

} // namespace seqmps
