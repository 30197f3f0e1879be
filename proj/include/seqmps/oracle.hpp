#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "mpo.hpp"
#include "mps.hpp"
#include "sequence.hpp"
#include "types.hpp"

namespace seqmps {

/// Hard caps on dense materialization (entries, not bytes).
struct DenseBudget {
    std::size_t max_state_entries = std::size_t{1} << 14;
    std::size_t max_operator_entries = std::size_t{1} << 14;
};

/// Dense finite-chain realization; basis words are ordered lexicographically
/// with site 1 most significant.
struct DenseChain {
    std::size_t n = 0;
    Matrix data;
};

namespace detail {

inline std::size_t checked_power(std::size_t base, std::size_t exponent, std::size_t cap, const char *what) {
    std::size_t result = 1;
    for (std::size_t i = 0; i < exponent; ++i) {
        if (result > cap / base)
            throw Error(ErrorKind::BudgetExceeded, std::string(what) + " exceeds the dense memory budget");
        result *= base;
    }
    return result;
}

} // namespace detail

/// Dense amplitude vector of length d^n; n = 0 gives the scalar L.R.
inline Vector materialize_state(const MpsState &x, std::size_t n, const DenseBudget &budget = {}) {
    const std::size_t d = x.phys_dim();
    const std::size_t size = detail::checked_power(d, n, budget.max_state_entries, "state vector");
    if (size > budget.max_state_entries)
        throw Error(ErrorKind::BudgetExceeded, "state vector exceeds the dense memory budget");
    // Prefix rows L.M(w_1)...M(w_k), expanded one site at a time.
    std::vector<Eigen::RowVectorXcd> rows{x.left().transpose()};
    for (std::size_t site = 0; site < n; ++site) {
        std::vector<Eigen::RowVectorXcd> next;
        next.reserve(rows.size() * d);
        for (const auto &row : rows)
            for (std::size_t b = 0; b < d; ++b)
                next.push_back(row * x.site(b));
        rows = std::move(next);
    }
    Vector out(static_cast<Eigen::Index>(size));
    for (std::size_t w = 0; w < size; ++w)
        out(static_cast<Eigen::Index>(w)) = (rows[w] * x.right())(0, 0);
    return out;
}

inline DenseChain materialize_state_chain(const MpsState &x, std::size_t n, const DenseBudget &budget = {}) {
    return {n, materialize_state(x, n, budget)};
}

/// Dense d^n x d^n matrix with element ((i),(j)) = L.M(i_1,j_1)...M(i_n,j_n).R.
inline Matrix materialize_operator(const MpoOperator &o, std::size_t n, const DenseBudget &budget = {}) {
    const std::size_t d = o.phys_dim();
    const std::size_t side = detail::checked_power(d, n, budget.max_operator_entries, "operator matrix");
    if (side > budget.max_operator_entries / side)
        throw Error(ErrorKind::BudgetExceeded, "operator matrix exceeds the dense memory budget");
    Matrix out(static_cast<Eigen::Index>(side), static_cast<Eigen::Index>(side));
    // Depth-first over sites, sharing prefixes.
    struct Frame {
        Eigen::RowVectorXcd row;
        std::size_t row_index;
        std::size_t col_index;
    };
    std::vector<Frame> level{{o.left().transpose(), 0, 0}};
    for (std::size_t site = 0; site < n; ++site) {
        std::vector<Frame> next;
        next.reserve(level.size() * d * d);
        for (const auto &f : level)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    next.push_back({f.row * o.site(i, j), f.row_index * d + i, f.col_index * d + j});
        level = std::move(next);
    }
    for (const auto &f : level)
        out(static_cast<Eigen::Index>(f.row_index), static_cast<Eigen::Index>(f.col_index)) =
            (f.row * o.right())(0, 0);
    return out;
}

inline DenseChain materialize_operator_chain(const MpoOperator &o, std::size_t n, const DenseBudget &budget = {}) {
    return {n, materialize_operator(o, n, budget)};
}

inline Complex dense_inner_product(const MpsState &x, const MpsState &y, std::size_t n, const DenseBudget &budget = {}) {
    return materialize_state(x, n, budget).dot(materialize_state(y, n, budget));
}

namespace detail {

/// Depth-first walk over all word pairs (i, j), accumulating
/// conj(v_i) . L M(i_1,j_1)...M(i_n,j_n) R . v_j. Operator entries are produced
/// on the fly, never stored; one prefix row per depth is kept.
class ExpectationWalk {
  public:
    ExpectationWalk(const MpoOperator &o, const Vector &v, std::size_t n)
        : o_(o), v_(v), n_(n), d_(o.phys_dim()), prefixes_(n + 1) {
        for (auto &p : prefixes_)
            p.resize(static_cast<Eigen::Index>(o.bond_dim()));
        prefixes_[0] = o.left().transpose();
    }

    Complex run() {
        visit(0, 0, 0);
        return total_;
    }

  private:
    void visit(std::size_t depth, std::size_t row, std::size_t col) {
        if (depth == n_) {
            const Complex element = prefixes_[depth].transpose().cwiseProduct(o_.right()).sum();
            total_ += std::conj(v_(static_cast<Eigen::Index>(row))) * element * v_(static_cast<Eigen::Index>(col));
            return;
        }
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = 0; j < d_; ++j) {
                prefixes_[depth + 1].noalias() = prefixes_[depth] * o_.site(i, j);
                visit(depth + 1, row * d_ + i, col * d_ + j);
            }
    }

    const MpoOperator &o_;
    const Vector &v_;
    std::size_t n_;
    std::size_t d_;
    std::vector<Eigen::RowVectorXcd> prefixes_;
    Complex total_{0.0, 0.0};
};

} // namespace detail

/// <psi|O|psi> on the dense chain. Operator entries are streamed, so only the
/// d^n state vector is held (state budget applies).
inline Complex dense_expectation(const MpsState &psi, const MpoOperator &o, std::size_t n,
                                 const DenseBudget &budget = {}) {
    require_same_phys_dim(psi.phys_dim(), o.phys_dim());
    const Vector v = materialize_state(psi, n, budget);
    return detail::ExpectationWalk(o, v, n).run();
}

/// Trace from the diagonal words only; the diagonal is a state-sized vector.
inline Complex dense_trace(const MpoOperator &o, std::size_t n, const DenseBudget &budget = {}) {
    std::vector<Matrix> diagonal;
    for (std::size_t b = 0; b < o.phys_dim(); ++b)
        diagonal.push_back(o.site(b, b));
    return materialize_state(MpsState(o.left(), std::move(diagonal), o.right()), n, budget).sum();
}

struct InnerProductQuantity {
    MpsState bra;
    MpsState ket;
};

struct ExpectationQuantity {
    MpsState state;
    MpoOperator op;
};

struct TraceQuantity {
    MpoOperator op;
};

using DenseQuantity = std::variant<InnerProductQuantity, ExpectationQuantity, TraceQuantity>;

inline Complex dense_value(const DenseQuantity &q, std::size_t n, const DenseBudget &budget = {}) {
    return std::visit(
        [&](const auto &v) -> Complex {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, InnerProductQuantity>)
                return dense_inner_product(v.bra, v.ket, n, budget);
            else if constexpr (std::is_same_v<T, ExpectationQuantity>)
                return dense_expectation(v.state, v.op, n, budget);
            else
                return dense_trace(v.op, n, budget);
        },
        q);
}

/// A symbolic sequence paired with the dense quantity it should reproduce.
struct ComparisonRequest {
    SequenceElement symbolic;
    DenseQuantity dense;
};

inline ComparisonRequest inner_product_request(const MpsState &x, const MpsState &y) {
    return {inner_product(x, y), InnerProductQuantity{x, y}};
}

inline ComparisonRequest expectation_request(const MpsState &psi, const MpoOperator &o) {
    return {expectation(psi, o), ExpectationQuantity{psi, o}};
}

inline ComparisonRequest trace_request(const MpoOperator &o) { return {trace(o), TraceQuantity{o}}; }

struct ConsistencyRow {
    std::size_t n;
    Complex symbolic;
    Complex dense;
    double rel_err;
};

struct ConsistencyReport {
    std::vector<ConsistencyRow> rows;
    double tol = 0.0;
    bool passed = true;

    std::optional<std::size_t> first_failure() const {
        for (const auto &r : rows)
            if (!(r.rel_err <= tol))
                return r.n;
        return std::nullopt;
    }

    double max_rel_err() const {
        double worst = 0.0;
        for (const auto &r : rows)
            worst = std::max(worst, r.rel_err);
        return worst;
    }

    /// CSV with columns n, symbolic_re, symbolic_im, dense_re, dense_im, rel_err.
    std::string to_csv() const {
        std::ostringstream out;
        out << "n,symbolic_re,symbolic_im,dense_re,dense_im,rel_err\n";
        char buf[160];
        for (const auto &r : rows) {
            std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g,%.12g,%.6g\n", r.n, r.symbolic.real(),
                          r.symbolic.imag(), r.dense.real(), r.dense.imag(), r.rel_err);
            out << buf;
        }
        return out.str();
    }
};

/// Compares symbolic and dense values for n = 0..n_max; rel_err is
/// |symbolic - dense| / max(1, |dense|). Rows are produced in order of n.
inline ConsistencyReport check_consistency(const ComparisonRequest &request, std::size_t n_max, double tol,
                                           const DenseBudget &budget = {}) {
    ConsistencyReport report;
    report.tol = tol;
    for (std::size_t n = 0; n <= n_max; ++n) {
        const Complex s = request.symbolic(n);
        const Complex d = dense_value(request.dense, n, budget);
        const double err = std::abs(s - d) / std::max(1.0, std::abs(d));
        report.rows.push_back({n, s, d, err});
        if (!(err <= tol))
            report.passed = false;
    }
    return report;
}

} // namespace seqmps
