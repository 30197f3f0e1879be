#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "error.hpp"
#include "mpo.hpp"
#include "mps.hpp"
#include "types.hpp"

namespace seqmps {

namespace pauli {

inline Matrix identity() { return Matrix::Identity(2, 2); }

inline Matrix x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

inline Matrix y() {
    Matrix m(2, 2);
    m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    return m;
}

inline Matrix z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

} // namespace pauli

namespace detail {

inline Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

inline Vector vec2(Complex a, Complex b) {
    Vector v(2);
    v << a, b;
    return v;
}

} // namespace detail

/// |0..0> + |1..1>: L = [1 1], R = [1 1]^T, M(0) = diag(1,0), M(1) = diag(0,1).
inline MpsState cat_state() {
    return {detail::vec2(1, 1), {detail::mat2(1, 0, 0, 0), detail::mat2(0, 0, 0, 1)}, detail::vec2(1, 1)};
}

/// Single-excitation superposition: L = [1 0], R = [0 1]^T, M(0) = I, M(1) = [[0,1],[0,0]].
inline MpsState w_state() {
    return {detail::vec2(1, 0), {detail::mat2(1, 0, 0, 1), detail::mat2(0, 1, 0, 0)}, detail::vec2(0, 1)};
}

/// Product state with single-site amplitudes a (m = 1, M(b) = a_b).
inline MpsState product_state(const std::vector<Complex> &amplitudes) {
    if (amplitudes.size() < 2)
        throw Error(ErrorKind::InvalidParams, "product state needs at least two amplitudes");
    std::vector<Matrix> sites;
    for (auto a : amplitudes)
        sites.push_back(Matrix::Constant(1, 1, a));
    return {Vector::Ones(1), std::move(sites), Vector::Ones(1)};
}

/// (alpha |0>)^(x)n on qubits.
inline MpsState product_state(Complex alpha = 1.0) { return product_state({alpha, 0.0}); }

/// Sum over sites of a single-site operator; defaults to sigma_Z.
inline MpoOperator field_operator(const Matrix &single_site = pauli::z()) {
    return local_window_mpo({single_site});
}

/// Ordered pairs j<k of sigma_Z^j sigma_Z^k with a pass-through middle channel,
/// scaled by 2 to count both orders (sum over j != k).
inline MpoOperator pair_coupling_operator() {
    const Matrix id = pauli::identity();
    const Matrix z = pauli::z();
    std::vector<Matrix> sites;
    for (Eigen::Index i = 0; i < 2; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            Matrix s = Matrix::Zero(3, 3);
            s(0, 0) = s(1, 1) = s(2, 2) = id(i, j);
            s(0, 1) = s(1, 2) = z(i, j);
            sites.push_back(std::move(s));
        }
    }
    Vector left = Vector::Zero(3), right = Vector::Zero(3);
    left(0) = 1.0;
    right(2) = 1.0;
    return op_scale(SequenceElement::constant(2.0), MpoOperator(2, left, std::move(sites), right));
}

/// Mixed single-excitation state: M(i,j) = [[d(ij,00), d(ij,11)], [0, d(ij,00)]].
inline MpoOperator w_density() {
    std::vector<Matrix> sites;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double zero_zero = (i == 0 && j == 0) ? 1.0 : 0.0;
            const double one_one = (i == 1 && j == 1) ? 1.0 : 0.0;
            sites.push_back(detail::mat2(zero_zero, one_one, 0, zero_zero));
        }
    }
    return {2, detail::vec2(1, 0), std::move(sites), detail::vec2(0, 1)};
}

using Entity = std::variant<MpsState, MpoOperator>;

enum class BuiltinName { Cat, WState, Product, WDensity, Field, PairCoupling, IdentityOp, LocalWindow };

/// Builtin reference with name-specific parameters: amplitudes for product,
/// the single-site matrix for field (empty = sigma_Z), factors for local_window,
/// phys_dim for identity_op.
struct BuiltinId {
    BuiltinName name;
    std::vector<Complex> amplitudes;
    std::vector<Matrix> matrices;
    std::size_t phys_dim = 2;
};

inline BuiltinName builtin_name(std::string_view text) {
    if (text == "cat")
        return BuiltinName::Cat;
    if (text == "w_state" || text == "w")
        return BuiltinName::WState;
    if (text == "product")
        return BuiltinName::Product;
    if (text == "w_density")
        return BuiltinName::WDensity;
    if (text == "field")
        return BuiltinName::Field;
    if (text == "pair_coupling")
        return BuiltinName::PairCoupling;
    if (text == "identity_op" || text == "identity")
        return BuiltinName::IdentityOp;
    if (text == "local_window")
        return BuiltinName::LocalWindow;
    throw Error(ErrorKind::InvalidParams, "unknown builtin '" + std::string(text) + "'");
}

inline Entity build(const BuiltinId &id) {
    switch (id.name) {
    case BuiltinName::Cat: return cat_state();
    case BuiltinName::WState: return w_state();
    case BuiltinName::Product:
        if (id.amplitudes.empty())
            return product_state();
        if (id.amplitudes.size() == 1)
            return product_state(id.amplitudes.front());
        return product_state(id.amplitudes);
    case BuiltinName::WDensity: return w_density();
    case BuiltinName::Field:
        if (id.matrices.empty())
            return field_operator();
        if (id.matrices.size() != 1 || id.matrices.front().rows() != id.matrices.front().cols() ||
            id.matrices.front().rows() < 2)
            throw Error(ErrorKind::InvalidParams, "field takes one square single-site matrix");
        return field_operator(id.matrices.front());
    case BuiltinName::PairCoupling: return pair_coupling_operator();
    case BuiltinName::IdentityOp:
        if (id.phys_dim < 2)
            throw Error(ErrorKind::InvalidParams, "identity_op needs phys_dim >= 2");
        return identity_operator(id.phys_dim);
    case BuiltinName::LocalWindow:
        if (id.matrices.empty())
            throw Error(ErrorKind::InvalidParams, "local_window needs at least one factor");
        for (const auto &m : id.matrices)
            if (m.rows() != m.cols() || m.rows() != id.matrices.front().rows() || m.rows() < 2)
                throw Error(ErrorKind::InvalidParams, "local_window factors must share one square shape");
        return local_window_mpo(id.matrices);
    }
    throw Error(ErrorKind::InvalidParams, "unhandled builtin");
}

} // namespace seqmps
