#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace umc {

// Kronecker product, dense and eager. A acts on the more significant index
// block, B on the less significant one, matching the qubit-0-is-least-
// significant amplitude convention used throughout.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                              a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b.derived();
    return out;
}

// Embeds a k-qubit operator acting on the listed qubits into an n-qubit
// operator. Qubit indices address amplitude bits (qubit 0 = least
// significant); `qubits[0]` is the least significant axis of `op`.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> embed_operator(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& op,
    const std::vector<int>& qubits, int n_qubits) {
    const int k = static_cast<int>(qubits.size());
    const Eigen::Index dk = Eigen::Index(1) << k;
    if (op.rows() != dk || op.cols() != dk)
        throw std::invalid_argument("embed_operator: operator size does not match qubit count");
    const Eigen::Index d = Eigen::Index(1) << n_qubits;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(d, d);
    const Eigen::Index n_rest = d >> k;
    for (Eigen::Index rest = 0; rest < n_rest; ++rest) {
        // Scatter the `rest` bits into the non-addressed qubit positions.
        Eigen::Index base = 0, r = rest;
        for (int q = 0, used = 0; q < n_qubits; ++q) {
            bool addressed = false;
            for (int a : qubits) addressed = addressed || (a == q);
            if (addressed) { ++used; continue; }
            base |= (r & 1) << q;
            r >>= 1;
            (void)used;
        }
        for (Eigen::Index i = 0; i < dk; ++i) {
            Eigen::Index row = base;
            for (int b = 0; b < k; ++b) row |= ((i >> b) & 1) << qubits[b];
            for (Eigen::Index j = 0; j < dk; ++j) {
                Eigen::Index col = base;
                for (int b = 0; b < k; ++b) col |= ((j >> b) & 1) << qubits[b];
                out(row, col) = op(i, j);
            }
        }
    }
    return out;
}

// Partial trace over the second (output) tensor factor of a (da*db)x(da*db)
// matrix, returning a da x da matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> partial_trace_second(
    const Eigen::MatrixBase<Derived>& m, Eigen::Index da, Eigen::Index db) {
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
        Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j)
            for (Eigen::Index y = 0; y < db; ++y) out(i, j) += m(i * db + y, j * db + y);
    return out;
}

// Partial trace over the first tensor factor, returning a db x db matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> partial_trace_first(
    const Eigen::MatrixBase<Derived>& m, Eigen::Index da, Eigen::Index db) {
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
        Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(db, db);
    for (Eigen::Index x = 0; x < da; ++x)
        for (Eigen::Index i = 0; i < db; ++i)
            for (Eigen::Index j = 0; j < db; ++j) out(i, j) += m(x * db + i, x * db + j);
    return out;
}

}  // namespace umc
