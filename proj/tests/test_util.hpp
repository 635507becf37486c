#pragma once

// Shared helpers for the test suites. Random objects are generated from an
// explicit Rng so every test is reproducible from its literal seed.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "umc/pauli.hpp"
#include "umc/qcore.hpp"
#include "umc/rng.hpp"

namespace testutil {

inline Eigen::MatrixXcd ginibre(int rows, int cols, umc::Rng& rng) {
    Eigen::MatrixXcd g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = std::complex<double>(rng.normal(), rng.normal());
    return g;
}

// Haar-ish random unitary via QR of a Ginibre matrix with phase fixing.
inline Eigen::MatrixXcd random_unitary(int d, umc::Rng& rng) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(ginibre(d, d, rng));
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        std::complex<double> ph = r(i, i) / std::abs(r(i, i));
        q.col(i) *= ph;
    }
    return q;
}

// Random CPTP channel from a Stinespring isometry: QR of a (d*k) x d Ginibre
// matrix gives an isometry whose d x d blocks are Kraus operators.
inline umc::KrausChannel random_cptp(int n_qubits, int n_kraus, umc::Rng& rng) {
    const int d = 1 << n_qubits;
    Eigen::MatrixXcd g = ginibre(d * n_kraus, d, rng);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd v = qr.householderQ() * Eigen::MatrixXcd::Identity(d * n_kraus, d);
    umc::KrausChannel k;
    k.n_qubits = n_qubits;
    for (int m = 0; m < n_kraus; ++m) k.ops.push_back(v.block(m * d, 0, d, d));
    return k;
}

inline umc::DensityMatrix random_density(int n_qubits, umc::Rng& rng) {
    const int d = 1 << n_qubits;
    Eigen::MatrixXcd g = ginibre(d, d, rng);
    Eigen::MatrixXcd rho = g * g.adjoint();
    rho /= rho.trace().real();
    return {n_qubits, rho};
}

inline umc::StateVector random_pure(int n_qubits, umc::Rng& rng) {
    const int d = 1 << n_qubits;
    Eigen::VectorXcd v(d);
    for (int i = 0; i < d; ++i) v(i) = std::complex<double>(rng.normal(), rng.normal());
    v.normalize();
    return {n_qubits, v};
}

// Depolarizing channel as an explicit Kraus set (independent construction
// used as an oracle against closed-form transfer matrices).
inline umc::KrausChannel depolarizing_kraus(double p) {
    umc::KrausChannel k;
    k.n_qubits = 1;
    k.ops.push_back(std::sqrt(1.0 - 0.75 * p) * umc::pauli_1q(0));
    for (int i = 1; i <= 3; ++i) k.ops.push_back(std::sqrt(0.25 * p) * umc::pauli_1q(i));
    return k;
}

}  // namespace testutil
