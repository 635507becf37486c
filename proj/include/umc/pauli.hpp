#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "umc/tensor.hpp"

namespace umc {

using complexd = std::complex<double>;

// Single-qubit Paulis in the fixed order I, X, Y, Z.
const Eigen::Matrix2cd& pauli_1q(int i);

// n-qubit Pauli product. The index is a base-4 string with one digit per
// qubit, qubit 0 stored in the least significant digit:
//   index = sum_q digit_q * 4^q,  digit in {0:I, 1:X, 2:Y, 3:Z}.
Eigen::MatrixXcd pauli_product(int n_qubits, int index);

// Hilbert-Schmidt orthonormal Hermitian basis B_i = P_i / sqrt(d). The full
// table for n qubits is cached; entries are valid for the process lifetime.
const std::vector<Eigen::MatrixXcd>& normalized_pauli_basis(int n_qubits);

// Bloch rotations, angle in radians: R_a(t) = exp(-i t P_a / 2).
Eigen::Matrix2cd rx(double theta);
Eigen::Matrix2cd ry(double theta);
Eigen::Matrix2cd rz(double theta);

// Euler-form single-qubit unitary U = Rz(t1) Ry(t2) Rz(t3).
Eigen::Matrix2cd zyz_unitary(double t1, double t2, double t3);

// Recovers Euler angles (up to global phase) with zyz_unitary(result) ~ U.
std::array<double, 3> zyz_angles(const Eigen::Matrix2cd& u);

// The 24 single-qubit Cliffords as unitaries, deduplicated up to phase.
// The order is fixed: identity first, then products of H and S sorted by
// word length, so the table is stable across runs.
const std::vector<Eigen::Matrix2cd>& clifford_1q_table();

inline double wrap_angle(double t) {
    const double two_pi = 6.283185307179586476925286766559;
    t = std::fmod(t, two_pi);
    if (t < 0) t += two_pi;
    return t;
}

}  // namespace umc
