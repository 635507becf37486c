#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace umc {

// Conventions used by every module:
//  * Qubit 0 addresses the least significant amplitude index.
//  * Channels are stored as Pauli transfer matrices over the normalized
//    Pauli basis B_i = P_i / sqrt(d), so entries are real and the first row
//    of any trace-preserving map is (1, 0, ..., 0).
//  * Choi matrices carry the trace normalization Tr J = d; the identity
//    channel's Choi is the maximally entangled projector scaled to trace d.

struct StateVector {
    int n_qubits = 0;
    Eigen::VectorXcd amp;  // dimension 2^n
};

struct DensityMatrix {
    int n_qubits = 0;
    Eigen::MatrixXcd rho;  // 2^n x 2^n, Hermitian, unit trace
};

struct Superoperator {
    int n_qubits = 0;
    Eigen::MatrixXd ptm;  // 4^n x 4^n, real
};

struct ChoiMatrix {
    int n_qubits = 0;
    Eigen::MatrixXcd j;  // d^2 x d^2 on (input x output), Tr J = d for TP maps
};

struct KrausChannel {
    int n_qubits = 0;
    std::vector<Eigen::MatrixXcd> ops;
};

StateVector make_zero_state(int n_qubits);
DensityMatrix density_from_state(const StateVector& psi);

// Vectorization |rho>>_i = Tr(B_i rho) and its inverse.
Eigen::VectorXd pauli_vector(const DensityMatrix& rho);
DensityMatrix density_from_pauli_vector(const Eigen::VectorXd& v, int n_qubits);

Superoperator identity_superop(int n_qubits);
Superoperator kraus_to_ptm(const KrausChannel& k);
Superoperator unitary_to_ptm(const Eigen::MatrixXcd& u);
ChoiMatrix kraus_to_choi(const KrausChannel& k);
ChoiMatrix ptm_to_choi(const Superoperator& s);
Superoperator choi_to_ptm(const ChoiMatrix& j);

// Composition "b after a": apply_superop(compose(b, a), rho) equals applying
// a first, then b. In matrix terms this is b.ptm * a.ptm.
Superoperator compose(const Superoperator& b, const Superoperator& a);

struct CptpReport {
    bool trace_preserving = false;
    bool completely_positive = false;
    double first_row_deviation = 0.0;  // max |first row - e1|
    double min_choi_eigenvalue = 0.0;
    bool ok() const { return trace_preserving && completely_positive; }
};

// TP is tested on the first PTM row; CP on the spectrum of the Choi matrix.
CptpReport validate_cptp(const Superoperator& s, double cp_tol = 1e-8, double tp_tol = 1e-9);

// Process fidelity Tr(S_target^T S) / d^2 between PTMs.
double process_fidelity(const Superoperator& s, const Superoperator& target);

// Average gate fidelity F_avg = (d F_pro + 1) / (d + 1).
double average_gate_fidelity(const Superoperator& s, const Superoperator& target);

// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
double state_fidelity(const DensityMatrix& a, const DensityMatrix& b);

// Applies a k-qubit superoperator to the listed qubits of an n-qubit state.
DensityMatrix apply_superop(const Superoperator& s, const DensityMatrix& rho,
                            const std::vector<int>& qubits);

// Same embedding, acting on a Pauli vector in place (used by the exact
// density-matrix backend, which keeps states in Pauli coordinates).
void apply_superop_pauli(const Superoperator& s, Eigen::VectorXd& v, int n_qubits,
                         const std::vector<int>& qubits);

}  // namespace umc
