#include "umc/qcore.hpp"

#include <cmath>
#include <stdexcept>

#include "umc/pauli.hpp"

namespace umc {

namespace {

double hs_inner_real(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    // Tr(a^dag b) for Hermitian a; the real part is exact for our uses.
    return (a.adjoint() * b).trace().real();
}

}  // namespace

StateVector make_zero_state(int n_qubits) {
    StateVector psi;
    psi.n_qubits = n_qubits;
    psi.amp = Eigen::VectorXcd::Zero(Eigen::Index(1) << n_qubits);
    psi.amp(0) = 1.0;
    return psi;
}

DensityMatrix density_from_state(const StateVector& psi) {
    return {psi.n_qubits, psi.amp * psi.amp.adjoint()};
}

Eigen::VectorXd pauli_vector(const DensityMatrix& rho) {
    const auto& basis = normalized_pauli_basis(rho.n_qubits);
    Eigen::VectorXd v(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) v(i) = hs_inner_real(basis[i], rho.rho);
    return v;
}

DensityMatrix density_from_pauli_vector(const Eigen::VectorXd& v, int n_qubits) {
    const auto& basis = normalized_pauli_basis(n_qubits);
    if (v.size() != Eigen::Index(basis.size()))
        throw std::invalid_argument("density_from_pauli_vector: size mismatch");
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(basis[0].rows(), basis[0].cols());
    for (std::size_t i = 0; i < basis.size(); ++i) rho += v(i) * basis[i];
    return {n_qubits, rho};
}

Superoperator identity_superop(int n_qubits) {
    const Eigen::Index dim = Eigen::Index(1) << (2 * n_qubits);
    return {n_qubits, Eigen::MatrixXd::Identity(dim, dim)};
}

Superoperator kraus_to_ptm(const KrausChannel& k) {
    const auto& basis = normalized_pauli_basis(k.n_qubits);
    const Eigen::Index dim = basis.size();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& op : k.ops) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            const Eigen::MatrixXcd image = op * basis[j] * op.adjoint();
            for (Eigen::Index i = 0; i < dim; ++i) s(i, j) += hs_inner_real(basis[i], image);
        }
    }
    return {k.n_qubits, s};
}

Superoperator unitary_to_ptm(const Eigen::MatrixXcd& u) {
    int n = 0;
    while ((Eigen::Index(1) << n) < u.rows()) ++n;
    KrausChannel k{n, {u}};
    return kraus_to_ptm(k);
}

ChoiMatrix kraus_to_choi(const KrausChannel& k) {
    // The Choi matrix is a sum of outer products of vectorized Kraus
    // operators: J = sum_m |v_m><v_m| with v_m[(i,a)] = K_m[a,i].
    const Eigen::Index d = Eigen::Index(1) << k.n_qubits;
    Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(d * d, d * d);
    for (const auto& op : k.ops) {
        Eigen::VectorXcd v(d * d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index a = 0; a < d; ++a) v(i * d + a) = op(a, i);
        j += v * v.adjoint();
    }
    return {k.n_qubits, j};
}

ChoiMatrix ptm_to_choi(const Superoperator& s) {
    // J = sum_kl S_kl B_l^T (x) B_k; the map S -> J is a Frobenius isometry.
    const auto& basis = normalized_pauli_basis(s.n_qubits);
    const Eigen::Index dim = basis.size();
    const Eigen::Index d = Eigen::Index(1) << s.n_qubits;
    Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(d * d, d * d);
    for (Eigen::Index k = 0; k < dim; ++k) {
        for (Eigen::Index l = 0; l < dim; ++l) {
            const double w = s.ptm(k, l);
            if (w == 0.0) continue;
            j += w * kron(basis[l].transpose().eval(), basis[k]);
        }
    }
    return {s.n_qubits, j};
}

Superoperator choi_to_ptm(const ChoiMatrix& j) {
    const auto& basis = normalized_pauli_basis(j.n_qubits);
    const Eigen::Index dim = basis.size();
    Eigen::MatrixXd s(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k)
        for (Eigen::Index l = 0; l < dim; ++l)
            s(k, l) = (kron(basis[l].transpose().eval(), basis[k]).adjoint() * j.j).trace().real();
    return {j.n_qubits, s};
}

Superoperator compose(const Superoperator& b, const Superoperator& a) {
    if (a.n_qubits != b.n_qubits) throw std::invalid_argument("compose: qubit count mismatch");
    return {a.n_qubits, b.ptm * a.ptm};
}

CptpReport validate_cptp(const Superoperator& s, double cp_tol, double tp_tol) {
    CptpReport rep;
    const Eigen::Index dim = s.ptm.rows();
    double dev = std::abs(s.ptm(0, 0) - 1.0);
    for (Eigen::Index j = 1; j < dim; ++j) dev = std::max(dev, std::abs(s.ptm(0, j)));
    rep.first_row_deviation = dev;
    rep.trace_preserving = dev <= tp_tol;

    const ChoiMatrix j = ptm_to_choi(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (j.j + j.j.adjoint()),
                                                       Eigen::EigenvaluesOnly);
    rep.min_choi_eigenvalue = es.eigenvalues().minCoeff();
    rep.completely_positive = rep.min_choi_eigenvalue >= -cp_tol;
    return rep;
}

double process_fidelity(const Superoperator& s, const Superoperator& target) {
    if (s.ptm.rows() != target.ptm.rows())
        throw std::invalid_argument("process_fidelity: dimension mismatch");
    const double d2 = static_cast<double>(s.ptm.rows());
    return (target.ptm.transpose() * s.ptm).trace() / d2;
}

double average_gate_fidelity(const Superoperator& s, const Superoperator& target) {
    const double d = static_cast<double>(Eigen::Index(1) << s.n_qubits);
    return (d * process_fidelity(s, target) + 1.0) / (d + 1.0);
}

double state_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ea(a.rho);
    Eigen::VectorXd lam = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXcd sqrt_a =
        ea.eigenvectors() * lam.asDiagonal() * ea.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> em(sqrt_a * b.rho * sqrt_a,
                                                       Eigen::EigenvaluesOnly);
    double t = 0.0;
    for (Eigen::Index i = 0; i < em.eigenvalues().size(); ++i)
        t += std::sqrt(std::max(0.0, em.eigenvalues()(i)));
    return t * t;
}

void apply_superop_pauli(const Superoperator& s, Eigen::VectorXd& v, int n_qubits,
                         const std::vector<int>& qubits) {
    const int k = static_cast<int>(qubits.size());
    if (s.n_qubits != k) throw std::invalid_argument("apply_superop_pauli: arity mismatch");
    const Eigen::Index dk2 = Eigen::Index(1) << (2 * k);
    const Eigen::Index dim = Eigen::Index(1) << (2 * n_qubits);
    if (v.size() != dim) throw std::invalid_argument("apply_superop_pauli: size mismatch");

    // The n-qubit Pauli index is a base-4 string; the superoperator mixes the
    // digits of the addressed qubits and leaves the rest alone.
    const Eigen::Index n_rest = dim >> (2 * k);
    Eigen::VectorXd in(dk2), out(dk2);
    for (Eigen::Index rest = 0; rest < n_rest; ++rest) {
        Eigen::Index base = 0, r = rest;
        for (int q = 0; q < n_qubits; ++q) {
            bool addressed = false;
            for (int a : qubits) addressed = addressed || (a == q);
            if (addressed) continue;
            base |= (r & 3) << (2 * q);
            r >>= 2;
        }
        for (Eigen::Index i = 0; i < dk2; ++i) {
            Eigen::Index idx = base;
            for (int b = 0; b < k; ++b) idx |= ((i >> (2 * b)) & 3) << (2 * qubits[b]);
            in(i) = v(idx);
        }
        out.noalias() = s.ptm * in;
        for (Eigen::Index i = 0; i < dk2; ++i) {
            Eigen::Index idx = base;
            for (int b = 0; b < k; ++b) idx |= ((i >> (2 * b)) & 3) << (2 * qubits[b]);
            v(idx) = out(i);
        }
    }
}

DensityMatrix apply_superop(const Superoperator& s, const DensityMatrix& rho,
                            const std::vector<int>& qubits) {
    Eigen::VectorXd v = pauli_vector(rho);
    apply_superop_pauli(s, v, rho.n_qubits, qubits);
    return density_from_pauli_vector(v, rho.n_qubits);
}

}  // namespace umc
