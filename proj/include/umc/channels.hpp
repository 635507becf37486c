#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "umc/gateset.hpp"
#include "umc/qcore.hpp"

namespace umc {

// ---------------------------------------------------------------------------
// Parametrized channel families.
// ---------------------------------------------------------------------------

// Single-qubit unitary, Euler form U = Rz(t1) Ry(t2) Rz(t3).
struct UnitaryParams1Q {
    std::array<double, 3> theta{0, 0, 0};
};

// Two-qubit unitary U = exp(-i sum_k theta[k-1] P_k) over the 15 non-identity
// Pauli products, ordered by the base-4 index (qubit 0 = least significant
// digit): IX, IY, IZ, XI, XX, XY, XZ, YI, YX, YY, YZ, ZI, ZX, ZY, ZZ,
// where the left letter acts on qubit 1 and the right letter on qubit 0.
struct UnitaryParams2Q {
    std::array<double, 15> theta{};
};

// Measurement channel with Kraus pair {|f1><f|, |f2><fbar|}:
//   |f1> = U(b1,b2,b3)|0>, |f2> = U(b4,b5,b6)|1>,
//   <f| = <0|U(b7,b8,b9), <fbar| = <1|U(b7,b8,b9).
// All beta zero gives the Z-basis dephasing channel {|0><0|, |1><1|}.
struct MeasurementParams {
    std::array<double, 9> beta{};
};

Eigen::Matrix2cd unitary_1q(const UnitaryParams1Q& p);
Eigen::Matrix4cd unitary_2q(const UnitaryParams2Q& p);
KrausChannel measurement_kraus(const MeasurementParams& p);

Superoperator unitary_channel_1q(const UnitaryParams1Q& p);
Superoperator unitary_channel_2q(const UnitaryParams2Q& p);
Superoperator measurement_channel(const MeasurementParams& p);

// One summand of a convex channel mixture. Two-qubit measurement terms are
// tensor products of single-qubit measurement channels; "first" refers to
// qubit 0 (the least significant amplitude index).
struct ChannelTerm {
    enum class Kind {
        Unitary1Q,
        Unitary2Q,
        Measurement1Q,
        MeasurementOnFirst,   // M (on qubit 0) x I (on qubit 1)
        MeasurementOnSecond,  // I x M (on qubit 1)
        MeasurementPair,      // independent M on both qubits
    };
    Kind kind = Kind::Unitary1Q;
    UnitaryParams1Q u1;
    UnitaryParams2Q u2;
    MeasurementParams m_first;   // qubit 0 factor (also the 1q term payload)
    MeasurementParams m_second;  // qubit 1 factor

    int n_qubits() const;
    Superoperator to_ptm() const;
};

// Convex mixture sum_i p_i T_i. Weights must form a probability vector.
Superoperator convex_sum_ptm(const std::vector<double>& p, const std::vector<ChannelTerm>& terms);

// ---------------------------------------------------------------------------
// Error generators and fidelity-targeted scaling.
// ---------------------------------------------------------------------------

// Principal logarithm of G_target^{-1} G_noisy. Throws ValidationError when
// the spectrum touches the closed negative real axis (the principal branch
// is then undefined); no silent branch choice is ever made.
Eigen::MatrixXd error_generator(const Superoperator& target, const Superoperator& noisy);

// G_target * exp(n L). Validates that the scaled map is CPTP within cp_tol
// and throws ValidationError naming the offending Choi eigenvalue otherwise.
Superoperator scale_channel(const Superoperator& target, const Eigen::MatrixXd& l, double n,
                            double cp_tol = 1e-8);

// Generator of rho -> -i[H, rho] for H = sum_k coeffs[k-1] P_k over
// non-identity Paulis (coherent error part).
Eigen::MatrixXd hamiltonian_generator(int n_qubits, const Eigen::VectorXd& coeffs);

// Generator sum_k rates[k-1] (P_k . P_k - Id) with nonnegative rates
// (stochastic Pauli error part). Diagonal in the Pauli basis.
Eigen::MatrixXd pauli_dissipator_generator(int n_qubits, const Eigen::VectorXd& rates);

// Scales s >= 0 along exp(s L) until 1 - F_avg(target exp(sL), target) hits
// the requested infidelity within tol. The map s -> infidelity must be
// increasing over the bracket, which holds for Lindblad-form generators at
// these magnitudes.
double bisect_generator_scale(const Superoperator& target, const Eigen::MatrixXd& l,
                              double infidelity, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Synthetic noisy gate sets.
// ---------------------------------------------------------------------------

struct OpNoiseSpec {
    double infidelity = 0.0;
    // Fraction of the generator Frobenius weight assigned to the coherent
    // (Hamiltonian) part; the rest is stochastic Pauli noise.
    double coherent_fraction = 0.35;
};

struct GateSetSynthesisSpec {
    std::string name = "synthetic";
    std::map<std::string, OpNoiseSpec> gates;  // keyed by ideal gate name
    double prep_infidelity = 0.0;              // 1 - <0|rho0|0>
    double meas_infidelity = 0.0;              // 1 - <1|E|1>
    double spam_coherent_fraction = 0.25;
    std::uint64_t seed = 0;
};

// Draws per-gate Lindblad generators (Hamiltonian + stochastic Pauli mixture,
// normalized per coherent_fraction), scales each by bisection until the
// average gate fidelity matches the request, and assembles a gate-set model.
// The prep/meas channels are built the same way on top of perfect SPAM, and
// stored alongside their resulting rho0/effect.
GateSetModel synthesize_noisy_gateset(const GateSetSynthesisSpec& spec);

// The noise channels behind the synthesized SPAM of `synthesize_noisy_gateset`
// are also needed for fidelity sweeps, so models carry them as pseudo-gates
// under these names.
inline const char* kPrepChannelKey = "__prep__";
inline const char* kMeasChannelKey = "__meas__";

}  // namespace umc
