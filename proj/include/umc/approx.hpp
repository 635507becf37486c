#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "umc/channels.hpp"
#include "umc/qcore.hpp"

namespace umc {

// Channel-approximation optimizers. UMC fits a small convex mixture of
// parametrized unitary and measurement channels to a target channel; CMC
// fits a fixed 30-channel Clifford/reset dictionary; PTA reads Pauli error
// probabilities off the process-matrix diagonal. SPAM fitting reuses the
// UMC term structure with exact constructions.

struct DecomposeOptions {
    int restarts = 32;
    int max_iters = 400;
    double tol = 1e-9;  // gradient infinity-norm target for the local solver
    std::uint64_t seed = 0;
};

struct UmcDecomposition {
    int n_qubits = 1;
    // Mixture weights over terms() below; exactly on the simplex. 1q theta
    // and beta angles are reported in [0, 2pi). 2q theta vectors are
    // canonicalized through the principal log (|theta_k| <= pi, lifted by
    // 2pi where that provably preserves the unitary), because component-wise
    // wrapping is not channel-preserving for non-commuting generators.
    std::vector<double> p;
    std::vector<UnitaryParams1Q> unitary_1q;  // four terms in the 1q structure
    std::vector<UnitaryParams2Q> unitary_2q;  // five terms in the 2q structure
    // 1q: two Measurement1Q terms. 2q: MeasurementOnFirst, MeasurementOnSecond,
    // and MeasurementPair (the correlated term with both payloads).
    std::vector<ChannelTerm> measurement_terms;
    double achieved_distance = 0.0;  // true diamond distance to the target
    double surrogate_value = 0.0;    // squared Frobenius distance at the optimum
    bool converged = true;
    std::string target_name;

    // Term list in weight order: unitary terms first, then measurements.
    std::vector<ChannelTerm> terms() const;
    Superoperator to_ptm() const;
};

struct CmcDecomposition {
    // Weights over cmc_channel_set() order: 24 Cliffords then 6 resets.
    std::vector<double> p;
    double achieved_distance = 0.0;
    double surrogate_value = 0.0;
    bool converged = true;
    std::string target_name;

    Superoperator to_ptm() const;
};

struct PauliProbabilities {
    int n_qubits = 1;
    Eigen::VectorXd p;  // 4 or 16 entries, index = base-4 Pauli index

    Superoperator to_ptm() const;
};

// The fixed CMC dictionary: the 24 single-qubit Clifford channels in the
// order of clifford_1q_table(), then resets to |0>, |1>, |+>, |->, |+i>,
// |-i>. Cached; index order is stable across runs.
const std::vector<Superoperator>& cmc_channel_set();
const std::vector<std::string>& cmc_channel_names();
// Target states of the 6 reset channels, in channel-set tail order (the
// stochastic simulator realizes a drawn reset as measure-and-rebuild).
const std::vector<Eigen::Vector2cd>& cmc_reset_states();

UmcDecomposition decompose_umc_1q(const Superoperator& target,
                                  const DecomposeOptions& opts = {});
UmcDecomposition decompose_umc_2q(const Superoperator& target,
                                  const DecomposeOptions& opts = {});

// Convex fit over the fixed dictionary (projected accelerated gradient with
// an active-set polish); restarts in opts are ignored.
CmcDecomposition decompose_cmc(const Superoperator& target,
                               const DecomposeOptions& opts = {});

// Pauli twirling approximation of an error channel: probabilities are the
// diagonal of the process matrix in the normalized Pauli basis. Entries more
// negative than -1e-8 raise ValidationError; small negatives are clipped and
// the vector renormalized.
PauliProbabilities decompose_pta(const Superoperator& error_channel);

// The error channel E with noisy = ideal o E (E acts before the ideal gate).
Superoperator extract_error_channel(const Superoperator& ideal, const Superoperator& noisy);

// State-preparation fit: a channel built from reset terms that maps every
// input (in particular the perfect ground state) exactly onto rho0.
// achieved_distance stores the preparation infidelity of the fit.
UmcDecomposition fit_prep_channel(const DensityMatrix& rho0);

// Measurement fit: a channel whose adjoint maps the perfect effect onto the
// requested one, so running it before a perfect readout reproduces the
// faulty statistics on every state. effect is a Pauli 4-vector; it must
// satisfy 0 <= E <= I. achieved_distance stores the vector-norm residual.
UmcDecomposition fit_meas_channel(const Eigen::Vector4d& effect);

}  // namespace umc
