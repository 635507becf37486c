#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "umc/qcore.hpp"

namespace umc {

// Diamond-norm computation for Hermiticity-preserving maps (differences of
// channels). Two independent routes exist on purpose: a semidefinite program
// with a certified optimality gap, and a multistart ascent over entangled
// witness states that is always a valid lower bound. Tests cross-check them;
// they share no iterate.

enum class DiamondMethod { Sdp, Multistart };

struct DiamondResult {
    double value = 0.0;
    DiamondMethod method = DiamondMethod::Sdp;
    // Sdp: certified optimality gap (true value lies in [value, value+gap]).
    double gap = 0.0;
    // Multistart: best Schmidt operator R of the witness |psi> = (R x 1)|Omega>.
    Eigen::MatrixXcd witness;
    int iterations = 0;
};

// ||Delta||_diamond via the standard semidefinite program over the Choi
// matrix, solved by a dense log-barrier Newton iteration. delta is the
// transfer matrix of a Hermiticity-preserving map; tol <= 0 picks the
// default (1e-7 for one qubit, 1e-6 for two). Throws ConvergenceError with
// the best bounds if the target gap is not certified.
DiamondResult diamond_norm_sdp(const Superoperator& delta, double tol = 0.0);

// Lower bound max_R ||(R x 1) J (R^dag x 1)||_1 over Schmidt operators with
// ||R||_F = 1, by projected gradient ascent from `restarts` deterministic
// starting points.
DiamondResult diamond_norm_multistart(const Superoperator& delta, int restarts = 64,
                                      std::uint64_t seed = 0);

// Diamond distance ||a - b||_diamond between two channels; symmetric in its
// arguments and delegated to the chosen method.
DiamondResult diamond_distance(const Superoperator& a, const Superoperator& b,
                               DiamondMethod method = DiamondMethod::Sdp);

}  // namespace umc
