#include <cmath>
#include <vector>

#include "umc/dnorm.hpp"
#include "umc/errors.hpp"
#include "umc/pauli.hpp"
#include "umc/rng.hpp"
#include "umc/tensor.hpp"

namespace umc {

namespace {

// ||Delta||_diamond = max ||(R x 1) J (R^dag x 1)||_1 over ||R||_F = 1,
// where |psi> = (R x 1)|Omega> is the entangled input witness. Every R is a
// valid lower bound, so ascent failures only cost tightness, never
// correctness.

struct Evaluation {
    double value;
    Eigen::MatrixXcd sign;  // spectral sign of the conjugated Choi matrix
};

Evaluation evaluate(const Eigen::MatrixXcd& j, const Eigen::MatrixXcd& r, int d) {
    const Eigen::MatrixXcd rx = kron(r, Eigen::MatrixXcd::Identity(d, d).eval());
    const Eigen::MatrixXcd w = rx * j * rx.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(w);
    Evaluation out;
    out.value = es.eigenvalues().cwiseAbs().sum();
    Eigen::VectorXcd signs(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < signs.size(); ++i)
        signs(i) = es.eigenvalues()(i) >= 0 ? 1.0 : -1.0;
    out.sign = es.eigenvectors() * signs.asDiagonal() * es.eigenvectors().adjoint();
    return out;
}

// Ascent gradient: d||W||_1 = 2 Re tr(dR K) with K = Tr_out[J (R^dag x 1) S].
Eigen::MatrixXcd ascent_direction(const Eigen::MatrixXcd& j, const Eigen::MatrixXcd& r,
                                  const Eigen::MatrixXcd& sign, int d) {
    const Eigen::MatrixXcd rdx = kron(r.adjoint().eval(), Eigen::MatrixXcd::Identity(d, d).eval());
    const Eigen::MatrixXcd k = partial_trace_second(j * rdx * sign, d, d);
    return k.adjoint();
}

}  // namespace

DiamondResult diamond_norm_multistart(const Superoperator& delta, int restarts,
                                      std::uint64_t seed) {
    const int n = delta.n_qubits;
    if (n < 1 || n > 2)
        throw ValidationError("diamond_norm_multistart: supported up to two qubits");
    if (restarts < 1) throw ValidationError("diamond_norm_multistart: restarts must be >= 1");
    const int d = 1 << n;

    const Eigen::MatrixXcd j = ptm_to_choi(delta).j;
    DiamondResult best;
    best.method = DiamondMethod::Multistart;
    best.witness = Eigen::MatrixXcd::Identity(d, d) / std::sqrt(double(d));
    if (j.norm() <= 1e-14) return best;

    for (int r0 = 0; r0 < restarts; ++r0) {
        Eigen::MatrixXcd r;
        if (r0 == 0) {
            // The maximally entangled witness; exact for Pauli channels.
            r = Eigen::MatrixXcd::Identity(d, d) / std::sqrt(double(d));
        } else if (r0 == 1) {
            // Schmidt operator of the dominant Choi eigenvector.
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(j);
            Eigen::Index which;
            es.eigenvalues().cwiseAbs().maxCoeff(&which);
            const Eigen::VectorXcd psi = es.eigenvectors().col(which);
            r.resize(d, d);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) r(a, b) = psi(a * d + b);
            if (r.norm() < 1e-12) continue;
            r /= r.norm();
        } else {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r0)));
            r.resize(d, d);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) r(a, b) = complexd(rng.normal(), rng.normal());
            r /= r.norm();
        }

        Evaluation ev = evaluate(j, r, d);
        double eta = 0.5 / std::max(1.0, j.norm());
        int it = 0;
        for (; it < 500; ++it) {
            const Eigen::MatrixXcd dir = ascent_direction(j, r, ev.sign, d);
            if (dir.norm() < 1e-14) break;
            bool improved = false;
            while (eta > 1e-14) {
                Eigen::MatrixXcd cand = r + eta * dir;
                cand /= cand.norm();
                Evaluation cev = evaluate(j, cand, d);
                if (cev.value > ev.value + 1e-15) {
                    r = std::move(cand);
                    const double gain = cev.value - ev.value;
                    ev = std::move(cev);
                    improved = true;
                    eta *= 1.3;
                    if (gain < 1e-13) it = 500;  // converged plateau
                    break;
                }
                eta *= 0.5;
            }
            if (!improved) break;
        }

        best.iterations += it;
        if (ev.value > best.value) {
            best.value = ev.value;
            best.witness = r;
        }
    }
    return best;
}

}  // namespace umc
