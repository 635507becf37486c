#include "umc/channels.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

#include "umc/errors.hpp"
#include "umc/pauli.hpp"
#include "umc/rng.hpp"

namespace umc {

namespace {

// Stable 64-bit string hash (FNV-1a); std::hash is not pinned down across
// library versions and these hashes feed seed derivation.
std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_complex(const std::complex<double>& z) {
    std::ostringstream os;
    os << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
    return os.str();
}

}  // namespace

Eigen::Matrix2cd unitary_1q(const UnitaryParams1Q& p) {
    return zyz_unitary(p.theta[0], p.theta[1], p.theta[2]);
}

Eigen::Matrix4cd unitary_2q(const UnitaryParams2Q& p) {
    Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
    for (int k = 1; k <= 15; ++k) {
        const double w = p.theta[k - 1];
        if (w != 0.0) h += w * pauli_product(2, k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
    Eigen::Vector4cd phases;
    for (int i = 0; i < 4; ++i) phases(i) = std::exp(complexd(0, -es.eigenvalues()(i)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

KrausChannel measurement_kraus(const MeasurementParams& p) {
    const Eigen::Matrix2cd uf1 = zyz_unitary(p.beta[0], p.beta[1], p.beta[2]);
    const Eigen::Matrix2cd uf2 = zyz_unitary(p.beta[3], p.beta[4], p.beta[5]);
    const Eigen::Matrix2cd ub = zyz_unitary(p.beta[6], p.beta[7], p.beta[8]);
    const Eigen::Vector2cd f1 = uf1.col(0);
    const Eigen::Vector2cd f2 = uf2.col(1);
    KrausChannel k;
    k.n_qubits = 1;
    k.ops.push_back(f1 * ub.row(0));
    k.ops.push_back(f2 * ub.row(1));
    return k;
}

Superoperator unitary_channel_1q(const UnitaryParams1Q& p) {
    return unitary_to_ptm(unitary_1q(p));
}

Superoperator unitary_channel_2q(const UnitaryParams2Q& p) {
    return unitary_to_ptm(unitary_2q(p));
}

Superoperator measurement_channel(const MeasurementParams& p) {
    return kraus_to_ptm(measurement_kraus(p));
}

int ChannelTerm::n_qubits() const {
    switch (kind) {
        case Kind::Unitary1Q:
        case Kind::Measurement1Q:
            return 1;
        default:
            return 2;
    }
}

Superoperator ChannelTerm::to_ptm() const {
    switch (kind) {
        case Kind::Unitary1Q:
            return unitary_channel_1q(u1);
        case Kind::Unitary2Q:
            return unitary_channel_2q(u2);
        case Kind::Measurement1Q:
            return measurement_channel(m_first);
        case Kind::MeasurementOnFirst: {
            Superoperator m = measurement_channel(m_first);
            return {2, kron(Eigen::Matrix4d::Identity().eval(), m.ptm)};
        }
        case Kind::MeasurementOnSecond: {
            Superoperator m = measurement_channel(m_second);
            return {2, kron(m.ptm, Eigen::Matrix4d::Identity().eval())};
        }
        case Kind::MeasurementPair: {
            Superoperator a = measurement_channel(m_first);
            Superoperator b = measurement_channel(m_second);
            return {2, kron(b.ptm, a.ptm)};
        }
    }
    throw std::logic_error("ChannelTerm: unknown kind");
}

Superoperator convex_sum_ptm(const std::vector<double>& p,
                             const std::vector<ChannelTerm>& terms) {
    if (p.size() != terms.size() || terms.empty())
        throw ValidationError("convex_sum_ptm: weights and terms must match and be non-empty");
    double total = 0.0;
    for (double w : p) {
        if (w < -1e-12) throw ValidationError("convex_sum_ptm: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ValidationError("convex_sum_ptm: weights do not sum to one");
    const int n = terms.front().n_qubits();
    Superoperator out{n, Eigen::MatrixXd::Zero(1 << (2 * n), 1 << (2 * n))};
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].n_qubits() != n)
            throw ValidationError("convex_sum_ptm: mixed term arities");
        if (p[i] != 0.0) out.ptm += p[i] * terms[i].to_ptm().ptm;
    }
    return out;
}

Eigen::MatrixXd error_generator(const Superoperator& target, const Superoperator& noisy) {
    if (target.ptm.rows() != noisy.ptm.rows())
        throw ValidationError("error_generator: dimension mismatch");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(target.ptm);
    const Eigen::MatrixXd a = lu.solve(noisy.ptm);
    if ((target.ptm * a - noisy.ptm).norm() > 1e-9 * std::max(1.0, noisy.ptm.norm()))
        throw ValidationError("error_generator: target transfer matrix is singular");

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a.cast<complexd>());
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const complexd lam = es.eigenvalues()(i);
        if (std::abs(lam.imag()) <= 1e-12 * std::max(1.0, std::abs(lam)) &&
            lam.real() <= 1e-12) {
            throw ValidationError(
                "error_generator: eigenvalue " + format_complex(lam) +
                " lies on the closed negative real axis; the principal logarithm is undefined");
        }
    }
    const Eigen::MatrixXcd l = Eigen::MatrixXcd(a.cast<complexd>()).log();
    if (l.imag().norm() > 1e-9 * std::max(1.0, l.real().norm()))
        throw ValidationError("error_generator: logarithm has a non-real residue");
    return l.real();
}

Superoperator scale_channel(const Superoperator& target, const Eigen::MatrixXd& l, double n,
                            double cp_tol) {
    const Eigen::MatrixXd e = (n * l).exp();
    Superoperator out{target.n_qubits, target.ptm * e};
    const CptpReport rep = validate_cptp(out, cp_tol);
    if (!rep.ok()) {
        std::ostringstream os;
        os << "scale_channel: scaled map is not CPTP at n=" << n
           << " (min Choi eigenvalue " << rep.min_choi_eigenvalue << ", first-row deviation "
           << rep.first_row_deviation << ")";
        throw ValidationError(os.str());
    }
    return out;
}

Eigen::MatrixXd hamiltonian_generator(int n_qubits, const Eigen::VectorXd& coeffs) {
    const auto& basis = normalized_pauli_basis(n_qubits);
    const Eigen::Index dim = basis.size();
    if (coeffs.size() != dim - 1)
        throw ValidationError("hamiltonian_generator: need one coefficient per non-identity Pauli");
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(basis[0].rows(), basis[0].cols());
    for (Eigen::Index k = 1; k < dim; ++k)
        h += coeffs(k - 1) * pauli_product(n_qubits, static_cast<int>(k));
    Eigen::MatrixXd l(dim, dim);
    const complexd mi(0, -1);
    for (Eigen::Index j = 0; j < dim; ++j) {
        const Eigen::MatrixXcd comm = mi * (h * basis[j] - basis[j] * h);
        for (Eigen::Index i = 0; i < dim; ++i)
            l(i, j) = (basis[i].adjoint() * comm).trace().real();
    }
    return l;
}

Eigen::MatrixXd pauli_dissipator_generator(int n_qubits, const Eigen::VectorXd& rates) {
    const Eigen::Index dim = Eigen::Index(1) << (2 * n_qubits);
    if (rates.size() != dim - 1)
        throw ValidationError("pauli_dissipator_generator: need one rate per non-identity Pauli");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index k = 1; k < dim; ++k) {
        const double rate = rates(k - 1);
        if (rate < 0) throw ValidationError("pauli_dissipator_generator: negative rate");
        if (rate == 0.0) continue;
        for (Eigen::Index j = 0; j < dim; ++j) {
            // P_k P_j P_k = +/- P_j; the sign is the symplectic parity of the
            // per-qubit digit pairs.
            int anti = 0;
            for (int q = 0; q < n_qubits; ++q) {
                const int a = (k >> (2 * q)) & 3;
                const int b = (j >> (2 * q)) & 3;
                if (a != 0 && b != 0 && a != b) ++anti;
            }
            const double sign = (anti % 2 == 0) ? 1.0 : -1.0;
            diag(j) += rate * (sign - 1.0);
        }
    }
    return diag.asDiagonal();
}

double bisect_generator_scale(const Superoperator& target, const Eigen::MatrixXd& l,
                              double infidelity, double tol) {
    auto infid_at = [&](double s) {
        const Eigen::MatrixXd e = (s * l).exp();
        Superoperator noisy{target.n_qubits, target.ptm * e};
        return 1.0 - average_gate_fidelity(noisy, target);
    };
    if (infidelity <= 0.0) return 0.0;
    double hi = 1.0;
    int guard = 0;
    while (infid_at(hi) < infidelity) {
        hi *= 2.0;
        if (++guard > 60)
            throw ConvergenceError("bisect_generator_scale: target infidelity is unreachable");
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = infid_at(mid);
        if (std::abs(f - infidelity) <= tol) return mid;
        (f < infidelity ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// One random Lindblad-form generator: coherent_fraction of its Frobenius
// weight from a Hamiltonian commutator, the rest from stochastic Pauli noise.
Eigen::MatrixXd random_error_generator(int n_qubits, double coherent_fraction, Rng& rng) {
    const Eigen::Index dim = Eigen::Index(1) << (2 * n_qubits);
    Eigen::VectorXd hc(dim - 1), rates(dim - 1);
    for (Eigen::Index i = 0; i < dim - 1; ++i) hc(i) = rng.normal();
    for (Eigen::Index i = 0; i < dim - 1; ++i) rates(i) = std::abs(rng.normal());
    Eigen::MatrixXd lh = hamiltonian_generator(n_qubits, hc);
    Eigen::MatrixXd ls = pauli_dissipator_generator(n_qubits, rates);
    if (lh.norm() > 0) lh /= lh.norm();
    if (ls.norm() > 0) ls /= ls.norm();
    return coherent_fraction * lh + (1.0 - coherent_fraction) * ls;
}

}  // namespace

GateSetModel synthesize_noisy_gateset(const GateSetSynthesisSpec& spec) {
    GateSetModel model;
    model.name = spec.name;
    model.annotations["seed"] = static_cast<double>(spec.seed);

    for (const auto& [name, noise] : spec.gates) {
        const Superoperator& ideal = ideal_gate_ptm(name);
        if (noise.infidelity <= 0.0) {
            model.gates[name] = ideal;
            model.annotations["f_avg:" + name] = 1.0;
            continue;
        }
        Rng rng(derive_seed(spec.seed, fnv1a(name)));
        const Eigen::MatrixXd l =
            random_error_generator(ideal.n_qubits, noise.coherent_fraction, rng);
        const double s = bisect_generator_scale(ideal, l, noise.infidelity);
        Superoperator noisy = scale_channel(ideal, l, s);
        model.annotations["f_avg:" + name] = average_gate_fidelity(noisy, ideal);
        model.gates[name] = std::move(noisy);
    }

    const Superoperator id1 = identity_superop(1);
    const Eigen::Vector4d rho_perfect = GateSetModel::perfect_rho0();
    const Eigen::Vector4d effect_perfect = GateSetModel::perfect_effect();

    // Prep channel: identity-targeted noise applied right after perfect prep.
    if (spec.prep_infidelity > 0.0) {
        Rng rng(derive_seed(spec.seed, fnv1a("__prep__")));
        const Eigen::MatrixXd l = random_error_generator(1, spec.spam_coherent_fraction, rng);
        auto prep_fid = [&](double s) {
            const Superoperator lam{1, (s * l).exp()};
            const Eigen::Vector4d v = lam.ptm * rho_perfect;
            // <0|rho0|0> in Pauli coordinates.
            return (v(0) + v(3)) / std::sqrt(2.0);
        };
        double lo = 0.0, hi = 1.0;
        int guard = 0;
        while (1.0 - prep_fid(hi) < spec.prep_infidelity) {
            hi *= 2;
            if (++guard > 60)
                throw ConvergenceError("synthesize_noisy_gateset: prep infidelity unreachable");
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (1.0 - prep_fid(mid) < spec.prep_infidelity ? lo : hi) = mid;
        }
        const double s = 0.5 * (lo + hi);
        Superoperator lam{1, (s * l).exp()};
        model.gates[kPrepChannelKey] = lam;
        model.rho0 = lam.ptm * rho_perfect;
        model.annotations["prep_fidelity"] = prep_fid(s);
    } else {
        model.gates[kPrepChannelKey] = id1;
        model.rho0 = rho_perfect;
        model.annotations["prep_fidelity"] = 1.0;
    }

    // Measurement channel: noise applied right before a perfect Z readout,
    // so the observed effect is the adjoint image of the perfect effect.
    if (spec.meas_infidelity > 0.0) {
        Rng rng(derive_seed(spec.seed, fnv1a("__meas__")));
        const Eigen::MatrixXd l = random_error_generator(1, spec.spam_coherent_fraction, rng);
        auto meas_fid = [&](double s) {
            const Superoperator lam{1, (s * l).exp()};
            const Eigen::Vector4d e = lam.ptm.transpose() * effect_perfect;
            // <1|E|1> in Pauli coordinates.
            return (e(0) - e(3)) / std::sqrt(2.0);
        };
        double lo = 0.0, hi = 1.0;
        int guard = 0;
        while (1.0 - meas_fid(hi) < spec.meas_infidelity) {
            hi *= 2;
            if (++guard > 60)
                throw ConvergenceError("synthesize_noisy_gateset: meas infidelity unreachable");
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (1.0 - meas_fid(mid) < spec.meas_infidelity ? lo : hi) = mid;
        }
        const double s = 0.5 * (lo + hi);
        Superoperator lam{1, (s * l).exp()};
        model.gates[kMeasChannelKey] = lam;
        model.effect = lam.ptm.transpose() * effect_perfect;
        model.annotations["meas_fidelity"] = meas_fid(s);
    } else {
        model.gates[kMeasChannelKey] = id1;
        model.effect = effect_perfect;
        model.annotations["meas_fidelity"] = 1.0;
    }

    return model;
}

}  // namespace umc
