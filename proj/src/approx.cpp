#include "umc/approx.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "umc/detail/lbfgs.hpp"
#include "umc/detail/simplex.hpp"
#include "umc/dnorm.hpp"
#include "umc/errors.hpp"
#include "umc/gateset.hpp"
#include "umc/pauli.hpp"
#include "umc/rng.hpp"
#include "umc/tensor.hpp"

namespace umc {

namespace {

const double kPi = std::acos(-1.0);

// +1 if P_m and P_j commute, -1 otherwise (symplectic parity of the digits).
double pauli_conj_sign(int n_qubits, int m, int j) {
    int anti = 0;
    for (int q = 0; q < n_qubits; ++q) {
        const int a = (m >> (2 * q)) & 3;
        const int b = (j >> (2 * q)) & 3;
        if (a != 0 && b != 0 && a != b) ++anti;
    }
    return (anti % 2 == 0) ? 1.0 : -1.0;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    Eigen::VectorXd w = (logits.array() - m).exp();
    return w / w.sum();
}

// ---------------------------------------------------------------------------
// Parameter layout shared by the 1q and 2q UMC objectives.
//
//   1q: [theta 4x3][beta 2x9][logits 6]               -> 36 parameters
//   2q: [theta 5x15][beta 4x9][logits 8]              -> 119 parameters
//        beta blocks: M(x)1 first payload, 1(x)M second payload,
//        correlated pair first then second payload.
// ---------------------------------------------------------------------------

struct UmcLayout {
    int n_qubits;
    int n_unitary;
    int n_theta_each;
    int n_meas_blocks;  // 9-parameter measurement payload blocks
    int n_terms;

    static UmcLayout make(int n_qubits) {
        if (n_qubits == 1) return {1, 4, 3, 2, 6};
        return {2, 5, 15, 4, 8};
    }
    int theta_size() const { return n_unitary * n_theta_each; }
    int beta_size() const { return n_meas_blocks * 9; }
    int logits_offset() const { return theta_size() + beta_size(); }
    int n_params() const { return logits_offset() + n_terms; }

    // Term whose transfer matrix depends on parameter j; -1 for logits.
    int term_of_param(int j) const {
        if (j < theta_size()) return j / n_theta_each;
        if (j < logits_offset()) {
            const int block = (j - theta_size()) / 9;
            if (n_qubits == 1) return n_unitary + block;
            return n_unitary + std::min(block, 2);  // blocks 2,3 both feed term 7
        }
        return -1;
    }
};

MeasurementParams beta_block(const Eigen::VectorXd& x, int offset) {
    MeasurementParams p;
    for (int i = 0; i < 9; ++i) p.beta[i] = x(offset + i);
    return p;
}

Eigen::MatrixXd build_term_ptm(const UmcLayout& lay, int t, const Eigen::VectorXd& x) {
    if (t < lay.n_unitary) {
        if (lay.n_qubits == 1) {
            UnitaryParams1Q u;
            for (int i = 0; i < 3; ++i) u.theta[i] = x(3 * t + i);
            return unitary_channel_1q(u).ptm;
        }
        UnitaryParams2Q u;
        for (int i = 0; i < 15; ++i) u.theta[i] = x(15 * t + i);
        return unitary_channel_2q(u).ptm;
    }
    const int base = lay.theta_size();
    if (lay.n_qubits == 1)
        return measurement_channel(beta_block(x, base + 9 * (t - lay.n_unitary))).ptm;
    const Eigen::Matrix4d id4 = Eigen::Matrix4d::Identity();
    if (t == 5) return kron(id4, measurement_channel(beta_block(x, base)).ptm);
    if (t == 6) return kron(measurement_channel(beta_block(x, base + 9)).ptm, id4);
    return kron(measurement_channel(beta_block(x, base + 27)).ptm,
                measurement_channel(beta_block(x, base + 18)).ptm);
}

// Squared Frobenius surrogate with per-term caching: a finite-difference
// probe of one parameter rebuilds only the affected term (or only the
// weights, for logits).
class UmcObjective {
  public:
    UmcObjective(const UmcLayout& lay, const Eigen::MatrixXd& target)
        : lay_(lay), target_(target), terms_(lay.n_terms) {}

    double value(const Eigen::VectorXd& x) {
        sync(x);
        return f_;
    }

    void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        sync(x);
        const double h = 3e-6;
        g.resize(x.size());
        Eigen::VectorXd xp = x;
        for (int j = 0; j < x.size(); ++j) {
            const int t = lay_.term_of_param(j);
            double fp, fm;
            if (t < 0) {
                xp(j) = x(j) + h;
                fp = weights_only(xp);
                xp(j) = x(j) - h;
                fm = weights_only(xp);
            } else {
                xp(j) = x(j) + h;
                fp = one_term(xp, t);
                xp(j) = x(j) - h;
                fm = one_term(xp, t);
            }
            xp(j) = x(j);
            g(j) = (fp - fm) / (2 * h);
        }
    }

    const Eigen::MatrixXd& mixture(const Eigen::VectorXd& x) {
        sync(x);
        return mix_;
    }

  private:
    void sync(const Eigen::VectorXd& x) {
        if (x_cached_.size() == x.size() && x_cached_ == x) return;
        x_cached_ = x;
        for (int t = 0; t < lay_.n_terms; ++t) terms_[t] = build_term_ptm(lay_, t, x);
        w_ = softmax(x.tail(lay_.n_terms));
        mix_.setZero(target_.rows(), target_.cols());
        for (int t = 0; t < lay_.n_terms; ++t) mix_ += w_(t) * terms_[t];
        f_ = (mix_ - target_).squaredNorm();
    }

    double weights_only(const Eigen::VectorXd& x) const {
        Eigen::VectorXd w = softmax(x.tail(lay_.n_terms));
        Eigen::MatrixXd mix = Eigen::MatrixXd::Zero(target_.rows(), target_.cols());
        for (int t = 0; t < lay_.n_terms; ++t) mix += w(t) * terms_[t];
        return (mix - target_).squaredNorm();
    }

    double one_term(const Eigen::VectorXd& x, int t) const {
        Eigen::MatrixXd ptm = build_term_ptm(lay_, t, x);
        return (mix_ + w_(t) * (ptm - terms_[t]) - target_).squaredNorm();
    }

    UmcLayout lay_;
    Eigen::MatrixXd target_;
    std::vector<Eigen::MatrixXd> terms_;
    Eigen::VectorXd w_;
    Eigen::MatrixXd mix_;
    double f_ = 0;
    Eigen::VectorXd x_cached_;
};

// ---------------------------------------------------------------------------
// Informed starting points.
// ---------------------------------------------------------------------------

// Unitary part (polar factor) of the dominant Kraus operator of the channel.
Eigen::MatrixXcd dominant_unitary(const Superoperator& target) {
    const Eigen::MatrixXcd j = ptm_to_choi(target).j;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(j);
    Eigen::Index which;
    es.eigenvalues().maxCoeff(&which);
    const Eigen::VectorXcd psi = es.eigenvectors().col(which);
    const int d = 1 << target.n_qubits;
    Eigen::MatrixXcd k(d, d);
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < d; ++a) k(a, i) = psi(i * d + a);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

void set_theta_1q(Eigen::VectorXd& x, int slot, const Eigen::Matrix2cd& u) {
    const auto ang = zyz_angles(u);
    for (int i = 0; i < 3; ++i) x(3 * slot + i) = ang[i];
}

// Project i log(U) onto the Pauli coordinates (15 angles, identity dropped).
bool set_theta_2q(Eigen::VectorXd& x, int slot, const Eigen::MatrixXcd& u) {
    const Eigen::MatrixXcd l = u.log();
    const Eigen::MatrixXcd h = complexd(0, 1) * l;
    if ((h - h.adjoint()).norm() > 1e-6) return false;
    for (int k = 1; k <= 15; ++k)
        x(15 * slot + (k - 1)) = ((pauli_product(2, k) * h).trace() / 4.0).real();
    return true;
}

// Pure Pauli angles: exp(-i pi/2 P) is P up to phase.
void set_theta_pauli(Eigen::VectorXd& x, const UmcLayout& lay, int slot, int pauli_index) {
    for (int i = 0; i < lay.n_theta_each; ++i) x(lay.n_theta_each * slot + i) = 0;
    if (pauli_index > 0) x(lay.n_theta_each * slot + (pauli_index - 1)) = kPi / 2;
}

Eigen::VectorXd initial_point(const UmcLayout& lay, const Superoperator& target, int restart,
                              std::uint64_t seed) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.n_params());
    auto logits = [&](int hot, double hi, double lo_meas) {
        for (int t = 0; t < lay.n_terms; ++t)
            x(lay.logits_offset() + t) = t < lay.n_unitary ? 0.0 : lo_meas;
        x(lay.logits_offset() + hot) = hi;
    };

    switch (restart) {
        case 0: {  // dominant unitary, weight concentrated on it
            const Eigen::MatrixXcd u = dominant_unitary(target);
            if (lay.n_qubits == 1) {
                set_theta_1q(x, 0, u);
                set_theta_1q(x, 1, u * rx(0.2));
                set_theta_1q(x, 2, u * ry(0.2));
                set_theta_1q(x, 3, u * rz(0.2));
            } else {
                if (!set_theta_2q(x, 0, u)) return initial_point(lay, target, 4, seed);
                for (int s = 1; s < lay.n_unitary; ++s) set_theta_pauli(x, lay, s, 0);
            }
            logits(0, 6.0, -6.0);
            return x;
        }
        case 1: {  // dominant unitary plus Pauli error mixture weights
            const Eigen::MatrixXcd u = dominant_unitary(target);
            Superoperator uch = unitary_to_ptm(u);
            Superoperator err{lay.n_qubits, uch.ptm.transpose() * target.ptm};
            Eigen::VectorXd p;
            try {
                p = decompose_pta(err).p;
            } catch (const ValidationError&) {
                return initial_point(lay, target, 4, seed);
            }
            std::vector<int> order(p.size() - 1);
            std::iota(order.begin(), order.end(), 1);
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return p(a) > p(b); });
            if (lay.n_qubits == 1) {
                set_theta_1q(x, 0, u);
                for (int s = 1; s < 4; ++s) set_theta_pauli(x, lay, s, order[s - 1]);
                for (int s = 0; s < 4; ++s) {
                    const double w = s == 0 ? p(0) : p(order[s - 1]);
                    x(lay.logits_offset() + s) = std::log(std::max(w, 1e-8));
                }
            } else {
                if (!set_theta_2q(x, 0, u)) return initial_point(lay, target, 4, seed);
                for (int s = 1; s < 5; ++s) set_theta_pauli(x, lay, s, order[s - 1]);
                x(lay.logits_offset()) = std::log(std::max(p(0), 1e-8));
                for (int s = 1; s < 5; ++s)
                    x(lay.logits_offset() + s) = std::log(std::max(p(order[s - 1]), 1e-8));
            }
            for (int t = lay.n_unitary; t < lay.n_terms; ++t)
                x(lay.logits_offset() + t) = -8.0;
            return x;
        }
        case 2: {  // identity-centered
            logits(0, 2.0, -5.0);
            return x;
        }
        case 3: {  // measurement-heavy: dephasing and a reset payload
            for (int t = 0; t < lay.n_terms; ++t)
                x(lay.logits_offset() + t) = t < lay.n_unitary ? -4.0 : 1.0;
            // second payload of the last block becomes a reset (f2 -> |0>)
            x(lay.theta_size() + (lay.n_meas_blocks - 1) * 9 + 4) = kPi;
            return x;
        }
        default: {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
            const double scales[3] = {kPi, 0.5, 0.1};
            const double sc = scales[restart % 3];
            for (int i = 0; i < lay.theta_size() + lay.beta_size(); ++i)
                x(i) = rng.uniform(-sc, sc);
            for (int t = 0; t < lay.n_terms; ++t)
                x(lay.logits_offset() + t) = rng.normal();
            return x;
        }
    }
}

// Canonical angles for an optimized 2q unitary. Per-component 2pi wrapping is
// sound only when the shifted Pauli commutes with the whole exponent, so the
// raw angles are re-derived from the principal log (identity component is a
// global phase and is dropped, leaving |theta_k| <= pi) and negative entries
// are lifted by 2pi only when the commutator vanishes.
std::array<double, 15> canonical_theta_2q(const std::array<double, 15>& raw) {
    UnitaryParams2Q p;
    p.theta = raw;
    const Eigen::MatrixXcd u = unitary_2q(p);
    const Eigen::MatrixXcd h = complexd(0, 1) * Eigen::MatrixXcd(u.log());
    if (!h.allFinite() || (h - h.adjoint()).norm() > 1e-9) return raw;

    std::array<double, 15> th{};
    Eigen::Matrix4cd hm = Eigen::Matrix4cd::Zero();
    for (int k = 1; k <= 15; ++k) {
        th[k - 1] = ((pauli_product(2, k) * h).trace() / 4.0).real();
        hm += th[k - 1] * pauli_product(2, k);
    }
    const double two_pi = 2 * kPi;
    for (int k = 1; k <= 15; ++k) {
        if (th[k - 1] >= -1e-12) {
            th[k - 1] = std::max(th[k - 1], 0.0);
            continue;
        }
        const Eigen::Matrix4cd pk = pauli_product(2, k);
        if ((hm * pk - pk * hm).norm() <= 1e-10 * std::max(1.0, hm.norm())) {
            th[k - 1] += two_pi;
            hm += two_pi * pk;
        }
    }
    return th;
}

UmcDecomposition decomposition_from_x(const UmcLayout& lay, Eigen::VectorXd x, double f,
                                      bool converged) {
    // 1q theta and all beta parameters feed independent single-axis rotation
    // angles, where wrapping into [0, 2pi) never changes the channel. The 2q
    // theta vectors are canonicalized separately below.
    const int wrap_begin = lay.n_qubits == 1 ? 0 : lay.theta_size();
    for (int i = wrap_begin; i < lay.theta_size() + lay.beta_size(); ++i)
        x(i) = wrap_angle(x(i));

    UmcDecomposition out;
    out.n_qubits = lay.n_qubits;
    const Eigen::VectorXd w = softmax(x.tail(lay.n_terms));
    out.p.assign(w.data(), w.data() + w.size());
    detail::renormalize_exact(out.p);
    if (lay.n_qubits == 1) {
        for (int t = 0; t < 4; ++t) {
            UnitaryParams1Q u;
            for (int i = 0; i < 3; ++i) u.theta[i] = x(3 * t + i);
            out.unitary_1q.push_back(u);
        }
        for (int k = 0; k < 2; ++k) {
            ChannelTerm m;
            m.kind = ChannelTerm::Kind::Measurement1Q;
            m.m_first = beta_block(x, lay.theta_size() + 9 * k);
            out.measurement_terms.push_back(m);
        }
    } else {
        for (int t = 0; t < 5; ++t) {
            UnitaryParams2Q u;
            for (int i = 0; i < 15; ++i) u.theta[i] = x(15 * t + i);
            u.theta = canonical_theta_2q(u.theta);
            out.unitary_2q.push_back(u);
        }
        const int base = lay.theta_size();
        ChannelTerm m1;
        m1.kind = ChannelTerm::Kind::MeasurementOnFirst;
        m1.m_first = beta_block(x, base);
        ChannelTerm m2;
        m2.kind = ChannelTerm::Kind::MeasurementOnSecond;
        m2.m_second = beta_block(x, base + 9);
        ChannelTerm mp;
        mp.kind = ChannelTerm::Kind::MeasurementPair;
        mp.m_first = beta_block(x, base + 18);
        mp.m_second = beta_block(x, base + 27);
        out.measurement_terms = {m1, m2, mp};
    }
    out.surrogate_value = f;
    out.converged = converged;
    return out;
}

UmcDecomposition run_umc(const Superoperator& target, const DecomposeOptions& opts,
                         const UmcLayout& lay) {
    if (opts.restarts < 1) throw ValidationError("decompose_umc: restarts must be >= 1");
    const CptpReport rep = validate_cptp(target);
    if (!rep.ok()) throw ValidationError("decompose_umc: target is not CPTP");

    detail::LbfgsOptions lopts;
    lopts.max_iters = opts.max_iters;
    lopts.grad_tol = opts.tol;

    struct Candidate {
        Eigen::VectorXd x;
        bool converged;
    };
    double best_f = std::numeric_limits<double>::infinity();
    std::vector<Candidate> ties;

    UmcObjective obj(lay, target.ptm);
    for (int r = 0; r < opts.restarts; ++r) {
        Eigen::VectorXd x0 = initial_point(lay, target, r, opts.seed);
        auto res = detail::lbfgs_minimize([&](const Eigen::VectorXd& x) { return obj.value(x); },
                                          [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                                              obj.gradient(x, g);
                                          },
                                          std::move(x0), lopts);
        if (res.f < best_f) {
            best_f = res.f;
            ties.clear();
            ties.push_back({std::move(res.x), res.converged});
        } else if (res.f == best_f) {
            // Exact surrogate ties are broken by true distance below; skip
            // candidates that are the same point.
            bool duplicate = false;
            for (const auto& c : ties) duplicate = duplicate || c.x == res.x;
            if (!duplicate) ties.push_back({std::move(res.x), res.converged});
        }
    }

    UmcDecomposition out;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& c : ties) {
        UmcDecomposition dec = decomposition_from_x(lay, c.x, best_f, c.converged);
        const Superoperator mix = dec.to_ptm();
        const double d = diamond_norm_sdp({lay.n_qubits, mix.ptm - target.ptm}).value;
        if (d < best_d) {
            best_d = d;
            out = std::move(dec);
        }
    }
    out.achieved_distance = best_d;
    return out;
}

}  // namespace

std::vector<ChannelTerm> UmcDecomposition::terms() const {
    std::vector<ChannelTerm> out;
    if (n_qubits == 1) {
        for (const auto& u : unitary_1q) {
            ChannelTerm t;
            t.kind = ChannelTerm::Kind::Unitary1Q;
            t.u1 = u;
            out.push_back(t);
        }
    } else {
        for (const auto& u : unitary_2q) {
            ChannelTerm t;
            t.kind = ChannelTerm::Kind::Unitary2Q;
            t.u2 = u;
            out.push_back(t);
        }
    }
    out.insert(out.end(), measurement_terms.begin(), measurement_terms.end());
    return out;
}

Superoperator UmcDecomposition::to_ptm() const { return convex_sum_ptm(p, terms()); }

Superoperator PauliProbabilities::to_ptm() const {
    const Eigen::Index dim = p.size();
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index m = 0; m < dim; ++m)
            diag(j) += p(m) * pauli_conj_sign(n_qubits, static_cast<int>(m),
                                              static_cast<int>(j));
    return {n_qubits, Eigen::MatrixXd(diag.asDiagonal())};
}

UmcDecomposition decompose_umc_1q(const Superoperator& target, const DecomposeOptions& opts) {
    if (target.n_qubits != 1) throw ValidationError("decompose_umc_1q: expected a 1-qubit map");
    return run_umc(target, opts, UmcLayout::make(1));
}

UmcDecomposition decompose_umc_2q(const Superoperator& target, const DecomposeOptions& opts) {
    if (target.n_qubits != 2) throw ValidationError("decompose_umc_2q: expected a 2-qubit map");
    return run_umc(target, opts, UmcLayout::make(2));
}

PauliProbabilities decompose_pta(const Superoperator& error_channel) {
    const int n = error_channel.n_qubits;
    const int d = 1 << n;
    const int dim = d * d;
    const Eigen::MatrixXcd j = ptm_to_choi(error_channel).j;
    const auto& basis = normalized_pauli_basis(n);

    PauliProbabilities out;
    out.n_qubits = n;
    out.p.resize(dim);
    for (int m = 0; m < dim; ++m) {
        // chi_mm = <w_m| J |w_m> with |w_m> = (1 x B_m)|Omega>.
        Eigen::VectorXcd w(dim);
        for (int i = 0; i < d; ++i)
            for (int a = 0; a < d; ++a) w(i * d + a) = basis[m](a, i);
        out.p(m) = (w.adjoint() * j * w)(0).real() / d;
    }

    for (int m = 0; m < dim; ++m) {
        if (out.p(m) < -1e-8)
            throw ValidationError(
                "decompose_pta: process-matrix diagonal is significantly negative; the map "
                "is not approximately a Pauli mixture");
        out.p(m) = std::max(out.p(m), 0.0);
    }
    std::vector<double> pv(out.p.data(), out.p.data() + out.p.size());
    detail::renormalize_exact(pv);
    out.p = Eigen::Map<Eigen::VectorXd>(pv.data(), static_cast<Eigen::Index>(pv.size()));
    return out;
}

Superoperator extract_error_channel(const Superoperator& ideal, const Superoperator& noisy) {
    if (ideal.ptm.rows() != noisy.ptm.rows())
        throw ValidationError("extract_error_channel: dimension mismatch");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(ideal.ptm);
    Eigen::MatrixXd e = lu.solve(noisy.ptm);
    if (!e.allFinite() ||
        (ideal.ptm * e - noisy.ptm).norm() > 1e-9 * std::max(1.0, noisy.ptm.norm()))
        throw ValidationError("extract_error_channel: ideal transfer matrix is singular");
    return {ideal.n_qubits, std::move(e)};
}

namespace {

// ZYZ payloads for a measurement term that re-prepares |w> regardless of the
// outcome (a reset onto w), measuring in the computational basis.
MeasurementParams reset_params(const Eigen::Vector2cd& w) {
    const Eigen::Vector2cd w_perp(-std::conj(w(1)), std::conj(w(0)));
    Eigen::Matrix2cd u_first;  // column 0 is w
    u_first << w(0), w_perp(0), w(1), w_perp(1);
    Eigen::Matrix2cd u_second;  // column 1 is w
    u_second << w_perp(0), w(0), w_perp(1), w(1);
    MeasurementParams p;
    const auto a1 = zyz_angles(u_first);
    const auto a2 = zyz_angles(u_second);
    for (int i = 0; i < 3; ++i) p.beta[i] = a1[i];
    for (int i = 0; i < 3; ++i) p.beta[3 + i] = a2[i];
    return p;
}

UmcDecomposition empty_1q_decomposition() {
    UmcDecomposition out;
    out.n_qubits = 1;
    out.unitary_1q.assign(4, UnitaryParams1Q{});
    ChannelTerm m;
    m.kind = ChannelTerm::Kind::Measurement1Q;
    out.measurement_terms.assign(2, m);
    out.p.assign(6, 0.0);
    return out;
}

}  // namespace

UmcDecomposition fit_prep_channel(const DensityMatrix& rho0) {
    if (rho0.rho.rows() != 2) throw ValidationError("fit_prep_channel: expected one qubit");
    if (std::abs(rho0.rho.trace().real() - 1.0) > 1e-9)
        throw ValidationError("fit_prep_channel: rho0 must have unit trace");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho0.rho);
    if (es.eigenvalues().minCoeff() < -1e-9)
        throw ValidationError("fit_prep_channel: rho0 is not positive semidefinite");

    UmcDecomposition out = empty_1q_decomposition();
    out.target_name = "prep";
    Eigen::Matrix2cd ground = Eigen::Matrix2cd::Zero();
    ground(0, 0) = 1;
    if ((rho0.rho - ground).norm() < 1e-14) {
        out.p[0] = 1.0;  // already the perfect preparation
        out.achieved_distance = 0.0;
        out.converged = true;
        return out;
    }

    // rho0 = l1 |w1><w1| + l2 |w2><w2| is prepared exactly by mixing resets
    // onto the two eigenstates.
    const double l2 = std::max(0.0, es.eigenvalues()(0));
    const double l1 = std::max(0.0, es.eigenvalues()(1));
    out.measurement_terms[0].m_first = reset_params(es.eigenvectors().col(1));
    out.measurement_terms[1].m_first = reset_params(es.eigenvectors().col(0));
    out.p[4] = l1 / (l1 + l2);
    out.p[5] = l2 / (l1 + l2);
    detail::renormalize_exact(out.p);

    const Eigen::VectorXd prepared =
        out.to_ptm().ptm * GateSetModel::perfect_rho0();
    out.achieved_distance =
        1.0 - state_fidelity(density_from_pauli_vector(prepared, 1), rho0);
    out.converged = out.achieved_distance <= 1e-9;
    return out;
}

UmcDecomposition fit_meas_channel(const Eigen::Vector4d& effect) {
    const Eigen::Matrix2cd e = density_from_pauli_vector(effect, 1).rho;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(e);
    if (es.eigenvalues().minCoeff() < -1e-9 || es.eigenvalues().maxCoeff() > 1 + 1e-9)
        throw ValidationError("fit_meas_channel: effect must satisfy 0 <= E <= I");

    UmcDecomposition out = empty_1q_decomposition();
    out.target_name = "meas";
    const Eigen::Vector4d perfect = GateSetModel::perfect_effect();
    if ((effect - perfect).norm() < 1e-14) {
        out.p[0] = 1.0;  // identity channel
        out.achieved_distance = 0.0;
        out.converged = true;
        return out;
    }

    // E = a|w><w| + b|wbar><wbar|. A single measurement term in the {w, wbar}
    // basis re-preparing states with |<1|f1>|^2 = a and |<1|f2>|^2 = b pulls
    // the perfect effect back onto E exactly.
    const double a = std::clamp(es.eigenvalues()(1), 0.0, 1.0);
    const double b = std::clamp(es.eigenvalues()(0), 0.0, 1.0);
    const Eigen::Vector2cd w = es.eigenvectors().col(1);
    const Eigen::Vector2cd wbar = es.eigenvectors().col(0);

    MeasurementParams p;
    p.beta[1] = 2.0 * std::asin(std::sqrt(a));
    p.beta[4] = 2.0 * std::acos(std::sqrt(b));
    Eigen::Matrix2cd m;  // <f| = <0|U requires U = [w wbar]^dag
    m.col(0) = w;
    m.col(1) = wbar;
    const auto ang = zyz_angles(Eigen::Matrix2cd(m.adjoint()));
    for (int i = 0; i < 3; ++i) p.beta[6 + i] = ang[i];

    out.measurement_terms[0].m_first = p;
    out.p[4] = 1.0;

    const Eigen::Vector4d realized = out.to_ptm().ptm.transpose() * perfect;
    out.achieved_distance = (realized - effect).norm();
    out.converged = out.achieved_distance <= 1e-9;
    return out;
}

}  // namespace umc
