#include "umc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <sstream>
#include <thread>
#include <utility>

#include "umc/errors.hpp"
#include "umc/pauli.hpp"
#include "umc/rng.hpp"

namespace umc {

namespace {

using complexd = std::complex<double>;

// Trace-preservation trap: post-op norm may drift only this far before the
// run is declared buggy rather than noisy.
constexpr double kNormTrap = 1e-8;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// ---------------------------------------------------------------------------
// Statevector kernels. The state is the only 2^n-sized object; every kernel
// walks the raw amplitude array in place and reports the resulting squared
// norm so the caller can watch for drift.

double apply_1q_kernel(complexd* d, std::size_t dim, int q, const Eigen::Matrix2cd& u) {
    const std::size_t bit = std::size_t(1) << q;
    const complexd u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
    double norm2 = 0.0;
    for (std::size_t hi = 0; hi < dim; hi += bit << 1) {
        for (std::size_t lo = hi; lo < hi + bit; ++lo) {
            const complexd a = d[lo];
            const complexd b = d[lo | bit];
            const complexd na = u00 * a + u01 * b;
            const complexd nb = u10 * a + u11 * b;
            d[lo] = na;
            d[lo | bit] = nb;
            norm2 += std::norm(na) + std::norm(nb);
        }
    }
    return norm2;
}

double apply_2q_kernel(complexd* d, std::size_t dim, int qa, int qb, const Eigen::Matrix4cd& u) {
    // Local index convention: bit 0 of the 4x4 block is qa, bit 1 is qb.
    // Block base indices are enumerated directly by inserting zero bits at
    // both qubit positions (low gap first).
    const std::size_t ba = std::size_t(1) << qa;
    const std::size_t bb = std::size_t(1) << qb;
    const std::size_t m1 = (std::size_t(1) << std::min(qa, qb)) - 1;
    const std::size_t m2 = (std::size_t(1) << std::max(qa, qb)) - 1;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < dim >> 2; ++i) {
        std::size_t idx = (i & m1) | ((i & ~m1) << 1);
        idx = (idx & m2) | ((idx & ~m2) << 1);
        const std::size_t i0 = idx, i1 = idx | ba, i2 = idx | bb, i3 = idx | ba | bb;
        const complexd in0 = d[i0], in1 = d[i1], in2 = d[i2], in3 = d[i3];
        const complexd o0 = u(0, 0) * in0 + u(0, 1) * in1 + u(0, 2) * in2 + u(0, 3) * in3;
        const complexd o1 = u(1, 0) * in0 + u(1, 1) * in1 + u(1, 2) * in2 + u(1, 3) * in3;
        const complexd o2 = u(2, 0) * in0 + u(2, 1) * in1 + u(2, 2) * in2 + u(2, 3) * in3;
        const complexd o3 = u(3, 0) * in0 + u(3, 1) * in1 + u(3, 2) * in2 + u(3, 3) * in3;
        d[i0] = o0;
        d[i1] = o1;
        d[i2] = o2;
        d[i3] = o3;
        norm2 += std::norm(o0) + std::norm(o1) + std::norm(o2) + std::norm(o3);
    }
    return norm2;
}

// Exactly diagonal 4x4 unitaries (the ideal cz above all) skip the dense
// block arithmetic; unit-modulus factors keep the norm, so no drift check
// beyond the accumulated sum is needed.
double apply_2q_diag_kernel(complexd* d, std::size_t dim, int qa, int qb,
                            const Eigen::Vector4cd& f) {
    const std::size_t ba = std::size_t(1) << qa;
    const std::size_t bb = std::size_t(1) << qb;
    const std::size_t m1 = (std::size_t(1) << std::min(qa, qb)) - 1;
    const std::size_t m2 = (std::size_t(1) << std::max(qa, qb)) - 1;
    const complexd f0 = f(0), f1 = f(1), f2 = f(2), f3 = f(3);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < dim >> 2; ++i) {
        std::size_t idx = (i & m1) | ((i & ~m1) << 1);
        idx = (idx & m2) | ((idx & ~m2) << 1);
        const complexd o0 = f0 * d[idx];
        const complexd o1 = f1 * d[idx | ba];
        const complexd o2 = f2 * d[idx | bb];
        const complexd o3 = f3 * d[idx | ba | bb];
        d[idx] = o0;
        d[idx | ba] = o1;
        d[idx | bb] = o2;
        d[idx | ba | bb] = o3;
        norm2 += std::norm(o0) + std::norm(o1) + std::norm(o2) + std::norm(o3);
    }
    return norm2;
}

// Z-basis collapse of one qubit. r in [0, 1) picks the branch; the kept
// branch is renormalized exactly, so the only drift source is the pre-op
// norm defect, recorded via |p0 + p1 - 1|.
int collapse_z_kernel(complexd* d, std::size_t dim, int q, double r, double& drift) {
    const std::size_t bit = std::size_t(1) << q;
    double p0 = 0.0, p1 = 0.0;
    for (std::size_t hi = 0; hi < dim; hi += bit << 1) {
        for (std::size_t lo = hi; lo < hi + bit; ++lo) {
            p0 += std::norm(d[lo]);
            p1 += std::norm(d[lo | bit]);
        }
    }
    const double total = p0 + p1;
    drift = std::max(drift, std::abs(total - 1.0));
    const int outcome = (r * total < p0) ? 0 : 1;
    const double kept = outcome == 0 ? p0 : p1;
    if (kept <= 0.0) throw ValidationError("statevector collapse hit a zero-probability branch");
    const double scale = 1.0 / std::sqrt(kept);
    for (std::size_t hi = 0; hi < dim; hi += bit << 1) {
        for (std::size_t lo = hi; lo < hi + bit; ++lo) {
            if (outcome == 0) {
                d[lo] *= scale;
                d[lo | bit] = 0.0;
            } else {
                d[lo] = d[lo | bit] * scale;
                d[lo | bit] = 0.0;
            }
        }
    }
    return outcome;
}

// Reset = unrecorded Z collapse followed by rebuilding |0> on the qubit.
// collapse_z_kernel already writes the surviving branch into the low half,
// so both outcomes land in the |0> subspace.
void reset_kernel(complexd* d, std::size_t dim, int q, double r, double& drift) {
    collapse_z_kernel(d, dim, q, r, drift);
}

// General two-outcome measurement channel: pick a Kraus branch by its Born
// weight, apply it in place, renormalize. The branch probability is computed
// without materializing K psi; drift is |applied norm - expected norm|, the
// trace-preservation defect of the pair.
void measurement_channel_kernel(complexd* d, std::size_t dim, int q, const Eigen::Matrix2cd& k1,
                                const Eigen::Matrix2cd& k2, double r, double& drift) {
    const std::size_t bit = std::size_t(1) << q;
    double p_first = 0.0;
    for (std::size_t hi = 0; hi < dim; hi += bit << 1) {
        for (std::size_t lo = hi; lo < hi + bit; ++lo) {
            const complexd a = d[lo];
            const complexd b = d[lo | bit];
            p_first += std::norm(k1(0, 0) * a + k1(0, 1) * b) + std::norm(k1(1, 0) * a + k1(1, 1) * b);
        }
    }
    const bool first = r < p_first;
    const Eigen::Matrix2cd& k = first ? k1 : k2;
    const double applied = apply_1q_kernel(d, dim, q, k);
    const double expected = first ? p_first : 1.0 - p_first;
    drift = std::max(drift, std::abs(applied - expected));
    if (applied <= 0.0) throw ValidationError("measurement channel produced a zero-norm state");
    const double scale = 1.0 / std::sqrt(applied);
    for (std::size_t i = 0; i < dim; ++i) d[i] *= scale;
}

// ---------------------------------------------------------------------------
// Compiled form. PureOps are lowered to fixed-size payloads once so the shot
// loop touches no dynamic matrices.

struct ExecOp {
    PureOp::Kind kind = PureOp::Kind::Unitary;
    int qa = 0;
    int qb = -1;  // second qubit of a 4x4 unitary, -1 otherwise
    Eigen::Matrix2cd u2 = Eigen::Matrix2cd::Zero();
    Eigen::Matrix4cd u4 = Eigen::Matrix4cd::Zero();
    Eigen::Matrix2cd k1 = Eigen::Matrix2cd::Zero();
    Eigen::Matrix2cd k2 = Eigen::Matrix2cd::Zero();
    bool diag4 = false;  // u4 has exactly zero off-diagonal entries
    Eigen::Vector4cd d4 = Eigen::Vector4cd::Zero();
    int source = -1;
};

void check_qubit_range(int q, int n_qubits, const char* what) {
    if (q < 0 || q >= n_qubits) {
        std::ostringstream os;
        os << what << ": qubit index " << q << " outside [0, " << n_qubits << ")";
        throw ValidationError(os.str());
    }
}

ExecOp lower_pure_op(const PureOp& op, int n_qubits) {
    ExecOp e;
    e.kind = op.kind;
    e.source = op.source;
    if (op.qubits.empty()) throw ValidationError("operation lists no qubits");
    e.qa = op.qubits[0];
    check_qubit_range(e.qa, n_qubits, "operation");
    switch (op.kind) {
        case PureOp::Kind::Unitary: {
            if (op.qubits.size() == 1) {
                if (op.u.rows() != 2 || op.u.cols() != 2)
                    throw ValidationError("single-qubit operation needs a 2x2 matrix");
                e.u2 = op.u;
            } else if (op.qubits.size() == 2) {
                if (op.u.rows() != 4 || op.u.cols() != 4)
                    throw ValidationError("two-qubit operation needs a 4x4 matrix");
                e.qb = op.qubits[1];
                check_qubit_range(e.qb, n_qubits, "operation");
                if (e.qb == e.qa) throw ValidationError("two-qubit operation repeats a qubit");
                e.u4 = op.u;
                e.diag4 = true;
                for (int r = 0; r < 4 && e.diag4; ++r)
                    for (int c = 0; c < 4; ++c)
                        if (r != c && e.u4(r, c) != complexd(0.0, 0.0)) {
                            e.diag4 = false;
                            break;
                        }
                if (e.diag4) e.d4 = e.u4.diagonal();
            } else {
                throw ValidationError("unitary operations act on one or two qubits");
            }
            break;
        }
        case PureOp::Kind::MeasurementChannel: {
            if (op.qubits.size() != 1)
                throw ValidationError("measurement channels act on one qubit");
            const KrausChannel kc = measurement_kraus(op.m);
            e.k1 = kc.ops[0];
            e.k2 = kc.ops[1];
            break;
        }
        case PureOp::Kind::Reset:
        case PureOp::Kind::MeasureZ: {
            if (op.qubits.size() != 1)
                throw ValidationError("reset and measurement act on one qubit");
            break;
        }
    }
    return e;
}

// Executes one lowered op. born supplies the Born-rule randomness; the
// drift accumulator feeds the trace-preservation trap.
void exec_op(const ExecOp& op, complexd* d, std::size_t dim, Rng& born, RunResult& out,
             double& drift) {
    switch (op.kind) {
        case PureOp::Kind::Unitary: {
            const double n2 =
                op.qb >= 0 ? (op.diag4 ? apply_2q_diag_kernel(d, dim, op.qa, op.qb, op.d4)
                                       : apply_2q_kernel(d, dim, op.qa, op.qb, op.u4))
                           : apply_1q_kernel(d, dim, op.qa, op.u2);
            drift = std::max(drift, std::abs(n2 - 1.0));
            break;
        }
        case PureOp::Kind::MeasurementChannel:
            measurement_channel_kernel(d, dim, op.qa, op.k1, op.k2, born.uniform(), drift);
            break;
        case PureOp::Kind::Reset:
            reset_kernel(d, dim, op.qa, born.uniform(), drift);
            break;
        case PureOp::Kind::MeasureZ: {
            const int bit = collapse_z_kernel(d, dim, op.qa, born.uniform(), drift);
            out.qubits.push_back(op.qa);
            out.bits.push_back(bit);
            break;
        }
    }
    if (drift > kNormTrap) {
        std::ostringstream os;
        os << "state norm drifted by " << drift << " (non-trace-preserving operation)";
        throw ValidationError(os.str());
    }
}

// ---------------------------------------------------------------------------
// Circuit + model -> compiled instruction list. Each instruction expands to
// deterministic pre ops, at most one convex-sum site, and deterministic
// post ops, executed in that order.

struct Site {
    std::vector<double> probs;
    std::vector<std::vector<PureOp>> terms;
    int source = -1;
};

struct CompiledInstr {
    std::vector<PureOp> pre;
    int site = -1;  // index into Compiled::sites
    std::vector<PureOp> post;
};

struct Compiled {
    int n_qubits = 0;
    std::vector<CompiledInstr> instrs;
    std::vector<Site> sites;
};

PureOp unitary_op(const Eigen::MatrixXcd& u, std::vector<int> qs, int src) {
    PureOp op;
    op.kind = PureOp::Kind::Unitary;
    op.qubits = std::move(qs);
    op.u = u;
    op.source = src;
    return op;
}

PureOp measurement_op(const MeasurementParams& m, int q, int src) {
    PureOp op;
    op.kind = PureOp::Kind::MeasurementChannel;
    op.qubits = {q};
    op.m = m;
    op.source = src;
    return op;
}

PureOp reset_op(int q, int src) {
    PureOp op;
    op.kind = PureOp::Kind::Reset;
    op.qubits = {q};
    op.source = src;
    return op;
}

PureOp measure_z_op(int q, int src) {
    PureOp op;
    op.kind = PureOp::Kind::MeasureZ;
    op.qubits = {q};
    op.source = src;
    return op;
}

void check_probability_vector(const std::string& what, const std::vector<double>& p) {
    double total = 0.0;
    for (double w : p) {
        if (!(w >= 0.0)) throw ValidationError(what + ": negative or NaN probability");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ValidationError(what + ": probabilities do not sum to 1");
}

std::vector<PureOp> channel_term_ops(const ChannelTerm& t, const std::vector<int>& qs, int src) {
    switch (t.kind) {
        case ChannelTerm::Kind::Unitary1Q:
            return {unitary_op(unitary_1q(t.u1), {qs[0]}, src)};
        case ChannelTerm::Kind::Unitary2Q:
            return {unitary_op(unitary_2q(t.u2), qs, src)};
        case ChannelTerm::Kind::Measurement1Q:
        case ChannelTerm::Kind::MeasurementOnFirst:
            return {measurement_op(t.m_first, qs[0], src)};
        case ChannelTerm::Kind::MeasurementOnSecond:
            return {measurement_op(t.m_second, qs[1], src)};
        case ChannelTerm::Kind::MeasurementPair:
            return {measurement_op(t.m_first, qs[0], src), measurement_op(t.m_second, qs[1], src)};
    }
    throw ValidationError("unknown channel term kind");
}

// A drawn reset channel collapses the qubit and rebuilds the target state:
// reset to |0>, then rotate |0> onto w.
std::vector<PureOp> cmc_reset_ops(const Eigen::Vector2cd& w, int q, int src) {
    Eigen::Matrix2cd uw;
    uw << w(0), -std::conj(w(1)), w(1), std::conj(w(0));
    return {reset_op(q, src), unitary_op(uw, {q}, src)};
}

Site umc_site(const std::string& what, const UmcDecomposition& u, const std::vector<int>& qs,
              int src) {
    if (u.n_qubits != static_cast<int>(qs.size()))
        throw ValidationError(what + ": decomposition arity does not match the instruction");
    const std::vector<ChannelTerm> terms = u.terms();
    if (u.p.size() != terms.size())
        throw ValidationError(what + ": weight count does not match the term count");
    check_probability_vector(what, u.p);
    Site s;
    s.source = src;
    s.probs = u.p;
    s.terms.reserve(terms.size());
    for (const ChannelTerm& t : terms) s.terms.push_back(channel_term_ops(t, qs, src));
    return s;
}

Site cmc_site(const std::string& what, const CmcDecomposition& c, int q, int src) {
    const std::vector<Eigen::Vector2cd>& resets = cmc_reset_states();
    const std::vector<Eigen::Matrix2cd>& cliffords = clifford_1q_table();
    if (c.p.size() != cliffords.size() + resets.size())
        throw ValidationError(what + ": weight count does not match the channel dictionary");
    check_probability_vector(what, c.p);
    Site s;
    s.source = src;
    s.probs = c.p;
    s.terms.reserve(c.p.size());
    for (std::size_t i = 0; i < cliffords.size(); ++i)
        s.terms.push_back({unitary_op(cliffords[i], {q}, src)});
    for (const Eigen::Vector2cd& w : resets) s.terms.push_back(cmc_reset_ops(w, q, src));
    return s;
}

// Pauli mixtures (twirled errors and depolarizing errors alike) become a
// site whose terms are single Pauli unitaries; the identity term is empty.
Site pauli_site(const std::string& what, const Eigen::VectorXd& p, const std::vector<int>& qs,
                int src) {
    const int arity = static_cast<int>(qs.size());
    const int n_terms = 1 << (2 * arity);
    if (p.size() != n_terms)
        throw ValidationError(what + ": Pauli probability vector has the wrong length");
    std::vector<double> probs(p.data(), p.data() + p.size());
    check_probability_vector(what, probs);
    Site s;
    s.source = src;
    s.probs = std::move(probs);
    s.terms.reserve(n_terms);
    s.terms.push_back({});
    for (int m = 1; m < n_terms; ++m)
        s.terms.push_back({unitary_op(pauli_product(arity, m), qs, src)});
    return s;
}

Eigen::VectorXd depolarizing_probs(double rate, int arity) {
    if (!(rate >= 0.0 && rate <= 1.0))
        throw ValidationError("depolarizing rate must lie in [0, 1]");
    const int n_terms = 1 << (2 * arity);
    Eigen::VectorXd p = Eigen::VectorXd::Constant(n_terms, rate / n_terms);
    p(0) = 1.0 - rate + rate / n_terms;
    return p;
}

Compiled compile_circuit(const Circuit& c, const NoiseModel& m) {
    validate_circuit(c);
    Compiled cc;
    cc.n_qubits = c.n_qubits;
    cc.instrs.reserve(c.instructions.size());
    for (std::size_t i = 0; i < c.instructions.size(); ++i) {
        const Instruction& ins = c.instructions[i];
        const int src = static_cast<int>(i);
        CompiledInstr ci;
        switch (ins.kind) {
            case Instruction::Kind::Prep: {
                ci.pre.push_back(reset_op(ins.qubits[0], src));
                if (m.prep_channel) {
                    cc.sites.push_back(
                        umc_site("preparation channel", *m.prep_channel, ins.qubits, src));
                    ci.site = static_cast<int>(cc.sites.size()) - 1;
                }
                break;
            }
            case Instruction::Kind::Gate: {
                const auto it = m.gates.find(ins.gate);
                if (it == m.gates.end())
                    throw ValidationError("noise model has no entry for gate '" + ins.gate + "'");
                const std::string what = "gate '" + ins.gate + "'";
                std::visit(
                    overloaded{
                        [&](const NoNoise&) {
                            ci.pre.push_back(unitary_op(ideal_unitary(ins.gate), ins.qubits, src));
                        },
                        [&](const DepolarizingNoise& dn) {
                            const int arity = static_cast<int>(ins.qubits.size());
                            cc.sites.push_back(pauli_site(
                                what, depolarizing_probs(dn.rate, arity), ins.qubits, src));
                            ci.site = static_cast<int>(cc.sites.size()) - 1;
                            ci.post.push_back(
                                unitary_op(ideal_unitary(ins.gate), ins.qubits, src));
                        },
                        [&](const UmcDecomposition& u) {
                            cc.sites.push_back(umc_site(what, u, ins.qubits, src));
                            ci.site = static_cast<int>(cc.sites.size()) - 1;
                        },
                        [&](const CmcDecomposition& cmcd) {
                            if (ins.qubits.size() != 1)
                                throw ValidationError(
                                    what + ": Clifford mixtures cover single-qubit gates only");
                            cc.sites.push_back(cmc_site(what, cmcd, ins.qubits[0], src));
                            ci.site = static_cast<int>(cc.sites.size()) - 1;
                        },
                        [&](const PauliProbabilities& pta) {
                            if (pta.n_qubits != static_cast<int>(ins.qubits.size()))
                                throw ValidationError(
                                    what + ": Pauli mixture arity does not match the gate");
                            cc.sites.push_back(pauli_site(what, pta.p, ins.qubits, src));
                            ci.site = static_cast<int>(cc.sites.size()) - 1;
                            ci.post.push_back(
                                unitary_op(ideal_unitary(ins.gate), ins.qubits, src));
                        },
                    },
                    it->second);
                break;
            }
            case Instruction::Kind::Measure: {
                if (m.meas_channel) {
                    cc.sites.push_back(
                        umc_site("measurement channel", *m.meas_channel, ins.qubits, src));
                    ci.site = static_cast<int>(cc.sites.size()) - 1;
                }
                ci.post.push_back(measure_z_op(ins.qubits[0], src));
                break;
            }
        }
        cc.instrs.push_back(std::move(ci));
    }
    return cc;
}

// Lowered mirror of Compiled for the shot loop.
struct ExecSite {
    std::vector<double> probs;
    std::vector<std::vector<ExecOp>> terms;
};

struct ExecInstr {
    std::vector<ExecOp> pre;
    int site = -1;
    std::vector<ExecOp> post;
};

struct ExecProgram {
    int n_qubits = 0;
    std::vector<ExecInstr> instrs;
    std::vector<ExecSite> sites;
};

ExecProgram lower_program(const Compiled& cc) {
    ExecProgram p;
    p.n_qubits = cc.n_qubits;
    p.instrs.reserve(cc.instrs.size());
    p.sites.reserve(cc.sites.size());
    auto lower_all = [&](const std::vector<PureOp>& ops) {
        std::vector<ExecOp> out;
        out.reserve(ops.size());
        for (const PureOp& op : ops) out.push_back(lower_pure_op(op, cc.n_qubits));
        return out;
    };
    for (const Site& s : cc.sites) {
        ExecSite es;
        es.probs = s.probs;
        es.terms.reserve(s.terms.size());
        for (const auto& t : s.terms) es.terms.push_back(lower_all(t));
        p.sites.push_back(std::move(es));
    }
    for (const CompiledInstr& ci : cc.instrs) {
        ExecInstr ei;
        ei.pre = lower_all(ci.pre);
        ei.site = ci.site;
        ei.post = lower_all(ci.post);
        p.instrs.push_back(std::move(ei));
    }
    return p;
}

// One shot: term draws come from the draw stream, collapses from the Born
// stream. Using separate streams keeps the sampled path identical to
// inject_noise(seed_a) followed by run_pure_state(seed_b).
void run_program(const ExecProgram& p, Rng& draw, Rng& born, Eigen::VectorXcd& psi,
                 RunResult& out) {
    psi.setZero();
    psi(0) = 1.0;
    out.qubits.clear();
    out.bits.clear();
    out.max_norm_drift = 0.0;
    complexd* d = psi.data();
    const std::size_t dim = static_cast<std::size_t>(psi.size());
    double drift = 0.0;
    for (const ExecInstr& ei : p.instrs) {
        for (const ExecOp& op : ei.pre) exec_op(op, d, dim, born, out, drift);
        if (ei.site >= 0) {
            const ExecSite& s = p.sites[ei.site];
            const int t = draw.discrete(s.probs);
            for (const ExecOp& op : s.terms[t]) exec_op(op, d, dim, born, out, drift);
        }
        for (const ExecOp& op : ei.post) exec_op(op, d, dim, born, out, drift);
    }
    out.max_norm_drift = drift;
}

// Per-worker execution state: the lowered program plus the one statevector
// buffer a worker ever allocates.
struct ShotState {
    ExecProgram program;
    Eigen::VectorXcd psi;
    RunResult result;

    explicit ShotState(const Compiled& cc)
        : program(lower_program(cc)), psi(std::int64_t(1) << cc.n_qubits) {}

    const RunResult& run(std::uint64_t master_seed, long long shot) {
        const std::uint64_t stream = 2 * static_cast<std::uint64_t>(shot);
        Rng draw(derive_seed(master_seed, stream));
        Rng born(derive_seed(master_seed, stream + 1));
        run_program(program, draw, born, psi, result);
        return result;
    }
};

std::vector<int> measured_qubits_once(const Circuit& c) {
    std::vector<int> count(c.n_qubits, 0);
    std::vector<int> measured;
    for (const Instruction& ins : c.instructions) {
        if (ins.kind != Instruction::Kind::Measure) continue;
        if (++count[ins.qubits[0]] > 1)
            throw ValidationError(
                "sampling requires each qubit to be measured at most once; "
                "run measure-and-reprep circuits through run_pure_state");
        measured.push_back(ins.qubits[0]);
    }
    std::sort(measured.begin(), measured.end());
    return measured;
}

}  // namespace

std::string RunResult::bitstring() const {
    std::map<int, int> last;
    for (std::size_t i = 0; i < qubits.size(); ++i) last[qubits[i]] = bits[i];
    std::string s;
    s.reserve(last.size());
    for (auto it = last.rbegin(); it != last.rend(); ++it)
        s.push_back(static_cast<char>('0' + it->second));
    return s;
}

ConcreteCircuit inject_noise(const Circuit& c, const NoiseModel& m, std::uint64_t seed) {
    const Compiled cc = compile_circuit(c, m);
    ConcreteCircuit out;
    out.n_qubits = cc.n_qubits;
    Rng draw(seed);
    for (const CompiledInstr& ci : cc.instrs) {
        for (const PureOp& op : ci.pre) out.ops.push_back(op);
        if (ci.site >= 0) {
            const Site& s = cc.sites[ci.site];
            const int t = draw.discrete(s.probs);
            out.draw_log.push_back(t);
            out.draw_sources.push_back(s.source);
            for (const PureOp& op : s.terms[t]) out.ops.push_back(op);
        }
        for (const PureOp& op : ci.post) out.ops.push_back(op);
    }
    return out;
}

RunResult run_pure_state(const ConcreteCircuit& cc, std::uint64_t seed) {
    if (cc.n_qubits < 1) throw ValidationError("circuit needs at least one qubit");
    std::vector<ExecOp> ops;
    ops.reserve(cc.ops.size());
    for (const PureOp& op : cc.ops) ops.push_back(lower_pure_op(op, cc.n_qubits));
    Eigen::VectorXcd psi(std::size_t(1) << cc.n_qubits);
    psi.setZero();
    psi(0) = 1.0;
    Rng born(seed);
    RunResult out;
    complexd* d = psi.data();
    const std::size_t dim = static_cast<std::size_t>(psi.size());
    double drift = 0.0;
    for (const ExecOp& op : ops) exec_op(op, d, dim, born, out, drift);
    out.max_norm_drift = drift;
    return out;
}

struct ShotRunner::Impl {
    ShotState state;
    explicit Impl(const Compiled& cc) : state(cc) {}
};

ShotRunner::ShotRunner(const Circuit& c, const NoiseModel& m)
    : impl_(std::make_unique<Impl>(compile_circuit(c, m))) {}
ShotRunner::~ShotRunner() = default;
ShotRunner::ShotRunner(ShotRunner&&) noexcept = default;
ShotRunner& ShotRunner::operator=(ShotRunner&&) noexcept = default;

const RunResult& ShotRunner::run(std::uint64_t master_seed, long long shot) {
    return impl_->state.run(master_seed, shot);
}

int ShotRunner::n_qubits() const { return impl_->state.program.n_qubits; }

SampleRecord sample(const Circuit& c, const NoiseModel& m, long long shots,
                    std::uint64_t master_seed, int workers) {
    if (shots < 1) throw ValidationError("sample needs at least one shot");
    if (workers < 1) throw ValidationError("sample needs at least one worker");
    const std::vector<int> measured = measured_qubits_once(c);
    const Compiled cc = compile_circuit(c, m);

    const int n_workers = static_cast<int>(std::min<long long>(workers, shots));
    struct WorkerState {
        std::map<std::string, long long> counts;
        std::vector<long long> ones;
        std::exception_ptr error;
    };
    std::vector<WorkerState> states(n_workers);
    for (WorkerState& ws : states) ws.ones.assign(c.n_qubits, 0);

    // Shots are strided across workers; per-shot seeding makes the record
    // independent of the assignment.
    auto work = [&](int w) {
        WorkerState& ws = states[w];
        try {
            ShotState runner(cc);
            for (long long s = w; s < shots; s += n_workers) {
                const RunResult& r = runner.run(master_seed, s);
                ++ws.counts[r.bitstring()];
                for (std::size_t i = 0; i < r.qubits.size(); ++i)
                    if (r.bits[i]) ++ws.ones[r.qubits[i]];
            }
        } catch (...) {
            ws.error = std::current_exception();
        }
    };

    if (n_workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) threads.emplace_back(work, w);
        for (std::thread& t : threads) t.join();
    }

    SampleRecord rec;
    rec.shots = shots;
    rec.master_seed = master_seed;
    std::vector<long long> ones(c.n_qubits, 0);
    for (const WorkerState& ws : states) {
        if (ws.error) std::rethrow_exception(ws.error);
        for (const auto& [key, n] : ws.counts) rec.counts[key] += n;
        for (int q = 0; q < c.n_qubits; ++q) ones[q] += ws.ones[q];
    }
    for (int q : measured) {
        QubitStat st;
        st.qubit = q;
        st.p1 = static_cast<double>(ones[q]) / static_cast<double>(shots);
        st.standard_error = std::sqrt(st.p1 * (1.0 - st.p1) / static_cast<double>(shots));
        rec.expectations.push_back(st);
    }
    return rec;
}

std::map<std::string, double> run_density_matrix(const Circuit& c, const NoiseModel& m) {
    validate_circuit(c);
    if (c.n_qubits > 6)
        throw ResourceError("density-matrix backend supports at most 6 qubits");

    std::vector<int> measured_flag(c.n_qubits, 0);
    std::vector<int> measured;
    for (const Instruction& ins : c.instructions) {
        if (ins.kind == Instruction::Kind::Prep && measured_flag[ins.qubits[0]])
            throw ValidationError(
                "density-matrix backend does not support measure-and-reprep circuits");
        if (ins.kind == Instruction::Kind::Measure) {
            measured_flag[ins.qubits[0]] = 1;
            measured.push_back(ins.qubits[0]);
        }
    }
    std::sort(measured.begin(), measured.end());

    // Gate-entry transfer matrices, built per instruction via the same
    // validation the sampler uses.
    Eigen::VectorXd v = pauli_vector(density_from_state(make_zero_state(c.n_qubits)));
    const auto apply = [&](const Superoperator& s, const std::vector<int>& qs) {
        apply_superop_pauli(s, v, c.n_qubits, qs);
    };
    for (const Instruction& ins : c.instructions) {
        switch (ins.kind) {
            case Instruction::Kind::Prep: {
                if (m.prep_channel) {
                    if (m.prep_channel->n_qubits != 1)
                        throw ValidationError("preparation channel must be single-qubit");
                    apply(m.prep_channel->to_ptm(), ins.qubits);
                }
                break;
            }
            case Instruction::Kind::Gate: {
                const auto it = m.gates.find(ins.gate);
                if (it == m.gates.end())
                    throw ValidationError("noise model has no entry for gate '" + ins.gate + "'");
                const std::string what = "gate '" + ins.gate + "'";
                const int arity = static_cast<int>(ins.qubits.size());
                Superoperator s;
                std::visit(
                    overloaded{
                        [&](const NoNoise&) { s = ideal_gate_ptm(ins.gate); },
                        [&](const DepolarizingNoise& dn) {
                            if (!(dn.rate >= 0.0 && dn.rate <= 1.0))
                                throw ValidationError("depolarizing rate must lie in [0, 1]");
                            const int d = 1 << (2 * arity);
                            Eigen::VectorXd scale = Eigen::VectorXd::Constant(d, 1.0 - dn.rate);
                            scale(0) = 1.0;
                            Superoperator err{arity, scale.asDiagonal()};
                            s = compose(ideal_gate_ptm(ins.gate), err);
                        },
                        [&](const UmcDecomposition& u) {
                            if (u.n_qubits != arity)
                                throw ValidationError(
                                    what + ": decomposition arity does not match the instruction");
                            s = u.to_ptm();
                        },
                        [&](const CmcDecomposition& cmcd) {
                            if (arity != 1)
                                throw ValidationError(
                                    what + ": Clifford mixtures cover single-qubit gates only");
                            s = cmcd.to_ptm();
                        },
                        [&](const PauliProbabilities& pta) {
                            if (pta.n_qubits != arity)
                                throw ValidationError(
                                    what + ": Pauli mixture arity does not match the gate");
                            s = compose(ideal_gate_ptm(ins.gate), pta.to_ptm());
                        },
                    },
                    it->second);
                apply(s, ins.qubits);
                break;
            }
            case Instruction::Kind::Measure: {
                if (m.meas_channel) {
                    if (m.meas_channel->n_qubits != 1)
                        throw ValidationError("measurement channel must be single-qubit");
                    apply(m.meas_channel->to_ptm(), ins.qubits);
                }
                break;
            }
        }
    }

    const DensityMatrix rho = density_from_pauli_vector(v, c.n_qubits);
    const int k = static_cast<int>(measured.size());
    const auto key_for = [&](std::size_t x) {
        std::string key(static_cast<std::size_t>(k), '0');
        for (int j = 0; j < k; ++j) {
            const int q = measured[k - 1 - j];
            key[static_cast<std::size_t>(j)] = static_cast<char>('0' + ((x >> q) & 1));
        }
        return key;
    };
    std::map<std::string, double> out;
    for (std::size_t mask = 0; mask < (std::size_t(1) << k); ++mask) {
        std::size_t x = 0;
        for (int j = 0; j < k; ++j)
            if ((mask >> j) & 1) x |= std::size_t(1) << measured[j];
        out[key_for(x)] = 0.0;
    }
    const std::size_t dim = std::size_t(1) << c.n_qubits;
    for (std::size_t x = 0; x < dim; ++x) out[key_for(x)] += rho.rho(x, x).real();
    return out;
}

NoiseModel build_noise_model(const GateSetModel& gs, const std::vector<std::string>& gate_names,
                             NoiseMethod method, const DecomposeOptions& opts) {
    NoiseModel m;
    if (method == NoiseMethod::None) {
        for (const std::string& name : gate_names) m.gates[name] = NoNoise{};
        return m;
    }
    for (const std::string& name : gate_names) {
        const int arity = gate_arity(name);
        const Superoperator& target = gs.gate(name);
        switch (method) {
            case NoiseMethod::Umc: {
                UmcDecomposition u =
                    arity == 1 ? decompose_umc_1q(target, opts) : decompose_umc_2q(target, opts);
                u.target_name = name;
                m.gates[name] = std::move(u);
                break;
            }
            case NoiseMethod::Cmc: {
                if (arity != 1)
                    throw ValidationError(
                        "Clifford mixtures cover single-qubit gates only; '" + name +
                        "' is two-qubit");
                CmcDecomposition cd = decompose_cmc(target, opts);
                cd.target_name = name;
                m.gates[name] = std::move(cd);
                break;
            }
            case NoiseMethod::Pta: {
                m.gates[name] =
                    decompose_pta(extract_error_channel(ideal_gate_ptm(name), target));
                break;
            }
            case NoiseMethod::Depolarizing: {
                const double infid = 1.0 - average_gate_fidelity(target, ideal_gate_ptm(name));
                const double d = static_cast<double>(std::size_t(1) << arity);
                const double rate = std::clamp(infid * d / (d - 1.0), 0.0, 1.0);
                m.gates[name] = DepolarizingNoise{rate};
                break;
            }
            case NoiseMethod::None:
                break;
        }
    }
    m.prep_channel = fit_prep_channel(density_from_pauli_vector(gs.rho0, 1));
    m.meas_channel = fit_meas_channel(gs.effect);
    return m;
}

}  // namespace umc
