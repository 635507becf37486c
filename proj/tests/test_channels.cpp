#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "umc/channels.hpp"
#include "umc/errors.hpp"
#include "umc/gateset.hpp"
#include "umc/pauli.hpp"
#include "umc/qcore.hpp"
#include "umc/rng.hpp"
#include "test_util.hpp"

using namespace umc;

namespace {

const double kPi = std::acos(-1.0);

MeasurementParams random_meas_params(Rng& rng) {
    MeasurementParams p;
    for (double& b : p.beta) b = rng.uniform(-kPi, kPi);
    return p;
}

}  // namespace

TEST_CASE("single-qubit unitary family reproduces axis rotations") {
    // {0, pi/2, 0} is a y-rotation by 90 degrees: Z -> X, X -> -Z.
    Superoperator s = unitary_channel_1q({{0, kPi / 2, 0}});
    Eigen::Matrix4d expected;
    expected << 1, 0, 0, 0,
                0, 0, 0, 1,
                0, 0, 1, 0,
                0, -1, 0, 0;
    CHECK((s.ptm - expected).norm() < 1e-12);

    // Euler angles cover an arbitrary unitary.
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXcd u = testutil::random_unitary(2, rng);
        auto [a, b, c] = zyz_angles(u);
        Superoperator via_family = unitary_channel_1q({{a, b, c}});
        CHECK((via_family.ptm - unitary_to_ptm(u).ptm).norm() < 1e-10);
    }
}

TEST_CASE("two-qubit unitary family reaches cz") {
    // exp(-i pi/4 (ZZ - ZI - IZ)) equals cz up to global phase.
    UnitaryParams2Q p;
    p.theta[2] = -kPi / 4;   // IZ (z on qubit 0)
    p.theta[11] = -kPi / 4;  // ZI (z on qubit 1)
    p.theta[14] = kPi / 4;   // ZZ
    Superoperator s = unitary_channel_2q(p);
    CHECK((s.ptm - ideal_gate_ptm("cz").ptm).norm() < 1e-12);

    // Single-axis terms reduce to local rotations.
    UnitaryParams2Q q;
    q.theta[0] = 0.3;  // IX: x-rotation on qubit 0 only, angle 0.6
    Superoperator sq = unitary_channel_2q(q);
    Eigen::MatrixXd expected = kron(Eigen::Matrix4d::Identity().eval(),
                                    unitary_to_ptm(rx(0.6)).ptm);
    CHECK((sq.ptm - expected).norm() < 1e-12);
}

TEST_CASE("measurement channel at zero parameters is z dephasing") {
    KrausChannel k = measurement_kraus({});
    REQUIRE(k.ops.size() == 2);
    Eigen::Matrix2cd p0 = Eigen::Matrix2cd::Zero(), p1 = Eigen::Matrix2cd::Zero();
    p0(0, 0) = 1;
    p1(1, 1) = 1;
    CHECK((k.ops[0] - p0).norm() < 1e-15);
    CHECK((k.ops[1] - p1).norm() < 1e-15);

    Eigen::Matrix4d dephase = Eigen::Vector4d(1, 0, 0, 1).asDiagonal();
    CHECK((measurement_channel({}).ptm - dephase).norm() < 1e-15);
}

TEST_CASE("measurement channel reset configuration") {
    // Sending |f2> to |0> as well turns the measurement into a reset.
    MeasurementParams p;
    p.beta[4] = kPi;  // U(0,pi,0)|1> is proportional to |0>
    Superoperator s = measurement_channel(p);
    Eigen::Matrix4d reset;
    reset << 1, 0, 0, 0,
             0, 0, 0, 0,
             0, 0, 0, 0,
             1, 0, 0, 0;
    CHECK((s.ptm - reset).norm() < 1e-12);

    // Any input state lands on the ground state.
    Rng rng(7);
    DensityMatrix rho = testutil::random_density(1, rng);
    Eigen::Vector4d out = s.ptm * pauli_vector(rho);
    Eigen::Vector4d ground = GateSetModel::perfect_rho0();
    CHECK((out - ground).norm() < 1e-12);
}

TEST_CASE("measurement channels are exactly trace preserving and CP") {
    Rng rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        MeasurementParams p = random_meas_params(rng);
        KrausChannel k = measurement_kraus(p);
        Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
        for (const auto& op : k.ops) sum += op.adjoint() * op;
        // Completeness holds by construction, not approximately.
        CHECK((sum - Eigen::Matrix2cd::Identity()).norm() < 1e-14);
        CHECK(validate_cptp(kraus_to_ptm(k)).ok());
    }
}

TEST_CASE("convex mixtures assemble the depolarizing channel") {
    const double p = 0.137;
    std::vector<ChannelTerm> terms(4);
    terms[0].u1 = {{0, 0, 0}};        // identity
    terms[1].u1 = {{0, kPi, kPi}};    // x up to phase
    terms[2].u1 = {{0, kPi, 0}};      // y up to phase
    terms[3].u1 = {{0, 0, kPi}};      // z up to phase
    std::vector<double> w{1 - 3 * p / 4, p / 4, p / 4, p / 4};
    Superoperator mix = convex_sum_ptm(w, terms);
    Eigen::Matrix4d expected = Eigen::Vector4d(1, 1 - p, 1 - p, 1 - p).asDiagonal();
    CHECK((mix.ptm - expected).norm() < 1e-12);

    CHECK_THROWS_AS(convex_sum_ptm({0.5, 0.4}, terms), ValidationError);
    CHECK_THROWS_AS(convex_sum_ptm({0.5, 0.5, 0.5, -0.5}, terms), ValidationError);

    // Mixtures with measurement terms stay CPTP.
    Rng rng(3);
    std::vector<ChannelTerm> umc(6);
    for (int i = 0; i < 4; ++i)
        umc[i].u1 = {{rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi)}};
    umc[4].kind = ChannelTerm::Kind::Measurement1Q;
    umc[4].m_first = random_meas_params(rng);
    umc[5].kind = ChannelTerm::Kind::Measurement1Q;
    umc[5].m_first = random_meas_params(rng);
    std::vector<double> wp(6);
    double total = 0;
    for (double& x : wp) {
        x = rng.uniform(0.05, 1.0);
        total += x;
    }
    for (double& x : wp) x /= total;
    CHECK(validate_cptp(convex_sum_ptm(wp, umc)).ok());
}

TEST_CASE("two-qubit measurement terms embed on the right factors") {
    MeasurementParams mp;  // z dephasing
    ChannelTerm first;
    first.kind = ChannelTerm::Kind::MeasurementOnFirst;
    first.m_first = mp;
    ChannelTerm second;
    second.kind = ChannelTerm::Kind::MeasurementOnSecond;
    second.m_second = mp;

    // Dephase qubit 0: kills X/Y components of the low digit only.
    Eigen::MatrixXd s1 = first.to_ptm().ptm;
    Eigen::MatrixXd s2 = second.to_ptm().ptm;
    for (int idx = 0; idx < 16; ++idx) {
        const int low = idx & 3, high = idx >> 2;
        const double d1 = (low == 1 || low == 2) ? 0.0 : 1.0;
        const double d2 = (high == 1 || high == 2) ? 0.0 : 1.0;
        CHECK(s1(idx, idx) == doctest::Approx(d1));
        CHECK(s2(idx, idx) == doctest::Approx(d2));
    }

    ChannelTerm pair;
    pair.kind = ChannelTerm::Kind::MeasurementPair;
    pair.m_first = mp;
    pair.m_second = mp;
    Eigen::MatrixXd sp = pair.to_ptm().ptm;
    CHECK((sp - s1 * s2).norm() < 1e-13);
}

TEST_CASE("error generator recovers the depolarizing log") {
    const double p = 0.05;
    Superoperator id = identity_superop(1);
    Superoperator dep{1, Eigen::Vector4d(1, 1 - p, 1 - p, 1 - p).asDiagonal()};
    Eigen::MatrixXd l = error_generator(id, dep);
    Eigen::Matrix4d expected =
        Eigen::Vector4d(0, std::log(1 - p), std::log(1 - p), std::log(1 - p)).asDiagonal();
    CHECK((l - expected).norm() < 1e-12);

    // Scaling by n composes the channel n times.
    Superoperator twice = scale_channel(id, l, 2.0);
    const double q = 1 - (1 - p) * (1 - p);
    Eigen::Matrix4d expected2 = Eigen::Vector4d(1, 1 - q, 1 - q, 1 - q).asDiagonal();
    CHECK((twice.ptm - expected2).norm() < 1e-12);

    // Fractional scaling interpolates.
    Superoperator half = scale_channel(id, l, 0.5);
    CHECK(half.ptm(1, 1) == doctest::Approx(std::sqrt(1 - p)));
}

TEST_CASE("error generator round trips a noisy gate") {
    Rng rng(41);
    Eigen::VectorXd hc(3), rates(3);
    for (int i = 0; i < 3; ++i) hc(i) = 0.02 * rng.normal();
    for (int i = 0; i < 3; ++i) rates(i) = 0.01 * std::abs(rng.normal());
    Eigen::MatrixXd l_true =
        hamiltonian_generator(1, hc) + pauli_dissipator_generator(1, rates);

    Superoperator target = ideal_gate_ptm("ry90");
    Superoperator noisy{1, target.ptm * l_true.exp()};
    Eigen::MatrixXd l_rec = error_generator(target, noisy);
    CHECK((l_rec - l_true).norm() < 1e-9);
}

TEST_CASE("error generator refuses the branch cut") {
    // A pi rotation against identity puts -1 in the relative spectrum.
    Superoperator id = identity_superop(1);
    Superoperator flip = ideal_gate_ptm("x");
    CHECK_THROWS_AS(error_generator(id, flip), ValidationError);
}

TEST_CASE("scale_channel rejects non-CPTP extrapolation") {
    // Scaling a dephasing generator by a negative amount amplifies coherences
    // past the physical boundary.
    Superoperator id = identity_superop(1);
    Eigen::VectorXd rates(3);
    rates << 0, 0, 0.1;
    Eigen::MatrixXd l = pauli_dissipator_generator(1, rates);
    CHECK_THROWS_AS(scale_channel(id, l, -2.0), ValidationError);
    CHECK(validate_cptp(scale_channel(id, l, 3.7)).ok());
}

TEST_CASE("hamiltonian generator exponentiates to the rotation") {
    Eigen::VectorXd coeffs(3);
    coeffs << 0, 0, 0.17;  // H = 0.17 Z, so exp(L) conjugates by rz(0.34)
    Eigen::MatrixXd l = hamiltonian_generator(1, coeffs);
    CHECK((l.exp() - unitary_to_ptm(rz(0.34)).ptm).norm() < 1e-12);

    // Two-qubit version against a dense conjugation oracle.
    Rng rng(5);
    Eigen::VectorXd c2(15);
    for (int i = 0; i < 15; ++i) c2(i) = 0.1 * rng.normal();
    Eigen::MatrixXd l2 = hamiltonian_generator(2, c2);
    UnitaryParams2Q p;
    for (int i = 0; i < 15; ++i) p.theta[i] = c2(i);
    CHECK((l2.exp() - unitary_channel_2q(p).ptm).norm() < 1e-10);
}

TEST_CASE("pauli dissipator is diagonal dephasing and decay") {
    Eigen::VectorXd rates(3);
    rates << 0, 0, 0.25;  // pure z noise
    Eigen::MatrixXd l = pauli_dissipator_generator(1, rates);
    Eigen::Matrix4d expected = Eigen::Vector4d(0, -0.5, -0.5, 0).asDiagonal();
    CHECK((l - expected).norm() < 1e-14);

    // Nonnegative rates give a CPTP semigroup at any scale.
    Rng rng(9);
    Eigen::VectorXd r2(15);
    for (int i = 0; i < 15; ++i) r2(i) = std::abs(rng.normal());
    Eigen::MatrixXd l2 = pauli_dissipator_generator(2, r2);
    for (double s : {0.01, 0.3, 2.0})
        CHECK(validate_cptp({2, (s * l2).exp()}).ok());

    Eigen::VectorXd bad(3);
    bad << 0.1, -0.1, 0;
    CHECK_THROWS_AS(pauli_dissipator_generator(1, bad), ValidationError);
}

TEST_CASE("bisection hits a requested infidelity") {
    Superoperator target = ideal_gate_ptm("cz");
    Rng rng(77);
    Eigen::VectorXd hc(15), rates(15);
    for (int i = 0; i < 15; ++i) hc(i) = rng.normal();
    for (int i = 0; i < 15; ++i) rates(i) = std::abs(rng.normal());
    Eigen::MatrixXd l = 0.5 * hamiltonian_generator(2, hc) / hamiltonian_generator(2, hc).norm() +
                        0.5 * pauli_dissipator_generator(2, rates) /
                            pauli_dissipator_generator(2, rates).norm();
    const double want = 0.0734;
    const double s = bisect_generator_scale(target, l, want);
    Superoperator noisy = scale_channel(target, l, s);
    CHECK(std::abs(1.0 - average_gate_fidelity(noisy, target) - want) < 1e-8);
}

TEST_CASE("gate set synthesis meets fidelity targets deterministically") {
    GateSetSynthesisSpec spec;
    spec.name = "synthetic-test";
    spec.seed = 2026;
    spec.gates["ry90"] = {4e-4, 0.35};
    spec.gates["cz"] = {0.0734, 0.35};
    spec.prep_infidelity = 0.0704;
    spec.meas_infidelity = 0.0397;

    GateSetModel m = synthesize_noisy_gateset(spec);
    for (const char* g : {"ry90", "cz"}) {
        const Superoperator& s = m.gate(g);
        CHECK(validate_cptp(s).ok());
        const double f = average_gate_fidelity(s, ideal_gate_ptm(g));
        const double want = 1.0 - spec.gates[g].infidelity;
        CHECK(std::abs(f - want) < 1e-6);
    }

    // SPAM lands on the requested preparation and readout fidelities.
    Eigen::Matrix2cd rho = density_from_pauli_vector(m.rho0, 1).rho;
    CHECK(std::abs(rho(0, 0).real() - (1 - spec.prep_infidelity)) < 1e-6);
    Eigen::Matrix2cd eff = density_from_pauli_vector(m.effect, 1).rho;
    CHECK(std::abs(eff(1, 1).real() - (1 - spec.meas_infidelity)) < 1e-6);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(eff);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK(es.eigenvalues().maxCoeff() < 1 + 1e-12);

    // Same seed reproduces bit for bit; a different seed does not.
    GateSetModel m2 = synthesize_noisy_gateset(spec);
    CHECK((m.gate("cz").ptm - m2.gate("cz").ptm).norm() == 0.0);
    spec.seed = 2027;
    GateSetModel m3 = synthesize_noisy_gateset(spec);
    CHECK((m.gate("cz").ptm - m3.gate("cz").ptm).norm() > 0.0);

    // The SPAM noise channels ride along for sweep use.
    CHECK(m.has_gate(kPrepChannelKey));
    CHECK(m.has_gate(kMeasChannelKey));
    CHECK((m.gate(kPrepChannelKey).ptm * GateSetModel::perfect_rho0() - m.rho0).norm() < 1e-12);
}

TEST_CASE("gate set files round trip and validate") {
    GateSetSynthesisSpec spec;
    spec.seed = 5;
    spec.gates["ry90"] = {1e-3, 0.5};
    spec.gates["cz"] = {1e-2, 0.5};
    spec.prep_infidelity = 0.01;
    spec.meas_infidelity = 0.02;
    GateSetModel m = synthesize_noisy_gateset(spec);
    m.name = "roundtrip";

    const std::string path = "/tmp/umc_gateset_roundtrip.json";
    save_gateset(m, path);
    GateSetModel r = load_gateset(path);
    CHECK(r.name == m.name);
    REQUIRE(r.gates.size() == m.gates.size());
    for (const auto& [gname, s] : m.gates)
        CHECK((r.gate(gname).ptm - s.ptm).norm() == 0.0);
    CHECK((r.rho0 - m.rho0).norm() == 0.0);
    CHECK((r.effect - m.effect).norm() == 0.0);
    std::remove(path.c_str());

    auto write_file = [](const std::string& p, const std::string& body) {
        std::ofstream out(p);
        out << body;
    };
    const std::string bad = "/tmp/umc_gateset_bad.json";

    write_file(bad, R"({"schema_version":"umc.gateset.v1","basis":"pauli-raw",
        "gates":{},"rho0":[0.7071067811865476,0,0,0.7071067811865476],
        "effect":[0.7071067811865476,0,0,-0.7071067811865476]})");
    CHECK_THROWS_AS(load_gateset(bad), ValidationError);

    // A transfer matrix that scales Bloch components up is not CP.
    write_file(bad, R"({"schema_version":"umc.gateset.v1","basis":"pauli-normalized",
        "gates":{"bad":{"qubits":1,"ptm":[[1,0,0,0],[0,1.5,0,0],[0,0,1.5,0],[0,0,0,1.5]]}},
        "rho0":[0.7071067811865476,0,0,0.7071067811865476],
        "effect":[0.7071067811865476,0,0,-0.7071067811865476]})");
    CHECK_THROWS_AS(load_gateset(bad), ValidationError);

    // An effect exceeding the identity is rejected.
    write_file(bad, R"({"schema_version":"umc.gateset.v1","basis":"pauli-normalized",
        "gates":{},"rho0":[0.7071067811865476,0,0,0.7071067811865476],
        "effect":[1.5,0,0,-0.2]})");
    CHECK_THROWS_AS(load_gateset(bad), ValidationError);
    std::remove(bad.c_str());
}

TEST_CASE("ideal gate vocabulary") {
    CHECK(gate_arity("ry-90") == 1);
    CHECK(gate_arity("cz") == 2);
    CHECK(is_known_gate("rx180"));
    CHECK(is_known_gate("rz12.5"));
    CHECK(!is_known_gate("swap"));
    CHECK_THROWS_AS(ideal_unitary("swap"), ValidationError);

    // ry90 then ry-90 is the identity channel.
    Superoperator fwd = ideal_gate_ptm("ry90");
    Superoperator bwd = ideal_gate_ptm("ry-90");
    CHECK((bwd.ptm * fwd.ptm - Eigen::Matrix4d::Identity()).norm() < 1e-12);

    GateSetModel ideal = ideal_gateset();
    CHECK(ideal.has_gate("cz"));
    CHECK((ideal.rho0 - GateSetModel::perfect_rho0()).norm() == 0.0);
}
