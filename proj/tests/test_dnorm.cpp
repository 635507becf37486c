#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "umc/channels.hpp"
#include "umc/dnorm.hpp"
#include "umc/errors.hpp"
#include "umc/gateset.hpp"
#include "umc/pauli.hpp"
#include "umc/rng.hpp"
#include "test_util.hpp"

using namespace umc;

namespace {

const double kPi = std::acos(-1.0);

Superoperator diff(const Superoperator& a, const Superoperator& b) {
    return {a.n_qubits, a.ptm - b.ptm};
}

// Closed form for a pair of unitaries: 2 sin(spread/2), where spread is the
// angular extent of the eigenphases of U^dag V (capped at pi, beyond which
// the hull of the eigenvalues contains the origin and the distance is 2).
double unitary_pair_distance(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(u.adjoint() * v);
    std::vector<double> ph;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        ph.push_back(std::arg(es.eigenvalues()(i)));
    std::sort(ph.begin(), ph.end());
    // Smallest arc containing all phases = 2pi minus the largest gap.
    double largest_gap = 2 * kPi - (ph.back() - ph.front());
    for (std::size_t i = 1; i < ph.size(); ++i)
        largest_gap = std::max(largest_gap, ph[i] - ph[i - 1]);
    const double spread = 2 * kPi - largest_gap;
    if (spread >= kPi) return 2.0;
    return 2.0 * std::sin(spread / 2.0);
}

}  // namespace

TEST_CASE("identical channels are at distance zero") {
    Rng rng(101);
    KrausChannel k = testutil::random_cptp(1, 3, rng);
    Superoperator s = kraus_to_ptm(k);
    CHECK(diamond_distance(s, s, DiamondMethod::Sdp).value <= 1e-9);
    CHECK(diamond_distance(s, s, DiamondMethod::Multistart).value <= 1e-9);
}

TEST_CASE("identity versus bit flip saturates the norm") {
    Superoperator id = identity_superop(1);
    Superoperator x = ideal_gate_ptm("x");

    DiamondResult sdp = diamond_norm_sdp(diff(id, x));
    CHECK(std::abs(sdp.value - 2.0) <= 1e-7);
    CHECK(sdp.gap <= 1e-7);

    DiamondResult ms = diamond_norm_multistart(diff(id, x));
    CHECK(ms.value <= sdp.value + sdp.gap + 1e-9);
    CHECK(ms.value >= 2.0 - 1e-5);
}

TEST_CASE("depolarizing distance closed form") {
    Superoperator id = identity_superop(1);
    for (double p : {0.05, 0.137, 0.5}) {
        Superoperator dep{1, Eigen::Vector4d(1, 1 - p, 1 - p, 1 - p).asDiagonal()};
        DiamondResult sdp = diamond_norm_sdp(diff(id, dep));
        CHECK(std::abs(sdp.value - 1.5 * p) <= 1e-6);
        DiamondResult ms = diamond_norm_multistart(diff(id, dep), 8);
        CHECK(std::abs(ms.value - 1.5 * p) <= 1e-6);
        CHECK(ms.value <= sdp.value + sdp.gap + 1e-9);
    }
}

TEST_CASE("unitary pair closed form on random pairs") {
    Rng rng(202);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXcd u = testutil::random_unitary(2, rng);
        Eigen::MatrixXcd v = testutil::random_unitary(2, rng);
        const double expected = unitary_pair_distance(u, v);
        DiamondResult sdp = diamond_norm_sdp(diff(unitary_to_ptm(u), unitary_to_ptm(v)));
        CHECK(std::abs(sdp.value - expected) <= 1e-6);
    }
}

TEST_CASE("small z rotation distance") {
    const double eps = 1e-3;
    Superoperator id = identity_superop(1);
    Superoperator zrot = unitary_to_ptm(rz(eps));
    const double expected = 2.0 * std::abs(std::sin(eps / 2.0));

    DiamondResult sdp = diamond_norm_sdp(diff(id, zrot));
    CHECK(std::abs(sdp.value - expected) <= 1e-6);
    DiamondResult ms = diamond_norm_multistart(diff(id, zrot));
    CHECK(std::abs(ms.value - expected) <= 1e-6);
}

TEST_CASE("multistart is a lower bound that meets the sdp at one qubit") {
    Rng rng(303);
    for (int trial = 0; trial < 5; ++trial) {
        Superoperator a = kraus_to_ptm(testutil::random_cptp(1, 2, rng));
        Superoperator b = kraus_to_ptm(testutil::random_cptp(1, 3, rng));
        DiamondResult sdp = diamond_norm_sdp(diff(a, b));
        DiamondResult ms = diamond_norm_multistart(diff(a, b), 64, 7);
        CHECK(ms.value <= sdp.value + sdp.gap + 1e-9);
        CHECK(std::abs(ms.value - sdp.value) <= 1e-5);
    }
}

TEST_CASE("symmetry and triangle inequality") {
    Rng rng(404);
    Superoperator a = kraus_to_ptm(testutil::random_cptp(1, 2, rng));
    Superoperator b = kraus_to_ptm(testutil::random_cptp(1, 2, rng));
    Superoperator c = kraus_to_ptm(testutil::random_cptp(1, 2, rng));

    const double ab = diamond_distance(a, b).value;
    const double ba = diamond_distance(b, a).value;
    const double bc = diamond_distance(b, c).value;
    const double ac = diamond_distance(a, c).value;
    CHECK(std::abs(ab - ba) <= 1e-8);
    CHECK(ac <= ab + bc + 1e-8);
}

TEST_CASE("identity versus reset") {
    Superoperator id = identity_superop(1);
    MeasurementParams reset;
    reset.beta[4] = kPi;  // both outcomes land on |0>
    Superoperator rst = measurement_channel(reset);

    DiamondResult sdp = diamond_norm_sdp(diff(id, rst));
    DiamondResult ms = diamond_norm_multistart(diff(id, rst));
    CHECK(sdp.value > 0.0);
    CHECK(sdp.value <= 2.0 + 1e-9);
    // Feeding |1> distinguishes the two perfectly, so the distance is 2.
    CHECK(std::abs(sdp.value - 2.0) <= 1e-6);
    CHECK(std::abs(ms.value - sdp.value) <= 1e-6);
}

TEST_CASE("two-qubit distances") {
    Superoperator id2 = identity_superop(2);

    // cz has eigenphases {0,0,0,pi}: maximal distance from identity.
    DiamondResult cz = diamond_norm_sdp(diff(id2, ideal_gate_ptm("cz")));
    CHECK(std::abs(cz.value - 2.0) <= 1e-6);

    // Two-qubit depolarizing: 2p(1 - 1/d^2) with d = 4.
    const double p = 0.08;
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(16, 1 - p);
    diag(0) = 1.0;
    Superoperator dep{2, Eigen::MatrixXd(diag.asDiagonal())};
    DiamondResult sdp = diamond_norm_sdp(diff(id2, dep));
    CHECK(std::abs(sdp.value - 2 * p * (1 - 1.0 / 16.0)) <= 1e-6);
    DiamondResult ms = diamond_norm_multistart(diff(id2, dep), 4);
    CHECK(std::abs(ms.value - sdp.value) <= 1e-5);

    // A small coherent 2q error against its ideal.
    UnitaryParams2Q params;
    params.theta[14] = 0.01;  // slight zz over-rotation
    DiamondResult coh = diamond_norm_sdp(diff(id2, unitary_channel_2q(params)));
    Eigen::Matrix4cd uz = unitary_2q(params);
    CHECK(std::abs(coh.value -
                   unitary_pair_distance(Eigen::Matrix4cd::Identity(), uz)) <= 1e-6);
}

TEST_CASE("dimension guard") {
    Superoperator big{3, Eigen::MatrixXd::Identity(64, 64)};
    CHECK_THROWS_AS(diamond_norm_sdp(big), ValidationError);
    CHECK_THROWS_AS(diamond_norm_multistart(big), ValidationError);
}
