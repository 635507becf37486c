#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <bitset>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "umc/approx.hpp"
#include "umc/channels.hpp"
#include "umc/circuit.hpp"
#include "umc/errors.hpp"
#include "umc/gateset.hpp"
#include "umc/pauli.hpp"
#include "umc/qcore.hpp"
#include "umc/rng.hpp"
#include "umc/sim.hpp"

using namespace umc;

namespace {

const double kPi = std::acos(-1.0);

NoiseModel noiseless_model(const Circuit& c) {
    NoiseModel m;
    for (const std::string& name : circuit_gate_names(c)) m.gates[name] = NoNoise{};
    return m;
}

// Synthetic single-qubit gate set with a visibly noisy ry90 and SPAM.
GateSetModel noisy_1q_model() {
    GateSetSynthesisSpec spec;
    spec.name = "sim-test-1q";
    spec.seed = 2026;
    spec.gates["ry90"] = {0.02, 0.35};
    spec.prep_infidelity = 0.03;
    spec.meas_infidelity = 0.04;
    return synthesize_noisy_gateset(spec);
}

// Gate set with the fidelities of the Grover study: near-perfect single-qubit
// gates, a strongly non-unital cz, and faulty SPAM.
GateSetModel grover_gateset() {
    GateSetSynthesisSpec spec;
    spec.name = "sim-test-grover";
    spec.seed = 2026;
    spec.gates["ry90"] = {4e-4, 0.35};
    spec.gates["ry180"] = {4e-4, 0.35};
    spec.gates["rx180"] = {4e-4, 0.35};
    spec.gates["cz"] = {0.0734, 0.35};
    spec.prep_infidelity = 0.0704;
    spec.meas_infidelity = 0.0397;
    return synthesize_noisy_gateset(spec);
}

long long count_of(const SampleRecord& rec, const std::string& key) {
    const auto it = rec.counts.find(key);
    return it == rec.counts.end() ? 0 : it->second;
}

int count_gate_on(const Circuit& c, const std::string& name, int qubit) {
    int n = 0;
    for (const Instruction& ins : c.instructions)
        if (ins.kind == Instruction::Kind::Gate && ins.gate == name && ins.qubits[0] == qubit) ++n;
    return n;
}

}  // namespace

TEST_CASE("circuit parsing resolves the dialect") {
    const std::string text =
        "# two-qubit smoke circuit\n"
        "qubits 2\n"
        "\n"
        "PREP q0\n"
        "prep q1\n"
        "Ry q0 90   # spaced rotation form\n"
        "rx q1 -90\n"
        "h q1\n"
        "cz q0 q1\n"
        "measure q0\n"
        "measure q1\n";
    const Circuit c = parse_circuit(text);
    CHECK(c.n_qubits == 2);
    REQUIRE(c.instructions.size() == 8);
    CHECK(c.instructions[0].kind == Instruction::Kind::Prep);
    CHECK(c.instructions[0].qubits == std::vector<int>{0});
    CHECK(c.instructions[0].line == 4);
    CHECK(c.instructions[2].kind == Instruction::Kind::Gate);
    CHECK(c.instructions[2].gate == "ry90");
    CHECK(c.instructions[3].gate == "rx-90");
    CHECK(c.instructions[4].gate == "h");
    CHECK(c.instructions[5].gate == "cz");
    CHECK(c.instructions[5].qubits == std::vector<int>{0, 1});
    CHECK(c.instructions[7].kind == Instruction::Kind::Measure);
    CHECK(circuit_gate_names(c) == std::vector<std::string>{"cz", "h", "rx-90", "ry90"});

    // Rendered text reparses to the same structure.
    const Circuit again = parse_circuit(circuit_text(c));
    REQUIRE(again.instructions.size() == c.instructions.size());
    for (std::size_t i = 0; i < c.instructions.size(); ++i) {
        CHECK(again.instructions[i].kind == c.instructions[i].kind);
        CHECK(again.instructions[i].gate == c.instructions[i].gate);
        CHECK(again.instructions[i].qubits == c.instructions[i].qubits);
    }
}

TEST_CASE("parse errors carry the source position") {
    const auto expect_error = [](const std::string& text, int line, int column) {
        try {
            parse_circuit(text);
            FAIL_CHECK("expected a parse error for: ", text);
        } catch (const ParseError& e) {
            CHECK(e.line == line);
            CHECK(e.column == column);
        }
    };
    expect_error("prep q0\n", 1, 1);                          // missing header
    expect_error("qubits 2\nqubits 2\n", 2, 1);               // duplicate header
    expect_error("qubits 0\n", 1, 8);                         // qubit count
    expect_error("qubits 2\nprep q7\n", 2, 6);                // index out of range
    expect_error("qubits 1\nprep q0\nfoo q0\n", 3, 1);        // unknown gate
    expect_error("qubits 1\nprep q0\nry q0 nope\n", 3, 7);    // bad angle token
    expect_error("qubits 1\nprep q0\nry q0\n", 3, 1);         // missing angle
    expect_error("qubits 2\nprep q0\nprep q1\ncz q0 q0\n", 4, 7);  // repeated qubit
    expect_error("qubits 1\nmeasure q0 q0\n", 2, 12);         // stray token
    CHECK_THROWS_AS(parse_circuit("qubits 1\nh q0\n"), ValidationError);
}

TEST_CASE("lifecycle validation rejects out-of-order instructions") {
    CHECK_THROWS_AS(parse_circuit("qubits 1\nh q0\n"), ValidationError);  // gate before prep
    CHECK_THROWS_AS(parse_circuit("qubits 1\nprep q0\nprep q0\n"), ValidationError);
    CHECK_THROWS_AS(parse_circuit("qubits 1\nprep q0\nmeasure q0\nh q0\n"), ValidationError);
    CHECK_THROWS_AS(parse_circuit("qubits 1\nprep q0\nmeasure q0\nmeasure q0\n"),
                    ValidationError);
    // Measure-then-reprep is how ancillas are reused; it must validate.
    CHECK_NOTHROW(parse_circuit("qubits 1\nprep q0\nmeasure q0\nprep q0\nmeasure q0\n"));
}

TEST_CASE("grover circuits compile to the expected shape") {
    const std::vector<int> expected_sizes = {20, 18, 18, 16};
    for (int target = 0; target < 4; ++target) {
        const Circuit c = grover2q_circuit(target);
        CHECK(c.n_qubits == 2);
        CHECK(static_cast<int>(c.instructions.size()) == expected_sizes[target]);
        CHECK_NOTHROW(validate_circuit(c));
        // The inversion step always marks |00>; the oracle adds one
        // Rx(180) Ry(180) pair on each qubit whose target bit is 0.
        const int bit0 = target & 1, bit1 = (target >> 1) & 1;
        CHECK(count_gate_on(c, "rx180", 0) == 1 + (bit1 == 0 ? 1 : 0));
        CHECK(count_gate_on(c, "rx180", 1) == 1 + (bit0 == 0 ? 1 : 0));
        CHECK(count_gate_on(c, "ry90", 0) == 3);
        CHECK(count_gate_on(c, "ry90", 1) == 3);
        const Circuit again = parse_circuit(grover2q_circuit_text(target));
        CHECK(again.instructions.size() == c.instructions.size());
    }
}

TEST_CASE("a noiseless prep-measure circuit always yields zero") {
    const Circuit c = parse_circuit("qubits 2\nprep q0\nprep q1\nmeasure q0\nmeasure q1\n");
    const NoiseModel m = noiseless_model(c);
    const SampleRecord rec = sample(c, m, 200, 17);
    CHECK(count_of(rec, "00") == 200);
    REQUIRE(rec.expectations.size() == 2);
    CHECK(rec.expectations[0].p1 == 0.0);
    CHECK(rec.expectations[1].p1 == 0.0);
    const auto exact = run_density_matrix(c, m);
    CHECK(exact.at("00") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(exact.at("11") == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("born sampling of an equator state is unbiased") {
    const Circuit c = parse_circuit("qubits 1\nprep q0\nry q0 90\nmeasure q0\n");
    const long long shots = 100000;
    const SampleRecord rec = sample(c, noiseless_model(c), shots, 42);
    REQUIRE(rec.expectations.size() == 1);
    const double p1 = rec.expectations[0].p1;
    const double sigma = std::sqrt(0.25 / static_cast<double>(shots));
    CHECK(std::abs(p1 - 0.5) < 3.0 * sigma);
    CHECK(rec.expectations[0].standard_error ==
          doctest::Approx(std::sqrt(p1 * (1.0 - p1) / shots)));
}

TEST_CASE("a reset-style measurement channel rebuilds its target state") {
    // Kraus pair {|0><0|, -|0><1|}: both branches end in |0>, so a qubit in
    // |+> measures 0 afterwards with certainty, for every Born seed.
    MeasurementParams reset_to_zero;
    reset_to_zero.beta = {0, 0, 0, 0, kPi, 0, 0, 0, 0};
    ConcreteCircuit cc;
    cc.n_qubits = 1;
    PureOp h;
    h.kind = PureOp::Kind::Unitary;
    h.qubits = {0};
    h.u = ideal_unitary("h");
    PureOp channel;
    channel.kind = PureOp::Kind::MeasurementChannel;
    channel.qubits = {0};
    channel.m = reset_to_zero;
    PureOp mz;
    mz.kind = PureOp::Kind::MeasureZ;
    mz.qubits = {0};
    cc.ops = {h, channel, mz};
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        const RunResult r = run_pure_state(cc, seed);
        REQUIRE(r.bits.size() == 1);
        CHECK(r.bits[0] == 0);
        CHECK(r.max_norm_drift < 1e-12);
    }
}

TEST_CASE("inject_noise mirrors the instruction stream") {
    const Circuit c = parse_circuit("qubits 1\nprep q0\nry q0 90\nmeasure q0\n");

    SUBCASE("a noiseless model produces reset, ideal unitary, measurement") {
        const ConcreteCircuit cc = inject_noise(c, noiseless_model(c), 5);
        REQUIRE(cc.ops.size() == 3);
        CHECK(cc.ops[0].kind == PureOp::Kind::Reset);
        CHECK(cc.ops[1].kind == PureOp::Kind::Unitary);
        CHECK((cc.ops[1].u - ideal_unitary("ry90")).norm() < 1e-14);
        CHECK(cc.ops[2].kind == PureOp::Kind::MeasureZ);
        CHECK(cc.draw_log.empty());
        CHECK(cc.ops[0].source == 0);
        CHECK(cc.ops[1].source == 1);
        CHECK(cc.ops[2].source == 2);
    }

    SUBCASE("a deterministic mixture always substitutes its only term") {
        // Weight 1 on the first unitary term, which is set to Ry(90).
        UmcDecomposition det;
        det.n_qubits = 1;
        det.p = {1, 0, 0, 0, 0, 0};
        det.unitary_1q.assign(4, UnitaryParams1Q{});
        det.unitary_1q[0].theta = {0, kPi / 2, 0};
        det.measurement_terms.assign(2, ChannelTerm{});
        det.measurement_terms[0].kind = ChannelTerm::Kind::Measurement1Q;
        det.measurement_terms[1].kind = ChannelTerm::Kind::Measurement1Q;
        NoiseModel m;
        m.gates["ry90"] = det;
        for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
            const ConcreteCircuit cc = inject_noise(c, m, seed);
            REQUIRE(cc.draw_log.size() == 1);
            CHECK(cc.draw_log[0] == 0);
            CHECK(cc.draw_sources[0] == 1);
            REQUIRE(cc.ops.size() == 3);
            CHECK((cc.ops[1].u - unitary_1q(det.unitary_1q[0])).norm() < 1e-12);
        }
    }

    SUBCASE("draws are reproducible from the seed") {
        const GateSetModel gs = noisy_1q_model();
        const NoiseModel m = build_noise_model(gs, {"ry90"}, NoiseMethod::Pta);
        const ConcreteCircuit a = inject_noise(c, m, 1234);
        const ConcreteCircuit b = inject_noise(c, m, 1234);
        CHECK(a.draw_log == b.draw_log);
        CHECK(a.draw_sources == b.draw_sources);
        CHECK(a.ops.size() == b.ops.size());
    }
}

TEST_CASE("sampling is worker-invariant and equals the manual per-shot path") {
    const Circuit c = parse_circuit("qubits 1\nprep q0\nry q0 90\nmeasure q0\n");
    const GateSetModel gs = noisy_1q_model();
    const NoiseModel m = build_noise_model(gs, {"ry90"}, NoiseMethod::Depolarizing);

    const long long shots = 500;
    const std::uint64_t master = 777;
    const SampleRecord one = sample(c, m, shots, master, 1);
    const SampleRecord eight = sample(c, m, shots, master, 8);
    CHECK(one.counts == eight.counts);
    REQUIRE(one.expectations.size() == eight.expectations.size());
    CHECK(one.expectations[0].p1 == eight.expectations[0].p1);

    std::map<std::string, long long> manual;
    for (long long s = 0; s < shots; ++s) {
        const ConcreteCircuit cc = inject_noise(c, m, derive_seed(master, 2 * s));
        const RunResult r = run_pure_state(cc, derive_seed(master, 2 * s + 1));
        ++manual[r.bitstring()];
    }
    CHECK(manual == one.counts);
}

TEST_CASE("the shot runner replays any shot of the stream") {
    const Circuit c = grover2q_circuit(2);
    const GateSetModel gs = grover_gateset();
    DecomposeOptions opts;
    opts.restarts = 4;
    const NoiseModel m = build_noise_model(gs, circuit_gate_names(c), NoiseMethod::Pta, opts);
    ShotRunner runner(c, m);
    CHECK(runner.n_qubits() == 2);
    const std::uint64_t master = 31337;
    for (long long shot : {0LL, 7LL, 123LL}) {
        const RunResult& r = runner.run(master, shot);
        const std::string via_runner = r.bitstring();
        const ConcreteCircuit cc = inject_noise(c, m, derive_seed(master, 2 * shot));
        const RunResult direct = run_pure_state(cc, derive_seed(master, 2 * shot + 1));
        CHECK(via_runner == direct.bitstring());
    }
}

TEST_CASE("sampled statistics match the exact backend for every method") {
    const Circuit c = parse_circuit("qubits 1\nprep q0\nry q0 90\nry q0 90\nmeasure q0\n");
    const GateSetModel gs = noisy_1q_model();
    DecomposeOptions opts;
    opts.restarts = 8;
    opts.seed = 5;

    const std::vector<NoiseMethod> methods = {NoiseMethod::Umc, NoiseMethod::Cmc,
                                              NoiseMethod::Pta, NoiseMethod::Depolarizing};
    for (NoiseMethod method : methods) {
        CAPTURE(static_cast<int>(method));
        const NoiseModel m = build_noise_model(gs, {"ry90"}, method, opts);
        const auto exact = run_density_matrix(c, m);
        const long long shots = 200000;
        const SampleRecord rec = sample(c, m, shots, 2026);
        for (const auto& [key, p] : exact) {
            const double freq = static_cast<double>(count_of(rec, key)) / shots;
            const double bound = 4.0 * std::sqrt(std::max(p * (1.0 - p), 1e-9) / shots);
            CHECK(std::abs(freq - p) < bound);
        }
    }
}

TEST_CASE("depolarizing entries reproduce the closed-form distribution") {
    // A rate-r depolarizing error before an identity gate flips the measured
    // bit with probability r/2 (the X and Y branches).
    const Circuit c = parse_circuit("qubits 1\nprep q0\ni q0\nmeasure q0\n");
    NoiseModel m;
    m.gates["i"] = DepolarizingNoise{0.12};
    const auto exact = run_density_matrix(c, m);
    CHECK(exact.at("1") == doctest::Approx(0.06).epsilon(1e-12));
    CHECK(exact.at("0") == doctest::Approx(0.94).epsilon(1e-12));
}

TEST_CASE("noiseless grover finds every target with certainty") {
    for (int target = 0; target < 4; ++target) {
        const Circuit c = grover2q_circuit(target);
        const NoiseModel m = noiseless_model(c);
        const std::string key = std::bitset<2>(static_cast<unsigned>(target)).to_string();
        const auto exact = run_density_matrix(c, m);
        CHECK(exact.at(key) == doctest::Approx(1.0).epsilon(1e-9));
        const SampleRecord rec = sample(c, m, 10000, 7);
        CHECK(count_of(rec, key) == 10000);
    }
}

TEST_CASE("noisy grover sampling matches its exact distribution") {
    const int target = 3;
    const Circuit c = grover2q_circuit(target);
    const GateSetModel gs = grover_gateset();
    DecomposeOptions opts;
    opts.restarts = 6;
    opts.seed = 11;
    const NoiseModel m = build_noise_model(gs, circuit_gate_names(c), NoiseMethod::Umc, opts);

    const auto exact = run_density_matrix(c, m);
    double total = 0;
    for (const auto& [key, p] : exact) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

    // With these fidelities the success probability sits well below the
    // ideal 1 but far above the uniform 0.25.
    const double success = exact.at("11");
    CHECK(success > 0.65);
    CHECK(success < 0.85);

    const long long shots = 20000;
    const SampleRecord rec = sample(c, m, shots, 909);
    for (const auto& [key, p] : exact) {
        const double freq = static_cast<double>(count_of(rec, key)) / shots;
        const double bound = 4.0 * std::sqrt(std::max(p * (1.0 - p), 1e-9) / shots);
        CHECK(std::abs(freq - p) < bound);
    }
}

TEST_CASE("the pure backend scales to many qubits, the exact one refuses") {
    const int n = 18;
    std::string text = "qubits " + std::to_string(n) + "\n";
    for (int q = 0; q < n; ++q) text += "prep q" + std::to_string(q) + "\n";
    text += "h q0\n";
    // cnot chain written as h-conjugated cz: GHZ over all qubits.
    for (int q = 0; q + 1 < n; ++q) {
        const std::string lower = std::to_string(q), upper = std::to_string(q + 1);
        text += "h q" + upper + "\n";
        text += "cz q" + lower + " q" + upper + "\n";
        text += "h q" + upper + "\n";
    }
    for (int q = 0; q < n; ++q) text += "measure q" + std::to_string(q) + "\n";
    const Circuit c = parse_circuit(text);
    const NoiseModel m = noiseless_model(c);

    // Every materialized operator stays at most 4x4 regardless of width.
    const ConcreteCircuit cc = inject_noise(c, m, 1);
    for (const PureOp& op : cc.ops) {
        CHECK(op.u.rows() <= 4);
        CHECK(op.u.cols() <= 4);
    }

    // The cz ladder with hadamards is a GHZ preparation: every shot reads
    // all zeros or all ones.
    const SampleRecord rec = sample(c, m, 8, 99);
    for (const auto& [key, count] : rec.counts) {
        CHECK((key == std::string(n, '0') || key == std::string(n, '1')));
        CHECK(count > 0);
    }

    Circuit wide;
    wide.n_qubits = 7;
    for (int q = 0; q < 7; ++q) {
        Instruction prep;
        prep.kind = Instruction::Kind::Prep;
        prep.qubits = {q};
        wide.instructions.push_back(prep);
    }
    CHECK_THROWS_AS(run_density_matrix(wide, NoiseModel{}), ResourceError);
}

TEST_CASE("measure-then-reprep cycles run in the pure backend only") {
    const Circuit c =
        parse_circuit("qubits 1\nprep q0\nry q0 90\nmeasure q0\nprep q0\nmeasure q0\n");
    const NoiseModel m = noiseless_model(c);

    ShotRunner runner(c, m);
    std::set<int> first_bits;
    for (long long shot = 0; shot < 100; ++shot) {
        const RunResult& r = runner.run(4242, shot);
        REQUIRE(r.bits.size() == 2);
        first_bits.insert(r.bits[0]);
        CHECK(r.bits[1] == 0);  // re-prepared to |0> deterministically
        CHECK(r.bitstring() == "0");
    }
    CHECK(first_bits == std::set<int>{0, 1});

    CHECK_THROWS_AS(sample(c, m, 10, 1), ValidationError);
    CHECK_THROWS_AS(run_density_matrix(c, m), ValidationError);
}

TEST_CASE("records, guardrails, and trace-preservation trap") {
    const Circuit c = parse_circuit("qubits 2\nprep q0\nprep q1\nry q0 90\ncz q0 q1\n"
                                    "measure q0\nmeasure q1\n");
    const NoiseModel m = noiseless_model(c);

    SUBCASE("counts sum to shots and expectations are per ascending qubit") {
        const SampleRecord rec = sample(c, m, 1000, 3);
        long long total = 0;
        for (const auto& [key, count] : rec.counts) total += count;
        CHECK(total == rec.shots);
        REQUIRE(rec.expectations.size() == 2);
        CHECK(rec.expectations[0].qubit == 0);
        CHECK(rec.expectations[1].qubit == 1);
        CHECK(rec.master_seed == 3);
    }

    SUBCASE("invalid shot and worker counts are rejected") {
        CHECK_THROWS_AS(sample(c, m, 0, 1), ValidationError);
        CHECK_THROWS_AS(sample(c, m, 10, 1, 0), ValidationError);
    }

    SUBCASE("a missing gate entry is reported") {
        NoiseModel incomplete;
        incomplete.gates["ry90"] = NoNoise{};
        CHECK_THROWS_AS(sample(c, incomplete, 10, 1), ValidationError);
        CHECK_THROWS_AS(run_density_matrix(c, incomplete), ValidationError);
    }

    SUBCASE("norm drift beyond the trap raises") {
        ConcreteCircuit bad;
        bad.n_qubits = 1;
        PureOp grow;
        grow.kind = PureOp::Kind::Unitary;
        grow.qubits = {0};
        grow.u = 1.1 * Eigen::MatrixXcd::Identity(2, 2);
        bad.ops = {grow};
        CHECK_THROWS_AS(run_pure_state(bad, 0), ValidationError);
    }

    SUBCASE("clean runs report tiny drift") {
        const SampleRecord rec = sample(c, m, 1, 5);
        (void)rec;
        const ConcreteCircuit cc = inject_noise(c, m, 5);
        const RunResult r = run_pure_state(cc, 6);
        CHECK(r.max_norm_drift < 1e-10);
    }
}
