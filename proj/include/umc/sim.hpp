#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "umc/approx.hpp"
#include "umc/channels.hpp"
#include "umc/circuit.hpp"
#include "umc/gateset.hpp"

namespace umc {

// Per-gate noise entries. Umc and Cmc approximate the whole noisy gate and
// replace it when drawn; Pta and Depolarizing describe the error channel and
// run before the ideal gate (extract_error_channel's convention,
// noisy = ideal o error).
struct NoNoise {};
struct DepolarizingNoise {
    double rate = 0.0;  // rho -> (1 - rate) rho + rate I/d
};
using GateNoise = std::variant<NoNoise, DepolarizingNoise, UmcDecomposition, CmcDecomposition,
                               PauliProbabilities>;

struct NoiseModel {
    std::map<std::string, GateNoise> gates;        // keyed by gate name
    std::optional<UmcDecomposition> prep_channel;  // follows every prep
    std::optional<UmcDecomposition> meas_channel;  // precedes every measure
};

// Primitive operation of a sampled concrete circuit. Unitary payloads are
// 2x2 or 4x4 with qubits[0] bound to the matrix's least significant index.
struct PureOp {
    enum class Kind {
        Unitary,
        MeasurementChannel,  // Kraus pair of m on qubits[0], outcome discarded
        Reset,               // Z-collapse qubits[0], rebuild as |0>
        MeasureZ,            // Born sample of qubits[0], recorded
    };
    Kind kind = Kind::Unitary;
    std::vector<int> qubits;
    Eigen::MatrixXcd u;
    MeasurementParams m;
    int source = -1;  // index of the originating instruction
};

struct ConcreteCircuit {
    int n_qubits = 0;
    std::vector<PureOp> ops;
    // One entry per convex-sum draw, in instruction order, with the
    // instruction that triggered it.
    std::vector<int> draw_log;
    std::vector<int> draw_sources;
};

// Measurement record of one run, one entry per measure instruction in
// execution order.
struct RunResult {
    std::vector<int> qubits;
    std::vector<int> bits;
    double max_norm_drift = 0.0;
    // Final bit of each measured qubit, highest qubit first.
    std::string bitstring() const;
};

struct QubitStat {
    int qubit = 0;
    double p1 = 0.0;
    double standard_error = 0.0;  // sqrt(p1 (1 - p1) / shots)
};

struct SampleRecord {
    long long shots = 0;
    std::map<std::string, long long> counts;  // bitstring -> occurrences
    std::vector<QubitStat> expectations;      // ascending qubit index
    std::uint64_t master_seed = 0;
};

// Draws one term per noisy site (prep channel, gate entry, meas channel) and
// returns the resulting pure circuit with its draw log. Every circuit gate
// name must have a model entry.
ConcreteCircuit inject_noise(const Circuit& c, const NoiseModel& m, std::uint64_t seed);

// Statevector execution; the seed drives Born sampling. Norm drift beyond
// 1e-8 after any operation raises ValidationError (trace-preservation trap).
RunResult run_pure_state(const ConcreteCircuit& cc, std::uint64_t seed);

// shots independent runs of inject_noise + run_pure_state with per-shot
// seeds derive_seed(master, 2 shot) and derive_seed(master, 2 shot + 1).
// The record is identical for any worker count. Requires each qubit to be
// measured at most once (use run_pure_state for measure-reprep circuits).
SampleRecord sample(const Circuit& c, const NoiseModel& m, long long shots,
                    std::uint64_t master_seed, int workers = 1);

// Exact oracle: evolves the density matrix by each instruction's full convex
// sum and returns the outcome distribution over the measured qubits, keyed
// like SampleRecord::counts. Guards n_qubits <= 6 (ResourceError) and
// rejects measure-reprep circuits (ValidationError).
std::map<std::string, double> run_density_matrix(const Circuit& c, const NoiseModel& m);

// Reusable per-worker executor: compiles circuit and model once, owns one
// 2^n statevector, and replays any shot of the master-seed stream. Workers
// shard shots; results never depend on the sharding.
class ShotRunner {
  public:
    ShotRunner(const Circuit& c, const NoiseModel& m);
    ~ShotRunner();
    ShotRunner(ShotRunner&&) noexcept;
    ShotRunner& operator=(ShotRunner&&) noexcept;

    const RunResult& run(std::uint64_t master_seed, long long shot);
    int n_qubits() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Decomposes every named gate of a gate set with one method and fits the
// SPAM channels exactly (the SPAM fits are shared by all methods so that
// baselines differ only in their gate treatment). NoiseMethod::None yields
// the ideal model: no gate noise, no SPAM channels.
enum class NoiseMethod { None, Umc, Cmc, Pta, Depolarizing };
NoiseModel build_noise_model(const GateSetModel& gs, const std::vector<std::string>& gate_names,
                             NoiseMethod method, const DecomposeOptions& opts = {});

}  // namespace umc
