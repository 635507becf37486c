#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "umc/approx.hpp"
#include "umc/circuit.hpp"
#include "umc/sim.hpp"

namespace umc {

// Distance-3 rotated surface code on 17 qubits: data qubits 0..8 laid out
// row-major on a 3x3 grid, syndrome ancillas 9..16. Four weight-2/weight-4
// X-type checks and four Z-type checks; the logical Z runs along the top row
// and the logical X down the left column.
struct Surface17Layout {
    struct Check {
        int ancilla = 0;           // simulator qubit index
        bool x_type = false;
        std::vector<int> support;  // data qubit indices, ascending
    };

    std::array<int, 9> data{};  // data qubit indices (identity map, kept explicit)
    std::vector<Check> checks;  // 4 X-type then 4 Z-type
    std::vector<int> logical_x;
    std::vector<int> logical_z;
};

// The fixed layout. Construction verifies the stabilizer group symbolically:
// every X/Z check pair overlaps on an even number of data qubits, the
// logicals commute with all checks and anticommute with each other.
const Surface17Layout& surface17_layout();

enum class LogicalBasis { Z, X };

// Per-shot record of one memory experiment: the raw ancilla readouts of every
// round plus the final transversal data readout (taken in the memory basis).
// Detection events are derived on demand, never stored.
struct SyndromeHistory {
    int rounds = 0;
    LogicalBasis basis = LogicalBasis::Z;
    std::vector<std::array<int, 8>> bits;  // bits[r][c]: round r, surface17_layout().checks[c]
    std::array<int, 9> data_bits{};        // final data readout by data index
};

// Builds the syndrome-extraction circuit: `rounds` rounds of all eight parity
// checks (ancillas re-prepared each round), then a transversal data readout.
// Each round runs four interleaved cz layers; ancillas are wrapped in
// ry90/ry-90, and every data qubit passes through ry90/ry-90 windows covering
// exactly its X-check cz slots. Measurement order per shot is
// checks 0..7 per round, then data 0..8, which is what extract_syndromes
// expects. basis selects the prepared and measured logical basis.
Circuit build_surface17_circuit(int rounds, LogicalBasis basis = LogicalBasis::Z);

// Splits a RunResult of build_surface17_circuit back into a SyndromeHistory.
SyndromeHistory extract_syndromes(const RunResult& r, int rounds,
                                  LogicalBasis basis = LogicalBasis::Z);

// Detection events as (check index into layout.checks, time layer) pairs.
// The check type measured deterministically from the prepared basis (Z-type
// for a Z-basis memory) is referenced against the ideal start, so its events
// cover rounds+1 layers: layer 0 compares round 0 against the ideal value,
// layer `rounds` folds the data readout in as one final perfect round. The
// other type starts from its projected round-0 values, leaving rounds-1
// layers of consecutive XORs.
std::vector<std::pair<int, int>> detection_events(const SyndromeHistory& h,
                                                  const Surface17Layout& layout,
                                                  bool x_checks);

struct DecodeResult {
    std::vector<int> x_correction;  // data qubits with an inferred X error, ascending
    std::vector<int> z_correction;  // same for Z errors
    int x_matching_weight = 0;      // total matched weight of the Z-check graph
    int z_matching_weight = 0;      // total matched weight of the X-check graph
    bool logical_flip = false;      // corrected logical readout differs from ideal
};

// Minimum-weight perfect matching on the space-time detection graph, decoded
// independently for the two check types. Edges have unit weight (spatial
// between checks sharing a data qubit, temporal between adjacent layers, and
// boundary edges where a check owns a data qubit privately); the optimum is
// found by exhaustive search over pairings, exact for the small event sets a
// distance-3 history produces. logical_flip combines the final data readout
// on the logical support with the inferred corrections crossing it.
DecodeResult decode_mwpm(const SyndromeHistory& h, const Surface17Layout& layout);

// Fidelity targets for one sweep point. Every single-qubit gate of the
// syndrome circuit is scaled to f_1q, the cz to f_cz; prep/meas channels hit
// 1 - <0|rho0|0> = 1 - f_prep and 1 - <1|E|1> = 1 - f_meas. Channels are
// drawn once from synthesis_seed and scaled along their Lindblad generators,
// so a sweep over targets moves every point along the same noise ray.
struct Surface17NoiseSpec {
    double f_1q = 1.0;
    double f_cz = 1.0;
    double f_prep = 1.0;
    double f_meas = 1.0;
    double coherent_fraction = 0.35;
    std::uint64_t synthesis_seed = 2026;
    DecomposeOptions decompose;  // unitary-channel decomposition settings
};

struct LogicalRateResult {
    double mean_fidelity = 1.0;  // unweighted mean over {1q, cz, prep, meas}
    long long shots = 0;
    long long logical_errors = 0;
    double rate = 0.0;
    double ci_low = 0.0;  // 95% Wilson interval
    double ci_high = 0.0;
};

// Runs `shots` Z-basis memory experiments under unitary-channel noise at the
// requested fidelities and returns the decoded logical error rate. With all
// targets at 1.0 the run is exactly noiseless. Shots are sharded over
// `workers` threads with per-shot seed derivation, so results do not depend
// on the worker count.
LogicalRateResult estimate_logical_error_rate(const Surface17NoiseSpec& spec, int rounds,
                                              long long shots, std::uint64_t seed,
                                              int workers = 1);

// Same experiment driven by an explicit gate-set model: the extraction
// circuit's gates are decomposed into unitary-channel mixtures with
// `decompose`, SPAM comes from the model's rho0/effect, and mean_fidelity is
// computed from the model's channels.
LogicalRateResult estimate_logical_error_rate(const GateSetModel& gs, int rounds,
                                              long long shots, std::uint64_t seed,
                                              int workers = 1,
                                              const DecomposeOptions& decompose = {});

// Pseudo-threshold against the physical reference line r_phys(f) = 1 - f.
struct ThresholdEstimate {
    std::vector<LogicalRateResult> sweep;  // ascending by mean_fidelity
    double crossing_fidelity = 0.0;
    double bracket_low = 0.0;   // crossing of the ci_low curve
    double bracket_high = 0.0;  // crossing of the ci_high curve
};

// Interpolates log(rate) linearly in fidelity between sweep points and
// intersects with log(1 - f). The crossing must lie between two sweep points
// whose rates straddle the reference line; otherwise a ValidationError names
// the swept range. The bracket re-runs the intersection with the Wilson
// interval endpoints, clamped to the swept range.
ThresholdEstimate estimate_pseudo_threshold(const std::vector<LogicalRateResult>& sweep);

// CSV emission for sweep results: one header line, then one row per point as
// fidelity,shots,logical_errors,rate,ci_low,ci_high.
std::string sweep_csv(const std::vector<LogicalRateResult>& sweep);

}  // namespace umc
