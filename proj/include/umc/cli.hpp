#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "umc/approx.hpp"
#include "umc/gateset.hpp"
#include "umc/qcore.hpp"

// Command-line front end. Each cmd_* function implements one subcommand
// against parsed options: it writes a human-readable summary to the given
// stream and, when an output path is set, machine-readable JSON/CSV files.
// cli_main wires them to argv and maps the error taxonomy onto exit codes
// (2 validation, 3 convergence, 4 resource). All commands are deterministic
// for a fixed flag set: rerunning with identical flags reproduces output
// files byte for byte.

namespace umc {

// Stamped into every JSON object and CSV header the commands emit.
inline constexpr int kResultSchemaVersion = 1;

// One decomposed operation as persisted to disk. Exactly one payload is
// active, keyed by `method`: "umc" stores `terms` with `weights`, "cmc"
// stores `weights` over the fixed dictionary in cmc_channel_names() order,
// "pta" stores `pauli_probs`.
struct DecompositionRecord {
    std::string gate;
    std::string method;
    int n_qubits = 1;
    double f_avg = 1.0;             // gate-set channel vs the ideal gate
    double diamond_distance = 0.0;  // model vs the gate-set channel
    bool converged = true;
    std::vector<double> weights;
    std::vector<ChannelTerm> terms;
    std::vector<double> pauli_probs;

    // PTM of the modeled noisy gate. For pta this is the ideal gate composed
    // with the Pauli error channel, so it requires a known gate name.
    Superoperator to_ptm() const;
};

DecompositionRecord make_record(std::string gate, const UmcDecomposition& d, double f_avg);
DecompositionRecord make_record(std::string gate, const CmcDecomposition& d, double f_avg);
DecompositionRecord make_record(std::string gate, const PauliProbabilities& p, double f_avg,
                                double diamond_dist);

std::string decomposition_json(const DecompositionRecord& r);
DecompositionRecord decomposition_from_json(const std::string& text);

// Rescales `noisy` along its own error-generator ray until its average gate
// fidelity to `ideal` reaches `f` (f >= 1 returns the ideal channel).
// Throws ValidationError when `noisy` carries no error to rescale.
Superoperator scale_gate_to_fidelity(const Superoperator& ideal, const Superoperator& noisy,
                                     double f);

// Rescales every gate and both SPAM channels of a synthesized model to
// component fidelity `f`, keeping each operation on its own noise ray.
// SPAM rescaling requires the model to carry its __prep__/__meas__ error
// channels whenever its SPAM is imperfect.
GateSetModel scale_gateset_to_fidelity(const GateSetModel& gs, double f);

struct ValidateCommand {
    std::string gateset_path;
};

struct DecomposeCommand {
    std::string gateset_path;
    std::string method = "umc";      // umc | cmc | pta
    std::vector<std::string> gates;  // empty: every gate in the set
    std::string out_dir;             // empty: print the table only
    DecomposeOptions options;
};

struct DnormCommand {
    std::string gateset_path;
    std::string gate;
    int restarts = 64;
    std::uint64_t seed = 0;
    std::string out_path;
};

struct GroverCommand {
    std::string gateset_path;
    long long shots = 200000;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out_path;
    DecomposeOptions options;
};

struct SimulateCommand {
    std::string gateset_path;
    std::string circuit_path;
    std::string method = "umc";  // none | umc | cmc | pta | depolarizing
    long long shots = 100000;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out_path;
    std::string format = "json";  // json | csv
    DecomposeOptions options;
};

struct Surface17Command {
    std::string gateset_path;
    int rounds = 2;
    long long shots = 10000;
    std::uint64_t seed = 0;
    int workers = 1;
    std::vector<double> sweep;  // empty: single run at the set's own fidelity
    std::string out_dir;
    DecomposeOptions options;
};

struct SweepDistanceCommand {
    std::string gateset_path;
    std::vector<double> fidelities;  // empty: {0.9992, 0.9995, 0.9997, 0.9999, 1.0}
    std::vector<std::string> gates;  // empty: every gate in the set
    std::string out_path;
    DecomposeOptions options;
};

int cmd_validate(const ValidateCommand& cmd, std::ostream& out);
int cmd_decompose(const DecomposeCommand& cmd, std::ostream& out);
int cmd_dnorm(const DnormCommand& cmd, std::ostream& out);
int cmd_grover(const GroverCommand& cmd, std::ostream& out);
int cmd_simulate(const SimulateCommand& cmd, std::ostream& out);
int cmd_surface17(const Surface17Command& cmd, std::ostream& out);
int cmd_sweep_distance(const SweepDistanceCommand& cmd, std::ostream& out);

// argv entry point used by the umc binary and by in-process tests.
int cli_main(int argc, char** argv);

}  // namespace umc
