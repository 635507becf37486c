#pragma once

#include <string>
#include <vector>

#include "umc/errors.hpp"

namespace umc {

// One circuit instruction. Gate names are the shared vocabulary of
// gateset.hpp ("ry90", "rx-90", "cz", ...); two-qubit gates list the qubit
// bound to the channel's least significant index first.
struct Instruction {
    enum class Kind { Prep, Gate, Measure };
    Kind kind = Kind::Prep;
    std::string gate;        // resolved lowercase name, empty for prep/measure
    std::vector<int> qubits;
    int line = 0;            // 1-based source line, 0 for built circuits
};

struct Circuit {
    int n_qubits = 0;
    std::vector<Instruction> instructions;
};

// Parse failure with the offending source position (both 1-based).
struct ParseError : ValidationError {
    ParseError(const std::string& msg, int line_, int column_)
        : ValidationError("line " + std::to_string(line_) + ", column " +
                          std::to_string(column_) + ": " + msg),
          line(line_),
          column(column_) {}
    int line;
    int column;
};

// Line dialect, one instruction per line:
//   qubits N            header, required before any instruction
//   prep q0             prepare qubit 0 in |0>
//   ry q0 90            rotation with trailing angle in integer degrees
//   h q0 / cz q0 q1     fixed-name gates from the shared vocabulary
//   measure q0          Z-basis measurement
// '#' starts a comment, blank lines are skipped, mnemonics are
// case-insensitive. Errors carry line and column.
Circuit parse_circuit(const std::string& text);

// Renders a circuit back to dialect text (built circuits round-trip).
std::string circuit_text(const Circuit& c);

// Structural invariants, also enforced by parse_circuit: indices in range,
// every gate acts on a prepared qubit, measurement ends a qubit's lifetime
// unless a new prep follows (measure-then-reprep cycles are how ancillas are
// reused; there is no classical feedback). Throws ValidationError.
void validate_circuit(const Circuit& c);

// Gate names appearing in the circuit, sorted and deduplicated.
std::vector<std::string> circuit_gate_names(const Circuit& c);

// Two-qubit Grover circuit marking |target> (0..3, bit 0 = qubit 0). The
// oracle and the inversion about |00> are compiled as a Cphase with Rx(180)
// Ry(180) pairs on the qubits that need a Z, between three Ry(90) layers.
std::string grover2q_circuit_text(int target);
Circuit grover2q_circuit(int target);

}  // namespace umc
