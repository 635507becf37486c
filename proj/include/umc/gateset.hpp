#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>

#include "umc/qcore.hpp"

namespace umc {

// A gate-set model: named gate channels plus single-qubit state preparation
// and measurement. SPAM is stored in Pauli coordinates: rho0 is the prepared
// state, effect is the POVM element reported as outcome 1. The perfect
// values are (1,0,0,1)/sqrt(2) and (1,0,0,-1)/sqrt(2).
struct GateSetModel {
    std::string name;
    std::map<std::string, Superoperator> gates;
    Eigen::Vector4d rho0;
    Eigen::Vector4d effect;
    // Free-form numeric annotations (synthesis targets, measured fidelities).
    std::map<std::string, double> annotations;

    static Eigen::Vector4d perfect_rho0() {
        return Eigen::Vector4d(1, 0, 0, 1) / std::sqrt(2.0);
    }
    static Eigen::Vector4d perfect_effect() {
        return Eigen::Vector4d(1, 0, 0, -1) / std::sqrt(2.0);
    }

    const Superoperator& gate(const std::string& gate_name) const;
    bool has_gate(const std::string& gate_name) const { return gates.count(gate_name) != 0; }
};

// Gate vocabulary shared by the circuit dialect and gate-set files:
//   i, x, y, z, h, cz, and rotation names rx<deg>/ry<deg>/rz<deg>
//   (degrees, possibly negative, e.g. "ry90", "ry-90", "rx180").
// Returns the ideal unitary (2x2, or 4x4 for cz). Unknown names throw.
Eigen::MatrixXcd ideal_unitary(const std::string& name);
int gate_arity(const std::string& name);
bool is_known_gate(const std::string& name);

// Ideal transfer matrix for a named gate (cached).
const Superoperator& ideal_gate_ptm(const std::string& name);

GateSetModel ideal_gateset(const std::string& name = "ideal");

// JSON (de)serialization. Loading validates the schema, the basis tag
// ("pauli-normalized" is required), CPTP of every gate, rho0 being a state,
// and 0 <= effect <= I; violations raise ValidationError with the offending
// gate named.
GateSetModel load_gateset(const std::string& path, double cp_tol = 1e-8);
void save_gateset(const GateSetModel& model, const std::string& path);

}  // namespace umc
