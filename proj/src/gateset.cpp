#include "umc/gateset.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include "umc/errors.hpp"
#include "umc/pauli.hpp"
#include "umc/tensor.hpp"

namespace umc {

namespace {

constexpr const char* kSchemaVersion = "umc.gateset.v1";
constexpr const char* kBasisTag = "pauli-normalized";

bool parse_degrees(const std::string& text, double* out) {
    if (text.empty()) return false;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) return false;
    *out = v;
    return true;
}

// Resolves a gate name to its ideal unitary, or returns false.
bool lookup_unitary(const std::string& name, Eigen::MatrixXcd* out) {
    if (name == "i") {
        *out = Eigen::Matrix2cd::Identity();
        return true;
    }
    if (name == "x" || name == "y" || name == "z") {
        *out = pauli_1q(name == "x" ? 1 : name == "y" ? 2 : 3);
        return true;
    }
    if (name == "h") {
        Eigen::Matrix2cd h;
        h << 1, 1, 1, -1;
        *out = h / std::sqrt(2.0);
        return true;
    }
    if (name == "s") {
        Eigen::Matrix2cd s;
        s << 1, 0, 0, complexd(0, 1);
        *out = s;
        return true;
    }
    if (name == "cz") {
        Eigen::Vector4cd d(1, 1, 1, -1);
        *out = d.asDiagonal();
        return true;
    }
    if (name.size() > 2 && name[0] == 'r') {
        double deg = 0;
        if (!parse_degrees(name.substr(2), &deg)) return false;
        const double t = deg * std::acos(-1.0) / 180.0;
        if (name[1] == 'x') *out = rx(t);
        else if (name[1] == 'y') *out = ry(t);
        else if (name[1] == 'z') *out = rz(t);
        else return false;
        return true;
    }
    return false;
}

}  // namespace

const Superoperator& GateSetModel::gate(const std::string& gate_name) const {
    const auto it = gates.find(gate_name);
    if (it == gates.end())
        throw ValidationError("gate set '" + name + "' has no channel for gate '" + gate_name +
                              "'");
    return it->second;
}

Eigen::MatrixXcd ideal_unitary(const std::string& name) {
    Eigen::MatrixXcd u;
    if (!lookup_unitary(name, &u)) throw ValidationError("unknown gate name '" + name + "'");
    return u;
}

bool is_known_gate(const std::string& name) {
    Eigen::MatrixXcd u;
    return lookup_unitary(name, &u);
}

int gate_arity(const std::string& name) {
    return static_cast<int>(std::lround(std::log2(double(ideal_unitary(name).rows()))));
}

const Superoperator& ideal_gate_ptm(const std::string& name) {
    static std::mutex mu;
    static std::map<std::string, Superoperator> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, unitary_to_ptm(ideal_unitary(name))).first;
    return it->second;
}

GateSetModel ideal_gateset(const std::string& name) {
    GateSetModel model;
    model.name = name;
    for (const char* g :
         {"i", "x", "y", "z", "h", "rx90", "rx180", "ry90", "ry-90", "ry180", "rz90", "cz"})
        model.gates[g] = ideal_gate_ptm(g);
    model.rho0 = GateSetModel::perfect_rho0();
    model.effect = GateSetModel::perfect_effect();
    return model;
}

GateSetModel load_gateset(const std::string& path, double cp_tol) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open gate-set file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("gate-set file '" + path + "': " + e.what());
    }

    auto require = [&](const char* key) {
        if (!j.contains(key))
            throw ValidationError("gate-set file '" + path + "': missing field '" + key + "'");
    };
    require("schema_version");
    require("basis");
    require("gates");
    require("rho0");
    require("effect");
    if (j["schema_version"] != kSchemaVersion)
        throw ValidationError("gate-set file '" + path + "': unsupported schema_version");
    if (j["basis"] != kBasisTag)
        throw ValidationError("gate-set file '" + path + "': basis must be '" +
                              std::string(kBasisTag) + "'");

    GateSetModel model;
    model.name = j.value("name", std::string("unnamed"));

    for (const auto& [gname, entry] : j["gates"].items()) {
        if (!entry.contains("qubits") || !entry.contains("ptm"))
            throw ValidationError("gate '" + gname + "': needs 'qubits' and 'ptm'");
        const int nq = entry["qubits"].get<int>();
        if (nq != 1 && nq != 2)
            throw ValidationError("gate '" + gname + "': qubits must be 1 or 2");
        const Eigen::Index dim = Eigen::Index(1) << (2 * nq);
        const auto& rows = entry["ptm"];
        if (!rows.is_array() || Eigen::Index(rows.size()) != dim)
            throw ValidationError("gate '" + gname + "': ptm must have " + std::to_string(dim) +
                                  " rows");
        Superoperator s{nq, Eigen::MatrixXd(dim, dim)};
        for (Eigen::Index r = 0; r < dim; ++r) {
            const auto& row = rows[r];
            if (!row.is_array() || Eigen::Index(row.size()) != dim)
                throw ValidationError("gate '" + gname + "': ptm row " + std::to_string(r) +
                                      " must have " + std::to_string(dim) + " entries");
            for (Eigen::Index c = 0; c < dim; ++c) s.ptm(r, c) = row[c].get<double>();
        }
        const CptpReport rep = validate_cptp(s, cp_tol);
        if (!rep.ok()) {
            std::ostringstream os;
            os << "gate '" << gname << "' is not CPTP (min Choi eigenvalue "
               << rep.min_choi_eigenvalue << ", first-row deviation " << rep.first_row_deviation
               << ")";
            throw ValidationError(os.str());
        }
        model.gates[gname] = std::move(s);
    }

    auto read_vec4 = [&](const char* key) {
        const auto& arr = j[key];
        if (!arr.is_array() || arr.size() != 4)
            throw ValidationError(std::string("field '") + key + "' must be a 4-vector");
        Eigen::Vector4d v;
        for (int i = 0; i < 4; ++i) v(i) = arr[i].get<double>();
        return v;
    };
    model.rho0 = read_vec4("rho0");
    model.effect = read_vec4("effect");

    const Eigen::Matrix2cd rho = density_from_pauli_vector(model.rho0, 1).rho;
    if (std::abs(rho.trace().real() - 1.0) > 1e-9 || std::abs(rho.trace().imag()) > 1e-12)
        throw ValidationError("rho0 does not have unit trace");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es_rho(rho);
    if (es_rho.eigenvalues().minCoeff() < -1e-9)
        throw ValidationError("rho0 is not positive semidefinite");

    const Eigen::Matrix2cd eff = density_from_pauli_vector(model.effect, 1).rho;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es_eff(eff);
    if (es_eff.eigenvalues().minCoeff() < -1e-9 || es_eff.eigenvalues().maxCoeff() > 1 + 1e-9)
        throw ValidationError("effect is not a valid POVM element (needs 0 <= E <= I)");

    if (j.contains("annotations")) {
        for (const auto& [k, v] : j["annotations"].items())
            model.annotations[k] = v.get<double>();
    }
    return model;
}

void save_gateset(const GateSetModel& model, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["basis"] = kBasisTag;
    j["name"] = model.name;
    nlohmann::json gates = nlohmann::json::object();
    for (const auto& [gname, s] : model.gates) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < s.ptm.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < s.ptm.cols(); ++c) row.push_back(s.ptm(r, c));
            rows.push_back(std::move(row));
        }
        gates[gname] = {{"qubits", s.n_qubits}, {"ptm", std::move(rows)}};
    }
    j["gates"] = std::move(gates);
    j["rho0"] = {model.rho0(0), model.rho0(1), model.rho0(2), model.rho0(3)};
    j["effect"] = {model.effect(0), model.effect(1), model.effect(2), model.effect(3)};
    if (!model.annotations.empty()) j["annotations"] = model.annotations;

    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write gate-set file '" + path + "'");
    out << j.dump(2) << "\n";
}

}  // namespace umc
