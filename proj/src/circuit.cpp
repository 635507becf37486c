#include "umc/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "umc/gateset.hpp"

namespace umc {

namespace {

struct Token {
    std::string text;
    int column;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '#') break;
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
               line[i] != '#')
            ++i;
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

int parse_int(const Token& t, int line, const char* what) {
    std::size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(t.text, &pos);
    } catch (const std::exception&) {
        throw ParseError(std::string("expected ") + what + ", got '" + t.text + "'", line,
                         t.column);
    }
    if (pos != t.text.size())
        throw ParseError(std::string("expected ") + what + ", got '" + t.text + "'", line,
                         t.column);
    return value;
}

int parse_qubit(const Token& t, int n_qubits, int line) {
    const std::string s = lower(t.text);
    if (s.size() < 2 || s[0] != 'q')
        throw ParseError("expected a qubit like 'q0', got '" + t.text + "'", line, t.column);
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            throw ParseError("expected a qubit like 'q0', got '" + t.text + "'", line, t.column);
    const int q = std::stoi(s.substr(1));
    if (q >= n_qubits)
        throw ParseError("qubit q" + std::to_string(q) + " out of range for " +
                             std::to_string(n_qubits) + " qubits",
                         line, t.column);
    return q;
}

void expect_count(const std::vector<Token>& toks, std::size_t n, int line, const char* form) {
    if (toks.size() != n)
        throw ParseError(std::string("expected '") + form + "'", line,
                         toks.size() > n ? toks[n].column : static_cast<int>(1));
}

}  // namespace

Circuit parse_circuit(const std::string& text) {
    Circuit c;
    bool have_header = false;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto toks = tokenize(raw);
        if (toks.empty()) continue;
        const std::string head = lower(toks[0].text);

        if (head == "qubits") {
            if (have_header) throw ParseError("duplicate 'qubits' header", line, toks[0].column);
            expect_count(toks, 2, line, "qubits N");
            const int n = parse_int(toks[1], line, "a qubit count");
            if (n < 1) throw ParseError("qubit count must be at least 1", line, toks[1].column);
            c.n_qubits = n;
            have_header = true;
            continue;
        }
        if (!have_header)
            throw ParseError("'qubits N' must precede instructions", line, toks[0].column);

        Instruction ins;
        ins.line = line;
        if (head == "prep" || head == "measure") {
            expect_count(toks, 2, line, head == "prep" ? "prep qN" : "measure qN");
            ins.kind = head == "prep" ? Instruction::Kind::Prep : Instruction::Kind::Measure;
            ins.qubits = {parse_qubit(toks[1], c.n_qubits, line)};
        } else if (head == "rx" || head == "ry" || head == "rz") {
            expect_count(toks, 3, line, (head + " qN degrees").c_str());
            const int q = parse_qubit(toks[1], c.n_qubits, line);
            const int deg = parse_int(toks[2], line, "an angle in integer degrees");
            ins.kind = Instruction::Kind::Gate;
            ins.gate = head + std::to_string(deg);
            ins.qubits = {q};
        } else if (is_known_gate(head)) {
            const int arity = gate_arity(head);
            expect_count(toks, 1 + static_cast<std::size_t>(arity), line,
                         arity == 1 ? (head + " qN").c_str() : (head + " qN qM").c_str());
            ins.kind = Instruction::Kind::Gate;
            ins.gate = head;
            for (int k = 0; k < arity; ++k)
                ins.qubits.push_back(parse_qubit(toks[1 + k], c.n_qubits, line));
            if (arity == 2 && ins.qubits[0] == ins.qubits[1])
                throw ParseError("two-qubit gate needs distinct qubits", line, toks[2].column);
        } else {
            throw ParseError("unknown gate '" + toks[0].text + "'", line, toks[0].column);
        }
        c.instructions.push_back(std::move(ins));
    }
    if (!have_header) throw ParseError("missing 'qubits N' header", line == 0 ? 1 : line, 1);
    validate_circuit(c);
    return c;
}

std::string circuit_text(const Circuit& c) {
    std::ostringstream out;
    out << "qubits " << c.n_qubits << "\n";
    for (const auto& ins : c.instructions) {
        switch (ins.kind) {
            case Instruction::Kind::Prep:
                out << "prep q" << ins.qubits[0] << "\n";
                break;
            case Instruction::Kind::Measure:
                out << "measure q" << ins.qubits[0] << "\n";
                break;
            case Instruction::Kind::Gate:
                out << ins.gate;
                for (int q : ins.qubits) out << " q" << q;
                out << "\n";
                break;
        }
    }
    return out.str();
}

void validate_circuit(const Circuit& c) {
    if (c.n_qubits < 1) throw ValidationError("circuit needs at least 1 qubit");
    // Lifecycle per qubit: fresh -> prep -> gates -> measure, with an
    // optional new prep after a measurement (ancilla reuse). Anything else
    // is a hole the backends cannot give semantics to.
    enum class State { Fresh, Active, Measured };
    std::vector<State> state(static_cast<std::size_t>(c.n_qubits), State::Fresh);
    for (std::size_t idx = 0; idx < c.instructions.size(); ++idx) {
        const auto& ins = c.instructions[idx];
        const std::string at =
            ins.line > 0 ? "line " + std::to_string(ins.line) : "instruction " + std::to_string(idx);
        if (ins.qubits.empty()) throw ValidationError(at + ": instruction lists no qubits");
        for (int q : ins.qubits)
            if (q < 0 || q >= c.n_qubits)
                throw ValidationError(at + ": qubit q" + std::to_string(q) + " out of range");
        switch (ins.kind) {
            case Instruction::Kind::Prep: {
                auto& s = state[static_cast<std::size_t>(ins.qubits[0])];
                if (s == State::Active)
                    throw ValidationError(at + ": qubit q" + std::to_string(ins.qubits[0]) +
                                          " is prepared twice without a measurement");
                s = State::Active;
                break;
            }
            case Instruction::Kind::Gate: {
                if (ins.gate.empty() || !is_known_gate(ins.gate))
                    throw ValidationError(at + ": unknown gate '" + ins.gate + "'");
                if (gate_arity(ins.gate) != static_cast<int>(ins.qubits.size()))
                    throw ValidationError(at + ": gate '" + ins.gate + "' has wrong qubit count");
                if (ins.qubits.size() == 2 && ins.qubits[0] == ins.qubits[1])
                    throw ValidationError(at + ": two-qubit gate needs distinct qubits");
                for (int q : ins.qubits) {
                    const auto s = state[static_cast<std::size_t>(q)];
                    if (s == State::Fresh)
                        throw ValidationError(at + ": gate acts on unprepared qubit q" +
                                              std::to_string(q));
                    if (s == State::Measured)
                        throw ValidationError(at + ": gate acts on measured qubit q" +
                                              std::to_string(q) + " without a new prep");
                }
                break;
            }
            case Instruction::Kind::Measure: {
                auto& s = state[static_cast<std::size_t>(ins.qubits[0])];
                if (s != State::Active)
                    throw ValidationError(at + ": measurement of qubit q" +
                                          std::to_string(ins.qubits[0]) +
                                          (s == State::Fresh ? " before it is prepared"
                                                             : " that was already measured"));
                s = State::Measured;
                break;
            }
        }
    }
}

std::vector<std::string> circuit_gate_names(const Circuit& c) {
    std::set<std::string> names;
    for (const auto& ins : c.instructions)
        if (ins.kind == Instruction::Kind::Gate) names.insert(ins.gate);
    return {names.begin(), names.end()};
}

std::string grover2q_circuit_text(int target) {
    if (target < 0 || target > 3)
        throw ValidationError("grover target must be one of 0..3");
    std::ostringstream out;
    out << "qubits 2\n";
    out << "prep q0\nprep q1\n";
    const auto ry_layer = [&out] { out << "ry q0 90\nry q1 90\n"; };
    // Cphase marks |11>; a Z (= Rx(180) Ry(180) up to phase) on qubit k
    // moves the mark to the state with bit k set and the other bit clear,
    // and Z on both moves it to |00>.
    const auto marking_cz = [&out](bool z_on_q0, bool z_on_q1) {
        if (z_on_q0) out << "ry q0 180\nrx q0 180\n";
        if (z_on_q1) out << "ry q1 180\nrx q1 180\n";
        out << "cz q0 q1\n";
    };
    ry_layer();
    const bool bit0 = (target & 1) != 0;
    const bool bit1 = (target & 2) != 0;
    marking_cz(!bit1, !bit0);
    ry_layer();
    marking_cz(true, true);  // inversion about |00>
    ry_layer();
    out << "measure q0\nmeasure q1\n";
    return out.str();
}

Circuit grover2q_circuit(int target) { return parse_circuit(grover2q_circuit_text(target)); }

}  // namespace umc
