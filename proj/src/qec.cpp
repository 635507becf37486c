#include "umc/qec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "umc/channels.hpp"
#include "umc/errors.hpp"
#include "umc/gateset.hpp"
#include "umc/qcore.hpp"

namespace umc {

namespace {

constexpr int kLayers = 4;
constexpr int kChecks = 8;
constexpr int kData = 9;

// cz slots per round: kSchedule[c][l] is the data qubit checks[c] touches in
// layer l, -1 when idle. X plaquettes visit their corners NW, NE, SW, SE and
// Z plaquettes NW, SW, NE, SE (boundary checks keep the slots of the corners
// they have). Interleaved check couplings do not commute, so the slot order
// is load-bearing: pushing an ancilla readout backward through the round
// shows check A picks up a Z factor of ancilla B for every shared data qubit
// B touches earlier than A. Neighboring X and Z plaquettes here share zero or
// two data qubits, and the corner orders keep both crossings on the same side
// so the factors cancel in pairs. The transversal-order condition, with both
// orders read off kSchedule, is enforced by verify_schedule.
constexpr int kSchedule[kChecks][kLayers] = {
    {-1, -1, 1, 2},  // X {1,2}
    {0, 1, 3, 4},    // X {0,1,3,4}
    {4, 5, 7, 8},    // X {4,5,7,8}
    {6, 7, -1, -1},  // X {6,7}
    {-1, -1, 0, 3},  // Z {0,3}
    {1, 4, 2, 5},    // Z {1,2,4,5}
    {3, 6, 4, 7},    // Z {3,4,6,7}
    {5, 8, -1, -1},  // Z {5,8}
};

// Layers in which data qubit d participates in X-check czs, as maximal runs
// of consecutive layers. The builder brackets each run with ry90/ry-90 so the
// qubit sits in the X frame exactly for those slots; Z-check czs land outside
// every run. Most qubits need one window per round, d4 needs two.
std::vector<std::pair<int, int>> frame_windows(int d) {
    std::vector<int> layers;
    for (int c = 0; c < kChecks / 2; ++c)
        for (int l = 0; l < kLayers; ++l)
            if (kSchedule[c][l] == d) layers.push_back(l);
    std::sort(layers.begin(), layers.end());
    std::vector<std::pair<int, int>> runs;
    for (int l : layers) {
        if (!runs.empty() && runs.back().second == l - 1)
            runs.back().second = l;
        else
            runs.emplace_back(l, l);
    }
    return runs;
}

bool contains(const std::vector<int>& v, int q) {
    return std::find(v.begin(), v.end(), q) != v.end();
}

int overlap_count(const std::vector<int>& a, const std::vector<int>& b) {
    int n = 0;
    for (int q : a)
        if (contains(b, q)) ++n;
    return n;
}

void verify_layout(const Surface17Layout& l) {
    if (l.checks.size() != kChecks) throw ValidationError("surface-17 layout needs 8 checks");
    for (const auto& c : l.checks) {
        if (c.support.size() != 2 && c.support.size() != 4)
            throw ValidationError("surface-17 checks act on 2 or 4 data qubits");
        for (int d : c.support)
            if (d < 0 || d >= kData) throw ValidationError("check support outside the data grid");
    }
    // Symbolic commutation over the Pauli group: an X-type and a Z-type
    // operator commute exactly when their supports overlap evenly.
    for (const auto& a : l.checks)
        for (const auto& b : l.checks) {
            if (a.x_type == b.x_type) continue;
            if (overlap_count(a.support, b.support) & 1)
                throw ValidationError("stabilizers do not commute");
        }
    for (const auto& c : l.checks) {
        const auto& opposite = c.x_type ? l.logical_z : l.logical_x;
        if (overlap_count(c.support, opposite) & 1)
            throw ValidationError("logical operator does not commute with the stabilizers");
    }
    if (!(overlap_count(l.logical_x, l.logical_z) & 1))
        throw ValidationError("logical X and Z must anticommute");
}

void verify_schedule(const Surface17Layout& l) {
    for (int c = 0; c < kChecks; ++c) {
        std::vector<int> scheduled;
        for (int layer = 0; layer < kLayers; ++layer)
            if (kSchedule[c][layer] >= 0) scheduled.push_back(kSchedule[c][layer]);
        std::sort(scheduled.begin(), scheduled.end());
        if (scheduled != l.checks[c].support)
            throw ValidationError("cz schedule does not realize the check supports");
    }
    for (int layer = 0; layer < kLayers; ++layer) {
        std::vector<int> seen;
        for (int c = 0; c < kChecks; ++c) {
            const int d = kSchedule[c][layer];
            if (d < 0) continue;
            if (contains(seen, d)) throw ValidationError("data qubit scheduled twice in one layer");
            seen.push_back(d);
        }
    }
    auto slot = [&](int c, int d) {
        for (int layer = 0; layer < kLayers; ++layer)
            if (kSchedule[c][layer] == d) return layer;
        return -1;
    };
    for (int a = 0; a < kChecks; ++a)
        for (int b = 0; b < kChecks; ++b) {
            if (!l.checks[a].x_type || l.checks[b].x_type) continue;
            std::vector<int> shared;
            for (int d : l.checks[a].support)
                if (contains(l.checks[b].support, d)) shared.push_back(d);
            if (shared.empty()) continue;
            if (shared.size() != 2)
                throw ValidationError("checks of opposite type must share 0 or 2 data qubits");
            const bool first = slot(a, shared[0]) < slot(b, shared[0]);
            const bool second = slot(a, shared[1]) < slot(b, shared[1]);
            if (first != second)
                throw ValidationError("cz order leaks one ancilla into another's readout");
        }
}

Surface17Layout make_layout() {
    Surface17Layout l;
    for (int d = 0; d < kData; ++d) l.data[d] = d;
    auto add = [&](bool x_type, std::vector<int> support) {
        Surface17Layout::Check c;
        c.ancilla = 9 + int(l.checks.size());
        c.x_type = x_type;
        c.support = std::move(support);
        l.checks.push_back(std::move(c));
    };
    add(true, {1, 2});
    add(true, {0, 1, 3, 4});
    add(true, {4, 5, 7, 8});
    add(true, {6, 7});
    add(false, {0, 3});
    add(false, {1, 2, 4, 5});
    add(false, {3, 4, 6, 7});
    add(false, {5, 8});
    l.logical_x = {0, 3, 6};
    l.logical_z = {0, 1, 2};
    verify_layout(l);
    verify_schedule(l);
    return l;
}

// ---------------------------------------------------------------------------
// Matching graphs. One per check type: columns are the checks, layers the
// detection time steps. A data qubit shared by two checks is a spatial edge,
// a data qubit owned by one check alone is that column's boundary edge.

struct GraphSpec {
    std::vector<int> cols;  // check indices of this type, in layout order
    struct Edge {
        int a = 0, b = 0;  // local column indices
        int data = 0;      // representative data qubit
    };
    std::vector<Edge> spatial;
    std::array<int, 4> boundary_data{};  // representative data qubit, -1 if none
};

GraphSpec make_graph(const Surface17Layout& l, bool x_checks, const std::vector<int>& logical) {
    GraphSpec g;
    g.boundary_data.fill(-1);
    for (int c = 0; c < int(l.checks.size()); ++c)
        if (l.checks[c].x_type == x_checks) g.cols.push_back(c);
    for (int d = 0; d < kData; ++d) {
        std::vector<int> owners;
        for (int i = 0; i < int(g.cols.size()); ++i)
            if (contains(l.checks[g.cols[i]].support, d)) owners.push_back(i);
        if (owners.size() == 2) {
            g.spatial.push_back({owners[0], owners[1], d});
        } else if (owners.size() == 1) {
            const int i = owners[0];
            if (g.boundary_data[i] < 0) {
                g.boundary_data[i] = d;
            } else if (contains(logical, g.boundary_data[i]) != contains(logical, d)) {
                // All boundary representatives of one column must agree on
                // whether they cross the logical, or the reported flip would
                // depend on an arbitrary choice.
                throw ValidationError("ambiguous logical crossing at a boundary");
            }
        }
    }
    return g;
}

// Matching over the detection events of one graph. Unit edge weights, so a
// pairing costs its BFS distance and a boundary match costs the distance to
// the nearest boundary-capable column plus one. Exhaustive minimization over
// all pairings via subset dynamic programming; exact, and cheap for the event
// counts a distance-3 history can produce.
struct GraphResult {
    int weight = 0;
    std::vector<int> correction;  // data qubits with odd inferred error count
};

constexpr int kInf = std::numeric_limits<int>::max() / 4;
constexpr int kMaxEvents = 22;

GraphResult match_graph(const GraphSpec& g, int layers,
                        const std::vector<std::pair<int, int>>& events) {
    GraphResult out;
    const int k = int(events.size());
    if (k == 0) return out;
    if (k > kMaxEvents)
        throw ResourceError("detection event set of " + std::to_string(k) +
                            " exceeds the exhaustive matching limit of " +
                            std::to_string(kMaxEvents));
    const int cols = int(g.cols.size());
    const int nodes = cols * layers;
    auto node_of = [&](int col, int layer) { return col * layers + layer; };

    // Local column index per event.
    std::vector<int> ecol(k), elayer(k);
    for (int i = 0; i < k; ++i) {
        const int c = int(std::find(g.cols.begin(), g.cols.end(), events[i].first) -
                          g.cols.begin());
        if (c == cols || events[i].second < 0 || events[i].second >= layers)
            throw ValidationError("detection event outside the matching graph");
        ecol[i] = c;
        elayer[i] = events[i].second;
    }

    // BFS from every event: distances, and parent pointers for path
    // reconstruction. parent_data records the data qubit of the spatial edge
    // taken into a node (-1 for temporal edges).
    std::vector<std::vector<int>> dist(k), parent(k), parent_data(k);
    for (int i = 0; i < k; ++i) {
        dist[i].assign(nodes, kInf);
        parent[i].assign(nodes, -1);
        parent_data[i].assign(nodes, -1);
        std::vector<int> queue;
        const int start = node_of(ecol[i], elayer[i]);
        dist[i][start] = 0;
        queue.push_back(start);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int v = queue[head];
            const int vc = v / layers, vl = v % layers;
            auto relax = [&](int col, int layer, int data) {
                const int w = node_of(col, layer);
                if (dist[i][w] != kInf) return;
                dist[i][w] = dist[i][v] + 1;
                parent[i][w] = v;
                parent_data[i][w] = data;
                queue.push_back(w);
            };
            if (vl > 0) relax(vc, vl - 1, -1);
            if (vl + 1 < layers) relax(vc, vl + 1, -1);
            for (const auto& e : g.spatial) {
                if (e.a == vc) relax(e.b, vl, e.data);
                if (e.b == vc) relax(e.a, vl, e.data);
            }
        }
    }

    // Boundary cost per event: nearest column owning a boundary data qubit.
    std::vector<int> bcost(k, kInf), bnode(k, -1);
    for (int i = 0; i < k; ++i)
        for (int col = 0; col < cols; ++col) {
            if (g.boundary_data[col] < 0) continue;
            for (int layer = 0; layer < layers; ++layer) {
                const int v = node_of(col, layer);
                if (dist[i][v] + 1 < bcost[i]) {
                    bcost[i] = dist[i][v] + 1;
                    bnode[i] = v;
                }
            }
        }

    auto pair_cost = [&](int i, int j) { return dist[i][node_of(ecol[j], elayer[j])]; };

    // Subset DP over events: match the lowest set bit to the boundary or to a
    // partner. Boundary is examined first, so on ties it wins; the tie-break
    // only picks among equal-weight matchings.
    const int full = (1 << k) - 1;
    std::vector<int> cost(std::size_t(full) + 1, kInf), choice(std::size_t(full) + 1, -1);
    cost[0] = 0;
    for (int mask = 1; mask <= full; ++mask) {
        int i = 0;
        while (!(mask & (1 << i))) ++i;
        int best = kInf, arg = -1;
        if (bcost[i] < kInf && cost[mask ^ (1 << i)] < kInf) {
            best = bcost[i] + cost[mask ^ (1 << i)];
            arg = k;  // boundary sentinel
        }
        for (int j = i + 1; j < k; ++j) {
            if (!(mask & (1 << j))) continue;
            const int rest = cost[mask ^ (1 << i) ^ (1 << j)];
            if (pair_cost(i, j) >= kInf || rest >= kInf) continue;
            const int c = pair_cost(i, j) + rest;
            if (c < best) {
                best = c;
                arg = j;
            }
        }
        cost[mask] = best;
        choice[mask] = arg;
    }
    if (cost[full] >= kInf)
        throw ValidationError("detection events have odd parity and no boundary edge");
    out.weight = cost[full];

    // Walk the chosen pairing and accumulate the data qubits along each path
    // modulo two.
    std::array<int, kData> flips{};
    auto add_path = [&](int i, int target_node) {
        int v = target_node;
        const int start = node_of(ecol[i], elayer[i]);
        while (v != start) {
            if (parent_data[i][v] >= 0) flips[parent_data[i][v]] ^= 1;
            v = parent[i][v];
        }
    };
    int mask = full;
    while (mask) {
        int i = 0;
        while (!(mask & (1 << i))) ++i;
        const int arg = choice[mask];
        if (arg == k) {
            add_path(i, bnode[i]);
            flips[g.boundary_data[bnode[i] / layers]] ^= 1;
            mask ^= 1 << i;
        } else {
            add_path(i, node_of(ecol[arg], elayer[arg]));
            mask ^= (1 << i) | (1 << arg);
        }
    }
    for (int d = 0; d < kData; ++d)
        if (flips[d]) out.correction.push_back(d);
    return out;
}

void check_history(const SyndromeHistory& h) {
    if (h.rounds < 1 || int(h.bits.size()) != h.rounds)
        throw ValidationError("syndrome history does not cover its rounds");
    for (const auto& row : h.bits)
        for (int b : row)
            if (b != 0 && b != 1) throw ValidationError("syndrome bits must be 0 or 1");
    for (int b : h.data_bits)
        if (b != 0 && b != 1) throw ValidationError("data bits must be 0 or 1");
}

double wilson_low(long long k, long long n, bool upper) {
    const double z = 1.959963984540054;  // 97.5th normal percentile
    const double nn = double(n);
    const double p = double(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    const double v = upper ? center + half : center - half;
    return std::min(1.0, std::max(0.0, v));
}

// Log-rate with a floor so exact zeros sit far below any reference value
// instead of producing -inf arithmetic.
double log_rate(double r) { return std::log(std::max(r, 1e-15)); }

// Crossing of the piecewise log-linear rate curve with log(1 - f) inside
// [f1, f2]; the endpoint signs must differ.
double solve_crossing(double f1, double lr1, double f2, double lr2) {
    auto h = [&](double f) {
        const double t = (f - f1) / (f2 - f1);
        return lr1 + (lr2 - lr1) * t - std::log(1.0 - f);
    };
    double lo = f1, hi = f2;
    double hlo = h(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double hm = h(mid);
        if ((hm <= 0.0) == (hlo <= 0.0)) {
            lo = mid;
            hlo = hm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Crossing over a whole sorted sweep for one rate column; returns the clamped
// sweep boundary when the column never straddles the reference line.
double column_crossing(const std::vector<LogicalRateResult>& pts, double LogicalRateResult::*col) {
    std::vector<double> gap(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        gap[i] = log_rate(pts[i].*col) - std::log(1.0 - pts[i].mean_fidelity);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (gap[i] == 0.0) return pts[i].mean_fidelity;
        if ((gap[i] > 0.0) != (gap[i + 1] > 0.0))
            return solve_crossing(pts[i].mean_fidelity, log_rate(pts[i].*col),
                                  pts[i + 1].mean_fidelity, log_rate(pts[i + 1].*col));
    }
    if (gap.back() == 0.0) return pts.back().mean_fidelity;
    return gap.back() > 0.0 ? pts.back().mean_fidelity : pts.front().mean_fidelity;
}

}  // namespace

const Surface17Layout& surface17_layout() {
    static const Surface17Layout layout = make_layout();
    return layout;
}

Circuit build_surface17_circuit(int rounds, LogicalBasis basis) {
    if (rounds < 1) throw ValidationError("surface-17 extraction needs rounds >= 1");
    const Surface17Layout& l = surface17_layout();
    Circuit c;
    c.n_qubits = 17;
    auto emit = [&](Instruction::Kind kind, const char* gate, std::vector<int> qs) {
        Instruction ins;
        ins.kind = kind;
        ins.gate = gate;
        ins.qubits = std::move(qs);
        c.instructions.push_back(std::move(ins));
    };
    for (int d = 0; d < kData; ++d) emit(Instruction::Kind::Prep, "", {d});
    if (basis == LogicalBasis::X)
        for (int d = 0; d < kData; ++d) emit(Instruction::Kind::Gate, "ry90", {d});
    for (int r = 0; r < rounds; ++r) {
        for (const auto& ck : l.checks) emit(Instruction::Kind::Prep, "", {ck.ancilla});
        for (const auto& ck : l.checks) emit(Instruction::Kind::Gate, "ry90", {ck.ancilla});
        for (int layer = 0; layer < kLayers; ++layer) {
            for (int d = 0; d < kData; ++d)
                for (const auto& w : frame_windows(d))
                    if (w.first == layer) emit(Instruction::Kind::Gate, "ry90", {d});
            for (int ci = 0; ci < kChecks; ++ci)
                if (kSchedule[ci][layer] >= 0)
                    emit(Instruction::Kind::Gate, "cz",
                         {l.checks[ci].ancilla, kSchedule[ci][layer]});
            for (int d = 0; d < kData; ++d)
                for (const auto& w : frame_windows(d))
                    if (w.second == layer) emit(Instruction::Kind::Gate, "ry-90", {d});
        }
        for (const auto& ck : l.checks) emit(Instruction::Kind::Gate, "ry-90", {ck.ancilla});
        for (const auto& ck : l.checks) emit(Instruction::Kind::Measure, "", {ck.ancilla});
    }
    if (basis == LogicalBasis::X)
        for (int d = 0; d < kData; ++d) emit(Instruction::Kind::Gate, "ry-90", {d});
    for (int d = 0; d < kData; ++d) emit(Instruction::Kind::Measure, "", {d});
    validate_circuit(c);
    return c;
}

SyndromeHistory extract_syndromes(const RunResult& r, int rounds, LogicalBasis basis) {
    if (rounds < 1) throw ValidationError("syndrome extraction needs rounds >= 1");
    const Surface17Layout& l = surface17_layout();
    const std::size_t expected = std::size_t(rounds) * kChecks + kData;
    if (r.bits.size() != expected || r.qubits.size() != expected)
        throw ValidationError("run result has " + std::to_string(r.bits.size()) +
                              " measurements, expected " + std::to_string(expected));
    SyndromeHistory h;
    h.rounds = rounds;
    h.basis = basis;
    h.bits.resize(std::size_t(rounds));
    std::size_t k = 0;
    for (int rd = 0; rd < rounds; ++rd)
        for (int c = 0; c < kChecks; ++c, ++k) {
            if (r.qubits[k] != l.checks[c].ancilla)
                throw ValidationError("measurement order does not match the extraction circuit");
            h.bits[rd][c] = r.bits[k];
        }
    for (int d = 0; d < kData; ++d, ++k) {
        if (r.qubits[k] != d)
            throw ValidationError("measurement order does not match the extraction circuit");
        h.data_bits[d] = r.bits[k];
    }
    return h;
}

std::vector<std::pair<int, int>> detection_events(const SyndromeHistory& h,
                                                  const Surface17Layout& layout,
                                                  bool x_checks) {
    check_history(h);
    const bool referenced = (h.basis == LogicalBasis::X) == x_checks;
    std::vector<std::pair<int, int>> ev;
    for (int c = 0; c < kChecks; ++c) {
        if (layout.checks[c].x_type != x_checks) continue;
        if (referenced) {
            int prev = 0;  // ideal start value
            for (int r = 0; r < h.rounds; ++r) {
                if (h.bits[r][c] != prev) ev.emplace_back(c, r);
                prev = h.bits[r][c];
            }
            int fold = 0;
            for (int d : layout.checks[c].support) fold ^= h.data_bits[d];
            if (fold != prev) ev.emplace_back(c, h.rounds);
        } else {
            for (int r = 1; r < h.rounds; ++r)
                if (h.bits[r][c] != h.bits[r - 1][c]) ev.emplace_back(c, r - 1);
        }
    }
    return ev;
}

DecodeResult decode_mwpm(const SyndromeHistory& h, const Surface17Layout& layout) {
    check_history(h);
    // Z-type checks detect X errors and their corrections cross logical Z;
    // X-type checks mirror that. The graph of the check type referenced for
    // this basis carries rounds+1 layers (ideal start plus the folded data
    // readout), the other one rounds-1.
    const bool x_ref = h.basis == LogicalBasis::X;
    const GraphSpec gz = make_graph(layout, false, layout.logical_z);
    const GraphSpec gx = make_graph(layout, true, layout.logical_x);
    const int layers_z = x_ref ? std::max(0, h.rounds - 1) : h.rounds + 1;
    const int layers_x = x_ref ? h.rounds + 1 : std::max(0, h.rounds - 1);
    const GraphResult rz = match_graph(gz, layers_z, detection_events(h, layout, false));
    const GraphResult rx = match_graph(gx, layers_x, detection_events(h, layout, true));

    DecodeResult out;
    out.x_correction = rz.correction;
    out.x_matching_weight = rz.weight;
    out.z_correction = rx.correction;
    out.z_matching_weight = rx.weight;

    const std::vector<int>& support = x_ref ? layout.logical_x : layout.logical_z;
    const std::vector<int>& corr = x_ref ? out.z_correction : out.x_correction;
    int parity = 0;
    for (int d : support) parity ^= h.data_bits[d];
    for (int d : corr) parity ^= contains(support, d) ? 1 : 0;
    out.logical_flip = parity != 0;
    return out;
}

namespace {

// Sweep axis: unweighted mean over the four operation classes, from the
// channels actually simulated.
double gateset_mean_fidelity(const GateSetModel& gs, const std::vector<std::string>& names) {
    double f1 = 0.0, fcz = 1.0;
    int n1 = 0;
    for (const auto& name : names) {
        const double f = average_gate_fidelity(gs.gate(name), ideal_gate_ptm(name));
        if (gate_arity(name) == 2) {
            fcz = f;
        } else {
            f1 += f;
            ++n1;
        }
    }
    if (n1 > 0) f1 /= n1;
    const double fprep = density_from_pauli_vector(gs.rho0, 1).rho(0, 0).real();
    const double fmeas = density_from_pauli_vector(gs.effect, 1).rho(1, 1).real();
    return (f1 + fcz + fprep + fmeas) / 4.0;
}

LogicalRateResult run_logical_rate(const Circuit& c, const NoiseModel& model, int rounds,
                                   long long shots, std::uint64_t seed, int workers,
                                   double mean_f) {
    const int n_workers = int(std::min<long long>(workers, shots));
    std::vector<long long> flips(std::size_t(n_workers), 0);
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_workers));
    const Surface17Layout& layout = surface17_layout();
    auto work = [&](int w) {
        try {
            ShotRunner runner(c, model);
            long long local = 0;
            for (long long s = w; s < shots; s += n_workers) {
                const RunResult& r = runner.run(seed, s);
                const SyndromeHistory h = extract_syndromes(r, rounds, LogicalBasis::Z);
                if (decode_mwpm(h, layout).logical_flip) ++local;
            }
            flips[std::size_t(w)] = local;
        } catch (...) {
            failures[std::size_t(w)] = std::current_exception();
        }
    };
    if (n_workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);

    LogicalRateResult out;
    out.mean_fidelity = mean_f;
    out.shots = shots;
    for (long long f : flips) out.logical_errors += f;
    out.rate = double(out.logical_errors) / double(shots);
    out.ci_low = wilson_low(out.logical_errors, shots, false);
    out.ci_high = wilson_low(out.logical_errors, shots, true);
    return out;
}

}  // namespace

LogicalRateResult estimate_logical_error_rate(const Surface17NoiseSpec& spec, int rounds,
                                              long long shots, std::uint64_t seed,
                                              int workers) {
    if (shots < 1) throw ValidationError("logical rate estimation needs shots >= 1");
    if (workers < 1) throw ValidationError("workers must be positive");
    for (double f : {spec.f_1q, spec.f_cz, spec.f_prep, spec.f_meas})
        if (!(f > 0.0) || f > 1.0)
            throw ValidationError("fidelity targets must lie in (0, 1]");

    const bool noiseless =
        spec.f_1q == 1.0 && spec.f_cz == 1.0 && spec.f_prep == 1.0 && spec.f_meas == 1.0;
    if (noiseless) {
        const Circuit c = build_surface17_circuit(rounds, LogicalBasis::Z);
        NoiseModel model;
        for (const auto& name : circuit_gate_names(c)) model.gates[name] = NoNoise{};
        return run_logical_rate(c, model, rounds, shots, seed, workers, 1.0);
    }

    GateSetSynthesisSpec syn;
    syn.name = "surface17-sweep";
    syn.seed = spec.synthesis_seed;
    syn.spam_coherent_fraction = spec.coherent_fraction;
    const Circuit c = build_surface17_circuit(rounds, LogicalBasis::Z);
    for (const auto& name : circuit_gate_names(c)) {
        OpNoiseSpec op;
        op.infidelity = gate_arity(name) == 2 ? 1.0 - spec.f_cz : 1.0 - spec.f_1q;
        op.coherent_fraction = spec.coherent_fraction;
        syn.gates[name] = op;
    }
    syn.prep_infidelity = 1.0 - spec.f_prep;
    syn.meas_infidelity = 1.0 - spec.f_meas;
    return estimate_logical_error_rate(synthesize_noisy_gateset(syn), rounds, shots, seed,
                                       workers, spec.decompose);
}

LogicalRateResult estimate_logical_error_rate(const GateSetModel& gs, int rounds,
                                              long long shots, std::uint64_t seed, int workers,
                                              const DecomposeOptions& decompose) {
    if (shots < 1) throw ValidationError("logical rate estimation needs shots >= 1");
    if (workers < 1) throw ValidationError("workers must be positive");
    const Circuit c = build_surface17_circuit(rounds, LogicalBasis::Z);
    const std::vector<std::string> names = circuit_gate_names(c);
    for (const auto& name : names)
        if (!gs.has_gate(name))
            throw ValidationError("gate set lacks '" + name +
                                  "' required by the extraction circuit");
    const NoiseModel model = build_noise_model(gs, names, NoiseMethod::Umc, decompose);
    return run_logical_rate(c, model, rounds, shots, seed, workers,
                            gateset_mean_fidelity(gs, names));
}

ThresholdEstimate estimate_pseudo_threshold(const std::vector<LogicalRateResult>& sweep) {
    if (sweep.size() < 2)
        throw ValidationError("pseudo-threshold estimation needs at least two sweep points");
    ThresholdEstimate est;
    est.sweep = sweep;
    std::sort(est.sweep.begin(), est.sweep.end(),
              [](const LogicalRateResult& a, const LogicalRateResult& b) {
                  return a.mean_fidelity < b.mean_fidelity;
              });
    for (std::size_t i = 0; i < est.sweep.size(); ++i) {
        const auto& p = est.sweep[i];
        if (!(p.mean_fidelity > 0.0) || p.mean_fidelity >= 1.0)
            throw ValidationError("sweep fidelities must lie in (0, 1)");
        if (p.rate < 0.0 || p.rate > 1.0 || p.ci_low < 0.0 || p.ci_high > 1.0)
            throw ValidationError("sweep rates must be probabilities");
        if (i > 0 && est.sweep[i].mean_fidelity == est.sweep[i - 1].mean_fidelity)
            throw ValidationError("sweep fidelities must be distinct");
    }

    bool found = false;
    std::vector<double> gap(est.sweep.size());
    for (std::size_t i = 0; i < est.sweep.size(); ++i)
        gap[i] = log_rate(est.sweep[i].rate) - std::log(1.0 - est.sweep[i].mean_fidelity);
    for (std::size_t i = 0; i + 1 < est.sweep.size() && !found; ++i) {
        if (gap[i] == 0.0) {
            est.crossing_fidelity = est.sweep[i].mean_fidelity;
            found = true;
        } else if ((gap[i] > 0.0) != (gap[i + 1] > 0.0)) {
            est.crossing_fidelity =
                solve_crossing(est.sweep[i].mean_fidelity, log_rate(est.sweep[i].rate),
                               est.sweep[i + 1].mean_fidelity, log_rate(est.sweep[i + 1].rate));
            found = true;
        }
    }
    if (!found && gap.back() == 0.0) {
        est.crossing_fidelity = est.sweep.back().mean_fidelity;
        found = true;
    }
    if (!found) {
        std::ostringstream msg;
        msg << "logical rates never cross the reference line 1 - f over fidelities ["
            << est.sweep.front().mean_fidelity << ", " << est.sweep.back().mean_fidelity << "]";
        throw ValidationError(msg.str());
    }
    est.bracket_low = column_crossing(est.sweep, &LogicalRateResult::ci_low);
    est.bracket_high = column_crossing(est.sweep, &LogicalRateResult::ci_high);
    if (est.bracket_low > est.bracket_high) std::swap(est.bracket_low, est.bracket_high);
    return est;
}

std::string sweep_csv(const std::vector<LogicalRateResult>& sweep) {
    std::string out = "fidelity,shots,logical_errors,rate,ci_low,ci_high\n";
    char buf[192];
    for (const auto& p : sweep) {
        std::snprintf(buf, sizeof buf, "%.10g,%lld,%lld,%.10g,%.10g,%.10g\n", p.mean_fidelity,
                      p.shots, p.logical_errors, p.rate, p.ci_low, p.ci_high);
        out += buf;
    }
    return out;
}

}  // namespace umc
