#include "umc/pauli.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace umc {

const Eigen::Matrix2cd& pauli_1q(int i) {
    static const std::array<Eigen::Matrix2cd, 4> table = [] {
        std::array<Eigen::Matrix2cd, 4> t;
        const complexd I(0, 1);
        t[0] << 1, 0, 0, 1;
        t[1] << 0, 1, 1, 0;
        t[2] << 0, -I, I, 0;
        t[3] << 1, 0, 0, -1;
        return t;
    }();
    if (i < 0 || i > 3) throw std::out_of_range("pauli_1q: index must be in [0,3]");
    return table[i];
}

Eigen::MatrixXcd pauli_product(int n_qubits, int index) {
    Eigen::MatrixXcd out = pauli_1q((index >> (2 * (n_qubits - 1))) & 3);
    for (int q = n_qubits - 2; q >= 0; --q) out = kron(out, pauli_1q((index >> (2 * q)) & 3));
    return out;
}

const std::vector<Eigen::MatrixXcd>& normalized_pauli_basis(int n_qubits) {
    static std::map<int, std::vector<Eigen::MatrixXcd>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n_qubits);
    if (it != cache.end()) return it->second;
    const int dim2 = 1 << (2 * n_qubits);
    const double scale = 1.0 / std::sqrt(double(1 << n_qubits));
    std::vector<Eigen::MatrixXcd> basis;
    basis.reserve(dim2);
    for (int i = 0; i < dim2; ++i) basis.push_back(scale * pauli_product(n_qubits, i));
    return cache.emplace(n_qubits, std::move(basis)).first->second;
}

Eigen::Matrix2cd rx(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    Eigen::Matrix2cd m;
    m << complexd(c, 0), complexd(0, -s), complexd(0, -s), complexd(c, 0);
    return m;
}

Eigen::Matrix2cd ry(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    Eigen::Matrix2cd m;
    m << c, -s, s, c;
    return m;
}

Eigen::Matrix2cd rz(double theta) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = std::exp(complexd(0, -theta / 2));
    m(1, 1) = std::exp(complexd(0, theta / 2));
    return m;
}

Eigen::Matrix2cd zyz_unitary(double t1, double t2, double t3) {
    return rz(t1) * ry(t2) * rz(t3);
}

std::array<double, 3> zyz_angles(const Eigen::Matrix2cd& u) {
    // Normalize to SU(2), where W = [[alpha, -conj(beta)], [beta, conj(alpha)]]
    // with alpha = cos(t2/2) e^{-i(t1+t3)/2} and beta = sin(t2/2) e^{i(t1-t3)/2}.
    // Reading the phases off alpha and beta directly avoids the half-angle
    // branch ambiguity of ratio-based extraction.
    const complexd det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
    const Eigen::Matrix2cd w = u * std::exp(complexd(0, -0.5 * std::arg(det)));
    const double c = std::abs(w(0, 0));
    const double s = std::abs(w(1, 0));
    const double t2 = 2.0 * std::atan2(s, c);
    const double eps = 1e-14;
    const double sum = c < eps ? 0.0 : -2.0 * std::arg(w(0, 0));
    const double diff = s < eps ? 0.0 : 2.0 * std::arg(w(1, 0));
    return {0.5 * (sum + diff), t2, 0.5 * (sum - diff)};
}

const std::vector<Eigen::Matrix2cd>& clifford_1q_table() {
    static const std::vector<Eigen::Matrix2cd> table = [] {
        const complexd I(0, 1);
        Eigen::Matrix2cd h, s;
        h << 1, 1, 1, -1;
        h /= std::sqrt(2.0);
        s << 1, 0, 0, I;
        // Phase-invariant fingerprint of a unitary: the Bloch rotation it induces.
        auto fingerprint = [](const Eigen::Matrix2cd& u) {
            std::array<long long, 9> f{};
            int k = 0;
            for (int a = 1; a <= 3; ++a) {
                Eigen::Matrix2cd conj = u * pauli_1q(a) * u.adjoint();
                for (int b = 1; b <= 3; ++b) {
                    double v = 0.5 * (conj * pauli_1q(b)).trace().real();
                    f[k++] = std::llround(v * 1024.0);
                }
            }
            return f;
        };
        std::vector<Eigen::Matrix2cd> found;
        std::vector<std::array<long long, 9>> seen;
        std::vector<Eigen::Matrix2cd> frontier{Eigen::Matrix2cd::Identity()};
        found.push_back(frontier[0]);
        seen.push_back(fingerprint(frontier[0]));
        while (!frontier.empty() && found.size() < 24) {
            std::vector<Eigen::Matrix2cd> next;
            for (const auto& u : frontier) {
                for (const auto* g : {&h, &s}) {
                    Eigen::Matrix2cd v = (*g) * u;
                    auto fp = fingerprint(v);
                    bool known = false;
                    for (const auto& x : seen) known = known || (x == fp);
                    if (!known) {
                        seen.push_back(fp);
                        found.push_back(v);
                        next.push_back(v);
                    }
                }
            }
            frontier = std::move(next);
        }
        if (found.size() != 24) throw std::logic_error("clifford_1q_table: closure size != 24");
        return found;
    }();
    return table;
}

}  // namespace umc
