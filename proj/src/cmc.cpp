#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "umc/approx.hpp"
#include "umc/detail/simplex.hpp"
#include "umc/dnorm.hpp"
#include "umc/errors.hpp"
#include "umc/pauli.hpp"
#include "umc/qcore.hpp"

namespace umc {

namespace {

Superoperator reset_channel(const Eigen::Vector2cd& state) {
    // E(rho) = Tr(rho) sigma has transfer matrix sqrt(2) v e0^T where v is
    // the Pauli vector of sigma.
    DensityMatrix sigma{1, Eigen::Matrix2cd(state * state.adjoint())};
    const Eigen::VectorXd v = pauli_vector(sigma);
    Eigen::MatrixXd ptm = Eigen::MatrixXd::Zero(4, 4);
    ptm.col(0) = std::sqrt(2.0) * v;
    return {1, std::move(ptm)};
}

// Euclidean projection onto the probability simplex. tau is the threshold of
// the largest k with u_(k) > (sum of the k+1 largest - 1)/(k+1).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumsum = 0;
    double rho_sum = 1;
    int rho = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        cumsum += u[k];
        if (u[k] > (cumsum - 1.0) / static_cast<double>(k + 1)) {
            rho = static_cast<int>(k);
            rho_sum = cumsum;
        }
    }
    const double tau = (rho_sum - 1.0) / (rho + 1);
    return (v.array() - tau).max(0.0);
}

}  // namespace

const std::vector<Eigen::Vector2cd>& cmc_reset_states() {
    static const std::vector<Eigen::Vector2cd> states = [] {
        const double s = 1.0 / std::sqrt(2.0);
        const complexd i01(0, 1);
        return std::vector<Eigen::Vector2cd>{
            {1, 0}, {0, 1}, {s, s}, {s, -s}, {s, i01 * s}, {s, -i01 * s}};
    }();
    return states;
}

const std::vector<Superoperator>& cmc_channel_set() {
    static const std::vector<Superoperator> set = [] {
        std::vector<Superoperator> out;
        for (const auto& u : clifford_1q_table()) out.push_back(unitary_to_ptm(u));
        for (const auto& st : cmc_reset_states()) out.push_back(reset_channel(st));
        return out;
    }();
    return set;
}

const std::vector<std::string>& cmc_channel_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (int i = 0; i < 24; ++i) out.push_back("clifford_" + std::to_string(i));
        out.insert(out.end(), {"reset_0", "reset_1", "reset_plus", "reset_minus",
                               "reset_plus_i", "reset_minus_i"});
        return out;
    }();
    return names;
}

Superoperator CmcDecomposition::to_ptm() const {
    const auto& set = cmc_channel_set();
    Eigen::MatrixXd ptm = Eigen::MatrixXd::Zero(4, 4);
    for (std::size_t i = 0; i < p.size(); ++i) ptm += p[i] * set[i].ptm;
    return {1, std::move(ptm)};
}

CmcDecomposition decompose_cmc(const Superoperator& target, const DecomposeOptions&) {
    if (target.n_qubits != 1)
        throw ValidationError("decompose_cmc: the dictionary is single-qubit only");
    if (!validate_cptp(target).ok())
        throw ValidationError("decompose_cmc: target is not CPTP");

    const auto& set = cmc_channel_set();
    const int n = static_cast<int>(set.size());
    Eigen::MatrixXd a(16, n);
    for (int i = 0; i < n; ++i)
        a.col(i) = Eigen::Map<const Eigen::VectorXd>(set[i].ptm.data(), 16);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(target.ptm.data(), 16);

    const Eigen::MatrixXd g = a.transpose() * a;
    const Eigen::VectorXd c = a.transpose() * b;
    auto objective = [&](const Eigen::VectorXd& p) {
        return (a * p - b).squaredNorm();
    };

    // Accelerated projected gradient to get near the solution.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    const double lip = 2.0 * es.eigenvalues().maxCoeff();
    Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 1.0 / n);
    Eigen::VectorXd y = p;
    double t = 1.0;
    for (int it = 0; it < 5000; ++it) {
        const Eigen::VectorXd grad = 2.0 * (g * y - c);
        Eigen::VectorXd p_new = project_simplex(y - grad / lip);
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = p_new + ((t - 1.0) / t_new) * (p_new - p);
        const double move = (p_new - p).lpNorm<Eigen::Infinity>();
        p = std::move(p_new);
        t = t_new;
        if (move < 1e-14) break;
    }

    // Active-set polish: solve the equality-constrained problem on the
    // current support, dropping negative entries and admitting dictionary
    // members whose multiplier is strictly attractive, until the KKT
    // conditions hold. The dictionary has affine dependencies, so the KKT
    // system is solved in the least-norm sense.
    std::vector<bool> active(n, false);
    for (int i = 0; i < n; ++i) active[i] = p(i) > 1e-10;
    Eigen::VectorXd best_p = p;
    double best_f = objective(p);
    bool kkt_ok = false;

    for (int round = 0; round < 120 && !kkt_ok; ++round) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (active[i]) idx.push_back(i);
        if (idx.empty()) break;
        const int m = static_cast<int>(idx.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
        Eigen::VectorXd rhs(m + 1);
        for (int r = 0; r < m; ++r) {
            for (int s2 = 0; s2 < m; ++s2) kkt(r, s2) = 2.0 * g(idx[r], idx[s2]);
            kkt(r, m) = 1.0;
            kkt(m, r) = 1.0;
            rhs(r) = 2.0 * c(idx[r]);
        }
        rhs(m) = 1.0;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
        const Eigen::VectorXd sol = cod.solve(rhs);

        int most_negative = -1;
        double most_negative_value = -1e-12;
        for (int r = 0; r < m; ++r) {
            if (sol(r) < most_negative_value) {
                most_negative_value = sol(r);
                most_negative = idx[r];
            }
        }
        if (most_negative >= 0) {
            active[most_negative] = false;
            continue;
        }

        Eigen::VectorXd cand = Eigen::VectorXd::Zero(n);
        for (int r = 0; r < m; ++r) cand(idx[r]) = std::max(sol(r), 0.0);
        cand /= cand.sum();
        const double nu = sol(m);

        // Dual feasibility: inactive members must not be attractive.
        const Eigen::VectorXd grad = 2.0 * (g * cand - c);
        int entering = -1;
        double worst = -1e-8 * std::max(1.0, grad.lpNorm<Eigen::Infinity>());
        for (int i = 0; i < n; ++i) {
            if (active[i]) continue;
            const double margin = grad(i) - nu;
            if (margin < worst) {
                worst = margin;
                entering = i;
            }
        }
        if (entering >= 0) {
            active[entering] = true;
            continue;
        }

        kkt_ok = true;
        const double f = objective(cand);
        if (f <= best_f + 1e-15) {
            best_f = f;
            best_p = std::move(cand);
        }
    }

    CmcDecomposition out;
    out.p.assign(best_p.data(), best_p.data() + n);
    detail::renormalize_exact(out.p);
    out.surrogate_value = best_f;
    out.converged = kkt_ok;
    Superoperator mix = out.to_ptm();
    out.achieved_distance = diamond_norm_sdp({1, mix.ptm - target.ptm}).value;
    return out;
}

}  // namespace umc
