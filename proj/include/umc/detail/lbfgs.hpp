#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>

namespace umc::detail {

// Limited-memory BFGS with backtracking Armijo line search. The caller
// supplies the objective and its gradient (typically finite differences with
// problem-specific caching); this file knows nothing about channels.

struct LbfgsOptions {
    int max_iters = 400;
    int memory = 10;
    double grad_tol = 1e-9;    // infinity norm of the gradient
    double step_tol = 1e-13;   // relative step size
    double f_tol = 1e-16;      // relative objective improvement
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0;
    int iterations = 0;
    bool converged = false;
};

template <typename FnVal, typename FnGrad>
LbfgsResult lbfgs_minimize(FnVal&& value, FnGrad&& gradient, Eigen::VectorXd x,
                           const LbfgsOptions& opts = {}) {
    const Eigen::Index n = x.size();
    LbfgsResult out;
    double f = value(x);
    Eigen::VectorXd g(n);
    gradient(x, g);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int it = 0; it < opts.max_iters; ++it) {
        out.iterations = it;
        if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
            out.converged = true;
            break;
        }

        // Two-loop recursion for the search direction.
        Eigen::VectorXd q = g;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd dir = -q;
        double slope = g.dot(dir);
        if (slope >= 0) {  // not a descent direction; reset to steepest descent
            dir = -g;
            slope = -g.squaredNorm();
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        double step = 1.0;
        double f_new = f;
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int bt = 0; bt < 50; ++bt) {
            x_new = x + step * dir;
            f_new = value(x_new);
            if (f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            out.converged = g.lpNorm<Eigen::Infinity>() <= 1e3 * opts.grad_tol;
            break;
        }

        Eigen::VectorXd g_new(n);
        gradient(x_new, g_new);
        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {  // curvature condition
            s_hist.push_back(s);
            y_hist.push_back(yv);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        const double df = f - f_new;
        const double sn = s.norm();
        x = std::move(x_new);
        f = f_new;
        g = std::move(g_new);
        if (sn <= opts.step_tol * std::max(1.0, x.norm()) ||
            df <= opts.f_tol * std::max(1.0, std::abs(f))) {
            out.converged = true;
            break;
        }
    }

    out.x = std::move(x);
    out.f = f;
    return out;
}

}  // namespace umc::detail
