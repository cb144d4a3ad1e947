#pragma once

// Descent restricted to the span of Hessian eigenvectors whose eigenvalue is
// below tau, with a derivative-free line search.

#include "precml/net/mlp.hpp"
#include "precml/optim/adam.hpp"
#include "precml/optim/eigen.hpp"
#include "precml/optim/history.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace precml {

struct SubspaceConfig {
    double tau = 1e-16;
    long max_steps = 10;
    int scan_min_exp = -40;   // t is first scanned over 2^k for k in [min, max]
    int scan_max_exp = 120;
    int golden_iters = 60;
    double hessian_step = 1e-5; // finite differences, for objectives without an exact Hessian

    void validate() const {
        if (!std::isfinite(tau)) throw std::invalid_argument("subspace: tau must be finite");
        if (max_steps < 0 || golden_iters < 0) throw std::invalid_argument("subspace: bad limits");
        if (scan_min_exp > scan_max_exp || scan_min_exp < -1000 || scan_max_exp > 1000)
            throw std::invalid_argument("subspace: bad scan range");
        if (!(hessian_step > 0.0)) throw std::invalid_argument("subspace: hessian_step must be positive");
    }
};

/// g projected onto eigenvectors with eigenvalue < tau.
inline Eigen::VectorXd project_low_curvature(const EigenSystem& es, const Eigen::VectorXd& g, double tau) {
    Eigen::Index k = 0;
    while (k < es.values.size() && es.values(k) < tau) ++k; // values ascend
    if (k == 0) return Eigen::VectorXd::Zero(g.size());
    const auto basis = es.vectors.leftCols(k);
    return basis * (basis.transpose() * g);
}

struct GoldenResult {
    double t = 0.0;
    double f = 0.0;
    int evals = 0;
};

/// Minimizes phi over t > 0 without derivatives. phi is scanned on the
/// powers of two 2^min_exp .. 2^max_exp, then golden-section refines in
/// [t/2, 2t] around the best scanned t. The scan matters near the precision
/// floor: the decrease at t ~ 1 is often below the loss rounding noise, so a
/// local bracket started there locks onto noise. Returns t = 0 when nothing
/// beats phi0.
template <class Phi>
GoldenResult scan_golden_search(const Phi& phi, double phi0, int min_exp, int max_exp, int golden_iters) {
    GoldenResult out;
    out.f = phi0;
    auto eval = [&](double t) {
        ++out.evals;
        const double v = phi(t);
        if (std::isfinite(v) && v < out.f) {
            out.f = v;
            out.t = t;
        }
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    for (int k = min_exp; k <= max_exp; ++k) eval(std::ldexp(1.0, k));
    if (!(out.t > 0.0)) return out;
    constexpr double r = 0.6180339887498949; // (sqrt(5) - 1) / 2
    double a = 0.5 * out.t, b = 2.0 * out.t;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int i = 0; i < golden_iters; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = eval(x2);
        }
    }
    return out;
}

namespace detail {

// Exact Hessian when the objective has one, else central differences of the
// gradient. Eigenvalues near tau = 1e-16 are only meaningful in the former.
template <class Objective>
Eigen::MatrixXd subspace_hessian(const Objective& f, const Eigen::VectorXd& theta, double hessian_step) {
    if constexpr (requires { f.exact_hessian(theta); }) {
        const Eigen::MatrixXd h = f.exact_hessian(theta);
        return 0.5 * (h + h.transpose());
    } else {
        return fd_hessian(f, theta, hessian_step);
    }
}

} // namespace detail

/// Repeats: Hessian at theta (exact if available), eigendecomposition, step
/// along -g_hat chosen by scan_golden_search. Steps are accepted only if
/// they lower the loss, so the history never increases.
template <class Objective>
OptimResult low_curvature_minimize(const Objective& f, Eigen::VectorXd theta, const SubspaceConfig& cfg,
                                   const std::string& phase = "subspace") {
    cfg.validate();
    OptimResult res;
    Eigen::VectorXd g(theta.size());
    double fx = f(theta, &g);
    if (!std::isfinite(fx) || !g.allFinite()) throw NonFiniteLoss(phase, 0);
    res.history.push_back({0, fx, detail::relative_rmse_of(f, fx), phase});
    res.reason = StopReason::max_iters;
    long step = 0;
    for (; step < cfg.max_steps; ++step) {
        const EigenSystem es = sym_eigendecompose(detail::subspace_hessian(f, theta, cfg.hessian_step));
        const Eigen::VectorXd gh = project_low_curvature(es, g, cfg.tau);
        if (!(gh.norm() > 0.0) || gh.norm() <= 1e-300) {
            res.reason = StopReason::subspace_converged;
            break;
        }
        Eigen::VectorXd trial(theta.size());
        auto phi = [&](double t) {
            trial = theta - t * gh;
            return f(trial, nullptr);
        };
        const GoldenResult gr = scan_golden_search(phi, fx, cfg.scan_min_exp, cfg.scan_max_exp, cfg.golden_iters);
        if (!(gr.t > 0.0 && gr.f < fx)) {
            res.reason = StopReason::stall;
            break;
        }
        theta -= gr.t * gh;
        fx = f(theta, &g);
        if (!std::isfinite(fx) || !g.allFinite()) throw NonFiniteLoss(phase, step + 1);
        res.history.push_back({step + 1, fx, detail::relative_rmse_of(f, fx), phase});
    }
    res.iterations = step;
    res.theta = std::move(theta);
    return res;
}

} // namespace precml
