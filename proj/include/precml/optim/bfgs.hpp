#pragma once

// Dense BFGS on the inverse Hessian with a strong-Wolfe line search.

#include "precml/optim/adam.hpp"
#include "precml/optim/history.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace precml {

struct BfgsConfig {
    long max_iters = 100000;
    double grad_tol = 1e-12;      // on the max-norm of the gradient
    double c1 = 1e-4;
    double c2 = 0.9;
    int max_line_evals = 60;
    double max_seconds = 0.0;     // 0 means no wall-clock budget; hitting it reports max_iters

    void validate() const {
        if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) throw std::invalid_argument("bfgs: need 0 < c1 < c2 < 1");
        if (max_iters < 0 || max_line_evals < 2) throw std::invalid_argument("bfgs: bad iteration limits");
        if (!(grad_tol >= 0.0)) throw std::invalid_argument("bfgs: grad_tol must be non-negative");
    }
};

struct LineSearchResult {
    bool ok = false;
    double t = 0.0;
    double f = 0.0;
    Eigen::VectorXd g;
    int evals = 0;
};

namespace detail {

// Minimizer of the cubic through (a, fa, da) and (b, fb, db); NaN if none.
inline double cubic_min(double a, double fa, double da, double b, double fb, double db) {
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

} // namespace detail

/// Strong-Wolfe search along `dir` (bracketing phase then zoom). Returns
/// ok = false when no point meeting both conditions is found within
/// `max_evals` evaluations.
template <class Objective>
LineSearchResult strong_wolfe_search(const Objective& f, const Eigen::VectorXd& x, double f0, double slope0,
                                     const Eigen::VectorXd& dir, double t_init, double c1, double c2, int max_evals) {
    LineSearchResult out;
    if (!(slope0 < 0.0)) return out;
    Eigen::VectorXd xt(x.size()), gt(x.size());
    auto eval = [&](double t, double& ft, double& st) {
        xt = x + t * dir;
        ft = f(xt, &gt);
        st = gt.dot(dir);
        ++out.evals;
    };
    auto accept = [&](double t, double ft) {
        out.ok = true;
        out.t = t;
        out.f = ft;
        out.g = gt;
        return out;
    };
    // Strict decrease as well: near the precision floor f0 + c1*t*slope0 can round to f0.
    auto armijo = [&](double t, double ft) { return ft < f0 && ft <= f0 + c1 * t * slope0; };
    auto curvature = [&](double st) { return std::abs(st) <= -c2 * slope0; };

    auto zoom = [&](double lo, double flo, double slo, double hi, double fhi, double shi) -> LineSearchResult {
        while (out.evals < max_evals) {
            const double width = hi - lo;
            if (std::abs(width) <= 1e-16 * std::max(std::abs(lo), std::abs(hi))) break;
            double t = detail::cubic_min(lo, flo, slo, hi, fhi, shi);
            const double a = std::min(lo, hi), b = std::max(lo, hi), margin = 0.1 * (b - a);
            if (!std::isfinite(t) || t < a + margin || t > b - margin) t = 0.5 * (lo + hi);
            double ft, st;
            eval(t, ft, st);
            if (!std::isfinite(ft)) {
                hi = t, fhi = ft, shi = st;
                continue;
            }
            if (!armijo(t, ft) || ft >= flo) {
                hi = t, fhi = ft, shi = st;
            } else {
                if (curvature(st)) return accept(t, ft);
                if (st * (hi - lo) >= 0.0) hi = lo, fhi = flo, shi = slo;
                lo = t, flo = ft, slo = st;
            }
        }
        return out;
    };

    double t_prev = 0.0, f_prev = f0, s_prev = slope0;
    double t = t_init;
    for (int i = 0; out.evals < max_evals; ++i) {
        double ft, st;
        eval(t, ft, st);
        if (!std::isfinite(ft) || !armijo(t, ft) || (i > 0 && ft >= f_prev)) {
            if (!std::isfinite(ft)) {
                // Step far too long: shrink without bracketing against a NaN.
                t = t_prev + 0.1 * (t - t_prev);
                continue;
            }
            return zoom(t_prev, f_prev, s_prev, t, ft, st);
        }
        if (curvature(st)) return accept(t, ft);
        if (st >= 0.0) return zoom(t, ft, st, t_prev, f_prev, s_prev);
        t_prev = t, f_prev = ft, s_prev = st;
        t *= 2.0;
    }
    return out;
}

/// Full-batch BFGS. Stops on grad_tol, max_iters, or stall: no strong-Wolfe
/// point is found even after resetting the inverse Hessian to a scaled
/// identity, which in practice means the loss can no longer be reduced at
/// working precision.
template <class Objective>
OptimResult bfgs_minimize(const Objective& f, Eigen::VectorXd theta, const BfgsConfig& cfg, const std::string& phase = "bfgs") {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const Eigen::Index n = theta.size();
    OptimResult res;
    Eigen::VectorXd g(n);
    double fx = f(theta, &g);
    if (!std::isfinite(fx) || !g.allFinite()) throw NonFiniteLoss(phase, 0);
    res.history.push_back({0, fx, detail::relative_rmse_of(f, fx), phase});

    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n); // lower triangle is authoritative
    bool identity = true;                                 // h is still a (scaled) identity
    double h_scale = 1.0;
    Eigen::VectorXd dir(n), s(n), y(n), hy(n);
    res.reason = StopReason::max_iters;
    long it = 0;
    for (; it < cfg.max_iters; ++it) {
        if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) {
            res.reason = StopReason::grad_tol;
            break;
        }
        if (cfg.max_seconds > 0.0 &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() > cfg.max_seconds)
            break;

        LineSearchResult ls;
        for (int attempt = 0; attempt < 2; ++attempt) {
            if (identity) dir = -h_scale * g;
            else dir.noalias() = -(h.selfadjointView<Eigen::Lower>() * g);
            const double slope = g.dot(dir);
            if (slope < 0.0) {
                const double t0 = (it == 0 && attempt == 0) ? std::min(1.0, 1.0 / g.norm()) : 1.0;
                ls = strong_wolfe_search(f, theta, fx, slope, dir, t0, cfg.c1, cfg.c2, cfg.max_line_evals);
                if (ls.ok || identity) break;
            }
            identity = true; // retry once along the scaled gradient
        }
        if (!ls.ok) {
            res.reason = StopReason::stall;
            break;
        }
        s = ls.t * dir;
        y = ls.g - g;
        theta += s;
        fx = ls.f;
        g = ls.g;
        if (!std::isfinite(fx) || !g.allFinite()) throw NonFiniteLoss(phase, it + 1);
        res.history.push_back({it + 1, fx, detail::relative_rmse_of(f, fx), phase});

        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm()) {
            if (identity) {
                // Nocedal & Wright's scaling of the initial matrix, then one update.
                h_scale = sy / y.squaredNorm();
                h.setIdentity();
                h *= h_scale;
                identity = false;
            }
            const double rho = 1.0 / sy;
            hy.noalias() = h.selfadjointView<Eigen::Lower>() * y;
            const double yhy = y.dot(hy);
            h.selfadjointView<Eigen::Lower>().rankUpdate(s, hy, -rho);
            h.selfadjointView<Eigen::Lower>().rankUpdate(s, rho * rho * yhy + rho);
        }
    }
    res.iterations = it;
    res.theta = std::move(theta);
    return res;
}

} // namespace precml
