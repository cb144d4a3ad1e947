#pragma once

#include "precml/core/random.hpp"
#include "precml/net/mlp.hpp"
#include "precml/optim/history.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace precml {

namespace detail {

template <class F>
double relative_rmse_of(const F& f, double mse) {
    if constexpr (requires { f.relative_rmse(mse); }) return f.relative_rmse(mse);
    else return std::sqrt(mse);
}

} // namespace detail

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long steps = 20000;
    long batch_size = 0;      // 0 selects min(|D|, 10^4)
    long record_every = 100;  // full-data loss is logged this often
    double max_seconds = 0.0; // 0 means no wall-clock budget

    void validate() const {
        if (!(lr > 0.0)) throw std::invalid_argument("adam: lr must be positive");
        if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
            throw std::invalid_argument("adam: betas must lie in [0, 1)");
        if (!(eps > 0.0)) throw std::invalid_argument("adam: eps must be positive");
        if (steps < 0 || batch_size < 0 || record_every <= 0) throw std::invalid_argument("adam: bad step counts");
        if (!(max_seconds >= 0.0)) throw std::invalid_argument("adam: max_seconds must be non-negative");
    }

    long effective_batch(long n) const { return batch_size > 0 ? std::min(batch_size, n) : std::min<long>(n, 10000); }
};

struct OptimResult {
    Eigen::VectorXd theta;
    History history;
    StopReason reason = StopReason::max_iters;
    long iterations = 0;
};

/// Adam with bias correction on minibatch losses. Each epoch visits the data
/// in a fresh seeded permutation. The objective must provide
/// `operator()(theta, grad*)`, `batch(theta, rows, grad*)` and `size()`.
template <class Objective>
OptimResult adam_minimize(const Objective& f, Eigen::VectorXd theta, const AdamConfig& cfg, std::uint64_t seed,
                          const std::string& phase = "adam") {
    cfg.validate();
    const long n = static_cast<long>(f.size());
    const long bs = cfg.effective_batch(n);
    Rng rng(seed);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    long cursor = n; // forces a shuffle before the first batch

    OptimResult res;
    const Eigen::Index dim = theta.size();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(dim), v = Eigen::VectorXd::Zero(dim), g(dim);
    auto record = [&](long step) {
        const double mse = f(theta, nullptr);
        if (!std::isfinite(mse)) throw NonFiniteLoss(phase, step);
        res.history.push_back({step, mse, detail::relative_rmse_of(f, mse), phase});
    };
    record(0);
    double b1t = 1.0, b2t = 1.0;
    const auto start = std::chrono::steady_clock::now();
    long step = 1;
    for (; step <= cfg.steps; ++step) {
        if (cfg.max_seconds > 0.0 && step % 64 == 0 &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() > cfg.max_seconds)
            break;
        if (cursor + bs > n) {
            shuffle(std::span<Eigen::Index>(order), rng);
            cursor = 0;
        }
        const double loss = f.batch(theta, std::span<const Eigen::Index>(order.data() + cursor, static_cast<std::size_t>(bs)), &g);
        cursor += bs;
        if (!std::isfinite(loss) || !g.allFinite()) throw NonFiniteLoss(phase, step);
        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseAbs2();
        const double a = cfg.lr / (1.0 - b1t);
        const double c2 = 1.0 / std::sqrt(1.0 - b2t);
        theta.array() -= a * m.array() / ((v.array().sqrt() * c2) + cfg.eps);
        if (step % cfg.record_every == 0 || step == cfg.steps) record(step);
    }
    res.iterations = step - 1; // below cfg.steps only when the time budget ran out
    if (res.iterations < cfg.steps && res.history.back().step != res.iterations) record(res.iterations);
    res.theta = std::move(theta);
    res.reason = StopReason::max_iters;
    return res;
}

} // namespace precml
