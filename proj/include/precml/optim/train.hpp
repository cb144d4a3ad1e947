#pragma once

// Mlp/Dataset front ends for the optimizers.

#include "precml/net/mlp.hpp"
#include "precml/optim/adam.hpp"
#include "precml/optim/bfgs.hpp"
#include "precml/optim/subspace.hpp"

#include <string>
#include <utility>

namespace precml {

struct TrainResult {
    Mlp net;
    History history;
    StopReason reason = StopReason::max_iters;
    long iterations = 0;
};

namespace detail {

inline TrainResult wrap(const Mlp& shape, OptimResult r) {
    return {shape.with_params(std::move(r.theta)), std::move(r.history), r.reason, r.iterations};
}

} // namespace detail

/// mlp_init with the output bias set to the mean target, so training starts
/// from the best constant predictor.
inline Mlp init_for_targets(std::vector<int> dims, Activation act, std::uint64_t seed, const Eigen::VectorXd& targets) {
    Mlp net = mlp_init(std::move(dims), act, seed);
    Eigen::VectorXd p = net.params();
    p(p.size() - 1) = targets.size() > 0 ? targets.mean() : 0.0;
    return net.with_params(std::move(p));
}

inline TrainResult adam_minimize(const Mlp& net, const Dataset& data, const AdamConfig& cfg, std::uint64_t seed,
                                 const std::string& phase = "adam") {
    return detail::wrap(net, adam_minimize(MseObjective(net, data), net.params(), cfg, seed, phase));
}

inline TrainResult bfgs_minimize(const Mlp& net, const Dataset& data, const BfgsConfig& cfg, const std::string& phase = "bfgs") {
    return detail::wrap(net, bfgs_minimize(MseObjective(net, data), net.params(), cfg, phase));
}

inline TrainResult low_curvature_minimize(const Mlp& net, const Dataset& data, const SubspaceConfig& cfg,
                                          const std::string& phase = "subspace") {
    return detail::wrap(net, low_curvature_minimize(MseObjective(net, data), net.params(), cfg, phase));
}

} // namespace precml
