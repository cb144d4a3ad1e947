#pragma once

// Two-stage training: f1 fits the data, f2 fits the residual scaled by
// c = RMS(residual), and the pair is merged into one network f1 + c * f2.

#include "precml/net/boosted.hpp"
#include "precml/optim/train.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace precml {

struct StageConfig {
    std::vector<int> hidden{20, 20};
    std::string optimizer = "bfgs"; // "bfgs" or "adam"
    AdamConfig adam;
    BfgsConfig bfgs;
    std::uint64_t seed = 0;

    void validate() const {
        if (optimizer != "bfgs" && optimizer != "adam") throw std::invalid_argument("unknown stage optimizer '" + optimizer + "'");
        if (hidden.empty()) throw std::invalid_argument("boosting stages need at least one hidden layer");
        adam.validate();
        bfgs.validate();
    }
};

struct BoostConfig {
    Activation activation = Activation::tanh;
    StageConfig stage1;
    StageConfig stage2;
};

struct BoostResult {
    Mlp f1, f2, assembled;
    double c = 0.0;
    double stage1_rmse = 0.0;    // relative RMSE of f1 alone
    double composite_rmse = 0.0; // relative RMSE of f1 + c * f2, evaluated separately
    double assembled_rmse = 0.0; // relative RMSE of the merged network
    StopReason stage1_reason = StopReason::max_iters;
    StopReason stage2_reason = StopReason::max_iters;
    History history;             // phases "stage1", "stage2"; losses on the original targets
};

inline TrainResult train_stage(const StageConfig& cfg, Activation act, const Dataset& data, const std::string& phase) {
    cfg.validate();
    const Mlp init = init_for_targets(layer_dims_for(data.dim(), cfg.hidden), act, cfg.seed, data.targets);
    if (cfg.optimizer == "adam") return adam_minimize(init, data, cfg.adam, cfg.seed, phase);
    return bfgs_minimize(init, data, cfg.bfgs, phase);
}

inline double relative_rmse_of_preds(const Eigen::VectorXd& preds, const Eigen::VectorXd& targets) {
    return std::sqrt((preds - targets).squaredNorm() / targets.squaredNorm());
}

inline BoostResult boost_train(const Dataset& data, const BoostConfig& cfg) {
    if (cfg.stage1.hidden.size() != cfg.stage2.hidden.size())
        throw std::invalid_argument("boosting stages must have the same depth");
    BoostResult out;
    TrainResult s1 = train_stage(cfg.stage1, cfg.activation, data, "stage1");
    out.f1 = s1.net;
    out.stage1_reason = s1.reason;
    out.history = s1.history;
    const Eigen::VectorXd p1 = forward_batch(out.f1, data.inputs);
    out.stage1_rmse = relative_rmse_of_preds(p1, data.targets);

    const Eigen::VectorXd r = data.targets - p1;
    out.c = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
    if (out.c == 0.0) {
        // Nothing left to fit.
        out.f2 = Mlp(layer_dims_for(data.dim(), cfg.stage2.hidden), cfg.activation,
                     Eigen::VectorXd::Zero(param_count_for(layer_dims_for(data.dim(), cfg.stage2.hidden))));
        out.assembled = out.f1;
        out.composite_rmse = out.assembled_rmse = out.stage1_rmse;
        return out;
    }
    Dataset resid = data;
    resid.targets = r / out.c;
    TrainResult s2 = train_stage(cfg.stage2, cfg.activation, resid, "stage2");
    out.f2 = s2.net;
    out.stage2_reason = s2.reason;
    // Residual-scale losses map back to the original targets by c^2.
    const double power = data.targets.squaredNorm() / static_cast<double>(data.targets.size());
    const long offset = out.history.empty() ? 0 : out.history.back().step + 1;
    for (auto row : s2.history) {
        row.step += offset;
        row.mse *= out.c * out.c;
        row.rmse_rel = std::sqrt(row.mse / power);
        out.history.push_back(row);
    }
    const Eigen::VectorXd p2 = forward_batch(out.f2, data.inputs);
    out.composite_rmse = relative_rmse_of_preds(p1 + out.c * p2, data.targets);
    out.assembled = assemble_boosted(out.f1, out.f2, out.c);
    out.assembled_rmse = relative_rmse_of_preds(forward_batch(out.assembled, data.inputs), data.targets);
    return out;
}

} // namespace precml
