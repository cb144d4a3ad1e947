#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace precml {

/// sqrt(sum (p - y)^2 / sum y^2).
inline double relative_rmse(const Eigen::VectorXd& preds, const Eigen::VectorXd& targets) {
    if (preds.size() != targets.size()) throw std::invalid_argument("relative_rmse: length mismatch");
    if (targets.size() == 0) throw std::invalid_argument("relative_rmse: empty input");
    const double den = targets.squaredNorm();
    if (!(den > 0.0)) throw std::invalid_argument("relative_rmse: targets are all zero");
    return std::sqrt((preds - targets).squaredNorm() / den);
}

struct PowerLawFit {
    double alpha = 0.0;          // loss ~ exp(log_intercept) * N^-alpha
    double log_intercept = 0.0;
    double r_squared = 0.0;
    double floor_cutoff = 1e-13;
    int points_used = 0;
};

/// OLS of log(loss) on log(N) over the pairs with loss > floor.
inline PowerLawFit fit_power_law(std::span<const std::pair<double, double>> pairs, double floor = 1e-13) {
    std::vector<double> lx, ly;
    for (const auto& [n, loss] : pairs) {
        if (!(n > 0.0) || !(loss > 0.0) || !std::isfinite(n) || !std::isfinite(loss)) {
            if (std::isnan(loss)) continue; // flagged cells
            throw std::invalid_argument("fit_power_law: N and loss must be positive");
        }
        if (loss <= floor) continue;
        lx.push_back(std::log(n));
        ly.push_back(std::log(loss));
    }
    const std::size_t m = lx.size();
    if (m < 3) throw std::invalid_argument("fit_power_law: need at least 3 points above the floor, have " + std::to_string(m));
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) mx += lx[i], my += ly[i];
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = lx[i] - mx, dy = ly[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_power_law: all N are equal");
    PowerLawFit out;
    const double slope = sxy / sxx;
    out.alpha = -slope;
    out.log_intercept = my - slope * mx;
    out.r_squared = syy > 0.0 ? std::min(1.0, std::max(0.0, sxy * sxy / (sxx * syy))) : 1.0;
    out.floor_cutoff = floor;
    out.points_used = static_cast<int>(m);
    return out;
}

/// Terms of the empirical loss split, all as relative RMSE. The reference
/// is a constructed model from the same architecture class (when one is
/// known), standing in for the best achievable model.
struct LossBreakdown {
    double train_loss = 0.0;
    double test_loss = 0.0;
    double generalization_gap_est = 0.0;
    std::optional<double> reference_loss;
    std::optional<double> optimization_error_est;
    std::string reference;                        // what the reference is, empty when unavailable
};

inline LossBreakdown loss_decomposition_report(double train_loss, double test_loss, std::optional<double> reference_loss,
                                               std::string reference = {}) {
    LossBreakdown b;
    b.train_loss = train_loss;
    b.test_loss = test_loss;
    b.generalization_gap_est = test_loss - train_loss;
    if (reference_loss) {
        b.reference_loss = reference_loss;
        b.optimization_error_est = train_loss - *reference_loss;
        b.reference = reference.empty() ? "reference" : std::move(reference);
    }
    return b;
}

} // namespace precml
