#pragma once

#include "precml/targets/dataset.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace precml {

/// True for rows at least margin_fraction * (hi - lo) away from both bounds
/// in every dimension. Used to keep test points off the hull boundary.
inline std::vector<bool> interior_mask(const Domain& domain, double margin_fraction, const Eigen::MatrixXd& points) {
    if (!(margin_fraction >= 0.0 && margin_fraction < 0.5))
        throw std::invalid_argument("margin_fraction must lie in [0, 0.5)");
    if (points.cols() != domain.dim()) throw std::invalid_argument("point dimension does not match the domain");
    std::vector<bool> keep(static_cast<std::size_t>(points.rows()), true);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (int j = 0; j < domain.dim(); ++j) {
            const double lo = domain.lo[static_cast<std::size_t>(j)];
            const double hi = domain.hi[static_cast<std::size_t>(j)];
            const double m = margin_fraction * (hi - lo);
            if (points(i, j) - lo < m || hi - points(i, j) < m) {
                keep[static_cast<std::size_t>(i)] = false;
                break;
            }
        }
    }
    return keep;
}

/// Rows of `data` selected by `mask`.
inline Dataset select_rows(const Dataset& data, const std::vector<bool>& mask) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) idx.push_back(static_cast<Eigen::Index>(i));
    Dataset out;
    out.seed = data.seed;
    out.domain = data.domain;
    out.inputs.resize(static_cast<Eigen::Index>(idx.size()), data.inputs.cols());
    out.targets.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.inputs.row(static_cast<Eigen::Index>(r)) = data.inputs.row(idx[r]);
        out.targets(static_cast<Eigen::Index>(r)) = data.targets(idx[r]);
    }
    return out;
}

} // namespace precml
