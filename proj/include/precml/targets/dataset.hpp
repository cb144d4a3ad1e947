#pragma once

#include "precml/core/random.hpp"
#include "precml/targets/expression.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace precml {

/// Axis-aligned sampling box.
struct Domain {
    std::vector<double> lo;
    std::vector<double> hi;

    static Domain cube(int dim, double lo, double hi) {
        return Domain{std::vector<double>(static_cast<std::size_t>(dim), lo),
                      std::vector<double>(static_cast<std::size_t>(dim), hi)};
    }

    int dim() const { return static_cast<int>(lo.size()); }

    void validate() const {
        if (lo.empty() || lo.size() != hi.size()) throw std::invalid_argument("domain bounds have mismatched lengths");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) throw std::invalid_argument("domain requires lo < hi in every dimension");
    }

    bool contains(std::span<const double> x) const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
};

/// Inputs are stored one sample per row.
struct Dataset {
    Eigen::MatrixXd inputs;
    Eigen::VectorXd targets;
    std::uint64_t seed = 0;
    Domain domain;

    Eigen::Index size() const { return inputs.rows(); }
    int dim() const { return static_cast<int>(inputs.cols()); }
};

/// Per-dimension affine map to zero mean and unit (population) variance.
struct NormStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& inputs) const {
        return ((inputs.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array()).matrix();
    }
    Eigen::MatrixXd invert(const Eigen::MatrixXd& normalized) const {
        return ((normalized.array().rowwise() * std.transpose().array()).rowwise() + mean.transpose().array())
            .matrix();
    }
};

/// Evaluates `spec` on every row of `inputs`.
inline Eigen::VectorXd eval_rows(const TargetSpec& spec, const Eigen::MatrixXd& inputs) {
    Eigen::VectorXd out(inputs.rows());
    std::vector<double> x(static_cast<std::size_t>(inputs.cols()));
    std::vector<double> scratch(spec.graph.size());
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
        for (Eigen::Index j = 0; j < inputs.cols(); ++j) x[static_cast<std::size_t>(j)] = inputs(i, j);
        out(i) = eval_target(spec, x, scratch);
    }
    return out;
}

/// Draws n i.i.d. points uniformly from the domain box. Same seed, same bits.
inline Dataset sample_dataset(const TargetSpec& spec, const Domain& domain, Eigen::Index n, std::uint64_t seed) {
    domain.validate();
    if (n < 1) throw std::invalid_argument("sample_dataset needs n >= 1");
    if (domain.dim() != spec.dim) throw std::invalid_argument("domain dimension does not match target dimension");
    Rng rng(seed);
    Dataset data;
    data.seed = seed;
    data.domain = domain;
    data.inputs.resize(n, spec.dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < spec.dim; ++j)
            data.inputs(i, j) = uniform(rng, domain.lo[static_cast<std::size_t>(j)], domain.hi[static_cast<std::size_t>(j)]);
    data.targets = eval_rows(spec, data.inputs);
    return data;
}

inline NormStats compute_norm_stats(const Eigen::MatrixXd& inputs) {
    if (inputs.rows() < 2) throw std::invalid_argument("normalization needs at least two samples");
    NormStats s;
    s.mean = inputs.colwise().mean().transpose();
    s.std = ((inputs.rowwise() - s.mean.transpose()).array().square().colwise().mean().sqrt()).transpose();
    for (Eigen::Index j = 0; j < s.std.size(); ++j)
        if (!(s.std(j) > 0.0))
            throw std::invalid_argument("zero-variance input dimension " + std::to_string(j));
    return s;
}

inline std::pair<Dataset, NormStats> normalize_inputs(const Dataset& data) {
    NormStats s = compute_norm_stats(data.inputs);
    Dataset out = data;
    out.inputs = s.apply(data.inputs);
    return {std::move(out), std::move(s)};
}

} // namespace precml
