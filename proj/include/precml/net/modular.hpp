#pragma once

// Modular networks: the target's computation graph with every non-leaf node
// replaced by its own small MLP.

#include "precml/core/random.hpp"
#include "precml/net/mlp.hpp"
#include "precml/targets/expression.hpp"

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace precml {

struct ModularNet {
    TargetSpec graph;
    std::vector<Mlp> subnets;
    std::vector<int> subnet_of_node; // -1 for var/const leaves

    Eigen::Index param_count() const {
        Eigen::Index n = 0;
        for (const auto& s : subnets) n += s.param_count();
        return n;
    }

    Eigen::VectorXd params() const {
        Eigen::VectorXd p(param_count());
        Eigen::Index off = 0;
        for (const auto& s : subnets) {
            p.segment(off, s.param_count()) = s.params();
            off += s.param_count();
        }
        return p;
    }

    ModularNet with_params(const Eigen::VectorXd& p) const {
        if (p.size() != param_count()) throw std::invalid_argument("modular net: parameter length mismatch");
        ModularNet out = *this;
        Eigen::Index off = 0;
        for (auto& s : out.subnets) {
            s = s.with_params(p.segment(off, s.param_count()));
            off += s.param_count();
        }
        return out;
    }
};

/// One independently initialized subnet per non-leaf node; `subnet_dims[k]`
/// gives the full layer dims of the k-th non-leaf node (in graph order) and
/// must start with that node's arity and end with 1.
inline ModularNet modular_net_build(const TargetSpec& graph, const std::vector<std::vector<int>>& subnet_dims,
                                    Activation activation, std::uint64_t seed) {
    graph.validate();
    ModularNet net;
    net.graph = graph;
    net.subnet_of_node.assign(graph.graph.size(), -1);
    Rng seeds(seed);
    std::size_t k = 0;
    for (std::size_t i = 0; i < graph.graph.size(); ++i) {
        const int arity = op_arity(graph.graph[i].op);
        if (arity == 0) continue;
        if (k >= subnet_dims.size()) throw std::invalid_argument("fewer subnet shapes than non-leaf nodes");
        const auto& dims = subnet_dims[k];
        if (dims.empty() || dims.front() != arity)
            throw std::invalid_argument("subnet " + std::to_string(k) + " input width does not match node arity " +
                                        std::to_string(arity));
        net.subnet_of_node[i] = static_cast<int>(net.subnets.size());
        net.subnets.push_back(mlp_init(dims, activation, seeds()));
        ++k;
    }
    if (k != subnet_dims.size()) throw std::invalid_argument("more subnet shapes than non-leaf nodes");
    return net;
}

/// Same hidden widths for every subnet.
inline ModularNet modular_net_build(const TargetSpec& graph, std::span<const int> hidden, Activation activation,
                                    std::uint64_t seed) {
    std::vector<std::vector<int>> dims;
    for (const auto& n : graph.graph) {
        const int arity = op_arity(n.op);
        if (arity > 0) dims.push_back(layer_dims_for(arity, hidden));
    }
    return modular_net_build(graph, dims, activation, seed);
}

inline double forward(const ModularNet& net, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.graph.dim) throw std::invalid_argument("modular forward: dimension mismatch");
    std::vector<double> val(net.graph.graph.size());
    for (std::size_t i = 0; i < net.graph.graph.size(); ++i) {
        const Node& n = net.graph.graph[i];
        if (n.op == Op::var) val[i] = x[static_cast<std::size_t>(n.var)];
        else if (n.op == Op::constant) val[i] = n.value;
        else {
            std::vector<double> in;
            for (int j = 0; j < op_arity(n.op); ++j) in.push_back(val[static_cast<std::size_t>(n.inputs[static_cast<std::size_t>(j)])]);
            val[i] = forward(net.subnets[static_cast<std::size_t>(net.subnet_of_node[i])], in);
        }
    }
    return val[static_cast<std::size_t>(net.graph.output_node)];
}

/// MSE objective over the concatenated subnet parameters.
class ModularObjective {
public:
    ModularObjective(const ModularNet& shape, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets)
        : shape_(shape), xt_(inputs.transpose()), y_(targets) {
        if (inputs.cols() != shape.graph.dim) throw std::invalid_argument("objective: input dimension mismatch");
        if (inputs.rows() != targets.size() || inputs.rows() == 0) throw std::invalid_argument("objective: bad dataset");
        y_sq_mean_ = y_.squaredNorm() / static_cast<double>(y_.size());
    }

    Eigen::Index size() const { return y_.size(); }
    Eigen::Index dimension() const { return shape_.param_count(); }
    double target_power() const { return y_sq_mean_; }
    double relative_rmse(double mse) const { return std::sqrt(mse / y_sq_mean_); }

    double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const { return evaluate(theta, xt_, y_, grad); }

    double batch(const Eigen::VectorXd& theta, std::span<const Eigen::Index> rows, Eigen::VectorXd* grad) const {
        Eigen::MatrixXd xb(xt_.rows(), static_cast<Eigen::Index>(rows.size()));
        Eigen::VectorXd yb(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            xb.col(static_cast<Eigen::Index>(i)) = xt_.col(rows[i]);
            yb(static_cast<Eigen::Index>(i)) = y_(rows[i]);
        }
        return evaluate(theta, xb, yb, grad);
    }

private:
    ModularNet shape_;
    Eigen::MatrixXd xt_;
    Eigen::VectorXd y_;
    double y_sq_mean_ = 0.0;

    double evaluate(const Eigen::VectorXd& theta, const Eigen::MatrixXd& xt, const Eigen::VectorXd& y,
                    Eigen::VectorXd* grad) const {
        if (theta.size() != dimension()) throw std::invalid_argument("objective: parameter length mismatch");
        const auto& g = shape_.graph.graph;
        const Eigen::Index n = xt.cols();
        std::vector<Eigen::Index> offset;
        Eigen::Index off = 0;
        for (const auto& s : shape_.subnets) {
            offset.push_back(off);
            off += s.param_count();
        }
        std::vector<Eigen::RowVectorXd> val(g.size());
        std::vector<detail::Tape> tapes;
        tapes.reserve(shape_.subnets.size());
        for (const auto& s : shape_.subnets) tapes.emplace_back(s.layer_dims(), s.activation());

        for (std::size_t i = 0; i < g.size(); ++i) {
            const Node& node = g[i];
            if (node.op == Op::var) val[i] = xt.row(node.var);
            else if (node.op == Op::constant) val[i] = Eigen::RowVectorXd::Constant(n, node.value);
            else {
                const int k = shape_.subnet_of_node[i];
                const int arity = op_arity(node.op);
                Eigen::MatrixXd in(arity, n);
                for (int j = 0; j < arity; ++j) in.row(j) = val[static_cast<std::size_t>(node.inputs[static_cast<std::size_t>(j)])];
                val[i] = tapes[static_cast<std::size_t>(k)].forward(theta.data() + offset[static_cast<std::size_t>(k)], in).row(0);
            }
        }
        const Eigen::RowVectorXd r = val[static_cast<std::size_t>(shape_.graph.output_node)] - y.transpose();
        const double mse = r.squaredNorm() / static_cast<double>(n);
        if (grad) {
            grad->setZero(theta.size());
            std::vector<Eigen::RowVectorXd> adj(g.size(), Eigen::RowVectorXd::Zero(n));
            adj[static_cast<std::size_t>(shape_.graph.output_node)] = (2.0 / static_cast<double>(n)) * r;
            for (std::size_t i = g.size(); i-- > 0;) {
                const int k = shape_.subnet_of_node[i];
                if (k < 0) continue;
                Eigen::MatrixXd dx;
                tapes[static_cast<std::size_t>(k)].backward(theta.data() + offset[static_cast<std::size_t>(k)], adj[i],
                                                            grad->data() + offset[static_cast<std::size_t>(k)], &dx);
                for (int j = 0; j < op_arity(g[i].op); ++j) adj[static_cast<std::size_t>(g[i].inputs[static_cast<std::size_t>(j)])] += dx.row(j);
            }
        }
        return mse;
    }
};

} // namespace precml
