#pragma once

// Merging two networks f1, f2 into one network computing f1 + c * f2.
// The first layer stacks the two weight matrices (both read the same input);
// later hidden layers are block diagonal.

#include "precml/net/mlp.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace precml {

inline Mlp assemble_boosted(const Mlp& f1, const Mlp& f2, double c) {
    if (f1.input_dim() != f2.input_dim()) throw std::invalid_argument("boosted: input dimensions differ");
    if (f1.depth() != f2.depth()) throw std::invalid_argument("boosted: depths differ");
    if (f1.activation() != f2.activation()) throw std::invalid_argument("boosted: activations differ");
    const auto& d1 = f1.layer_dims();
    const auto& d2 = f2.layer_dims();
    std::vector<int> dims{d1.front()};
    for (std::size_t l = 1; l + 1 < d1.size(); ++l) dims.push_back(d1[l] + d2[l]);
    dims.push_back(1);

    Eigen::VectorXd p = Eigen::VectorXd::Zero(param_count_for(dims));
    Mlp shape(dims, f1.activation(), p);
    const int depth = f1.depth();
    for (int l = 0; l < depth; ++l) {
        const int out1 = d1[static_cast<std::size_t>(l + 1)];
        const int in1 = d1[static_cast<std::size_t>(l)];
        const int out2 = d2[static_cast<std::size_t>(l + 1)];
        const int in2 = d2[static_cast<std::size_t>(l)];
        Eigen::Map<Mlp::RowMajor> w(p.data() + shape.weight_offset(l), dims[static_cast<std::size_t>(l + 1)],
                                   dims[static_cast<std::size_t>(l)]);
        Eigen::Map<Eigen::VectorXd> b(p.data() + shape.bias_offset(l), dims[static_cast<std::size_t>(l + 1)]);
        const bool last = l + 1 == depth;
        const bool first = l == 0;
        // Column offset of f2's inputs: shared input for the first layer.
        const int col2 = first ? 0 : in1;
        const int row2 = last ? 0 : out1;
        w.block(0, 0, out1, in1) = f1.weights(l);
        if (last && first) {
            w = f1.weights(l) + c * f2.weights(l); // no hidden layer: plain sum
            b(0) = f1.bias(l)(0) + c * f2.bias(l)(0);
        } else if (last) {
            w.block(0, col2, out2, in2) = c * f2.weights(l);
            b(0) = f1.bias(l)(0) + c * f2.bias(l)(0);
        } else {
            w.block(row2, col2, out2, in2) = f2.weights(l);
            b.head(out1) = f1.bias(l);
            b.tail(out2) = f2.bias(l);
        }
    }
    return shape.with_params(std::move(p));
}

struct BoostedCounts {
    Eigen::Index dense = 0;             // stored entries of the assembled net
    Eigen::Index cross_block_zeros = 0; // structural zeros between the two blocks
    Eigen::Index reported = 0;          // N_f1 + N_f2, the counted total
};

// dense - cross_block_zeros == reported - 1: the two output biases merge into one.

inline BoostedCounts boosted_param_counts(const Mlp& f1, const Mlp& f2) {
    BoostedCounts c;
    const auto& d1 = f1.layer_dims();
    const auto& d2 = f2.layer_dims();
    std::vector<int> dims{d1.front()};
    for (std::size_t l = 1; l + 1 < d1.size(); ++l) dims.push_back(d1[l] + d2[l]);
    dims.push_back(1);
    c.dense = param_count_for(dims);
    // Hidden-to-hidden maps hold two off-diagonal blocks each.
    for (std::size_t l = 1; l + 2 < dims.size(); ++l)
        c.cross_block_zeros += static_cast<Eigen::Index>(d1[l + 1]) * d2[l] + static_cast<Eigen::Index>(d2[l + 1]) * d1[l];
    c.reported = f1.param_count() + f2.param_count();
    return c;
}

} // namespace precml
