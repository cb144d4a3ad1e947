#pragma once

// Four tanh units that multiply two numbers:
//
//   m(x, y) = [s(b + a(x+y)) + s(b - a(x+y)) - s(b + a(x-y)) - s(b - a(x-y))] / (4 a^2 s''(b))
//
// Odd Taylor terms cancel pairwise and the quadratic terms leave exactly x*y,
// so the error is O(a^2). tanh''(0) = 0, hence the expansion point b != 0.

#include "precml/net/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace precml {

struct GadgetConfig {
    double a = 1e-3;
    double b = 1.0;

    void validate() const;
};

inline double tanh_second_derivative(double b) {
    const double t = std::tanh(b);
    return -2.0 * t * (1.0 - t * t);
}

inline void GadgetConfig::validate() const {
    if (!(a > 0.0)) throw std::invalid_argument("gadget scale a must be positive");
    if (!(std::abs(tanh_second_derivative(b)) > 1e-3))
        throw std::invalid_argument("gadget bias point b has |tanh''(b)| <= 1e-3");
}

/// Single-hidden-layer tanh net summing x[i]*x[j] over `pairs`, four hidden
/// units per product.
inline Mlp products_gadget(int input_dim, const std::vector<std::pair<int, int>>& pairs, const GadgetConfig& cfg) {
    cfg.validate();
    if (pairs.empty()) throw std::invalid_argument("gadget needs at least one product");
    const int width = 4 * static_cast<int>(pairs.size());
    std::vector<int> dims{input_dim, width, 1};
    Eigen::VectorXd p = Eigen::VectorXd::Zero(param_count_for(dims));
    Mlp shape(dims, Activation::tanh, p);
    const Eigen::Index w0 = shape.weight_offset(0), b0 = shape.bias_offset(0);
    const Eigen::Index w1 = shape.weight_offset(1);
    const double out = 1.0 / (4.0 * cfg.a * cfg.a * tanh_second_derivative(cfg.b));

    // Per product the units are ordered (x-y, y-x, x+y, -x-y). The output sum
    // then starts with the two difference units, whose values trade places
    // when x and y are swapped, so the network is bit-exactly symmetric.
    static constexpr double sx[4] = {1, -1, 1, -1};
    static constexpr double sy[4] = {-1, 1, 1, -1};
    static constexpr double so[4] = {-1, -1, 1, 1};
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[k];
        if (i < 0 || j < 0 || i >= input_dim || j >= input_dim || i == j)
            throw std::invalid_argument("gadget product indices out of range");
        for (int u = 0; u < 4; ++u) {
            const Eigen::Index unit = static_cast<Eigen::Index>(4 * k) + u;
            p(w0 + unit * input_dim + i) = sx[u] * cfg.a;
            p(w0 + unit * input_dim + j) = sy[u] * cfg.a;
            p(b0 + unit) = cfg.b;
            p(w1 + unit) = so[u] * out;
        }
    }
    // The constants s(b) cancel pairwise, so the output bias stays zero.
    return shape.with_params(std::move(p));
}

/// [2, 4, 1] tanh network approximating x*y.
inline Mlp multiplication_gadget(const GadgetConfig& cfg) { return products_gadget(2, {{0, 1}}, cfg); }

} // namespace precml
