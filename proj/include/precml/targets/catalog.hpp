#pragma once

#include "precml/core/random.hpp"
#include "precml/targets/dataset.hpp"
#include "precml/targets/expression.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace precml {

struct CatalogEntry {
    TargetSpec spec;
    Domain domain;
    std::string description;
};

/// Architecture and seed of the built-in teacher network.
inline constexpr std::array<int, 4> teacher_layer_dims{2, 3, 3, 1};
inline constexpr std::uint64_t teacher_seed = 20221024;

namespace detail {

// Emits nodes for a tanh MLP so that evaluation follows the same summation
// order as a scalar forward pass: ((w0*x0 + w1*x1) + ...) + bias.
inline TargetSpec tanh_network_graph(std::string name, std::span<const int> dims, std::span<const double> params) {
    TargetSpec spec;
    spec.name = std::move(name);
    spec.dim = dims.front();
    auto add = [&](Node n) {
        spec.graph.push_back(n);
        return static_cast<int>(spec.graph.size()) - 1;
    };
    std::vector<int> layer;
    for (int j = 0; j < spec.dim; ++j) layer.push_back(add(Node{Op::var, {-1, -1}, j, 0.0}));

    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int in = dims[l];
        const int out = dims[l + 1];
        const bool last = l + 2 == dims.size();
        std::vector<int> next;
        for (int o = 0; o < out; ++o) {
            int acc = -1;
            for (int i = 0; i < in; ++i) {
                const double w = params[offset + static_cast<std::size_t>(o * in + i)];
                const int c = add(Node{Op::constant, {-1, -1}, -1, w});
                const int prod = add(Node{Op::mul, {c, layer[static_cast<std::size_t>(i)]}});
                acc = acc < 0 ? prod : add(Node{Op::add, {acc, prod}});
            }
            const double b = params[offset + static_cast<std::size_t>(out * in + o)];
            const int bias = add(Node{Op::constant, {-1, -1}, -1, b});
            acc = add(Node{Op::add, {acc, bias}});
            next.push_back(last ? acc : add(Node{Op::tanh, {acc, -1}}));
        }
        offset += static_cast<std::size_t>(out * in + out);
        layer = std::move(next);
    }
    spec.output_node = layer.front();
    spec.validate();
    return spec;
}

} // namespace detail

inline TargetSpec teacher_target() {
    const auto params = fan_in_uniform_params(teacher_layer_dims, teacher_seed);
    return detail::tanh_network_graph("teacher", teacher_layer_dims, params);
}

/// Fixed experiment registry. Names are stable CLI identifiers.
inline const std::vector<CatalogEntry>& builtin_catalog() {
    static const std::vector<CatalogEntry> catalog = [] {
        std::vector<CatalogEntry> c;
        auto formula = [&](const char* name, const char* text, int dim, double lo, double hi, const char* about) {
            c.push_back({parse_expression(text, dim, name), Domain::cube(dim, lo, hi), about});
        };
        formula("cos2x", "cos(2*x1)", 1, 1.0, 5.0, "cos(2x) on [1,5]");
        formula("xy", "x1*x2", 2, 1.0, 5.0, "product of two inputs on [1,5]^2");
        formula("xyz", "x1*x2*x3", 3, 1.0, 5.0, "product of three inputs on [1,5]^3");
        formula("dot3", "x1*x4 + x2*x5 + x3*x6", 6, 1.0, 5.0, "3-vector dot product on [1,5]^6");
        formula("poly1d", "x1^4 + 0.7*x1^3 - 2*x1^2 + 0.5*x1 + 1", 1, -1.0, 1.0,
                "quartic x^4 + 0.7x^3 - 2x^2 + 0.5x + 1 on [-1,1]");
        c.push_back({teacher_target(), Domain::cube(2, -1.0, 1.0), "seeded depth-3 width-3 tanh network on [-1,1]^2"});
        formula("cosxy", "cos(x1*x2/4)", 2, 1.0, 5.0, "smooth non-polynomial 2D target on [1,5]^2");
        formula("cosxyz", "cos(x1*x2*x3/16)", 3, 1.0, 5.0, "smooth non-polynomial 3D target on [1,5]^3");
        return c;
    }();
    return catalog;
}

/// Throws std::out_of_range for unknown names.
inline const CatalogEntry& find_target(std::string_view name) {
    for (const auto& e : builtin_catalog())
        if (e.spec.name == name) return e;
    throw std::out_of_range("unknown target '" + std::string(name) + "'");
}

} // namespace precml
