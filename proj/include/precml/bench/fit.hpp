#pragma once

// One fit of one method to one target at one data size: the unit of work
// behind the sweeps and the `fit` command.

#include "precml/bench/metrics.hpp"
#include "precml/interp/delaunay.hpp"
#include "precml/interp/interior.hpp"
#include "precml/interp/io.hpp"
#include "precml/interp/spline.hpp"
#include "precml/net/gadget.hpp"
#include "precml/net/io.hpp"
#include "precml/net/modular.hpp"
#include "precml/optim/train.hpp"
#include "precml/targets/catalog.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace precml {

struct Method {
    enum class Kind { simplex, spline, relu_mlp, tanh_mlp, modular_mlp };
    Kind kind = Kind::simplex;
    int order = 0; // spline order

    bool is_network() const { return kind == Kind::relu_mlp || kind == Kind::tanh_mlp || kind == Kind::modular_mlp; }

    std::string name() const {
        switch (kind) {
        case Kind::simplex: return "simplex";
        case Kind::spline: return "spline-" + std::to_string(order);
        case Kind::relu_mlp: return "relu-mlp";
        case Kind::tanh_mlp: return "tanh-mlp";
        case Kind::modular_mlp: return "modular-mlp";
        }
        return "?";
    }
};

/// "simplex", "spline-<n>" (n in 1..5), "relu-mlp", "tanh-mlp", "modular-mlp".
inline Method parse_method(const std::string& s) {
    Method m;
    if (s == "simplex") m.kind = Method::Kind::simplex;
    else if (s == "relu-mlp") m.kind = Method::Kind::relu_mlp;
    else if (s == "tanh-mlp") m.kind = Method::Kind::tanh_mlp;
    else if (s == "modular-mlp") m.kind = Method::Kind::modular_mlp;
    else if (s.rfind("spline-", 0) == 0 && s.size() == 8 && s[7] >= '1' && s[7] <= '5') {
        m.kind = Method::Kind::spline;
        m.order = s[7] - '0';
    } else
        throw std::invalid_argument("unknown method '" + s + "' (simplex, spline-1..5, relu-mlp, tanh-mlp, modular-mlp)");
    return m;
}

struct FitConfig {
    int depth = 3;                 // affine maps in network methods (hidden layers + 1)
    bool matched_params = true;    // pick width so N is closest to |D|(d+1)
    int width = 20;                // used when matched_params is false
    std::string optimizer = "adam";
    AdamConfig adam;
    BfgsConfig bfgs;
    Activation modular_activation = Activation::relu;
    bool normalize = true;         // standardize network inputs with train statistics
    double max_seconds = 0.0;      // wall-clock budget for training, 0 = none

    void validate() const {
        if (depth < 2) throw std::invalid_argument("network depth must be at least 2");
        if (!matched_params && width < 1) throw std::invalid_argument("width must be positive");
        if (optimizer != "adam" && optimizer != "bfgs") throw std::invalid_argument("optimizer must be adam or bfgs");
        adam.validate();
        bfgs.validate();
    }
};

inline std::vector<int> dense_dims(int d, int width, int depth) {
    std::vector<int> dims{d};
    for (int l = 0; l + 1 < depth; ++l) dims.push_back(width);
    dims.push_back(1);
    return dims;
}

/// Width whose dense parameter count is closest to `target` (ties go to the smaller width).
inline int matched_dense_width(int d, int depth, Eigen::Index target) {
    int best = 1;
    Eigen::Index best_gap = std::numeric_limits<Eigen::Index>::max();
    for (int w = 1;; ++w) {
        const Eigen::Index n = param_count_for(dense_dims(d, w, depth));
        const Eigen::Index gap = std::abs(n - target);
        if (gap < best_gap) best = w, best_gap = gap;
        if (n > target) break;
    }
    return best;
}

inline Eigen::Index modular_param_count(const TargetSpec& graph, int width, int depth) {
    Eigen::Index n = 0;
    for (const auto& node : graph.graph) {
        const int arity = op_arity(node.op);
        if (arity == 0) continue;
        n += param_count_for(dense_dims(arity, width, depth));
    }
    return n;
}

inline int matched_modular_width(const TargetSpec& graph, int depth, Eigen::Index target) {
    int best = 1;
    Eigen::Index best_gap = std::numeric_limits<Eigen::Index>::max();
    for (int w = 1;; ++w) {
        const Eigen::Index n = modular_param_count(graph, w, depth);
        const Eigen::Index gap = std::abs(n - target);
        if (gap < best_gap) best = w, best_gap = gap;
        if (n > target) break;
    }
    return best;
}

/// Fitted model of any method. Network inputs go through `norm` first.
struct FittedModel {
    Method method;
    std::variant<Triangulation, Spline1D, GridSpline, Mlp, ModularNet> model;
    std::optional<NormStats> norm;
    Eigen::Index n_params = 0;
    History history;
    StopReason reason = StopReason::max_iters;
    bool timed_out = false;

    /// NaN for points outside a simplex model's hull.
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
        Eigen::VectorXd out(x.rows());
        const Eigen::MatrixXd xin = norm ? norm->apply(x) : x;
        std::vector<double> row(static_cast<std::size_t>(x.cols()));
        auto row_of = [&](Eigen::Index i) -> std::span<const double> {
            for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = xin(i, j);
            return row;
        };
        if (const auto* tri = std::get_if<Triangulation>(&model)) {
            SimplexInterpolator interp(*tri);
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                try {
                    out(i) = interp.predict(row_of(i));
                } catch (const OutsideHull&) {
                    out(i) = std::numeric_limits<double>::quiet_NaN();
                }
            }
        } else if (const auto* sp = std::get_if<Spline1D>(&model)) {
            for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = (*sp)(xin(i, 0));
        } else if (const auto* gs = std::get_if<GridSpline>(&model)) {
            for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = (*gs)(row_of(i));
        } else if (const auto* net = std::get_if<Mlp>(&model)) {
            out = forward_batch(*net, xin);
        } else {
            const auto& mod = std::get<ModularNet>(model);
            for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = forward(mod, row_of(i));
        }
        return out;
    }
};

inline nlohmann::json to_json(const ModularNet& net) {
    nlohmann::json j;
    j["graph"] = format_expression(net.graph);
    j["dim"] = net.graph.dim;
    j["subnets"] = nlohmann::json::array();
    for (const auto& s : net.subnets) j["subnets"].push_back(to_json(s));
    return j;
}

inline nlohmann::json to_json(const FittedModel& m) {
    nlohmann::json j;
    j["method"] = m.method.name();
    j["n_params"] = m.n_params;
    std::visit([&](const auto& model) { j["model"] = to_json(model); }, m.model);
    if (m.norm) {
        j["input_mean"] = std::vector<double>(m.norm->mean.data(), m.norm->mean.data() + m.norm->mean.size());
        j["input_std"] = std::vector<double>(m.norm->std.data(), m.norm->std.data() + m.norm->std.size());
    }
    return j;
}

/// Regular grid with `per_axis` points on each axis of `domain`; rows in
/// lexicographic order with the last axis fastest.
inline Dataset grid_dataset(const TargetSpec& spec, const Domain& domain, int per_axis) {
    const int d = domain.dim();
    Eigen::Index total = 1;
    for (int a = 0; a < d; ++a) total *= per_axis;
    Dataset data;
    data.domain = domain;
    data.inputs.resize(total, d);
    for (Eigen::Index r = 0; r < total; ++r) {
        Eigen::Index rest = r;
        for (int a = d - 1; a >= 0; --a) {
            const int i = static_cast<int>(rest % per_axis);
            rest /= per_axis;
            const double lo = domain.lo[static_cast<std::size_t>(a)], hi = domain.hi[static_cast<std::size_t>(a)];
            data.inputs(r, a) = i + 1 == per_axis ? hi : lo + (hi - lo) * i / (per_axis - 1);
        }
    }
    data.targets = eval_rows(spec, data.inputs);
    return data;
}

/// Training set for a cell. Splines interpolate grid samples (per axis
/// round(n^(1/d)) points); every other method gets n uniform random samples.
inline Dataset training_data(const Method& m, const CatalogEntry& target, Eigen::Index n, std::uint64_t seed) {
    if (m.kind == Method::Kind::spline) {
        const int d = target.spec.dim;
        const int per_axis = static_cast<int>(std::lround(std::pow(static_cast<double>(n), 1.0 / d)));
        Dataset g = grid_dataset(target.spec, target.domain, per_axis);
        g.seed = seed;
        return g;
    }
    return sample_dataset(target.spec, target.domain, n, seed);
}

namespace detail {

inline void mark_timeout(FittedModel& fm, long iterations, long limit) {
    fm.timed_out = iterations < limit && fm.reason == StopReason::max_iters;
}

} // namespace detail

/// Fits `m` to `train` (from training_data). Networks are initialized with
/// `seed` and trained with cfg.optimizer.
inline FittedModel fit_model(const Method& m, const CatalogEntry& target, const Dataset& train, const FitConfig& cfg,
                             std::uint64_t seed) {
    cfg.validate();
    const int d = train.dim();
    const Eigen::Index n = train.size();
    FittedModel fm;
    fm.method = m;
    switch (m.kind) {
    case Method::Kind::simplex: {
        Triangulation tri = delaunay_triangulate(train.inputs, train.targets);
        fm.n_params = tri.param_count();
        fm.model = std::move(tri);
        fm.reason = StopReason::grad_tol;
        return fm;
    }
    case Method::Kind::spline: {
        if (d == 1) {
            std::vector<double> xs(train.inputs.data(), train.inputs.data() + n);
            std::vector<double> ys(train.targets.data(), train.targets.data() + n);
            fm.model = spline_fit_1d(xs, ys, m.order);
        } else {
            if (m.order != 3) throw std::invalid_argument("multi-dimensional splines are tensor-product cubic (spline-3)");
            const int per_axis = static_cast<int>(std::lround(std::pow(static_cast<double>(n), 1.0 / d)));
            Eigen::Index total = 1;
            for (int a = 0; a < d; ++a) total *= per_axis;
            if (total != n) throw std::invalid_argument("grid spline training data is not a full grid");
            std::vector<std::vector<double>> axes(static_cast<std::size_t>(d));
            Eigen::Index stride = n;
            for (int a = 0; a < d; ++a) {
                stride /= per_axis;
                for (int i = 0; i < per_axis; ++i) axes[static_cast<std::size_t>(a)].push_back(train.inputs(i * stride, a));
            }
            fm.model = grid_spline_fit_values(std::move(axes), std::vector<double>(train.targets.data(), train.targets.data() + n));
        }
        fm.n_params = n;
        fm.reason = StopReason::grad_tol;
        return fm;
    }
    default: break;
    }

    Dataset work = train;
    if (cfg.normalize) {
        auto [nd, st] = normalize_inputs(train);
        work = std::move(nd);
        fm.norm = std::move(st);
    }
    AdamConfig adam = cfg.adam;
    BfgsConfig bfgs = cfg.bfgs;
    if (cfg.max_seconds > 0.0) adam.max_seconds = bfgs.max_seconds = cfg.max_seconds;
    const Eigen::Index want = n * (d + 1);

    if (m.kind == Method::Kind::modular_mlp) {
        const int w = cfg.matched_params ? matched_modular_width(target.spec, cfg.depth, want) : cfg.width;
        std::vector<int> hidden(static_cast<std::size_t>(cfg.depth - 1), w);
        ModularNet net = modular_net_build(target.spec, std::span<const int>(hidden), cfg.modular_activation, seed);
        const ModularObjective f(net, work.inputs, work.targets);
        OptimResult r = cfg.optimizer == "adam" ? adam_minimize(f, net.params(), adam, seed) : bfgs_minimize(f, net.params(), bfgs);
        fm.n_params = net.param_count();
        fm.model = net.with_params(r.theta);
        fm.history = std::move(r.history);
        fm.reason = r.reason;
        detail::mark_timeout(fm, r.iterations, cfg.optimizer == "adam" ? adam.steps : bfgs.max_iters);
        return fm;
    }

    const Activation act = m.kind == Method::Kind::relu_mlp ? Activation::relu : Activation::tanh;
    const int w = cfg.matched_params ? matched_dense_width(d, cfg.depth, want) : cfg.width;
    const Mlp init = init_for_targets(dense_dims(d, w, cfg.depth), act, seed, work.targets);
    TrainResult r = cfg.optimizer == "adam" ? adam_minimize(init, work, adam, seed) : bfgs_minimize(init, work, bfgs);
    fm.n_params = init.param_count();
    fm.model = std::move(r.net);
    fm.history = std::move(r.history);
    fm.reason = r.reason;
    detail::mark_timeout(fm, r.iterations, cfg.optimizer == "adam" ? adam.steps : bfgs.max_iters);
    return fm;
}

/// Fresh uniform test set; the seed is derived from the training seed so
/// the two never share a stream.
inline std::uint64_t test_seed_for(std::uint64_t train_seed) {
    std::uint64_t z = train_seed + 0x9e3779b97f4a7c15ULL; // splitmix64 step
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct TestEvaluation {
    double rmse_rel = 0.0;
    Eigen::Index used = 0;          // points scored
    Eigen::Index outside_hull = 0;  // interior points a simplex model could not cover
};

/// Relative RMSE on `test_size` fresh points at least `margin` (fraction of
/// the domain width) from the boundary.
inline TestEvaluation evaluate_test(const FittedModel& fm, const CatalogEntry& target, std::uint64_t train_seed,
                                    Eigen::Index test_size = 30000, double margin = 0.1) {
    const Dataset raw = sample_dataset(target.spec, target.domain, test_size, test_seed_for(train_seed));
    const Dataset test = select_rows(raw, interior_mask(target.domain, margin, raw.inputs));
    const Eigen::VectorXd p = fm.predict(test.inputs);
    std::vector<bool> ok(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) ok[static_cast<std::size_t>(i)] = !std::isnan(p(i));
    const Dataset kept = select_rows(test, ok);
    TestEvaluation out;
    out.used = kept.size();
    out.outside_hull = test.size() - kept.size();
    if (kept.size() == 0) {
        out.rmse_rel = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    Eigen::VectorXd pk(kept.size());
    for (Eigen::Index i = 0, k = 0; i < p.size(); ++i)
        if (ok[static_cast<std::size_t>(i)]) pk(k++) = p(i);
    out.rmse_rel = relative_rmse(pk, kept.targets);
    return out;
}

// ---------------------------------------------------------------- references

/// A product gadget laid out in the shape `dims` (one tanh hidden layer of
/// width at least 4 per product), extra units left at zero. Available for
/// `xy` and `dot3`; std::nullopt otherwise.
inline std::optional<Mlp> gadget_reference(const std::string& target, const std::vector<int>& dims, Activation act,
                                           double a = 1e-4) {
    if (act != Activation::tanh || dims.size() != 3) return std::nullopt;
    std::vector<std::pair<int, int>> pairs;
    if (target == "xy" && dims[0] == 2) pairs = {{0, 1}};
    else if (target == "dot3" && dims[0] == 6) pairs = {{0, 3}, {1, 4}, {2, 5}};
    else return std::nullopt;
    const int need = 4 * static_cast<int>(pairs.size());
    if (dims[1] < need) return std::nullopt;
    const Mlp g = products_gadget(dims[0], pairs, {a, 1.0});
    Mlp out(dims, Activation::tanh, Eigen::VectorXd::Zero(param_count_for(dims)));
    Eigen::VectorXd p = out.params();
    const int in = dims[0];
    for (int u = 0; u < need; ++u) {
        for (int j = 0; j < in; ++j) p(out.weight_offset(0) + u * in + j) = g.weights(0)(u, j);
        p(out.bias_offset(0) + u) = g.bias(0)(u);
        p(out.weight_offset(1) + u) = g.weights(1)(0, u);
    }
    p(out.bias_offset(1)) = g.bias(1)(0);
    return out.with_params(std::move(p));
}

/// Loss split for a fitted model. Interpolating methods are their own
/// reference (zero training loss is attainable); tanh networks on `xy` and
/// `dot3` use the product gadget of the same shape, evaluated on raw inputs.
inline LossBreakdown loss_decomposition_report(const FittedModel& fm, const CatalogEntry& target, const Dataset& train,
                                               double test_loss) {
    const double train_loss = relative_rmse(fm.predict(train.inputs), train.targets);
    if (!fm.method.is_network()) return loss_decomposition_report(train_loss, test_loss, 0.0, "exact interpolant");
    if (const auto* net = std::get_if<Mlp>(&fm.model)) {
        if (auto ref = gadget_reference(target.spec.name, net->layer_dims(), net->activation())) {
            const double ref_loss = relative_rmse(forward_batch(*ref, train.inputs), train.targets);
            return loss_decomposition_report(train_loss, test_loss, ref_loss, "product gadget, a = 1e-4");
        }
    }
    return loss_decomposition_report(train_loss, test_loss, std::nullopt);
}

} // namespace precml
