#pragma once

// Dense multilayer perceptrons over a flat parameter vector, with exact
// reverse-mode gradients of the mean squared error.
//
// Parameter layout, per affine map in order: the row-major weight matrix
// (out x in), then the bias vector (out).

#include "precml/core/random.hpp"
#include "precml/targets/dataset.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace precml {

enum class Activation { relu, tanh };

inline const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

inline Activation parse_activation(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

inline double activate(Activation a, double z) { return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z); }

/// Number of parameters of a dense net with these layer widths.
inline Eigen::Index param_count_for(std::span<const int> dims) {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += static_cast<Eigen::Index>(dims[l]) * dims[l + 1] + dims[l + 1];
    return n;
}

class Mlp {
public:
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    Mlp() = default;

    Mlp(std::vector<int> layer_dims, Activation activation, Eigen::VectorXd params)
        : dims_(std::move(layer_dims)), act_(activation), params_(std::move(params)) {
        if (dims_.size() < 2) throw std::invalid_argument("an MLP needs at least input and output widths");
        for (int d : dims_)
            if (d <= 0) throw std::invalid_argument("layer widths must be positive");
        if (dims_.back() != 1) throw std::invalid_argument("networks here are scalar-valued: last width must be 1");
        if (params_.size() != param_count_for(dims_))
            throw std::invalid_argument("parameter vector has " + std::to_string(params_.size()) + " entries, expected " +
                                        std::to_string(param_count_for(dims_)));
    }

    const std::vector<int>& layer_dims() const { return dims_; }
    Activation activation() const { return act_; }
    const Eigen::VectorXd& params() const { return params_; }
    Eigen::Index param_count() const { return params_.size(); }
    /// Number of affine maps (hidden layers + 1).
    int depth() const { return static_cast<int>(dims_.size()) - 1; }
    int input_dim() const { return dims_.front(); }

    Mlp with_params(Eigen::VectorXd params) const { return Mlp(dims_, act_, std::move(params)); }

    /// Offset of layer l's weights within params().
    Eigen::Index weight_offset(int l) const {
        Eigen::Index off = 0;
        for (int i = 0; i < l; ++i) off += static_cast<Eigen::Index>(dims_[static_cast<std::size_t>(i)]) * dims_[static_cast<std::size_t>(i + 1)] + dims_[static_cast<std::size_t>(i + 1)];
        return off;
    }
    Eigen::Index bias_offset(int l) const {
        return weight_offset(l) + static_cast<Eigen::Index>(dims_[static_cast<std::size_t>(l)]) * dims_[static_cast<std::size_t>(l + 1)];
    }

    Eigen::Map<const RowMajor> weights(int l) const {
        return {params_.data() + weight_offset(l), dims_[static_cast<std::size_t>(l + 1)], dims_[static_cast<std::size_t>(l)]};
    }
    Eigen::Map<const Eigen::VectorXd> bias(int l) const {
        return {params_.data() + bias_offset(l), dims_[static_cast<std::size_t>(l + 1)]};
    }

private:
    std::vector<int> dims_;
    Activation act_ = Activation::tanh;
    Eigen::VectorXd params_;
};

/// Weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
inline Mlp mlp_init(std::vector<int> layer_dims, Activation activation, std::uint64_t seed) {
    if (layer_dims.size() < 2) throw std::invalid_argument("an MLP needs at least input and output widths");
    for (int d : layer_dims)
        if (d <= 0) throw std::invalid_argument("layer widths must be positive");
    const auto p = fan_in_uniform_params(layer_dims, seed);
    return Mlp(std::move(layer_dims), activation, Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())));
}

/// Hidden widths -> full layer dims [d, hidden..., 1].
inline std::vector<int> layer_dims_for(int input_dim, std::span<const int> hidden) {
    std::vector<int> dims{input_dim};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(1);
    return dims;
}

/// Single-point forward pass. Sums run strictly left to right, so the result
/// depends only on the order of units, not on vectorization.
inline double forward(const Mlp& net, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw std::invalid_argument("forward: input has " + std::to_string(x.size()) + " components, expected " +
                                    std::to_string(net.input_dim()));
    const auto& dims = net.layer_dims();
    const double* p = net.params().data();
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (int l = 0; l < net.depth(); ++l) {
        const int in = dims[static_cast<std::size_t>(l)];
        const int out = dims[static_cast<std::size_t>(l + 1)];
        const double* w = p;
        const double* b = p + in * out;
        next.assign(static_cast<std::size_t>(out), 0.0);
        for (int o = 0; o < out; ++o) {
            double acc = 0.0;
            for (int i = 0; i < in; ++i) acc += w[o * in + i] * cur[static_cast<std::size_t>(i)];
            acc += b[o];
            next[static_cast<std::size_t>(o)] = l + 1 < net.depth() ? activate(net.activation(), acc) : acc;
        }
        cur.swap(next);
        p += in * out + out;
    }
    return cur.front();
}

namespace detail {

/// Batched forward/backward over columns of a (d x n) input block. Stores
/// the post-activation outputs of each hidden layer for the backward pass.
class Tape {
public:
    Tape(std::span<const int> dims, Activation act) : dims_(dims.begin(), dims.end()), act_(act) {}

    /// Returns the 1 x n row of outputs.
    const Eigen::MatrixXd& forward(const double* params, const Eigen::Ref<const Eigen::MatrixXd>& x) {
        const int depth = static_cast<int>(dims_.size()) - 1;
        acts_.resize(static_cast<std::size_t>(depth + 1));
        acts_[0] = x;
        const double* p = params;
        for (int l = 0; l < depth; ++l) {
            const int in = dims_[static_cast<std::size_t>(l)];
            const int out = dims_[static_cast<std::size_t>(l + 1)];
            Eigen::Map<const Mlp::RowMajor> w(p, out, in);
            Eigen::Map<const Eigen::VectorXd> b(p + in * out, out);
            Eigen::MatrixXd& z = acts_[static_cast<std::size_t>(l + 1)];
            z.noalias() = w * acts_[static_cast<std::size_t>(l)];
            z.colwise() += b;
            if (l + 1 < depth) {
                if (act_ == Activation::tanh) z = z.array().tanh().matrix();
                else z = z.cwiseMax(0.0);
            }
            p += in * out + out;
        }
        return acts_.back();
    }

    /// Back-propagates dL/d(output) (1 x n). Adds parameter gradients into
    /// `grad` and, if `dx` is non-null, writes dL/d(input) (d x n).
    void backward(const double* params, Eigen::MatrixXd delta, double* grad, Eigen::MatrixXd* dx = nullptr) const {
        const int depth = static_cast<int>(dims_.size()) - 1;
        std::vector<Eigen::Index> offsets(static_cast<std::size_t>(depth));
        Eigen::Index off = 0;
        for (int l = 0; l < depth; ++l) {
            offsets[static_cast<std::size_t>(l)] = off;
            off += static_cast<Eigen::Index>(dims_[static_cast<std::size_t>(l)]) * dims_[static_cast<std::size_t>(l + 1)] + dims_[static_cast<std::size_t>(l + 1)];
        }
        for (int l = depth - 1; l >= 0; --l) {
            const int in = dims_[static_cast<std::size_t>(l)];
            const int out = dims_[static_cast<std::size_t>(l + 1)];
            const Eigen::Index o = offsets[static_cast<std::size_t>(l)];
            Eigen::Map<Mlp::RowMajor> gw(grad + o, out, in);
            Eigen::Map<Eigen::VectorXd> gb(grad + o + in * out, out);
            gw.noalias() += delta * acts_[static_cast<std::size_t>(l)].transpose();
            gb += delta.rowwise().sum();
            if (l == 0 && dx == nullptr) break;
            Eigen::Map<const Mlp::RowMajor> w(params + o, out, in);
            Eigen::MatrixXd prev = w.transpose() * delta;
            if (l > 0) {
                const Eigen::MatrixXd& a = acts_[static_cast<std::size_t>(l)];
                if (act_ == Activation::tanh) prev.array() *= (1.0 - a.array().square());
                else prev.array() *= (a.array() > 0.0).cast<double>();
                delta = std::move(prev);
            } else {
                *dx = std::move(prev);
            }
        }
    }

private:
    std::vector<int> dims_;
    Activation act_;
    std::vector<Eigen::MatrixXd> acts_;
};

} // namespace detail

/// Outputs for every row of `inputs` (n x d).
inline Eigen::VectorXd forward_batch(const Mlp& net, const Eigen::MatrixXd& inputs) {
    if (inputs.cols() != net.input_dim()) throw std::invalid_argument("forward_batch: dimension mismatch");
    detail::Tape tape(net.layer_dims(), net.activation());
    const Eigen::MatrixXd xt = inputs.transpose();
    return tape.forward(net.params().data(), xt).row(0).transpose();
}

/// Mean squared error objective in parameter space for a fixed architecture
/// and dataset; the common currency of the optimizers.
class MseObjective {
public:
    MseObjective(const Mlp& shape, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets)
        : dims_(shape.layer_dims()), act_(shape.activation()), xt_(inputs.transpose()), y_(targets) {
        if (inputs.cols() != shape.input_dim()) throw std::invalid_argument("objective: input dimension mismatch");
        if (inputs.rows() != targets.size()) throw std::invalid_argument("objective: inputs and targets differ in length");
        if (inputs.rows() == 0) throw std::invalid_argument("objective: empty dataset");
        y_sq_mean_ = y_.squaredNorm() / static_cast<double>(y_.size());
    }
    MseObjective(const Mlp& shape, const Dataset& data) : MseObjective(shape, data.inputs, data.targets) {}

    Eigen::Index size() const { return y_.size(); }
    Eigen::Index dimension() const { return param_count_for(dims_); }
    /// Mean of y^2, so relative RMSE = sqrt(mse / target_power()).
    double target_power() const { return y_sq_mean_; }
    double relative_rmse(double mse) const { return std::sqrt(mse / y_sq_mean_); }

    /// MSE at theta; fills `grad` when non-null.
    double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
        return evaluate(theta, xt_, y_, grad);
    }

    /// Same objective restricted to the listed samples (minibatch).
    double batch(const Eigen::VectorXd& theta, std::span<const Eigen::Index> rows, Eigen::VectorXd* grad) const {
        Eigen::MatrixXd xb(xt_.rows(), static_cast<Eigen::Index>(rows.size()));
        Eigen::VectorXd yb(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            xb.col(static_cast<Eigen::Index>(i)) = xt_.col(rows[i]);
            yb(static_cast<Eigen::Index>(i)) = y_(rows[i]);
        }
        return evaluate(theta, xb, yb, grad);
    }

    /// H v at theta, exact up to rounding (R-operator pass through backprop).
    Eigen::VectorXd hessian_vector(const Eigen::VectorXd& theta, const Eigen::VectorXd& v) const {
        if (v.size() != dimension()) throw std::invalid_argument("objective: direction length mismatch");
        Eigen::VectorXd hv;
        HvPass pass(*this, theta);
        pass.apply(v, hv);
        return hv;
    }

    /// Dense Hessian from one Hessian-vector product per coordinate. Not
    /// symmetrized; asymmetry is rounding only.
    Eigen::MatrixXd exact_hessian(const Eigen::VectorXd& theta) const {
        const Eigen::Index n = dimension();
        if (n > 5000) throw std::length_error("exact Hessian of " + std::to_string(n) + " parameters exceeds the dense bound");
        HvPass pass(*this, theta);
        Eigen::MatrixXd h(n, n);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n), col;
        for (Eigen::Index i = 0; i < n; ++i) {
            e(i) = 1.0;
            pass.apply(e, col);
            h.col(i) = col;
            e(i) = 0.0;
        }
        return h;
    }

private:
    std::vector<int> dims_;
    Activation act_;
    Eigen::MatrixXd xt_;
    Eigen::VectorXd y_;
    double y_sq_mean_ = 0.0;

    // Forward values at theta, kept for repeated H v products.
    class HvPass {
    public:
        HvPass(const MseObjective& f, const Eigen::VectorXd& theta) : f_(f), theta_(theta) {
            if (theta.size() != f.dimension()) throw std::invalid_argument("objective: parameter length mismatch");
            const int depth = static_cast<int>(f.dims_.size()) - 1;
            offsets_.resize(static_cast<std::size_t>(depth));
            acts_.resize(static_cast<std::size_t>(depth + 1));
            acts_[0] = f.xt_;
            Eigen::Index off = 0;
            for (int l = 0; l < depth; ++l) {
                offsets_[static_cast<std::size_t>(l)] = off;
                Eigen::MatrixXd z = weight(theta_.data(), l) * acts_[static_cast<std::size_t>(l)];
                z.colwise() += bias(theta_.data(), l);
                if (l + 1 < depth) z = f.act_ == Activation::tanh ? Eigen::MatrixXd(z.array().tanh()) : Eigen::MatrixXd(z.cwiseMax(0.0));
                acts_[static_cast<std::size_t>(l + 1)] = std::move(z);
                off += static_cast<Eigen::Index>(in(l)) * out(l) + out(l);
            }
            const double n = static_cast<double>(f.y_.size());
            delta_out_ = (2.0 / n) * (acts_.back().row(0) - f.y_.transpose());
        }

        void apply(const Eigen::VectorXd& v, Eigen::VectorXd& hv) const {
            const int depth = static_cast<int>(f_.dims_.size()) - 1;
            const double n = static_cast<double>(f_.y_.size());
            // Forward: directional derivatives of pre-activations (rz) and outputs (ra).
            std::vector<Eigen::MatrixXd> rz(static_cast<std::size_t>(depth)), ra(static_cast<std::size_t>(depth + 1));
            ra[0] = Eigen::MatrixXd::Zero(acts_[0].rows(), acts_[0].cols());
            for (int l = 0; l < depth; ++l) {
                const auto L = static_cast<std::size_t>(l);
                Eigen::MatrixXd z = weight(v.data(), l) * acts_[L];
                if (l > 0) z.noalias() += weight(theta_.data(), l) * ra[L];
                z.colwise() += bias(v.data(), l);
                ra[L + 1] = l + 1 < depth ? Eigen::MatrixXd(slope(l + 1).cwiseProduct(z)) : z;
                rz[L] = std::move(z);
            }
            hv.setZero(v.size());
            Eigen::MatrixXd delta = delta_out_;
            Eigen::MatrixXd rdelta = (2.0 / n) * ra.back();
            for (int l = depth - 1; l >= 0; --l) {
                const auto L = static_cast<std::size_t>(l);
                const Eigen::Index o = offsets_[L];
                Eigen::Map<Mlp::RowMajor> hw(hv.data() + o, out(l), in(l));
                Eigen::Map<Eigen::VectorXd> hb(hv.data() + o + static_cast<Eigen::Index>(in(l)) * out(l), out(l));
                hw.noalias() += rdelta * acts_[L].transpose();
                if (l > 0) hw.noalias() += delta * ra[L].transpose();
                hb += rdelta.rowwise().sum();
                if (l == 0) break;
                const Eigen::MatrixXd e = weight(theta_.data(), l).transpose() * delta;
                Eigen::MatrixXd re = weight(theta_.data(), l).transpose() * rdelta;
                re.noalias() += weight(v.data(), l).transpose() * delta;
                const Eigen::MatrixXd s = slope(l);
                Eigen::MatrixXd next_r = s.cwiseProduct(re);
                if (f_.act_ == Activation::tanh) {
                    const auto& t = acts_[L].array();
                    next_r.array() += (-2.0 * t * (1.0 - t.square())) * rz[L - 1].array() * e.array();
                }
                delta = s.cwiseProduct(e);
                rdelta = std::move(next_r);
            }
        }

    private:
        const MseObjective& f_;
        const Eigen::VectorXd& theta_;
        std::vector<Eigen::Index> offsets_;
        std::vector<Eigen::MatrixXd> acts_;
        Eigen::MatrixXd delta_out_;

        int in(int l) const { return f_.dims_[static_cast<std::size_t>(l)]; }
        int out(int l) const { return f_.dims_[static_cast<std::size_t>(l + 1)]; }
        Eigen::Map<const Mlp::RowMajor> weight(const double* p, int l) const {
            return {p + offsets_[static_cast<std::size_t>(l)], out(l), in(l)};
        }
        Eigen::Map<const Eigen::VectorXd> bias(const double* p, int l) const {
            return {p + offsets_[static_cast<std::size_t>(l)] + static_cast<Eigen::Index>(in(l)) * out(l), out(l)};
        }
        // sigma'(z) at hidden layer l, from its stored output.
        Eigen::MatrixXd slope(int l) const {
            const auto& a = acts_[static_cast<std::size_t>(l)].array();
            if (f_.act_ == Activation::tanh) return (1.0 - a.square()).matrix();
            return (a > 0.0).cast<double>().matrix();
        }
    };

    double evaluate(const Eigen::VectorXd& theta, const Eigen::MatrixXd& xt, const Eigen::VectorXd& y,
                    Eigen::VectorXd* grad) const {
        if (theta.size() != dimension()) throw std::invalid_argument("objective: parameter length mismatch");
        detail::Tape tape(dims_, act_);
        const Eigen::MatrixXd& out = tape.forward(theta.data(), xt);
        const Eigen::RowVectorXd r = out.row(0) - y.transpose();
        const double n = static_cast<double>(y.size());
        const double mse = r.squaredNorm() / n;
        if (grad) {
            grad->setZero(theta.size());
            tape.backward(theta.data(), (2.0 / n) * r, grad->data());
        }
        return mse;
    }
};

inline double mse_loss(const Mlp& net, const Dataset& data) { return MseObjective(net, data)(net.params(), nullptr); }

/// Exact gradient of the MSE over `data` with respect to net.params().
inline Eigen::VectorXd grad(const Mlp& net, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("grad: empty dataset");
    Eigen::VectorXd g;
    MseObjective(net, data)(net.params(), &g);
    return g;
}

/// Largest parameter count for which dense Hessians are formed.
inline constexpr Eigen::Index max_hessian_params = 5000;

/// Central differences of an analytic gradient, column by column, with
/// per-coordinate step rel_step * (1 + |theta_i|); symmetrized.
template <class Objective>
Eigen::MatrixXd fd_hessian(const Objective& f, const Eigen::VectorXd& theta, double rel_step = 1e-5) {
    const Eigen::Index n = theta.size();
    if (n > max_hessian_params)
        throw std::length_error("Hessian of " + std::to_string(n) + " parameters exceeds the dense bound of " +
                                std::to_string(max_hessian_params));
    Eigen::MatrixXd h(n, n);
    Eigen::VectorXd tp = theta, gp(n), gm(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double step = rel_step * (1.0 + std::abs(theta(i)));
        tp(i) = theta(i) + step;
        const double up = tp(i) - theta(i);
        f(tp, &gp);
        tp(i) = theta(i) - step;
        const double down = theta(i) - tp(i);
        f(tp, &gm);
        tp(i) = theta(i);
        h.col(i) = (gp - gm) / (up + down);
    }
    return 0.5 * (h + h.transpose());
}

inline Eigen::MatrixXd hessian(const Mlp& net, const Dataset& data) {
    return fd_hessian(MseObjective(net, data), net.params());
}

/// Depth sufficient for a ReLU net to represent any piecewise linear function on R^d.
inline int relu_depth_bound(int d) {
    if (d < 1) throw std::invalid_argument("relu_depth_bound needs d >= 1");
    int bits = 0;
    while ((1 << bits) < d + 1) ++bits; // ceil(log2(d+1))
    return bits + 1;
}

} // namespace precml
