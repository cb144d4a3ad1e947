#pragma once

// Interpolating splines: 1D of degree 1..5 with not-a-knot end conditions,
// and tensor-product cubic splines on regular 2D/3D grids.
//
// Fitting goes through the B-spline basis (banded collocation solve); the 1D
// result is then converted to per-interval polynomials in the local power
// basis around each left breakpoint.

#include "precml/targets/dataset.hpp"
#include "precml/targets/expression.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace precml {

namespace detail {

/// Full knot vector for not-a-knot interpolation of degree k at sites x:
/// interior knots are data sites for odd k and midpoints for even k.
inline std::vector<double> not_a_knot_knots(std::span<const double> x, int k) {
    const std::size_t m = x.size();
    std::vector<double> interior;
    if (k % 2 == 1) {
        const std::size_t h = static_cast<std::size_t>((k + 1) / 2);
        for (std::size_t i = h; i + h < m; ++i) interior.push_back(x[i]);
    } else {
        const std::size_t h = static_cast<std::size_t>(k / 2);
        for (std::size_t i = h; i + h + 1 < m; ++i) interior.push_back(0.5 * (x[i] + x[i + 1]));
    }
    std::vector<double> t(static_cast<std::size_t>(k + 1), x.front());
    t.insert(t.end(), interior.begin(), interior.end());
    t.insert(t.end(), static_cast<std::size_t>(k + 1), x.back());
    return t;
}

/// Index l with t[l] <= x < t[l+1], clamped to [k, n-1]; n = number of basis functions.
inline int find_span(std::span<const double> t, int k, int n, double x) {
    if (x >= t[static_cast<std::size_t>(n)]) return n - 1;
    if (x <= t[static_cast<std::size_t>(k)]) return k;
    const auto it = std::upper_bound(t.begin() + k, t.begin() + n + 1, x);
    return static_cast<int>(it - t.begin()) - 1;
}

/// Nonzero basis values N_{l-k..l}(x) (Cox-de Boor).
inline void basis_funs(std::span<const double> t, int k, int l, double x, std::span<double> out) {
    std::array<double, 8> left{}, right{};
    out[0] = 1.0;
    for (int j = 1; j <= k; ++j) {
        left[static_cast<std::size_t>(j)] = x - t[static_cast<std::size_t>(l + 1 - j)];
        right[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(l + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double tmp = out[static_cast<std::size_t>(r)] / (right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)]);
            out[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * tmp;
            saved = left[static_cast<std::size_t>(j - r)] * tmp;
        }
        out[static_cast<std::size_t>(j)] = saved;
    }
}

/// ders[j][r] = d^j/dx^j N_{l-k+r}(x) for j <= k (Piegl & Tiller A2.3).
inline std::array<std::array<double, 6>, 6> basis_derivs(std::span<const double> t, int k, int l, double x) {
    std::array<std::array<double, 6>, 6> ndu{}, a{}, ders{};
    std::array<double, 6> left{}, right{};
    ndu[0][0] = 1.0;
    for (int j = 1; j <= k; ++j) {
        left[static_cast<std::size_t>(j)] = x - t[static_cast<std::size_t>(l + 1 - j)];
        right[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(l + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
            const double tmp = ndu[static_cast<std::size_t>(r)][static_cast<std::size_t>(j - 1)] / ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
            ndu[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = saved + right[static_cast<std::size_t>(r + 1)] * tmp;
            saved = left[static_cast<std::size_t>(j - r)] * tmp;
        }
        ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = saved;
    }
    for (int j = 0; j <= k; ++j) ders[0][static_cast<std::size_t>(j)] = ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    for (int r = 0; r <= k; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int q = 1; q <= k; ++q) {
            double d = 0.0;
            const int rk = r - q, pk = k - q;
            if (r >= q) {
                a[static_cast<std::size_t>(s2)][0] = a[static_cast<std::size_t>(s1)][0] / ndu[static_cast<std::size_t>(pk + 1)][static_cast<std::size_t>(rk)];
                d = a[static_cast<std::size_t>(s2)][0] * ndu[static_cast<std::size_t>(rk)][static_cast<std::size_t>(pk)];
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? q - 1 : k - r;
            for (int j = j1; j <= j2; ++j) {
                a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(j)] =
                    (a[static_cast<std::size_t>(s1)][static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(s1)][static_cast<std::size_t>(j - 1)]) /
                    ndu[static_cast<std::size_t>(pk + 1)][static_cast<std::size_t>(rk + j)];
                d += a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(j)] * ndu[static_cast<std::size_t>(rk + j)][static_cast<std::size_t>(pk)];
            }
            if (r <= pk) {
                a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(q)] = -a[static_cast<std::size_t>(s1)][static_cast<std::size_t>(q - 1)] / ndu[static_cast<std::size_t>(pk + 1)][static_cast<std::size_t>(r)];
                d += a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(q)] * ndu[static_cast<std::size_t>(r)][static_cast<std::size_t>(pk)];
            }
            ders[static_cast<std::size_t>(q)][static_cast<std::size_t>(r)] = d;
            std::swap(s1, s2);
        }
    }
    double f = k;
    for (int q = 1; q <= k; ++q) {
        for (int j = 0; j <= k; ++j) ders[static_cast<std::size_t>(q)][static_cast<std::size_t>(j)] *= f;
        f *= (k - q);
    }
    return ders;
}

/// LU of the B-spline collocation matrix in band storage, no pivoting.
/// Collocation matrices satisfying Schoenberg-Whitney are totally positive,
/// for which unpivoted elimination is stable.
class CollocationLu {
public:
    CollocationLu(std::span<const double> x, std::span<const double> t, int k)
        : n_(static_cast<int>(x.size())), k_(k), band_(static_cast<std::size_t>(n_ * (2 * k + 1)), 0.0) {
        std::array<double, 8> b{};
        for (int i = 0; i < n_; ++i) {
            const int l = find_span(t, k, n_, x[static_cast<std::size_t>(i)]);
            basis_funs(t, k, l, x[static_cast<std::size_t>(i)], b);
            for (int r = 0; r <= k; ++r) {
                const int j = l - k + r;
                if (std::abs(j - i) > k) throw std::logic_error("collocation matrix exceeds its band");
                at(i, j) = b[static_cast<std::size_t>(r)];
            }
        }
        for (int j = 0; j < n_; ++j) {
            const double piv = at(j, j);
            if (piv == 0.0) throw std::runtime_error("singular collocation matrix");
            for (int i = j + 1; i <= std::min(n_ - 1, j + k_); ++i) {
                const double f = at(i, j) / piv;
                if (f == 0.0) continue;
                at(i, j) = f;
                for (int c = j + 1; c <= std::min(n_ - 1, j + k_); ++c) at(i, c) -= f * at(j, c);
            }
        }
    }

    /// In-place solve; `rhs` is read with the given stride.
    void solve(double* rhs, std::ptrdiff_t stride = 1) const {
        auto v = [&](int i) -> double& { return rhs[static_cast<std::ptrdiff_t>(i) * stride]; };
        for (int i = 0; i < n_; ++i)
            for (int j = std::max(0, i - k_); j < i; ++j) v(i) -= at(i, j) * v(j);
        for (int i = n_ - 1; i >= 0; --i) {
            for (int j = i + 1; j <= std::min(n_ - 1, i + k_); ++j) v(i) -= at(i, j) * v(j);
            v(i) /= at(i, i);
        }
    }

private:
    int n_;
    int k_;
    std::vector<double> band_;
    double& at(int i, int j) { return band_[static_cast<std::size_t>(i * (2 * k_ + 1) + (j - i + k_))]; }
    double at(int i, int j) const { return band_[static_cast<std::size_t>(i * (2 * k_ + 1) + (j - i + k_))]; }
};

inline void check_sites(std::span<const double> xs, int order) {
    if (order < 1 || order > 5) throw std::invalid_argument("spline order must be in 1..5");
    if (xs.size() < static_cast<std::size_t>(order + 1))
        throw std::invalid_argument("spline of order " + std::to_string(order) + " needs at least " +
                                    std::to_string(order + 1) + " points");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("spline sites must be strictly increasing (duplicate knot)");
}

} // namespace detail

/// Piecewise polynomial of degree `order`. Interval i covers
/// [knots[i], knots[i+1]) (the last one is closed) and holds order+1
/// coefficients c_j of sum_j c_j (x - knots[i])^j.
struct Spline1D {
    int order = 0;
    std::vector<double> knots;
    std::vector<double> coefficients;

    std::size_t interval_count() const { return knots.size() - 1; }

    std::size_t interval_of(double x) const {
        if (!(x >= knots.front() && x <= knots.back()))
            throw std::out_of_range("spline evaluated outside [" + std::to_string(knots.front()) + ", " +
                                    std::to_string(knots.back()) + "]");
        const auto it = std::upper_bound(knots.begin(), knots.end(), x);
        const auto i = static_cast<std::size_t>(it - knots.begin());
        return std::min(i == 0 ? 0 : i - 1, interval_count() - 1);
    }

    /// nu-th derivative of the polynomial piece `interval` at x (no range check).
    double piece(std::size_t interval, double x, int nu = 0) const {
        const double* c = coefficients.data() + interval * static_cast<std::size_t>(order + 1);
        const double h = x - knots[interval];
        double acc = 0.0;
        for (int j = order; j >= nu; --j) {
            double f = 1.0;
            for (int r = 0; r < nu; ++r) f *= (j - r);
            acc = acc * h + f * c[j];
        }
        return acc;
    }

    double operator()(double x) const { return piece(interval_of(x), x); }
};

inline double spline_eval_1d(const Spline1D& sp, double x) { return sp(x); }

/// Interpolating spline of the given order through (xs, ys).
inline Spline1D spline_fit_1d(std::span<const double> xs, std::span<const double> ys, int order) {
    detail::check_sites(xs, order);
    if (ys.size() != xs.size()) throw std::invalid_argument("spline_fit_1d: xs and ys differ in length");
    const int k = order;
    const int n = static_cast<int>(xs.size());
    const std::vector<double> t = detail::not_a_knot_knots(xs, k);

    std::vector<double> c(ys.begin(), ys.end());
    detail::CollocationLu(xs, t, k).solve(c.data());

    Spline1D sp;
    sp.order = k;
    for (int l = k; l <= n; ++l) sp.knots.push_back(t[static_cast<std::size_t>(l)]);
    sp.coefficients.reserve(static_cast<std::size_t>((n - k) * (k + 1)));
    for (int l = k; l < n; ++l) {
        const auto d = detail::basis_derivs(t, k, l, t[static_cast<std::size_t>(l)]);
        double fact = 1.0;
        for (int j = 0; j <= k; ++j) {
            if (j > 0) fact *= j;
            double s = 0.0;
            for (int r = 0; r <= k; ++r) s += c[static_cast<std::size_t>(l - k + r)] * d[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
            sp.coefficients.push_back(s / fact);
        }
    }
    return sp;
}

/// Tensor-product cubic B-spline on a regular grid; `coefficients` is the
/// B-spline coefficient tensor with the last axis varying fastest.
struct GridSpline {
    int dim = 0;
    std::vector<std::vector<double>> axes;
    std::vector<std::vector<double>> knots;
    std::vector<double> coefficients;

    static constexpr int degree = 3;

    double operator()(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("grid spline: dimension mismatch");
        std::array<int, 3> first{};
        std::array<std::array<double, 8>, 3> basis{};
        std::array<std::size_t, 3> stride{};
        std::size_t s = 1;
        for (int a = dim - 1; a >= 0; --a) {
            stride[static_cast<std::size_t>(a)] = s;
            s *= axes[static_cast<std::size_t>(a)].size();
        }
        for (int a = 0; a < dim; ++a) {
            const auto& ax = axes[static_cast<std::size_t>(a)];
            const double xa = x[static_cast<std::size_t>(a)];
            if (!(xa >= ax.front() && xa <= ax.back())) throw std::out_of_range("grid spline evaluated outside its grid");
            const int n = static_cast<int>(ax.size());
            const int l = detail::find_span(knots[static_cast<std::size_t>(a)], degree, n, xa);
            detail::basis_funs(knots[static_cast<std::size_t>(a)], degree, l, xa, basis[static_cast<std::size_t>(a)]);
            first[static_cast<std::size_t>(a)] = l - degree;
        }
        double out = 0.0;
        if (dim == 2) {
            for (int i = 0; i <= degree; ++i) {
                double row = 0.0;
                const std::size_t base = static_cast<std::size_t>(first[0] + i) * stride[0];
                for (int j = 0; j <= degree; ++j)
                    row += basis[1][static_cast<std::size_t>(j)] * coefficients[base + static_cast<std::size_t>(first[1] + j)];
                out += basis[0][static_cast<std::size_t>(i)] * row;
            }
        } else {
            for (int i = 0; i <= degree; ++i) {
                double plane = 0.0;
                for (int j = 0; j <= degree; ++j) {
                    double row = 0.0;
                    const std::size_t base = static_cast<std::size_t>(first[0] + i) * stride[0] +
                                             static_cast<std::size_t>(first[1] + j) * stride[1];
                    for (int r = 0; r <= degree; ++r)
                        row += basis[2][static_cast<std::size_t>(r)] * coefficients[base + static_cast<std::size_t>(first[2] + r)];
                    plane += basis[1][static_cast<std::size_t>(j)] * row;
                }
                out += basis[0][static_cast<std::size_t>(i)] * plane;
            }
        }
        return out;
    }

    std::size_t point_count() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= a.size();
        return n;
    }
};

/// Interpolates `values` (last axis fastest) given on the tensor grid `axes`
/// with successive 1D cubic not-a-knot solves along each axis.
inline GridSpline grid_spline_fit_values(std::vector<std::vector<double>> axes, std::vector<double> values) {
    const int dim = static_cast<int>(axes.size());
    if (dim != 2 && dim != 3) throw std::invalid_argument("grid splines support dimension 2 or 3");
    GridSpline g;
    g.dim = dim;
    std::size_t total = 1;
    for (const auto& ax : axes) {
        if (ax.size() < 4) throw std::invalid_argument("grid spline needs at least 4 points per axis");
        detail::check_sites(ax, 3);
        g.knots.push_back(detail::not_a_knot_knots(ax, 3));
        total *= ax.size();
    }
    if (values.size() != total) throw std::invalid_argument("grid values do not match the grid size");

    std::vector<std::size_t> stride(static_cast<std::size_t>(dim));
    std::size_t s = 1;
    for (int a = dim - 1; a >= 0; --a) {
        stride[static_cast<std::size_t>(a)] = s;
        s *= axes[static_cast<std::size_t>(a)].size();
    }
    for (int a = 0; a < dim; ++a) {
        const auto& ax = axes[static_cast<std::size_t>(a)];
        const detail::CollocationLu lu(ax, g.knots[static_cast<std::size_t>(a)], 3);
        const std::size_t n = ax.size();
        const std::size_t st = stride[static_cast<std::size_t>(a)];
        // Every fiber along axis a starts at an index whose axis-a digit is 0.
        for (std::size_t start = 0; start < total; ++start) {
            if ((start / st) % n != 0) continue;
            lu.solve(values.data() + start, static_cast<std::ptrdiff_t>(st));
        }
    }
    g.axes = std::move(axes);
    g.coefficients = std::move(values);
    return g;
}

/// Samples `spec` on a pts_per_axis^d regular grid over `domain` and fits a
/// tensor-product cubic spline.
inline GridSpline grid_spline_fit(const TargetSpec& spec, const Domain& domain, int pts_per_axis) {
    domain.validate();
    if (spec.dim != 2 && spec.dim != 3) throw std::invalid_argument("grid splines support dimension 2 or 3");
    if (domain.dim() != spec.dim) throw std::invalid_argument("domain dimension does not match target dimension");
    if (pts_per_axis < 4) throw std::invalid_argument("grid spline needs at least 4 points per axis");
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(spec.dim));
    for (int a = 0; a < spec.dim; ++a) {
        const double lo = domain.lo[static_cast<std::size_t>(a)];
        const double hi = domain.hi[static_cast<std::size_t>(a)];
        for (int i = 0; i < pts_per_axis; ++i)
            axes[static_cast<std::size_t>(a)].push_back(i + 1 == pts_per_axis ? hi : lo + (hi - lo) * i / (pts_per_axis - 1));
    }
    std::size_t total = 1;
    for (const auto& ax : axes) total *= ax.size();
    std::vector<double> values(total);
    std::vector<double> x(static_cast<std::size_t>(spec.dim));
    std::vector<double> scratch(spec.graph.size());
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t r = flat;
        for (int a = spec.dim - 1; a >= 0; --a) {
            const std::size_t n = axes[static_cast<std::size_t>(a)].size();
            x[static_cast<std::size_t>(a)] = axes[static_cast<std::size_t>(a)][r % n];
            r /= n;
        }
        values[flat] = eval_target(spec, x, scratch);
    }
    return grid_spline_fit_values(std::move(axes), std::move(values));
}

} // namespace precml
