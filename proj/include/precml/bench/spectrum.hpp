#pragma once

#include "precml/core/csv.hpp"
#include "precml/net/mlp.hpp"
#include "precml/optim/eigen.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace precml {

struct SpectrumRow {
    Eigen::Index index = 0;
    double eigenvalue = 0.0;
    double grad_projection_abs = 0.0; // |e_i . g|
};

/// Hessian eigenvalues (descending) of an objective at theta with the
/// gradient's projection on each eigenvector.
template <class Objective>
std::vector<SpectrumRow> spectrum_report(const Objective& f, const Eigen::VectorXd& theta, double hessian_step = 1e-5) {
    Eigen::VectorXd g(theta.size());
    f(theta, &g);
    const EigenSystem es = sym_eigendecompose(fd_hessian(f, theta, hessian_step));
    const Eigen::VectorXd proj = es.vectors.transpose() * g;
    const Eigen::Index n = es.values.size();
    std::vector<SpectrumRow> rows(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index k = n - 1 - i; // values ascend
        rows[static_cast<std::size_t>(i)] = {i, es.values(k), std::abs(proj(k))};
    }
    return rows;
}

inline std::vector<SpectrumRow> spectrum_report(const Mlp& net, const Dataset& data, double hessian_step = 1e-5) {
    return spectrum_report(MseObjective(net, data), net.params(), hessian_step);
}

/// Share of sum (e_i . g)^2 carried by the first `fraction` of the rows
/// (rows in descending eigenvalue order), or by the last when from_top is false.
inline double gradient_mass_fraction(const std::vector<SpectrumRow>& rows, double fraction, bool from_top) {
    if (rows.empty()) throw std::invalid_argument("empty spectrum");
    if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must lie in (0, 1]");
    const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(rows.size()))));
    double total = 0.0, part = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double m = rows[i].grad_projection_abs * rows[i].grad_projection_abs;
        total += m;
        if (from_top ? i < k : i >= rows.size() - k) part += m;
    }
    return total > 0.0 ? part / total : 0.0;
}

inline void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumRow>& rows) {
    out << "index,eigenvalue,grad_projection_abs\n";
    for (const auto& r : rows) out << r.index << ',' << format_double(r.eigenvalue) << ',' << format_double(r.grad_projection_abs) << '\n';
}

} // namespace precml
