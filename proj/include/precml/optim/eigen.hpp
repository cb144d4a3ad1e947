#pragma once

// Symmetric eigendecomposition: cyclic Jacobi rotations for small matrices,
// Householder tridiagonalization plus implicit QR (Eigen) for large ones.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace precml {

struct EigenSystem {
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXd vectors; // orthonormal columns, vectors.col(i) pairs with values(i)
};

/// Matrices up to this size go through Jacobi; beyond it O(N^3) per sweep
/// is too slow and the tridiagonal QR path takes over.
inline constexpr Eigen::Index jacobi_max_dim = 256;

namespace detail {

inline void check_symmetric(const Eigen::MatrixXd& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("eigendecomposition needs a square matrix");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("eigendecomposition: matrix is not symmetric to 1e-10");
}

inline EigenSystem sorted(Eigen::VectorXd values, const Eigen::MatrixXd& vectors) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values(a) < values(b); });
    EigenSystem es;
    es.values.resize(values.size());
    es.vectors.resize(vectors.rows(), vectors.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        es.values(static_cast<Eigen::Index>(k)) = values(idx[k]);
        es.vectors.col(static_cast<Eigen::Index>(k)) = vectors.col(idx[k]);
    }
    return es;
}

} // namespace detail

/// Cyclic (row-by-row) Jacobi until the largest off-diagonal entry is at most
/// 1e-14 * ||H||_F.
inline EigenSystem jacobi_eigendecompose(const Eigen::MatrixXd& h, int max_sweeps = 100) {
    detail::check_symmetric(h);
    const Eigen::Index n = h.rows();
    Eigen::MatrixXd a = 0.5 * (h + h.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double tol = 1e-14 * a.norm();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= tol) break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Rotation zeroing a(p, q) (Golub & Van Loan, sym.schur2).
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, tau) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    return detail::sorted(a.diagonal(), v);
}

inline EigenSystem sym_eigendecompose(const Eigen::MatrixXd& h) {
    if (h.rows() <= jacobi_max_dim) return jacobi_eigendecompose(h);
    detail::check_symmetric(h);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (h + h.transpose()));
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition did not converge");
    return detail::sorted(solver.eigenvalues(), solver.eigenvectors());
}

} // namespace precml
