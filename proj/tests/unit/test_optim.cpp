#include "precml/optim/boost.hpp"
#include "precml/optim/eigen.hpp"
#include "precml/optim/train.hpp"
#include "precml/targets/catalog.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace precml;

namespace {

// 0.5 (x - c)^T A (x - c); batch ignores the rows.
struct Quadratic {
    Eigen::MatrixXd a;
    Eigen::VectorXd c;

    double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* g) const {
        const Eigen::VectorXd d = x - c;
        const Eigen::VectorXd ad = a * d;
        if (g) *g = ad;
        return 0.5 * d.dot(ad);
    }
    double batch(const Eigen::VectorXd& x, std::span<const Eigen::Index>, Eigen::VectorXd* g) const { return (*this)(x, g); }
    Eigen::Index size() const { return 1; }
};

struct Rosenbrock {
    double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* g) const {
        const double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
        if (g) {
            g->resize(2);
            (*g)(0) = -2.0 * a - 400.0 * x(0) * b;
            (*g)(1) = 200.0 * b;
        }
        return a * a + 100.0 * b * b;
    }
};

// Records every point the optimizer evaluates with a gradient.
struct Traced {
    Quadratic q;
    mutable std::vector<std::pair<Eigen::VectorXd, double>> seen;
    double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* g) const {
        const double v = q(x, g);
        seen.emplace_back(x, v);
        return v;
    }
};

Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = nd(gen);
    return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = nd(gen);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return qr.householderQ();
}

Quadratic spd_quadratic(int n, std::uint64_t seed, double lo, double hi) {
    const Eigen::MatrixXd q = random_orthogonal(n, seed);
    Eigen::VectorXd lam(n);
    for (int i = 0; i < n; ++i) lam(i) = lo * std::pow(hi / lo, double(i) / (n - 1));
    Quadratic out;
    out.a = q * lam.asDiagonal() * q.transpose();
    out.a = 0.5 * (out.a + out.a.transpose());
    out.c = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0);
    return out;
}

} // namespace

// ---------------------------------------------------------------- Adam

TEST(Adam, FirstStepIsLrTimesSign) {
    for (double g0 : {5.0, -0.3, 1e-3}) {
        Quadratic q;
        q.a = Eigen::MatrixXd::Identity(1, 1);
        q.c = Eigen::VectorXd::Constant(1, -g0); // gradient at 0 is g0
        AdamConfig cfg;
        cfg.lr = 1e-2;
        cfg.steps = 1;
        auto r = adam_minimize(q, Eigen::VectorXd::Zero(1), cfg, 0);
        EXPECT_NEAR(r.theta(0), -cfg.lr * (g0 > 0 ? 1.0 : -1.0), 1e-6);
    }
}

TEST(Adam, QuadraticConverges) {
    Quadratic q; // (theta - 3)^2 = 0.5 * 2 * (theta - 3)^2
    q.a = Eigen::MatrixXd::Constant(1, 1, 2.0);
    q.c = Eigen::VectorXd::Constant(1, 3.0);
    AdamConfig cfg;
    cfg.lr = 1e-2;
    cfg.steps = 5000;
    auto r = adam_minimize(q, Eigen::VectorXd::Zero(1), cfg, 0);
    EXPECT_LE(std::abs(r.theta(0) - 3.0), 1e-3);
}

TEST(Adam, HistoryCadence) {
    Quadratic q = spd_quadratic(4, 1, 0.5, 2.0);
    AdamConfig cfg;
    cfg.steps = 250;
    auto r = adam_minimize(q, Eigen::VectorXd::Zero(4), cfg, 0);
    ASSERT_EQ(r.history.size(), 4u);
    EXPECT_EQ(r.history[0].step, 0);
    EXPECT_EQ(r.history[1].step, 100);
    EXPECT_EQ(r.history[2].step, 200);
    EXPECT_EQ(r.history[3].step, 250);
    for (const auto& row : r.history) EXPECT_EQ(row.phase, "adam");
}

TEST(Adam, BitReproducibleOnMinibatches) {
    const auto& e = find_target("cos2x");
    const Dataset d = sample_dataset(e.spec, e.domain, 300, 4);
    const Mlp net = mlp_init({1, 8, 8, 1}, Activation::tanh, 2);
    AdamConfig cfg;
    cfg.steps = 400;
    cfg.batch_size = 64;
    auto a = adam_minimize(net, d, cfg, 11);
    auto b = adam_minimize(net, d, cfg, 11);
    auto c = adam_minimize(net, d, cfg, 12);
    EXPECT_EQ(0, std::memcmp(a.net.params().data(), b.net.params().data(), sizeof(double) * a.net.param_count()));
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i].mse, b.history[i].mse);
    EXPECT_NE(a.net.params(), c.net.params()); // the shuffle seed matters
}

TEST(Adam, DoesNotReachFloorOnPoly1d) {
    const auto& e = find_target("poly1d");
    auto [d, st] = normalize_inputs(sample_dataset(e.spec, e.domain, 256, 0));
    const Mlp net = init_for_targets({1, 40, 40, 1}, Activation::tanh, 0, d.targets);
    auto r = adam_minimize(net, d, AdamConfig{}, 0);
    EXPECT_GT(r.history.back().rmse_rel, 1e-7);
    EXPECT_LT(r.history.back().rmse_rel, r.history.front().rmse_rel);
}

TEST(Adam, RejectsBadConfigAndNonFinite) {
    AdamConfig cfg;
    cfg.lr = 0.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = AdamConfig{};
    cfg.beta2 = 1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    EXPECT_EQ(AdamConfig{}.effective_batch(50000), 10000);
    EXPECT_EQ(AdamConfig{}.effective_batch(300), 300);

    Quadratic q;
    q.a = Eigen::MatrixXd::Constant(1, 1, 1.0);
    q.c = Eigen::VectorXd::Constant(1, std::nan(""));
    cfg = AdamConfig{};
    cfg.steps = 3;
    try {
        adam_minimize(q, Eigen::VectorXd::Zero(1), cfg, 0);
        FAIL();
    } catch (const NonFiniteLoss& err) {
        EXPECT_EQ(err.step(), 0);
    }
}

// ---------------------------------------------------------------- BFGS

TEST(Bfgs, Rosenbrock) {
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    BfgsConfig cfg;
    cfg.max_iters = 100;
    auto r = bfgs_minimize(Rosenbrock{}, x0, cfg);
    EXPECT_LE((r.theta - Eigen::Vector2d(1.0, 1.0)).norm(), 1e-6);
    EXPECT_LE(r.iterations, 100);
}

TEST(Bfgs, QuadraticDecreasesEveryIteration) {
    const Quadratic q = spd_quadratic(12, 3, 0.1, 50.0);
    BfgsConfig cfg;
    cfg.grad_tol = 1e-10;
    auto r = bfgs_minimize(q, Eigen::VectorXd::Zero(12), cfg);
    EXPECT_EQ(r.reason, StopReason::grad_tol);
    for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LT(r.history[i].mse, r.history[i - 1].mse) << i;
    EXPECT_LE((r.theta - q.c).norm(), 1e-9);
}

TEST(Bfgs, ExactOnQuadraticWithinDimensionSteps) {
    // With exact line searches BFGS terminates in n steps on a quadratic; a
    // Wolfe search is inexact, so allow a few more.
    const Quadratic q = spd_quadratic(6, 8, 1.0, 10.0);
    BfgsConfig cfg;
    cfg.grad_tol = 1e-12;
    auto r = bfgs_minimize(q, Eigen::VectorXd::Zero(6), cfg);
    EXPECT_EQ(r.reason, StopReason::grad_tol);
    EXPECT_LE(r.iterations, 30);
}

TEST(Bfgs, StrongWolfeHoldsAtAcceptedPoints) {
    Eigen::VectorXd x(2);
    x << -1.2, 1.0;
    const Rosenbrock f;
    Eigen::VectorXd g;
    double fx = f(x, &g);
    const double c1 = 1e-4, c2 = 0.9;
    int accepted = 0;
    // Steepest descent steps: a hard case for the search since scales vary.
    for (int it = 0; it < 200; ++it) {
        const Eigen::VectorXd dir = -g;
        const double slope = g.dot(dir);
        auto ls = strong_wolfe_search(f, x, fx, slope, dir, 1.0, c1, c2, 60);
        if (!ls.ok) break;
        EXPECT_LE(ls.f, fx + c1 * ls.t * slope);
        EXPECT_LE(std::abs(ls.g.dot(dir)), c2 * std::abs(slope));
        Eigen::VectorXd gt;
        EXPECT_DOUBLE_EQ(f(x + ls.t * dir, &gt), ls.f);
        x += ls.t * dir;
        fx = ls.f;
        g = ls.g;
        ++accepted;
    }
    EXPECT_GT(accepted, 100);
}

TEST(Bfgs, WolfeAlongEveryAcceptedBfgsStep) {
    // The history point after each step must satisfy both conditions relative
    // to the previous point along the step taken.
    Traced f{spd_quadratic(8, 5, 0.01, 100.0), {}};
    BfgsConfig cfg;
    cfg.grad_tol = 1e-9;
    auto r = bfgs_minimize(f, Eigen::VectorXd::Constant(8, 3.0), cfg);
    ASSERT_GT(r.history.size(), 2u);
    // Recover the accepted iterates: each history mse appears in `seen`.
    std::vector<Eigen::VectorXd> pts;
    for (const auto& row : r.history)
        for (const auto& [x, v] : f.seen)
            if (v == row.mse) {
                pts.push_back(x);
                break;
            }
    ASSERT_EQ(pts.size(), r.history.size());
    for (std::size_t i = 1; i < pts.size(); ++i) {
        Eigen::VectorXd g0, g1;
        const double f0 = f.q(pts[i - 1], &g0), f1 = f.q(pts[i], &g1);
        const Eigen::VectorXd s = pts[i] - pts[i - 1];
        EXPECT_LE(f1, f0 + cfg.c1 * g0.dot(s)) << i;
        EXPECT_LE(std::abs(g1.dot(s)), cfg.c2 * std::abs(g0.dot(s)) * (1 + 1e-12)) << i;
    }
}

TEST(Bfgs, HistoryNonIncreasingOnNetwork) {
    const auto& e = find_target("cos2x");
    const Dataset d = sample_dataset(e.spec, e.domain, 64, 1);
    const Mlp net = init_for_targets({1, 6, 6, 1}, Activation::tanh, 3, d.targets);
    BfgsConfig cfg;
    cfg.max_iters = 3000;
    auto r = bfgs_minimize(net, d, cfg);
    for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i].mse, r.history[i - 1].mse) << i;
    EXPECT_LT(r.history.back().rmse_rel, 1e-4);
}

TEST(Bfgs, CubicMinOracle) {
    // f(t) = (t - 0.3)^2 (t + 2): local minimum of the cubic at t = 0.3.
    auto f = [](double t) { return (t - 0.3) * (t - 0.3) * (t + 2.0); };
    auto df = [](double t) { return 2.0 * (t - 0.3) * (t + 2.0) + (t - 0.3) * (t - 0.3); };
    EXPECT_NEAR(detail::cubic_min(0.0, f(0.0), df(0.0), 1.0, f(1.0), df(1.0)), 0.3, 1e-12);
    EXPECT_NEAR(detail::cubic_min(1.0, f(1.0), df(1.0), 0.0, f(0.0), df(0.0)), 0.3, 1e-12);
}

TEST(Bfgs, ConfigValidation) {
    BfgsConfig cfg;
    cfg.c1 = 0.95;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = BfgsConfig{};
    cfg.c2 = 1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    Quadratic q;
    q.a = Eigen::MatrixXd::Identity(1, 1);
    q.c = Eigen::VectorXd::Constant(1, INFINITY);
    EXPECT_THROW(bfgs_minimize(q, Eigen::VectorXd::Zero(1), BfgsConfig{}), NonFiniteLoss);
}

// ---------------------------------------------------------------- eigen

TEST(Eigen, Diagonal) {
    Eigen::MatrixXd h(2, 2);
    h << 2, 0, 0, 1;
    auto es = sym_eigendecompose(h);
    EXPECT_DOUBLE_EQ(es.values(0), 1.0);
    EXPECT_DOUBLE_EQ(es.values(1), 2.0);
    EXPECT_DOUBLE_EQ(std::abs(es.vectors(1, 0)), 1.0);
    EXPECT_DOUBLE_EQ(std::abs(es.vectors(0, 1)), 1.0);
}

TEST(Eigen, Exchange) {
    Eigen::MatrixXd h(2, 2);
    h << 0, 1, 1, 0;
    auto es = sym_eigendecompose(h);
    EXPECT_NEAR(es.values(0), -1.0, 1e-15);
    EXPECT_NEAR(es.values(1), 1.0, 1e-15);
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(es.vectors(0, 0)), r, 1e-15);
    EXPECT_NEAR(es.vectors(0, 0), -es.vectors(1, 0), 1e-15);
    EXPECT_NEAR(es.vectors(0, 1), es.vectors(1, 1), 1e-15);
}

TEST(Eigen, ReconstructionAndOrthonormality) {
    for (int n : {5, 20, 60}) {
        const Eigen::MatrixXd h = random_symmetric(n, 100 + n);
        const auto es = jacobi_eigendecompose(h);
        const double hf = h.norm();
        const Eigen::MatrixXd rec = es.vectors * es.values.asDiagonal() * es.vectors.transpose();
        EXPECT_LE((rec - h).norm(), 1e-11 * hf) << n;
        EXPECT_LE((es.vectors.transpose() * es.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
        for (int i = 0; i < n; ++i) EXPECT_LE((h * es.vectors.col(i) - es.values(i) * es.vectors.col(i)).norm(), 1e-10 * hf);
        for (int i = 1; i < n; ++i) EXPECT_LE(es.values(i - 1), es.values(i));
    }
}

TEST(Eigen, SimilarityInvariance) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Eigen::MatrixXd h = random_symmetric(15, s);
        const Eigen::MatrixXd q = random_orthogonal(15, 50 + s);
        Eigen::MatrixXd h2 = q * h * q.transpose();
        h2 = 0.5 * (h2 + h2.transpose());
        const auto a = jacobi_eigendecompose(h), b = jacobi_eigendecompose(h2);
        EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-10) << s;
    }
}

TEST(Eigen, JacobiAgreesWithLibrarySolver) {
    const Eigen::MatrixXd h = random_symmetric(40, 9);
    const auto a = jacobi_eigendecompose(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(h);
    EXPECT_LE((a.values - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-12 * h.norm());
}

TEST(Eigen, LargeMatricesUseFallbackWithSameContract) {
    const int n = static_cast<int>(jacobi_max_dim) + 20;
    const Eigen::MatrixXd h = random_symmetric(n, 77);
    const auto es = sym_eigendecompose(h);
    const Eigen::MatrixXd rec = es.vectors * es.values.asDiagonal() * es.vectors.transpose();
    EXPECT_LE((rec - h).norm(), 1e-11 * h.norm());
    for (int i = 1; i < n; ++i) EXPECT_LE(es.values(i - 1), es.values(i));
}

TEST(Eigen, RejectsNonSymmetric) {
    Eigen::MatrixXd h(2, 2);
    h << 1, 2, 2.001, 1;
    EXPECT_THROW(sym_eigendecompose(h), std::invalid_argument);
    h(1, 0) = 2.0 + 1e-13;
    EXPECT_NO_THROW(sym_eigendecompose(h));
}

// ---------------------------------------------------------------- subspace

TEST(Subspace, ProjectionIsOrthogonalToHighCurvature) {
    const Eigen::MatrixXd h = random_symmetric(30, 4);
    const auto es = sym_eigendecompose(h);
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    Eigen::VectorXd g(30);
    for (auto& v : g) v = nd(gen);
    const double tau = 0.3;
    const Eigen::VectorXd gh = project_low_curvature(es, g, tau);
    for (int i = 0; i < 30; ++i)
        if (es.values(i) >= tau) EXPECT_LE(std::abs(gh.dot(es.vectors.col(i))), 1e-10 * g.norm()) << i;
        else EXPECT_NEAR(gh.dot(es.vectors.col(i)), g.dot(es.vectors.col(i)), 1e-10 * g.norm());
}

TEST(Subspace, ProjectionMatchesClosedForm) {
    // Two clusters with a known eigenbasis Q: the low cluster is the first k columns.
    const int n = 10, k = 4;
    const Eigen::MatrixXd q = random_orthogonal(n, 21);
    Eigen::VectorXd lam(n);
    lam << 1e-9, 2e-9, 3e-9, 5e-9, 1, 2, 3, 4, 5, 6;
    Eigen::MatrixXd h = q * lam.asDiagonal() * q.transpose();
    h = 0.5 * (h + h.transpose());
    const Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
    const Eigen::VectorXd expect = q.leftCols(k) * (q.leftCols(k).transpose() * g);
    const Eigen::VectorXd got = project_low_curvature(sym_eigendecompose(h), g, 1e-3);
    EXPECT_LE((got - expect).norm(), 1e-10 * g.norm());
    EXPECT_EQ(project_low_curvature(sym_eigendecompose(h), g, -1.0).norm(), 0.0);
}

TEST(Subspace, ScanGoldenFindsParabolaMinimum) {
    for (double tstar : {1e-6, 0.37, 5.0, 3e7}) {
        auto phi = [&](double t) { return (t - tstar) * (t - tstar) / (tstar * tstar); };
        auto r = scan_golden_search(phi, phi(0.0), -40, 120, 80);
        EXPECT_NEAR(r.t / tstar, 1.0, 1e-6) << tstar;
        EXPECT_LT(r.f, 1.0);
    }
    auto up = [](double t) { return 1.0 + t; };
    EXPECT_EQ(scan_golden_search(up, 1.0, -10, 10, 20).t, 0.0);
}

TEST(Subspace, QuadraticWithFlatDirections) {
    // Flat directions with tiny curvature: the projected step must make
    // progress there and never increase the loss.
    const int n = 6;
    const Eigen::MatrixXd q = random_orthogonal(n, 31);
    Eigen::VectorXd lam(n);
    lam << 1e-4, 2e-4, 10, 20, 30, 40;
    Quadratic f;
    f.a = q * lam.asDiagonal() * q.transpose();
    f.a = 0.5 * (f.a + f.a.transpose());
    f.c = Eigen::VectorXd::Ones(n);
    SubspaceConfig cfg;
    cfg.tau = 1e-2;
    cfg.max_steps = 5;
    auto r = low_curvature_minimize(f, Eigen::VectorXd::Zero(n), cfg);
    for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i].mse, r.history[i - 1].mse);
    // Exact minimizer over the flat subspace from theta0 = 0.
    const Eigen::VectorXd d0 = -f.c;
    const Eigen::VectorXd flat = q.leftCols(2) * (q.leftCols(2).transpose() * d0);
    const double f_best = f(Eigen::VectorXd::Zero(n) - flat, nullptr);
    EXPECT_LE(r.history.back().mse, f_best + 1e-6);
}

TEST(Subspace, NoLowCurvatureMeansConverged) {
    Quadratic f = spd_quadratic(5, 2, 1.0, 3.0);
    SubspaceConfig cfg;
    cfg.tau = 0.5;
    auto r = low_curvature_minimize(f, Eigen::VectorXd::Zero(5), cfg);
    EXPECT_EQ(r.reason, StopReason::subspace_converged);
    EXPECT_EQ(r.iterations, 0);
    cfg.tau = NAN;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Subspace, NeverIncreasesNetworkLoss) {
    const auto& e = find_target("cos2x");
    const Dataset d = sample_dataset(e.spec, e.domain, 40, 2);
    const Mlp net = init_for_targets({1, 5, 5, 1}, Activation::tanh, 1, d.targets);
    BfgsConfig bc;
    bc.max_iters = 300;
    auto b = bfgs_minimize(net, d, bc);
    SubspaceConfig cfg;
    cfg.tau = 1e-6;
    cfg.max_steps = 4;
    auto s = low_curvature_minimize(b.net, d, cfg);
    EXPECT_LE(s.history.back().mse, b.history.back().mse);
    for (std::size_t i = 1; i < s.history.size(); ++i) EXPECT_LT(s.history[i].mse, s.history[i - 1].mse);
}

TEST(Subspace, UsesExactHessianWhenAvailable) {
    const auto& e = find_target("cos2x");
    const Dataset d = sample_dataset(e.spec, e.domain, 30, 4);
    const Mlp net = init_for_targets({1, 4, 4, 1}, Activation::tanh, 2, d.targets);
    const MseObjective f(net, d);
    const Eigen::MatrixXd exact = f.exact_hessian(net.params());
    const Eigen::MatrixXd used = detail::subspace_hessian(f, net.params(), 1e-5);
    EXPECT_LE((used - 0.5 * (exact + exact.transpose())).norm(), 1e-15 * exact.norm());
    // A bare objective without exact_hessian falls back to finite differences.
    auto bare = [&](const Eigen::VectorXd& t, Eigen::VectorXd* g) { return f(t, g); };
    EXPECT_EQ(detail::subspace_hessian(bare, net.params(), 1e-5), fd_hessian(f, net.params(), 1e-5));
}

// ---------------------------------------------------------------- boosting

TEST(Boost, AssembledEqualsComposite) {
    const auto& e = find_target("cos2x");
    const Dataset d = sample_dataset(e.spec, e.domain, 80, 3);
    BoostConfig cfg;
    cfg.stage1.hidden = {6, 6};
    cfg.stage2.hidden = {5, 5};
    cfg.stage1.bfgs.max_iters = 300;
    cfg.stage2.bfgs.max_iters = 300;
    cfg.stage2.seed = 1;
    auto r = boost_train(d, cfg);
    EXPECT_GT(r.c, 0.0);
    const Eigen::VectorXd p1 = forward_batch(r.f1, d.inputs), p2 = forward_batch(r.f2, d.inputs);
    const Eigen::VectorXd pa = forward_batch(r.assembled, d.inputs);
    const Eigen::VectorXd pc = p1 + r.c * p2;
    EXPECT_LE((pa - pc).cwiseAbs().maxCoeff(), 1e-12 * pc.cwiseAbs().maxCoeff());
    EXPECT_NEAR(r.assembled_rmse, r.composite_rmse, 1e-10 * r.composite_rmse);
    EXPECT_LT(r.composite_rmse, r.stage1_rmse);
    // c is the RMS of the stage-1 residual.
    EXPECT_NEAR(r.c, std::sqrt((d.targets - p1).squaredNorm() / d.size()), 1e-15);
    // Stage-2 history is expressed on the original targets and continues the steps.
    const auto split = std::find_if(r.history.begin(), r.history.end(), [](const HistoryRow& h) { return h.phase == "stage2"; });
    ASSERT_NE(split, r.history.end());
    EXPECT_GT(split->step, (split - 1)->step);
    EXPECT_NEAR(r.history.back().rmse_rel, r.composite_rmse, 1e-8 * r.composite_rmse);
}

TEST(Boost, Poly1dGainsThreeOrders) {
    const auto& e = find_target("poly1d");
    auto [d, st] = normalize_inputs(sample_dataset(e.spec, e.domain, 256, 0));
    BoostConfig cfg;
    cfg.stage2.seed = 1;
    auto r = boost_train(d, cfg);
    EXPECT_LE(r.assembled_rmse, 1e-3 * r.stage1_rmse) << r.stage1_rmse << " -> " << r.assembled_rmse;
    EXPECT_EQ(r.assembled.layer_dims(), (std::vector<int>{1, 40, 40, 1}));
}

TEST(Boost, DepthMismatchAndBadOptimizer) {
    Dataset d;
    d.inputs = Eigen::MatrixXd::Random(5, 1);
    d.targets = Eigen::VectorXd::Random(5);
    BoostConfig cfg;
    cfg.stage2.hidden = {4};
    EXPECT_THROW(boost_train(d, cfg), std::invalid_argument);
    cfg.stage2.hidden = {4, 4};
    cfg.stage1.optimizer = "lbfgs";
    EXPECT_THROW(boost_train(d, cfg), std::invalid_argument);
}

// ---------------------------------------------------------------- history

TEST(History, CsvFormat) {
    History h{{0, 0.25, 0.5, "bfgs"}, {3, 1e-20, 1.0 / 3.0, "subspace"}};
    std::ostringstream os;
    write_history_csv(os, h);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "step,mse,rmse_rel,phase");
    std::getline(is, line);
    EXPECT_EQ(line, "0,0.25,0.5,bfgs");
    std::getline(is, line);
    auto f = split_csv_line(line);
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(parse_double(f[2]), 1.0 / 3.0);
    EXPECT_EQ(f[3], "subspace");
    EXPECT_STREQ(to_string(StopReason::subspace_converged), "subspace_converged");
}
