// End-to-end acceptance checks. `acceptance N` runs criterion N (1-8),
// no argument runs all of them. Each criterion ends with one PASS/FAIL line.

#include "precml/bench/fit.hpp"
#include "precml/bench/metrics.hpp"
#include "precml/bench/spectrum.hpp"
#include "precml/bench/sweep.hpp"
#include "precml/core/random.hpp"
#include "precml/net/boosted.hpp"
#include "precml/net/gadget.hpp"
#include "precml/optim/boost.hpp"
#include "precml/optim/subspace.hpp"
#include "precml/optim/train.hpp"
#include "precml/targets/catalog.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

using namespace precml;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

class Criterion {
public:
    Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {
        std::printf("== criterion %d: %s\n", id_, title_.c_str());
        std::fflush(stdout);
    }

    void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
        char buf[512];
        va_list ap;
        va_start(ap, fmt);
        std::vsnprintf(buf, sizeof buf, fmt, ap);
        va_end(ap);
        std::printf("   [%s] %s\n", ok ? "ok" : "FAILED", buf);
        std::fflush(stdout);
        pass_ = pass_ && ok;
    }

    void note(const std::string& s) {
        std::printf("   %s\n", s.c_str());
        std::fflush(stdout);
    }

    bool finish() const {
        std::printf("criterion %d %s: %s\n", id_, title_.c_str(), pass_ ? "PASS" : "FAIL");
        std::fflush(stdout);
        return pass_;
    }

private:
    int id_;
    std::string title_;
    bool pass_ = true;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

std::vector<Eigen::Index> powers_of_two(int lo, int hi) {
    std::vector<Eigen::Index> out;
    for (int k = lo; k <= hi; ++k) out.push_back(Eigen::Index{1} << k);
    return out;
}

std::vector<Eigen::Index> squares(std::initializer_list<int> sides) {
    std::vector<Eigen::Index> out;
    for (int s : sides) out.push_back(Eigen::Index{s} * s);
    return out;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------- 1, 2

struct SweepCheck {
    double alpha;
    double worst_train;
    bool all_ok;
};

SweepCheck sweep_and_fit(Criterion& c, const std::string& method, const std::string& target,
                         const std::vector<Eigen::Index>& sizes, const std::vector<std::uint64_t>& seeds) {
    const auto t0 = Clock::now();
    const SweepResult r = run_scaling_sweep(parse_method(method), find_target(target), sizes, seeds, SweepConfig{});
    SweepCheck out{0.0, 0.0, true};
    for (const auto& row : r.rows) {
        out.all_ok = out.all_ok && row.status == "ok";
        out.worst_train = std::max(out.worst_train, row.train_rmse_rel);
    }
    const auto pairs = scaling_pairs(r);
    std::string line = method + " on " + target + ":";
    for (const auto& [n, l] : pairs) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " %g:%.3g", n, l);
        line += buf;
    }
    c.note(line + "  (" + std::to_string(static_cast<int>(seconds_since(t0))) + " s)");
    out.alpha = fit_power_law(pairs).alpha;
    return out;
}

bool criterion1() {
    Criterion c(1, "simplex interpolation scaling");
    const std::vector<std::uint64_t> seeds{0, 1, 2};
    const auto a = sweep_and_fit(c, "simplex", "cos2x", powers_of_two(5, 12), seeds);
    c.check(std::abs(a.alpha - 2.0) <= 0.3, "cos2x alpha = %.3f, want 2.0 +/- 0.3 (median over 3 seeds)", a.alpha);
    c.check(a.all_ok && a.worst_train <= 1e-12, "cos2x worst train loss %.3g <= 1e-12", a.worst_train);
    const auto b = sweep_and_fit(c, "simplex", "xy", powers_of_two(7, 13), seeds);
    c.check(std::abs(b.alpha - 1.0) <= 0.2, "xy alpha = %.3f, want 1.0 +/- 0.2 (median over 3 seeds)", b.alpha);
    c.check(b.all_ok && b.worst_train <= 1e-12, "xy worst train loss %.3g <= 1e-12", b.worst_train);
    return c.finish();
}

bool criterion2() {
    Criterion c(2, "spline scaling");
    const std::vector<std::uint64_t> seeds{0};
    const auto s3 = sweep_and_fit(c, "spline-3", "cos2x", powers_of_two(4, 9), seeds);
    c.check(std::abs(s3.alpha - 4.0) <= 0.5, "order-3 cos2x alpha = %.3f, want 4.0 +/- 0.5", s3.alpha);
    const auto s2 = sweep_and_fit(c, "spline-2", "cos2x", powers_of_two(4, 12), seeds);
    c.check(std::abs(s2.alpha - 3.0) <= 0.5, "order-2 cos2x alpha = %.3f, want 3.0 +/- 0.5", s2.alpha);
    const auto g = sweep_and_fit(c, "spline-3", "cosxy", squares({8, 16, 32, 64, 128}), seeds);
    c.check(std::abs(g.alpha - 2.0) <= 0.4, "tensor-cubic cosxy alpha = %.3f, want 2.0 +/- 0.4", g.alpha);
    c.check(s3.all_ok && s2.all_ok && g.all_ok, "all spline cells ok");

    const auto& e = find_target("cos2x");
    const Method m = parse_method("spline-5");
    const FittedModel fm = fit_model(m, e, training_data(m, e, 4096, 0), FitConfig{}, 0);
    const double test = evaluate_test(fm, e, 0).rmse_rel;
    c.check(test <= 1e-12, "order-5 cos2x at 4096 points: test loss %.3g <= 1e-12", test);
    return c.finish();
}

// ---------------------------------------------------------------- 3

bool criterion3() {
    Criterion c(3, "multiplication gadget");
    std::vector<double> la, le;
    for (double a : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
        const Mlp g = multiplication_gadget({a, 1.0});
        double worst = 0.0;
        for (int i = 0; i <= 100; ++i)
            for (int j = 0; j <= 100; ++j) {
                const double x = -1.0 + 0.02 * i, y = -1.0 + 0.02 * j;
                const double in[2] = {x, y};
                worst = std::max(worst, std::abs(forward(g, in) - x * y));
            }
        la.push_back(std::log(a));
        le.push_back(std::log(worst));
        char buf[96];
        std::snprintf(buf, sizeof buf, "a = %g: max error %.3g on the 101x101 grid", a, worst);
        c.note(buf);
    }
    const double s = slope(la, le);
    c.check(std::abs(s - 2.0) <= 0.1, "log-log slope of max error in a = %.3f, want 2.0 +/- 0.1", s);

    const auto& e = find_target("dot3");
    const Dataset data = sample_dataset(e.spec, e.domain, 2000, 0);
    const auto ref = gadget_reference("dot3", {6, 12, 1}, Activation::tanh, 1e-4);
    const double ref_loss = relative_rmse(forward_batch(*ref, data.inputs), data.targets);
    c.check(ref_loss <= 1e-6, "dot3 gadget net [6,12,1], a = 1e-4: relative RMSE %.3g <= 1e-6", ref_loss);

    // Adam on the same shape, best of a small learning-rate grid.
    double best = std::numeric_limits<double>::infinity();
    const Method m = parse_method("tanh-mlp");
    for (double lr : {1e-2, 1e-3, 1e-4}) {
        FitConfig cfg;
        cfg.matched_params = false;
        cfg.width = 12;
        cfg.depth = 2;
        cfg.adam.lr = lr;
        const FittedModel fm = fit_model(m, e, data, cfg, 0);
        const double train = relative_rmse(fm.predict(data.inputs), data.targets);
        char buf[96];
        std::snprintf(buf, sizeof buf, "adam lr %g, %ld steps: train relative RMSE %.3g", lr, cfg.adam.steps, train);
        c.note(buf);
        best = std::min(best, train);
    }
    c.check(best > 1e-3, "best adam run on [6,12,1] stays above 1e-3 (%.3g)", best);
    return c.finish();
}

// ---------------------------------------------------------------- 4

bool criterion4() {
    Criterion c(4, "optimizer ladder on poly1d");
    const auto t0 = Clock::now();
    const auto& e = find_target("poly1d");
    auto [data, st] = normalize_inputs(sample_dataset(e.spec, e.domain, 256, 0));

    const Mlp init = init_for_targets({1, 40, 40, 1}, Activation::tanh, 0, data.targets);
    const TrainResult b = bfgs_minimize(init, data, BfgsConfig{});
    const double bfgs_rmse = b.history.back().rmse_rel;
    c.check(bfgs_rmse <= 1e-6, "bfgs, width 40 depth 3 (1761 params), seed 0: stopped by %s after %ld iterations at %.3g <= 1e-6",
            to_string(b.reason), b.iterations, bfgs_rmse);

    const TrainResult s = low_curvature_minimize(b.net, data, SubspaceConfig{});
    const double sub_rmse = s.history.back().rmse_rel;
    c.check(bfgs_rmse / sub_rmse >= 1.5, "low-curvature subspace, tau = 1e-16, %ld steps (%s): %.3g -> %.3g, factor %.4f >= 1.5",
            s.iterations, to_string(s.reason), bfgs_rmse, sub_rmse, bfgs_rmse / sub_rmse);

    std::vector<double> orders;
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        auto [d, n] = normalize_inputs(sample_dataset(e.spec, e.domain, 256, seed));
        BoostConfig cfg;
        cfg.stage1.seed = seed;
        cfg.stage2.seed = seed + 1;
        const BoostResult r = boost_train(d, cfg);
        orders.push_back(std::log10(r.stage1_rmse / r.assembled_rmse));
        char buf[128];
        std::snprintf(buf, sizeof buf, "boost 20+20 seed %llu: stage 1 %.3g -> assembled %.3g (%.2f orders)",
                      static_cast<unsigned long long>(seed), r.stage1_rmse, r.assembled_rmse, orders.back());
        c.note(buf);
    }
    const double med = median(orders);
    c.check(med >= 3.0, "boosting gain, median over 3 seeds: %.2f orders >= 3", med);
    const double wall = seconds_since(t0);
    c.check(wall <= 1200.0, "ladder wall time %.0f s <= 1200 s", wall);
    return c.finish();
}

// ---------------------------------------------------------------- 5

constexpr Eigen::Index DOT3_BOOST_N = 1000;
constexpr long DOT3_BOOST_ITERS = 10000;

bool criterion5() {
    Criterion c(5, "boosting on dot3");
    const auto& e = find_target("dot3");
    std::vector<double> orders;
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        auto [d, n] = normalize_inputs(sample_dataset(e.spec, e.domain, DOT3_BOOST_N, seed));
        BoostConfig cfg;
        cfg.stage1.seed = seed;
        cfg.stage2.seed = seed + 1;
        cfg.stage1.bfgs.max_iters = cfg.stage2.bfgs.max_iters = DOT3_BOOST_ITERS;
        const auto t0 = Clock::now();
        const BoostResult r = boost_train(d, cfg);
        orders.push_back(std::log10(r.stage1_rmse / r.assembled_rmse));
        char buf[160];
        std::snprintf(buf, sizeof buf, "seed %llu: stage 1 %.3g (%s) -> assembled %.3g (%s), %.2f orders, %.0f s",
                      static_cast<unsigned long long>(seed), r.stage1_rmse, to_string(r.stage1_reason), r.assembled_rmse,
                      to_string(r.stage2_reason), orders.back(), seconds_since(t0));
        c.note(buf);
    }
    const double med = median(orders);
    c.check(med >= 1.5, "boosting gain, median over 3 seeds: %.2f orders >= 1.5", med);
    return c.finish();
}

// ---------------------------------------------------------------- 6

bool criterion6() {
    Criterion c(6, "gradient mass at a teacher-student stall point");
    const auto& e = find_target("teacher");
    auto [data, st] = normalize_inputs(sample_dataset(e.spec, e.domain, 256, 0));
    const Mlp init = init_for_targets({2, 40, 40, 1}, Activation::tanh, 0, data.targets);
    BfgsConfig bc;
    bc.grad_tol = 0.0; // run until the line search gives up
    bc.max_seconds = 600.0;
    const TrainResult b = bfgs_minimize(init, data, bc);
    char buf[160];
    std::snprintf(buf, sizeof buf, "student [2,40,40,1] (%ld params): bfgs %s after %ld iterations, relative RMSE %.3g",
                  static_cast<long>(init.param_count()), to_string(b.reason), b.iterations, b.history.back().rmse_rel);
    c.note(buf);
    const auto rows = spectrum_report(b.net, data);
    const double top = gradient_mass_fraction(rows, 0.1, true);
    const double bottom = gradient_mass_fraction(rows, 0.5, false);
    c.check(top > bottom, "top 10%% of eigen-directions carry %.4g of |g|^2, bottom 50%% carry %.4g", top, bottom);
    return c.finish();
}

// ---------------------------------------------------------------- 7

// Loss in long double with its own forward pass, for central differences.
long double loss_ld(const std::vector<int>& dims, Activation act, const std::vector<long double>& theta, const Dataset& data) {
    long double total = 0.0L;
    for (Eigen::Index r = 0; r < data.size(); ++r) {
        std::vector<long double> cur(static_cast<std::size_t>(data.dim()));
        for (int j = 0; j < data.dim(); ++j) cur[static_cast<std::size_t>(j)] = data.inputs(r, j);
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            const int in = dims[l], out = dims[l + 1];
            std::vector<long double> next(static_cast<std::size_t>(out));
            for (int o = 0; o < out; ++o) {
                long double z = theta[off + static_cast<std::size_t>(in * out + o)];
                for (int i = 0; i < in; ++i) z += theta[off + static_cast<std::size_t>(o * in + i)] * cur[static_cast<std::size_t>(i)];
                if (l + 2 < dims.size()) z = act == Activation::tanh ? std::tanh(z) : (z > 0 ? z : 0.0L);
                next[static_cast<std::size_t>(o)] = z;
            }
            cur.swap(next);
            off += static_cast<std::size_t>(in * out + out);
        }
        const long double err = cur[0] - data.targets(r);
        total += err * err;
    }
    return total / static_cast<long double>(data.size());
}

Dataset noise_data(int n, int d, std::uint64_t seed) {
    Rng rng(seed);
    Dataset data;
    data.inputs.resize(n, d);
    data.targets.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) data.inputs(i, j) = uniform(rng, -1.5, 1.5);
        data.targets(i) = uniform(rng, -1.0, 1.0);
    }
    data.domain = Domain::cube(d, -1.5, 1.5);
    return data;
}

double worst_gradient_error(int nets) {
    Rng pick(2024);
    const int widths[] = {1, 3, 8, 17, 40};
    double worst = 0.0;
    for (int t = 0; t < nets; ++t) {
        const int depth = 1 + t % 4;
        const int d = 1 + static_cast<int>(uniform_index(pick, 3));
        std::vector<int> dims{d};
        for (int l = 1; l < depth; ++l) dims.push_back(widths[uniform_index(pick, 5)]);
        dims.push_back(1);
        const Activation act = t % 2 ? Activation::relu : Activation::tanh;
        Mlp net = mlp_init(dims, act, static_cast<std::uint64_t>(t));
        Eigen::VectorXd p = net.params();
        for (int l = 0; l < net.depth(); ++l)
            for (int o = 0; o < dims[static_cast<std::size_t>(l + 1)]; ++o) p(net.bias_offset(l) + o) = uniform(pick, -0.5, 0.5);
        net = net.with_params(p);
        const Dataset data = noise_data(20, d, static_cast<std::uint64_t>(900 + t));
        Eigen::VectorXd g;
        MseObjective(net, data)(p, &g);
        std::vector<long double> theta(p.data(), p.data() + p.size());
        const double floor = 1e-12 * (1.0 + g.cwiseAbs().maxCoeff());
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const long double t0 = theta[i], h = 1e-6L * (1.0L + std::abs(t0));
            theta[i] = t0 + h;
            const long double up = loss_ld(dims, act, theta, data);
            theta[i] = t0 - h;
            const long double down = loss_ld(dims, act, theta, data);
            theta[i] = t0;
            const double fd = static_cast<double>((up - down) / (2 * h));
            const double gi = g(static_cast<Eigen::Index>(i));
            worst = std::max(worst, std::abs(gi - fd) / std::max({std::abs(gi), std::abs(fd), floor}));
        }
    }
    return worst;
}

double reconstruction_error(const Eigen::MatrixXd& h) {
    const EigenSystem es = sym_eigendecompose(h);
    const Eigen::MatrixXd back = es.vectors * es.values.asDiagonal() * es.vectors.transpose();
    return (back - h).norm() / h.norm();
}

// Smallest d2 / r2 over every (simplex, vertex) pair, with the circumsphere
// solved directly from the vertex coordinates.
double min_circumsphere_ratio(const Triangulation& tri) {
    double worst = std::numeric_limits<double>::infinity();
    const int d = tri.dim;
    for (std::size_t s = 0; s < tri.simplex_count(); ++s) {
        Eigen::MatrixXd a(d, d);
        Eigen::VectorXd rhs(d);
        const Eigen::VectorXd v0 = tri.vertices.row(tri.simplices[s][0]).transpose();
        for (int k = 1; k <= d; ++k) {
            const Eigen::VectorXd vk = tri.vertices.row(tri.simplices[s][static_cast<std::size_t>(k)]).transpose();
            a.row(k - 1) = 2.0 * (vk - v0).transpose();
            rhs(k - 1) = vk.squaredNorm() - v0.squaredNorm();
        }
        const Eigen::VectorXd c = a.fullPivLu().solve(rhs);
        const double r2 = (v0 - c).squaredNorm();
        for (Eigen::Index v = 0; v < tri.vertices.rows(); ++v) {
            bool corner = false;
            for (int k = 0; k <= d; ++k) corner = corner || tri.simplices[s][static_cast<std::size_t>(k)] == v;
            if (!corner) worst = std::min(worst, (tri.vertices.row(v).transpose() - c).squaredNorm() / r2);
        }
    }
    return worst;
}

bool criterion7() {
    Criterion c(7, "numerical-core oracle suite");
    const double g = worst_gradient_error(50);
    c.check(g <= 1e-6, "analytic vs long-double central-difference gradient, 50 random nets: worst relative error %.3g", g);

    double worst_h = 0.0;
    for (int n : {20, 60, 300}) {
        Rng rng(static_cast<std::uint64_t>(n));
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = normal01(rng);
        worst_h = std::max(worst_h, reconstruction_error(0.5 * (m + m.transpose())));
    }
    {
        const Mlp net = mlp_init({2, 8, 8, 1}, Activation::tanh, 3);
        const Dataset data = noise_data(50, 2, 4);
        worst_h = std::max(worst_h, reconstruction_error(hessian(net, data)));
    }
    c.check(worst_h <= 1e-11, "|V diag(L) V^T - H|_F / |H|_F: worst %.3g <= 1e-11 (random 20, 60, 300 and a network Hessian)", worst_h);

    double worst_ratio = std::numeric_limits<double>::infinity();
    for (int d = 2; d <= 3; ++d)
        for (int n : {30, 100, 200}) {
            Rng rng(static_cast<std::uint64_t>(10 * n + d));
            Eigen::MatrixXd p(n, d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) p(i, j) = uniform(rng, 1.0, 5.0);
            worst_ratio = std::min(worst_ratio, min_circumsphere_ratio(delaunay_triangulate(p, Eigen::VectorXd::Zero(n))));
        }
    c.check(worst_ratio >= 1.0 - 1e-9, "empty circumspheres, n <= 200, d = 2, 3: min |v - c|^2 / r^2 = %.12f", worst_ratio);

    double worst_a = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const int d = 1 + static_cast<int>(s % 3);
        const Mlp f1 = mlp_init({d, 7, 5, 1}, Activation::tanh, s);
        const Mlp f2 = mlp_init({d, 4, 9, 1}, Activation::tanh, s + 100);
        const double cs = std::ldexp(1.0, -static_cast<int>(3 * s)) * 1.37;
        const Mlp both = assemble_boosted(f1, f2, cs);
        const Dataset data = noise_data(200, d, s + 7);
        const Eigen::VectorXd want = forward_batch(f1, data.inputs) + cs * forward_batch(f2, data.inputs);
        worst_a = std::max(worst_a, (forward_batch(both, data.inputs) - want).norm() / want.norm());
    }
    c.check(worst_a <= 1e-12, "assembled boosted net vs f1 + c f2: worst relative difference %.3g", worst_a);

    double worst_r = 0.0;
    Rng rng(99);
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd y(500), p(500);
        for (int i = 0; i < 500; ++i) {
            y(i) = normal01(rng);
            p(i) = y(i) + normal01(rng);
        }
        const double base = relative_rmse(p, y);
        for (double s : {1e-9, 0.37, 3.0, 1e7}) worst_r = std::max(worst_r, std::abs(relative_rmse(s * p, s * y) - base) / base);
    }
    c.check(worst_r <= 1e-15, "relative_rmse(s p, s y) vs relative_rmse(p, y): worst relative difference %.3g", worst_r);
    return c.finish();
}

// ---------------------------------------------------------------- 8

bool criterion8() {
    Criterion c(8, "modular and dense networks on xyz (smoke)");
    const auto& e = find_target("xyz");
    FitConfig cfg;
    cfg.adam.steps = 3000;
    cfg.modular_activation = Activation::tanh;
    for (const char* name : {"modular-mlp", "tanh-mlp"}) {
        const Method m = parse_method(name);
        const Dataset train = training_data(m, e, 500, 0);
        const FittedModel fm = fit_model(m, e, train, cfg, 0);
        const double tr = relative_rmse(fm.predict(train.inputs), train.targets);
        const double te = evaluate_test(fm, e, 0, 5000).rmse_rel;
        c.check(std::isfinite(tr) && std::isfinite(te), "%s: %ld params, train %.3g, test %.3g", name, static_cast<long>(fm.n_params), tr, te);

        if (const auto* mod = std::get_if<ModularNet>(&fm.model)) {
            // Block-diagonal rule: one [k, w, w, 1] block per k-ary node, no cross terms.
            const int w = mod->subnets.front().layer_dims()[1];
            Eigen::Index expect = 0;
            for (const auto& node : e.spec.graph) {
                const Eigen::Index k = op_arity(node.op);
                if (k > 0) expect += (k * w + w) + (w * w + w) + (w + 1);
            }
            c.check(mod->param_count() == expect && fm.n_params == expect,
                    "modular width %d: %ld params, block-diagonal count %ld", w, static_cast<long>(mod->param_count()),
                    static_cast<long>(expect));
        }
    }
    return c.finish();
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<bool()>> all{criterion1, criterion2, criterion3, criterion4,
                                                 criterion5, criterion6, criterion7, criterion8};
    std::vector<int> which;
    if (argc > 1) {
        for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    } else {
        for (int i = 1; i <= 8; ++i) which.push_back(i);
    }
    bool ok = true;
    for (int k : which) {
        if (k < 1 || k > 8) {
            std::fprintf(stderr, "usage: acceptance [1-8 ...]\n");
            return 2;
        }
        ok = all[static_cast<std::size_t>(k - 1)]() && ok;
    }
    return ok ? 0 : 1;
}
