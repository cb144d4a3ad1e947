#pragma once

// Command-line front end: fit, sweep, powerlaw, spectrum, boost, catalog.

#include "precml/bench/fit.hpp"
#include "precml/bench/metrics.hpp"
#include "precml/bench/spectrum.hpp"
#include "precml/bench/sweep.hpp"
#include "precml/optim/boost.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace precml {

namespace detail {

template <class T>
std::vector<T> parse_list(const std::string& s, const char* what) {
    std::vector<T> out;
    for (const auto& f : split_csv_line(s)) {
        if (f.empty()) throw std::invalid_argument(std::string("empty entry in ") + what);
        std::size_t used = 0;
        T v{};
        if constexpr (std::is_same_v<T, int>) v = std::stoi(f, &used);
        else if constexpr (std::is_same_v<T, std::uint64_t>) v = std::stoull(f, &used);
        else v = static_cast<T>(std::stoll(f, &used));
        if (used != f.size()) throw std::invalid_argument(std::string("bad number '") + f + "' in " + what);
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument(std::string("empty ") + what);
    return out;
}

// Writes to `path`, or to `fallback` when path is empty or "-".
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
    if (path.empty() || path == "-") {
        write(fallback);
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    write(f);
}

struct TrainFlags {
    int depth = 3;
    int width = 0; // 0 = matched
    std::string optimizer = "adam";
    long steps = 20000;
    double lr = 1e-3;
    long bfgs_iters = 100000;
    std::string modular_activation = "relu";
    double timeout = 300.0;
    bool no_normalize = false;

    void add(CLI::App* c) {
        c->add_option("--depth", depth, "affine maps per network (hidden layers + 1)")->check(CLI::Range(2, 64));
        c->add_option("--width", width, "network width; 0 matches N to |D|(d+1)")->check(CLI::Range(0, 100000));
        c->add_option("--optimizer", optimizer, "network optimizer")->check(CLI::IsMember({"adam", "bfgs"}));
        c->add_option("--steps", steps, "Adam steps")->check(CLI::PositiveNumber);
        c->add_option("--lr", lr, "Adam learning rate")->check(CLI::PositiveNumber);
        c->add_option("--bfgs-iters", bfgs_iters, "BFGS iteration cap")->check(CLI::PositiveNumber);
        c->add_option("--modular-activation", modular_activation, "activation inside modular subnets")
            ->check(CLI::IsMember({"relu", "tanh"}));
        c->add_option("--timeout", timeout, "per-fit wall-clock budget in seconds (0 = none)")->check(CLI::NonNegativeNumber);
        c->add_flag("--no-normalize", no_normalize, "feed raw inputs to networks");
    }

    FitConfig config() const {
        FitConfig fc;
        fc.depth = depth;
        fc.matched_params = width == 0;
        if (width > 0) fc.width = width;
        fc.optimizer = optimizer;
        fc.adam.steps = steps;
        fc.adam.lr = lr;
        fc.bfgs.max_iters = bfgs_iters;
        fc.modular_activation = parse_activation(modular_activation);
        fc.normalize = !no_normalize;
        fc.max_seconds = timeout;
        return fc;
    }
};

inline std::optional<NormStats> norm_from_json(const nlohmann::json& j) {
    if (!j.contains("input_mean")) return std::nullopt;
    const auto m = j.at("input_mean").get<std::vector<double>>();
    const auto s = j.at("input_std").get<std::vector<double>>();
    NormStats n;
    n.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    n.std = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    return n;
}

} // namespace detail

/// Runs the CLI; returns the process exit code.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"precml: precision function fitting experiments"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    std::string out_path;
    std::string format = "csv";
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));

    // catalog
    auto* cat = app.add_subcommand("catalog", "list the built-in targets");

    // fit
    auto* fit = app.add_subcommand("fit", "fit one method to one target; writes the model JSON to --out and prints metrics");
    std::string method_s, target_s;
    long size = 256;
    Eigen::Index test_size = 30000;
    detail::TrainFlags tf;
    fit->add_option("--method", method_s, "simplex, spline-<1..5>, relu-mlp, tanh-mlp, modular-mlp")->required();
    fit->add_option("--target", target_s, "catalog target name")->required();
    fit->add_option("--size", size, "training set size |D|")->check(CLI::PositiveNumber);
    fit->add_option("--test-size", test_size, "fresh test points before the interior filter")->check(CLI::PositiveNumber);
    tf.add(fit);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "scaling sweep over data sizes and seeds");
    std::string sizes_s, seeds_s;
    sweep->add_option("--method", method_s, "method name")->required();
    sweep->add_option("--target", target_s, "catalog target name")->required();
    sweep->add_option("--sizes", sizes_s, "comma-separated ascending sizes")->required();
    sweep->add_option("--seeds", seeds_s, "comma-separated seeds (default: --seed)");
    sweep->add_option("--test-size", test_size, "fresh test points before the interior filter")->check(CLI::PositiveNumber);
    tf.add(sweep);

    // powerlaw
    auto* pl = app.add_subcommand("powerlaw", "fit loss ~ N^-alpha to a sweep CSV");
    std::string in_path;
    double floor = 1e-13;
    std::string column = "test", against = "params";
    pl->add_option("--in", in_path, "sweep CSV")->required();
    pl->add_option("--floor", floor, "drop losses at or below this value")->check(CLI::NonNegativeNumber);
    pl->add_option("--column", column, "loss column")->check(CLI::IsMember({"test", "train"}));
    pl->add_option("--against", against, "N axis")->check(CLI::IsMember({"params", "data"}));

    // spectrum
    auto* spec = app.add_subcommand("spectrum", "Hessian spectrum of a saved network on target data");
    std::string model_path;
    double hstep = 1e-5;
    spec->add_option("--model", model_path, "model JSON from fit or boost")->required();
    spec->add_option("--target", target_s, "catalog target name")->required();
    spec->add_option("--size", size, "data set size")->check(CLI::PositiveNumber);
    spec->add_option("--hessian-step", hstep, "relative finite-difference step")->check(CLI::PositiveNumber);

    // boost
    auto* boost = app.add_subcommand("boost", "two-stage boosted training; writes the assembled model to --out and the history");
    std::string widths_s = "20,20", hist_path;
    boost->add_option("--target", target_s, "catalog target name")->required();
    boost->add_option("--widths", widths_s, "stage widths w1,w2");
    boost->add_option("--size", size, "training set size")->check(CLI::PositiveNumber);
    boost->add_option("--history", hist_path, "history CSV path (default: stdout)");
    detail::TrainFlags bf;
    bf.optimizer = "bfgs";
    bf.add(boost);

    for (auto* s : {cat, fit, sweep, pl, spec, boost}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code != 0) err << app.help();
        return code;
    }

    try {
        const bool json = format == "json";
        if (cat->parsed()) {
            detail::emit(out_path, out, [&](std::ostream& o) {
                nlohmann::json arr = nlohmann::json::array();
                if (!json) o << "name,dim,lo,hi,max_arity,formula\n";
                for (const auto& e : builtin_catalog()) {
                    const std::string formula = format_expression(e.spec);
                    if (json)
                        arr.push_back({{"name", e.spec.name}, {"dim", e.spec.dim}, {"lo", e.domain.lo}, {"hi", e.domain.hi},
                                       {"max_arity", max_arity(e.spec)}, {"formula", formula}, {"description", e.description}});
                    else
                        o << e.spec.name << ',' << e.spec.dim << ',' << format_double(e.domain.lo[0]) << ','
                          << format_double(e.domain.hi[0]) << ',' << max_arity(e.spec) << ',' << formula << '\n';
                }
                if (json) o << arr.dump(1) << '\n';
            });
            return 0;
        }

        if (fit->parsed()) {
            const Method m = parse_method(method_s);
            const CatalogEntry& target = find_target(target_s);
            const auto start = std::chrono::steady_clock::now();
            const Dataset train = training_data(m, target, size, seed);
            const FittedModel fm = fit_model(m, target, train, tf.config(), seed);
            const TestEvaluation te = evaluate_test(fm, target, seed, test_size, 0.1);
            const LossBreakdown lb = loss_decomposition_report(fm, target, train, te.rmse_rel);
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (!out_path.empty() && out_path != "-") {
                std::ofstream f(out_path);
                if (!f) throw std::runtime_error("cannot write " + out_path);
                f << to_json(fm).dump(1) << '\n';
            }
            auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("unavailable"); };
            if (json) {
                nlohmann::json j{{"method", m.name()}, {"target", target_s}, {"n_train", train.size()}, {"n_params", fm.n_params},
                                 {"seed", seed}, {"train_rmse_rel", lb.train_loss}, {"test_rmse_rel", lb.test_loss},
                                 {"generalization_gap_est", lb.generalization_gap_est}, {"test_points", te.used},
                                 {"test_outside_hull", te.outside_hull}, {"stop_reason", to_string(fm.reason)},
                                 {"timed_out", fm.timed_out}, {"wall_seconds", wall}};
                j["reference_loss"] = lb.reference_loss ? nlohmann::json(*lb.reference_loss) : nlohmann::json(nullptr);
                j["optimization_error_est"] =
                    lb.optimization_error_est ? nlohmann::json(*lb.optimization_error_est) : nlohmann::json(nullptr);
                j["reference"] = lb.reference;
                out << j.dump(1) << '\n';
            } else {
                out << "method,target,n_train,n_params,seed,train_rmse_rel,test_rmse_rel,generalization_gap_est,"
                       "reference_loss,optimization_error_est,stop_reason,wall_seconds\n"
                    << m.name() << ',' << target_s << ',' << train.size() << ',' << fm.n_params << ',' << seed << ','
                    << format_double(lb.train_loss) << ',' << format_double(lb.test_loss) << ','
                    << format_double(lb.generalization_gap_est) << ',' << opt(lb.reference_loss) << ','
                    << opt(lb.optimization_error_est) << ',' << to_string(fm.reason) << ',' << format_double(wall) << '\n';
            }
            return 0;
        }

        if (sweep->parsed()) {
            const Method m = parse_method(method_s);
            const CatalogEntry& target = find_target(target_s);
            const auto sizes = detail::parse_list<Eigen::Index>(sizes_s, "--sizes");
            const auto seeds = seeds_s.empty() ? std::vector<std::uint64_t>{seed} : detail::parse_list<std::uint64_t>(seeds_s, "--seeds");
            SweepConfig sc;
            sc.fit = tf.config();
            sc.fit.max_seconds = 0.0;
            sc.timeout_seconds = tf.timeout;
            sc.test_size = test_size;
            const SweepResult r = run_scaling_sweep(m, target, sizes, seeds, sc);
            detail::emit(out_path, out, [&](std::ostream& o) {
                if (json) o << to_json(r).dump(1) << '\n';
                else write_sweep_csv(o, r);
            });
            return 0;
        }

        if (pl->parsed()) {
            std::ifstream f(in_path);
            if (!f) throw std::runtime_error("cannot read " + in_path);
            const SweepResult r = read_sweep_csv(f);
            SweepResult use = r;
            for (auto& row : use.rows) {
                if (column == "train") row.test_rmse_rel = row.train_rmse_rel;
                if (against == "data") row.n_params = row.n_train;
            }
            const PowerLawFit p = fit_power_law(scaling_pairs(use), floor);
            detail::emit(out_path, out, [&](std::ostream& o) {
                if (json)
                    o << nlohmann::json{{"alpha", p.alpha}, {"log_intercept", p.log_intercept}, {"r_squared", p.r_squared},
                                        {"floor_cutoff", p.floor_cutoff}, {"points_used", p.points_used}}
                             .dump(1)
                      << '\n';
                else
                    o << "alpha,log_intercept,r_squared,floor_cutoff,points_used\n"
                      << format_double(p.alpha) << ',' << format_double(p.log_intercept) << ',' << format_double(p.r_squared)
                      << ',' << format_double(p.floor_cutoff) << ',' << p.points_used << '\n';
            });
            return 0;
        }

        if (spec->parsed()) {
            std::ifstream f(model_path);
            if (!f) throw std::runtime_error("cannot read " + model_path);
            const nlohmann::json j = nlohmann::json::parse(f);
            const nlohmann::json& mj = j.contains("model") ? j.at("model") : j;
            const Mlp net = mlp_from_json(mj);
            const CatalogEntry& target = find_target(target_s);
            Dataset data = sample_dataset(target.spec, target.domain, size, seed);
            if (auto n = detail::norm_from_json(j)) data.inputs = n->apply(data.inputs);
            const auto rows = spectrum_report(net, data, hstep);
            detail::emit(out_path, out, [&](std::ostream& o) {
                if (json) {
                    nlohmann::json arr = nlohmann::json::array();
                    for (const auto& r : rows)
                        arr.push_back({{"index", r.index}, {"eigenvalue", r.eigenvalue}, {"grad_projection_abs", r.grad_projection_abs}});
                    o << arr.dump(1) << '\n';
                } else
                    write_spectrum_csv(o, rows);
            });
            return 0;
        }

        if (boost->parsed()) {
            const auto widths = detail::parse_list<int>(widths_s, "--widths");
            if (widths.size() != 2 || widths[0] < 1 || widths[1] < 1) throw std::invalid_argument("--widths needs two positive widths");
            const CatalogEntry& target = find_target(target_s);
            const Dataset raw = sample_dataset(target.spec, target.domain, size, seed);
            const FitConfig fc = bf.config();
            Dataset data = raw;
            std::optional<NormStats> norm;
            if (fc.normalize) {
                auto [nd, st] = normalize_inputs(raw);
                data = std::move(nd);
                norm = std::move(st);
            }
            BoostConfig bc;
            bc.activation = Activation::tanh;
            for (int k = 0; k < 2; ++k) {
                StageConfig& s = k == 0 ? bc.stage1 : bc.stage2;
                s.hidden.assign(static_cast<std::size_t>(fc.depth - 1), widths[static_cast<std::size_t>(k)]);
                s.optimizer = fc.optimizer;
                s.adam = fc.adam;
                s.bfgs = fc.bfgs;
                if (fc.max_seconds > 0.0) s.adam.max_seconds = s.bfgs.max_seconds = fc.max_seconds;
                s.seed = seed + static_cast<std::uint64_t>(k);
            }
            const BoostResult r = boost_train(data, bc);
            if (!out_path.empty() && out_path != "-") {
                nlohmann::json j;
                j["method"] = "boosted-tanh-mlp";
                j["model"] = to_json(r.assembled);
                j["c"] = r.c;
                j["stage1_rmse_rel"] = r.stage1_rmse;
                j["assembled_rmse_rel"] = r.assembled_rmse;
                if (norm) {
                    j["input_mean"] = std::vector<double>(norm->mean.data(), norm->mean.data() + norm->mean.size());
                    j["input_std"] = std::vector<double>(norm->std.data(), norm->std.data() + norm->std.size());
                }
                std::ofstream f(out_path);
                if (!f) throw std::runtime_error("cannot write " + out_path);
                f << j.dump(1) << '\n';
            }
            detail::emit(hist_path, out, [&](std::ostream& o) { write_history_csv(o, r.history); });
            err << "stage1 " << format_double(r.stage1_rmse) << " (" << to_string(r.stage1_reason) << "), assembled "
                << format_double(r.assembled_rmse) << " (" << to_string(r.stage2_reason) << "), c = " << format_double(r.c) << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

} // namespace precml
