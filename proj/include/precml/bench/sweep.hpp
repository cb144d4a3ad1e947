#pragma once

#include "precml/bench/fit.hpp"
#include "precml/core/csv.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace precml {

struct SweepRow {
    std::string method;
    std::string target;
    Eigen::Index n_train = 0;
    Eigen::Index n_params = 0;
    std::uint64_t seed = 0;
    double train_rmse_rel = 0.0;
    double test_rmse_rel = 0.0;
    double wall_seconds = 0.0;
    std::string status = "ok"; // "ok", "timeout", or "error: ..."; losses are NaN unless ok
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

struct SweepConfig {
    FitConfig fit;
    Eigen::Index test_size = 30000;
    double margin = 0.1;
    double timeout_seconds = 300.0;
};

inline void sort_rows(std::vector<SweepRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.method, a.target, a.n_train, a.seed) < std::tie(b.method, b.target, b.n_train, b.seed);
    });
}

/// One cell: sample, fit, score. Failures and timeouts come back as flagged
/// rows with NaN losses.
inline SweepRow run_cell(const Method& m, const CatalogEntry& target, Eigen::Index n, std::uint64_t seed,
                         const SweepConfig& cfg) {
    SweepRow row;
    row.method = m.name();
    row.target = target.spec.name;
    row.n_train = n;
    row.seed = seed;
    row.train_rmse_rel = row.test_rmse_rel = std::numeric_limits<double>::quiet_NaN();
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    try {
        const Dataset train = training_data(m, target, n, seed);
        row.n_train = train.size();
        FitConfig fc = cfg.fit;
        if (cfg.timeout_seconds > 0.0) fc.max_seconds = cfg.timeout_seconds;
        const FittedModel fm = fit_model(m, target, train, fc, seed);
        row.n_params = fm.n_params;
        if (fm.timed_out || (cfg.timeout_seconds > 0.0 && elapsed() > cfg.timeout_seconds)) {
            row.status = "timeout";
        } else {
            row.train_rmse_rel = relative_rmse(fm.predict(train.inputs), train.targets);
            row.test_rmse_rel = evaluate_test(fm, target, seed, cfg.test_size, cfg.margin).rmse_rel;
            if (!std::isfinite(row.train_rmse_rel) || !std::isfinite(row.test_rmse_rel)) row.status = "error: non-finite loss";
        }
    } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
    }
    if (row.status != "ok") row.train_rmse_rel = row.test_rmse_rel = std::numeric_limits<double>::quiet_NaN();
    row.wall_seconds = elapsed();
    return row;
}

/// Every (size, seed) cell for one method and target, sorted by
/// (method, target, n_train, seed).
inline SweepResult run_scaling_sweep(const Method& m, const CatalogEntry& target, const std::vector<Eigen::Index>& sizes,
                                     const std::vector<std::uint64_t>& seeds, const SweepConfig& cfg) {
    if (!std::is_sorted(sizes.begin(), sizes.end())) throw std::invalid_argument("sweep sizes must be ascending");
    if (sizes.empty() || seeds.empty()) throw std::invalid_argument("sweep needs at least one size and one seed");
    SweepResult out;
    for (Eigen::Index n : sizes)
        for (std::uint64_t s : seeds) out.rows.push_back(run_cell(m, target, n, s, cfg));
    sort_rows(out.rows);
    return out;
}

inline constexpr const char* sweep_csv_header = "method,target,n_train,n_params,seed,train_rmse_rel,test_rmse_rel,wall_seconds";

inline void write_sweep_csv(std::ostream& out, const SweepResult& r) {
    out << sweep_csv_header << '\n';
    for (const auto& row : r.rows)
        out << row.method << ',' << row.target << ',' << row.n_train << ',' << row.n_params << ',' << row.seed << ','
            << format_double(row.train_rmse_rel) << ',' << format_double(row.test_rmse_rel) << ','
            << format_double(row.wall_seconds) << '\n';
}

inline nlohmann::json to_json(const SweepResult& r) {
    nlohmann::json rows = nlohmann::json::array();
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    for (const auto& row : r.rows)
        rows.push_back({{"method", row.method}, {"target", row.target}, {"n_train", row.n_train}, {"n_params", row.n_params},
                        {"seed", row.seed}, {"train_rmse_rel", num(row.train_rmse_rel)},
                        {"test_rmse_rel", num(row.test_rmse_rel)}, {"wall_seconds", row.wall_seconds}, {"status", row.status}});
    return rows;
}

/// Reads a sweep CSV. Rows with NaN losses come back with status "flagged".
inline SweepResult read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("sweep CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != sweep_csv_header) throw std::invalid_argument("unexpected sweep CSV header: " + line);
    SweepResult r;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 8) throw std::invalid_argument("sweep CSV line " + std::to_string(lineno) + ": expected 8 fields");
        SweepRow row;
        row.method = f[0];
        row.target = f[1];
        row.n_train = std::stoll(f[2]);
        row.n_params = std::stoll(f[3]);
        row.seed = std::stoull(f[4]);
        row.train_rmse_rel = parse_double(f[5]);
        row.test_rmse_rel = parse_double(f[6]);
        row.wall_seconds = parse_double(f[7]);
        if (std::isnan(row.train_rmse_rel) || std::isnan(row.test_rmse_rel)) row.status = "flagged";
        r.rows.push_back(std::move(row));
    }
    return r;
}

/// (N, test loss) pairs for fit_power_law, N being the parameter count.
/// With several seeds per N the median test loss is used.
inline std::vector<std::pair<double, double>> scaling_pairs(const SweepResult& r) {
    std::vector<std::pair<double, double>> out;
    std::vector<SweepRow> rows = r.rows;
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.n_params < b.n_params; });
    for (std::size_t i = 0; i < rows.size();) {
        std::size_t j = i;
        std::vector<double> losses;
        for (; j < rows.size() && rows[j].n_params == rows[i].n_params; ++j)
            if (std::isfinite(rows[j].test_rmse_rel)) losses.push_back(rows[j].test_rmse_rel);
        if (!losses.empty()) {
            std::sort(losses.begin(), losses.end());
            const std::size_t k = losses.size();
            const double med = k % 2 ? losses[k / 2] : 0.5 * (losses[k / 2 - 1] + losses[k / 2]);
            out.emplace_back(static_cast<double>(rows[i].n_params), med);
        }
        i = j;
    }
    return out;
}

} // namespace precml
