#pragma once

#include "precml/core/csv.hpp"

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace precml {

enum class StopReason { grad_tol, max_iters, stall, subspace_converged };

inline const char* to_string(StopReason r) {
    switch (r) {
    case StopReason::grad_tol: return "grad_tol";
    case StopReason::max_iters: return "max_iters";
    case StopReason::stall: return "stall";
    case StopReason::subspace_converged: return "subspace_converged";
    }
    return "?";
}

struct HistoryRow {
    long step = 0;
    double mse = 0.0;
    double rmse_rel = 0.0;
    std::string phase;
};

using History = std::vector<HistoryRow>;

/// Thrown when an optimizer meets a NaN or infinite loss or gradient.
class NonFiniteLoss : public std::runtime_error {
public:
    NonFiniteLoss(const std::string& phase, long step)
        : std::runtime_error(phase + ": non-finite loss or gradient at step " + std::to_string(step)), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

inline void write_history_csv(std::ostream& out, const History& h) {
    out << "step,mse,rmse_rel,phase\n";
    for (const auto& r : h) out << r.step << ',' << format_double(r.mse) << ',' << format_double(r.rmse_rel) << ',' << r.phase << '\n';
}

} // namespace precml
