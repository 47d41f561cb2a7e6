#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace clab {

// Points live in the closed unit cube; for d = 1 only the first component is used.
using Point = std::array<double, 2>;

struct SolverError : std::runtime_error {
    double residual = 0.0;
    int iterations = 0;
    SolverError(const std::string& msg, double res, int iters)
        : std::runtime_error(msg), residual(res), iterations(iters) {}
};

struct TuningError : std::runtime_error {
    double acceptance_rate = 0.0;
    double beta_final = 0.0;
    TuningError(const std::string& msg, double rate, double beta)
        : std::runtime_error(msg), acceptance_rate(rate), beta_final(beta) {}
};

struct OptimizationError : std::runtime_error {
    std::vector<double> trace;
    OptimizationError(const std::string& msg, std::vector<double> t)
        : std::runtime_error(msg), trace(std::move(t)) {}
};

struct InfeasibleConditioningError : std::runtime_error {
    double acceptance_rate = 0.0;
    InfeasibleConditioningError(const std::string& msg, double rate)
        : std::runtime_error(msg), acceptance_rate(rate) {}
};

struct DiagnosticError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace clab
