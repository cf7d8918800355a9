#pragma once

#include <cstdint>
#include <functional>

#include "core/surrogate.hpp"

namespace dsy {

/// Finite product set of candidate delays/parameters, with an optional
/// constraint predicate and per-axis lower cutoffs (near-zero delays are
/// excluded to avoid overfitting).
struct CandidateGrid {
    std::vector<std::vector<double>> axes; // each sorted, strictly increasing
    std::function<bool(const std::vector<double> &)> constraint;
    std::vector<double> excluded_below; // optional, one cutoff per axis

    void validate() const;
    int dims() const { return static_cast<int>(axes.size()); }
    /// Feasible candidate tuples in axis-lexicographic order.
    std::vector<std::vector<double>> feasible() const;
};

/// Evenly spaced axis {start, start+step, ...} with `count` points.
std::vector<double> linspace_axis(double start, double step, int count);

enum class EvalPhase { Initial, Bo };

struct LogEntry {
    std::vector<double> candidate;
    double value = 0.0;
    int iteration = 0;
    EvalPhase phase = EvalPhase::Initial;
};

struct EvaluationLog {
    std::vector<LogEntry> entries;
    std::vector<double> best_so_far; // running minimum, one per entry
};

struct BoConfig {
    int initial_design = 5; // use 10 for multivariate searches
    int budget = 120;       // max total objective calls
    int stall_patience = 30;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SearchResult {
    std::vector<double> argmin;
    double min_value = 0.0;
    EvaluationLog log;
    int calls = 0;
    long grid_size = 0; // feasible candidate count
};

using Objective = std::function<double(const std::vector<double> &)>;

/// Closed-form EI: (best-mean)*Phi(z) + std*phi(z), z = (best-mean)/std.
double expected_improvement(double mean, double stddev, double best);

/// GP/EI minimization over the feasible grid: a seeded stratified initial
/// design, then repeatedly fit the GP (inputs rescaled to [0,1]^s,
/// hyperparameters selected by marginal likelihood) and evaluate the
/// EI-argmax among unevaluated points. Never re-evaluates a candidate;
/// objective failures are logged as +inf and kept out of the GP.
SearchResult bo_minimize(const Objective &objective, const CandidateGrid &grid,
                         const BoConfig &config);

/// Brute force: every feasible candidate exactly once, lexicographic order,
/// ties broken by first occurrence.
SearchResult grid_minimize(const Objective &objective, const CandidateGrid &grid);

/// 100 * (1 - calls / feasible grid size).
double reduction_stats(const SearchResult &result);

/// CSV: iteration,phase,candidate_1..candidate_s,objective,best_so_far
std::string log_to_csv(const EvaluationLog &log);

} // namespace dsy
