#pragma once

#include <optional>

#include "core/optimizer.hpp"
#include "core/sindy.hpp"

namespace dsy {

/// One searched-for quantity: either the delay of a library slot or the Hill
/// exponent of a library Hill term, with its candidate axis.
struct UnknownSpec {
    std::string name;
    enum class Kind { Delay, HillAlpha } kind = Kind::Delay;
    int index = 0; // delay slot, or hill-term index
    std::vector<double> axis;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct ExperimentConfig {
    std::string name = "custom";
    std::string system;   // benchmark name
    ParamMap params;      // true parameters including true delays

    double step = 1e-3;   // integration step
    double dt = 0.01;     // output sampling
    double t_end = 30.0;
    Interval train{0.0, 10.0};
    Interval test{10.0, 30.0};

    int poly_degree = 2;
    bool include_constant = true;
    std::vector<int> train_vars;                // state columns fed to the regression
    std::vector<std::vector<int>> delayed_vars; // per slot: trained-space columns
    std::vector<HillTerm> hill_terms;           // alpha = NaN when searched
    std::vector<std::string> var_names;         // one per trained column

    std::vector<double> fixed_slot_delays;      // NaN where a Delay unknown binds
    std::vector<UnknownSpec> unknowns;
    bool constrain_decreasing_delays = false;   // candidate[0] > candidate[1] > ...

    StlsConfig stls;
    BoConfig bo;
    int runs = 10;
    enum class Mode { Bo, Grid, Both } mode = Mode::Both;
    enum class DerivSource { Exact, Numeric } deriv_source = DerivSource::Exact;

    std::vector<double> expected_argmin; // optional truth for success counting

    void validate() const;
};

ExperimentConfig preset(const std::string &name);
std::vector<std::string> preset_names();

std::string config_to_json(const ExperimentConfig &config);
ExperimentConfig config_from_json(const std::string &json);

struct RunResult {
    std::string mode; // "bo" or "grid"
    std::uint64_t seed = 0;
    std::vector<double> argmin;
    double min_value = 0.0;
    int calls = 0;
    long grid_size = 0;
    double reduction = 0.0;
    SparseModel model;
    std::string model_text;
    double validation_error = 0.0; // max deviation on the test interval
    bool success = false;          // argmin matches expected_argmin
    bool failed = false;
    std::string error;
    EvaluationLog log;
    Trajectory simulated; // re-simulated trained variables, for plotting
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<RunResult> bo_runs;
    std::optional<RunResult> grid_run;
    double mean_calls = 0.0;
    double mean_reduction = 0.0;
    int success_count = 0;
    std::vector<std::uint64_t> seeds;
    std::string timestamp;
    Trajectory training_data; // trained variables over the full sampled range
};

/// Generates data, builds the SINDy objective over the candidate grid, runs
/// the configured searches, refits at each argmin and validates by closed-loop
/// simulation on the test interval.
ExperimentReport run_experiment(const ExperimentConfig &config);

std::string report_to_json(const ExperimentReport &report);
ExperimentReport report_from_json(const std::string &json);

/// report.json plus companion CSVs (per-run evaluation logs and simulated vs
/// true trajectories) under `dir`.
void write_report(const ExperimentReport &report, const std::string &dir);

/// Human-readable summary table.
std::string report_summary(const ExperimentReport &report);

/// Shared machinery between run_experiment and the standalone validator:
/// simulate `model` from the given constant history and compare against a
/// reference series; returns the max absolute deviation over [lo, hi].
double validate_model(const SparseModel &model, const TimeSeries &reference,
                      const Vector &phi, double step, Interval window,
                      Trajectory *simulated_out = nullptr);

} // namespace dsy
