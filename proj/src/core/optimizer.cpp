#include "core/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace dsy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void append_entry(EvaluationLog &log, LogEntry entry) {
    const double prev =
        log.best_so_far.empty() ? kInf : log.best_so_far.back();
    log.best_so_far.push_back(std::min(prev, entry.value));
    log.entries.push_back(std::move(entry));
}

SearchResult finalize(EvaluationLog log, long grid_size) {
    SearchResult result;
    result.calls = static_cast<int>(log.entries.size());
    result.grid_size = grid_size;
    result.min_value = kInf;
    for (const auto &e : log.entries) {
        if (e.value < result.min_value) {
            result.min_value = e.value;
            result.argmin = e.candidate;
        }
    }
    if (result.argmin.empty() && !log.entries.empty())
        result.argmin = log.entries.front().candidate;
    result.log = std::move(log);
    return result;
}

} // namespace

void CandidateGrid::validate() const {
    if (axes.empty())
        throw ConfigError("candidate grid has no axes");
    for (const auto &axis : axes) {
        if (axis.empty())
            throw ConfigError("candidate grid axis is empty");
        for (size_t i = 1; i < axis.size(); ++i)
            if (!(axis[i] > axis[i - 1]))
                throw ConfigError("candidate grid axis must be strictly increasing");
    }
    if (!excluded_below.empty() && excluded_below.size() != axes.size())
        throw ConfigError("excluded_below must list one cutoff per axis");
}

std::vector<std::vector<double>> CandidateGrid::feasible() const {
    validate();
    std::vector<std::vector<double>> out;
    std::vector<size_t> idx(axes.size(), 0);
    std::vector<double> tuple(axes.size());
    while (true) {
        bool ok = true;
        for (size_t a = 0; a < axes.size(); ++a) {
            tuple[a] = axes[a][idx[a]];
            if (!excluded_below.empty() && tuple[a] < excluded_below[a] - 1e-12)
                ok = false;
        }
        if (ok && constraint && !constraint(tuple))
            ok = false;
        if (ok)
            out.push_back(tuple);
        // lexicographic advance, last axis fastest
        size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++idx[a] < axes[a].size())
                break;
            idx[a] = 0;
            if (a == 0)
                return out;
        }
    }
}

std::vector<double> linspace_axis(double start, double step, int count) {
    std::vector<double> axis(count);
    for (int i = 0; i < count; ++i)
        axis[i] = start + step * static_cast<double>(i);
    return axis;
}

void BoConfig::validate() const {
    if (initial_design < 1)
        throw ConfigError("initial design size must be positive");
    if (budget <= initial_design)
        throw ConfigError("budget must exceed the initial design size");
    if (stall_patience < 1)
        throw ConfigError("stall patience must be positive");
}

double expected_improvement(double mean, double stddev, double best) {
    if (stddev < 0.0)
        throw ConfigError("expected_improvement needs stddev >= 0");
    const double gap = best - mean;
    if (stddev == 0.0)
        return std::max(gap, 0.0);
    const double z = gap / stddev;
    const double cdf = 0.5 * std::erfc(-z * M_SQRT1_2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    return std::max(gap * cdf + stddev * pdf, 0.0);
}

SearchResult grid_minimize(const Objective &objective, const CandidateGrid &grid) {
    const auto candidates = grid.feasible();
    if (candidates.empty())
        throw ConfigError("candidate grid has no feasible points");
    EvaluationLog log;
    for (size_t i = 0; i < candidates.size(); ++i) {
        double value;
        try {
            value = objective(candidates[i]);
        } catch (const std::exception &) {
            value = kInf;
        }
        if (!std::isfinite(value))
            value = kInf;
        append_entry(log, {candidates[i], value, static_cast<int>(i),
                           EvalPhase::Initial});
    }
    return finalize(std::move(log), static_cast<long>(candidates.size()));
}

SearchResult bo_minimize(const Objective &objective, const CandidateGrid &grid,
                         const BoConfig &config) {
    config.validate();
    const auto candidates = grid.feasible();
    if (candidates.empty())
        throw ConfigError("candidate grid has no feasible points");
    const long total = static_cast<long>(candidates.size());
    const int s = grid.dims();
    const long budget = std::min<long>(config.budget, total);

    // Affine map of each axis onto [0,1]; degenerate axes collapse to 0.
    std::vector<double> lo(s), span(s);
    for (int a = 0; a < s; ++a) {
        lo[a] = grid.axes[a].front();
        span[a] = grid.axes[a].back() - grid.axes[a].front();
    }
    auto rescaled = [&](const std::vector<double> &tuple) {
        Eigen::RowVectorXd row(s);
        for (int a = 0; a < s; ++a)
            row[a] = span[a] > 0.0 ? (tuple[a] - lo[a]) / span[a] : 0.0;
        return row;
    };

    EvaluationLog log;
    std::vector<char> evaluated(candidates.size(), 0);
    auto evaluate = [&](long idx, EvalPhase phase) {
        double value;
        try {
            value = objective(candidates[idx]);
        } catch (const std::exception &) {
            value = kInf;
        }
        if (!std::isfinite(value))
            value = kInf;
        evaluated[idx] = 1;
        append_entry(log, {candidates[idx], value,
                           static_cast<int>(log.entries.size()), phase});
        return value;
    };

    // Seeded stratified initial design: one draw from each of `n_init`
    // contiguous chunks of the lexicographically ordered feasible set.
    std::mt19937_64 rng(config.seed);
    const long n_init = std::min<long>(config.initial_design, budget);
    for (long e = 0; e < n_init; ++e) {
        const long chunk_lo = e * total / n_init;
        const long chunk_hi = (e + 1) * total / n_init;
        std::uniform_int_distribution<long> pick(chunk_lo, chunk_hi - 1);
        long idx = pick(rng);
        while (evaluated[idx]) // chunks are disjoint; loop guards edge rounding
            idx = (idx + 1) % total;
        evaluate(idx, EvalPhase::Initial);
    }

    const std::vector<double> sigma_scales{0.1, 1.0, 10.0};
    const std::vector<double> ell_scales{0.05, 0.1, 0.2, 0.4, 0.8};
    const double diameter = std::sqrt(static_cast<double>(s));

    int stall = 0;
    while (static_cast<long>(log.entries.size()) < budget) {
        // unevaluated feasible points
        std::vector<long> open;
        for (long i = 0; i < total; ++i)
            if (!evaluated[i])
                open.push_back(i);
        if (open.empty())
            break;

        // finite observations for the GP, modeled on a log scale: the
        // reconstruction error spans many orders of magnitude and the
        // near-zero basin around the true delay is invisible to a GP fitted
        // on raw values
        std::vector<const LogEntry *> finite;
        for (const auto &e : log.entries)
            if (std::isfinite(e.value))
                finite.push_back(&e);
        auto to_gp_scale = [](double v) { return std::log(std::max(v, 1e-300)); };

        long next = open.front();
        if (finite.size() >= 2) {
            ObservationSet obs;
            obs.inputs.resize(static_cast<Eigen::Index>(finite.size()), s);
            obs.targets.resize(static_cast<Eigen::Index>(finite.size()));
            for (size_t i = 0; i < finite.size(); ++i) {
                obs.inputs.row(static_cast<Eigen::Index>(i)) =
                    rescaled(finite[i]->candidate);
                obs.targets[static_cast<Eigen::Index>(i)] =
                    to_gp_scale(finite[i]->value);
            }
            const double mean_u = obs.targets.mean();
            const double std_u = std::sqrt(
                (obs.targets.array() - mean_u).square().sum() /
                static_cast<double>(obs.size()));
            const double sigma_base = std_u > 0.0 ? std_u : 1.0;
            std::vector<double> sigma_grid, ell_grid;
            for (double f : sigma_scales)
                sigma_grid.push_back(f * sigma_base);
            for (double f : ell_scales)
                ell_grid.push_back(f * diameter);
            try {
                const KernelParams kp =
                    select_hyperparams(obs, sigma_grid, ell_grid);
                const GpPosterior post = gp_fit(obs, kp);
                Matrix queries(static_cast<Eigen::Index>(open.size()), s);
                for (size_t i = 0; i < open.size(); ++i)
                    queries.row(static_cast<Eigen::Index>(i)) =
                        rescaled(candidates[open[i]]);
                const auto [mean, stddev] = post.predict(queries);
                const double best = to_gp_scale(log.best_so_far.back());
                double best_ei = -1.0;
                for (size_t i = 0; i < open.size(); ++i) {
                    const double ei = expected_improvement(
                        mean[static_cast<Eigen::Index>(i)],
                        stddev[static_cast<Eigen::Index>(i)], best);
                    if (ei > best_ei) {
                        best_ei = ei;
                        next = open[i];
                    }
                }
            } catch (const NumericError &) {
                // surrogate failure: fall through to the first open candidate
            }
        }

        const double before = log.best_so_far.back();
        const double value = evaluate(next, EvalPhase::Bo);
        if (value < before)
            stall = 0;
        else if (++stall >= config.stall_patience)
            break;
    }
    return finalize(std::move(log), total);
}

double reduction_stats(const SearchResult &result) {
    if (result.grid_size <= 0)
        throw ConfigError("reduction_stats needs a positive grid size");
    return 100.0 * (1.0 - static_cast<double>(result.calls) /
                              static_cast<double>(result.grid_size));
}

std::string log_to_csv(const EvaluationLog &log) {
    std::ostringstream out;
    const int s = log.entries.empty()
                      ? 0
                      : static_cast<int>(log.entries.front().candidate.size());
    out << "iteration,phase";
    for (int a = 0; a < s; ++a)
        out << ",candidate_" << (a + 1);
    out << ",objective,best_so_far\n";
    for (size_t i = 0; i < log.entries.size(); ++i) {
        const auto &e = log.entries[i];
        out << e.iteration << ","
            << (e.phase == EvalPhase::Initial ? "initial" : "bo");
        for (double c : e.candidate)
            out << "," << format_double(c);
        out << "," << format_double(e.value) << ","
            << format_double(log.best_so_far[i]) << "\n";
    }
    return out.str();
}

} // namespace dsy
