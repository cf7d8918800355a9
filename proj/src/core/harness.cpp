#include "core/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dsy {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json num_or_tag(double v) {
    if (std::isfinite(v))
        return v;
    return v > 0 ? "inf" : "-inf";
}

double num_from(const json &j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf")
            return kInf;
        if (s == "-inf")
            return -kInf;
        if (s == "nan" || s == "unknown")
            return std::nan("");
        throw ConfigError("unrecognized numeric tag '" + s + "'");
    }
    return j.get<double>();
}

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

json trajectory_to_jobj(const Trajectory &traj) {
    json j;
    j["times"] = traj.times;
    json states = json::array();
    for (int i = 0; i < traj.samples(); ++i) {
        json row = json::array();
        for (int c = 0; c < traj.dim(); ++c)
            row.push_back(traj.states(i, c));
        states.push_back(row);
    }
    j["states"] = states;
    return j;
}

Trajectory trajectory_from_jobj(const json &j) {
    Trajectory traj;
    traj.times = j.at("times").get<std::vector<double>>();
    const auto &rows = j.at("states");
    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto n = m ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    traj.states.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index c = 0; c < n; ++c)
            traj.states(i, c) = rows[i][c].get<double>();
    return traj;
}

} // namespace

void ExperimentConfig::validate() const {
    if (system.empty())
        throw ConfigError("experiment config names no system");
    if (!(step > 0.0) || !(dt > 0.0) || !(t_end > 0.0))
        throw ConfigError("step, dt and t_end must be positive");
    const double ratio = dt / step;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw ConfigError("dt must be an integer multiple of the integration step");
    if (!(train.lo < train.hi) || !(test.lo < test.hi))
        throw ConfigError("train/test intervals must be nonempty");
    if (train.lo < -1e-12 || test.hi > t_end + 1e-12)
        throw ConfigError("train/test intervals must lie within [0, t_end]");
    if (std::max(train.lo, test.lo) < std::min(train.hi, test.hi) - 1e-12)
        throw ConfigError("train and test intervals must be disjoint");
    if (train_vars.empty())
        throw ConfigError("no trained variables selected");
    if (!var_names.empty() && var_names.size() != train_vars.size())
        throw ConfigError("var_names must match train_vars");
    if (fixed_slot_delays.size() != delayed_vars.size())
        throw ConfigError("fixed_slot_delays must list one entry per delay slot");
    if (unknowns.empty())
        throw ConfigError("experiment has no unknowns to search");
    for (const auto &u : unknowns) {
        if (u.axis.empty())
            throw ConfigError("unknown '" + u.name + "' has an empty axis");
        if (u.kind == UnknownSpec::Kind::Delay) {
            if (u.index < 0 || u.index >= static_cast<int>(delayed_vars.size()))
                throw ConfigError("unknown '" + u.name + "' binds a missing slot");
            if (!std::isnan(fixed_slot_delays[u.index]))
                throw ConfigError("unknown '" + u.name +
                                  "' binds a slot with a fixed delay");
        } else {
            if (u.index < 0 || u.index >= static_cast<int>(hill_terms.size()))
                throw ConfigError("unknown '" + u.name + "' binds a missing Hill term");
            if (!std::isnan(hill_terms[u.index].alpha))
                throw ConfigError("unknown '" + u.name +
                                  "' binds a Hill term with a fixed exponent");
        }
    }
    for (size_t s = 0; s < fixed_slot_delays.size(); ++s) {
        if (std::isnan(fixed_slot_delays[s])) {
            const bool bound = std::any_of(
                unknowns.begin(), unknowns.end(), [&](const UnknownSpec &u) {
                    return u.kind == UnknownSpec::Kind::Delay &&
                           u.index == static_cast<int>(s);
                });
            if (!bound)
                throw ConfigError("delay slot " + std::to_string(s) +
                                  " is neither fixed nor searched");
        }
    }
    if (runs < 1)
        throw ConfigError("runs must be positive");
    stls.validate();
    bo.validate();
    if (!expected_argmin.empty() && expected_argmin.size() != unknowns.size())
        throw ConfigError("expected_argmin must match the unknown count");
}

namespace {

// Everything derived once per experiment: sampled data (with history rows),
// the derivative matrix and the training-row mask.
struct ExperimentData {
    TimeSeries trained;      // trained columns over [-H, t_end]
    Matrix derivatives;      // same rows/columns
    std::vector<char> train_mask;
    Vector phi_trained;
    int history_rows = 0;
    Trajectory full_traj;    // all state columns over [0, t_end] (sampled at dt)
};

ExperimentData prepare_data(const ExperimentConfig &config) {
    auto [system, history] = benchmark(config.system, config.params);

    const auto decim = static_cast<int>(std::llround(config.dt / config.step));
    Trajectory fine = integrate(system, history, config.t_end, config.step);
    Trajectory traj = decimate(fine, decim);

    double extent = 0.0;
    for (const auto &u : config.unknowns)
        if (u.kind == UnknownSpec::Kind::Delay)
            extent = std::max(extent, u.axis.back());
    for (double d : config.fixed_slot_delays)
        if (!std::isnan(d))
            extent = std::max(extent, d);
    const auto n_hist = static_cast<int>(std::ceil(extent / config.dt - 1e-9));

    const auto n_t = static_cast<int>(config.train_vars.size());
    const Vector phi_full = history.at(0.0);
    Vector phi(n_t);
    for (int c = 0; c < n_t; ++c)
        phi[c] = phi_full[config.train_vars[c]];

    ExperimentData data;
    data.full_traj = traj;
    data.phi_trained = phi;
    data.history_rows = n_hist;

    const int m = n_hist + traj.samples();
    data.trained.times.resize(m);
    data.trained.values.resize(m, n_t);
    data.derivatives.resize(m, n_t);
    data.train_mask.assign(m, 0);
    for (int i = 0; i < n_hist; ++i) {
        data.trained.times[i] = -config.dt * static_cast<double>(n_hist - i);
        data.trained.values.row(i) = phi.transpose();
        data.derivatives.row(i).setZero(); // constant history
    }
    for (int i = 0; i < traj.samples(); ++i) {
        data.trained.times[n_hist + i] = traj.times[i];
        for (int c = 0; c < n_t; ++c) {
            data.trained.values(n_hist + i, c) = traj.states(i, config.train_vars[c]);
            data.derivatives(n_hist + i, c) =
                (*traj.derivatives)(i, config.train_vars[c]);
        }
    }
    for (int c = 0; c < n_t; ++c)
        data.trained.names.push_back(config.var_names.empty()
                                         ? "x" + std::to_string(c + 1)
                                         : config.var_names[c]);

    if (config.deriv_source == ExperimentConfig::DerivSource::Numeric)
        data.derivatives = estimate_derivatives(data.trained);

    for (int i = 0; i < m; ++i) {
        const double t = data.trained.times[i];
        data.train_mask[i] =
            t >= config.train.lo - 1e-9 && t <= config.train.hi + 1e-9;
    }
    return data;
}

// Maps a candidate tuple to (slot delays, resolved Hill terms).
void apply_candidate(const ExperimentConfig &config, const std::vector<double> &c,
                     std::vector<double> &slot_delays,
                     std::vector<HillTerm> &hills) {
    slot_delays = config.fixed_slot_delays;
    hills = config.hill_terms;
    for (size_t j = 0; j < config.unknowns.size(); ++j) {
        const auto &u = config.unknowns[j];
        if (u.kind == UnknownSpec::Kind::Delay)
            slot_delays[u.index] = c[j];
        else
            hills[u.index].alpha = c[j];
    }
}

SparseModel fit_candidate(const ExperimentConfig &config, const ExperimentData &data,
                          const std::vector<double> &c) {
    std::vector<double> slot_delays;
    std::vector<HillTerm> hills;
    apply_candidate(config, c, slot_delays, hills);

    std::vector<DelayedView> views;
    for (size_t s = 0; s < config.delayed_vars.size(); ++s) {
        TimeSeries sub = data.trained.select_columns(config.delayed_vars[s]);
        DelayedView view = delayed_samples(sub, slot_delays[s]);
        view.source_cols = config.delayed_vars[s];
        views.push_back(std::move(view));
    }

    LibrarySpec spec;
    spec.poly_degree = config.poly_degree;
    spec.include_constant = config.include_constant;
    spec.hill_terms = hills;

    DesignMatrix design = build_library(spec, data.trained, views);
    design = restrict_rows(design, data.train_mask);
    SparseModel model = stls_fit(design, data.derivatives, config.stls);
    model.var_names = data.trained.names;
    for (size_t j = 0; j < config.unknowns.size(); ++j)
        model.params[config.unknowns[j].name] = c[j];
    return model;
}

CandidateGrid make_grid(const ExperimentConfig &config) {
    CandidateGrid grid;
    for (const auto &u : config.unknowns)
        grid.axes.push_back(u.axis);
    if (config.constrain_decreasing_delays) {
        std::vector<size_t> delay_pos;
        for (size_t j = 0; j < config.unknowns.size(); ++j)
            if (config.unknowns[j].kind == UnknownSpec::Kind::Delay)
                delay_pos.push_back(j);
        grid.constraint = [delay_pos](const std::vector<double> &c) {
            for (size_t i = 1; i < delay_pos.size(); ++i)
                if (!(c[delay_pos[i - 1]] > c[delay_pos[i]] + 1e-12))
                    return false;
            return true;
        };
    }
    return grid;
}

bool matches_expected(const std::vector<double> &argmin,
                      const std::vector<double> &expected) {
    if (expected.empty() || argmin.size() != expected.size())
        return false;
    for (size_t i = 0; i < argmin.size(); ++i)
        if (std::abs(argmin[i] - expected[i]) > 1e-6)
            return false;
    return true;
}

RunResult make_run_result(const ExperimentConfig &config, const ExperimentData &data,
                          SearchResult sr, const std::string &mode,
                          std::uint64_t seed) {
    RunResult run;
    run.mode = mode;
    run.seed = seed;
    run.argmin = sr.argmin;
    run.min_value = sr.min_value;
    run.calls = sr.calls;
    run.grid_size = sr.grid_size;
    run.reduction = reduction_stats(sr);
    run.log = std::move(sr.log);
    run.success = matches_expected(run.argmin, config.expected_argmin);
    if (!std::isfinite(run.min_value)) {
        run.failed = true;
        run.error = "all objective evaluations failed";
        run.validation_error = kInf;
        return run;
    }
    try {
        run.model = fit_candidate(config, data, run.argmin);
        run.model_text = format_model(run.model);
        run.validation_error =
            validate_model(run.model, data.trained, data.phi_trained, config.step,
                           config.test, &run.simulated);
    } catch (const std::exception &e) {
        run.failed = true;
        run.error = e.what();
        run.validation_error = kInf;
    }
    return run;
}

} // namespace

double validate_model(const SparseModel &model, const TimeSeries &reference,
                      const Vector &phi, double step, Interval window,
                      Trajectory *simulated_out) {
    DelaySystem sys = model_to_system(model);
    const double extent = sys.delays.empty() ? 0.0 : sys.delays.back();
    const HistorySegment history = HistorySegment::constant(phi, extent);
    const double t_end = reference.times.back();
    const double dt = reference.dt();

    Trajectory fine = integrate(sys, history, t_end, step);
    Trajectory sim = decimate(fine, static_cast<int>(std::llround(dt / step)));

    // reference rows at t >= 0 align with sim samples
    int zero_row = 0;
    while (zero_row < reference.samples() && reference.times[zero_row] < -1e-9)
        ++zero_row;

    double max_dev = 0.0;
    for (int i = 0; i < sim.samples(); ++i) {
        const int r = zero_row + i;
        if (r >= reference.samples())
            break;
        const double t = sim.times[i];
        if (t < window.lo - 1e-9 || t > window.hi + 1e-9)
            continue;
        const double dev =
            (sim.states.row(i) - reference.values.row(r)).cwiseAbs().maxCoeff();
        max_dev = std::max(max_dev, dev);
    }
    if (simulated_out)
        *simulated_out = std::move(sim);
    return max_dev;
}

ExperimentReport run_experiment(const ExperimentConfig &config) {
    config.validate();
    ExperimentData data = prepare_data(config);

    const Objective objective = [&](const std::vector<double> &c) {
        return fit_candidate(config, data, c).fit_error;
    };
    const CandidateGrid grid = make_grid(config);

    ExperimentReport report;
    report.config = config;
    report.timestamp = iso_timestamp();
    report.training_data.times = data.trained.times;
    report.training_data.states = data.trained.values;

    if (config.mode != ExperimentConfig::Mode::Bo) {
        SearchResult sr = grid_minimize(objective, grid);
        report.grid_run = make_run_result(config, data, std::move(sr), "grid",
                                          config.bo.seed);
    }
    if (config.mode != ExperimentConfig::Mode::Grid) {
        for (int i = 0; i < config.runs; ++i) {
            const std::uint64_t seed = config.bo.seed + static_cast<std::uint64_t>(i);
            report.seeds.push_back(seed);
            BoConfig bo = config.bo;
            bo.seed = seed;
            try {
                SearchResult sr = bo_minimize(objective, grid, bo);
                report.bo_runs.push_back(
                    make_run_result(config, data, std::move(sr), "bo", seed));
            } catch (const std::exception &e) {
                RunResult run;
                run.mode = "bo";
                run.seed = seed;
                run.failed = true;
                run.error = e.what();
                run.validation_error = kInf;
                report.bo_runs.push_back(std::move(run));
            }
        }
    }

    const auto &agg_runs = report.bo_runs.empty() && report.grid_run
                               ? std::vector<RunResult>{*report.grid_run}
                               : report.bo_runs;
    if (!agg_runs.empty()) {
        double calls = 0.0, red = 0.0;
        for (const auto &r : agg_runs) {
            calls += r.calls;
            red += r.reduction;
            report.success_count += r.success ? 1 : 0;
        }
        report.mean_calls = calls / static_cast<double>(agg_runs.size());
        report.mean_reduction = red / static_cast<double>(agg_runs.size());
    }
    return report;
}

// ---- presets -------------------------------------------------------------

namespace {

ExperimentConfig base_scalar_config() {
    ExperimentConfig c;
    c.train_vars = {0};
    c.delayed_vars = {{0}};
    c.var_names = {"x"};
    c.fixed_slot_delays = {std::nan("")};
    c.bo.initial_design = 5;
    c.bo.budget = 120;
    c.bo.stall_patience = 120;
    return c;
}

} // namespace

ExperimentConfig preset(const std::string &name) {
    if (name == "logistic_1.8" || name == "logistic_3.0") {
        ExperimentConfig c = base_scalar_config();
        c.name = name;
        c.system = "logistic";
        c.params = {{"rho", name == "logistic_1.8" ? 1.8 : 3.0}, {"tau", 1.0}};
        c.poly_degree = 2;
        c.unknowns = {{"tau", UnknownSpec::Kind::Delay, 0,
                       linspace_axis(0.25, 0.01, 400)}};
        c.expected_argmin = {1.0};
        return c;
    }
    if (name == "sir") {
        ExperimentConfig c;
        c.name = name;
        c.system = "sir";
        c.params = {{"beta", 3.0}, {"mu", 1.0}, {"tau", 1.0}};
        c.poly_degree = 2;
        c.train_vars = {0, 1};      // susceptible and infectious; r = 1 - s - i
        c.delayed_vars = {{1}};     // only i(t - tau) enters the library
        c.var_names = {"s", "i"};
        c.fixed_slot_delays = {std::nan("")};
        c.unknowns = {{"tau", UnknownSpec::Kind::Delay, 0,
                       linspace_axis(0.25, 0.01, 400)}};
        c.expected_argmin = {1.0};
        c.bo.initial_design = 5;
        c.bo.budget = 120;
        c.bo.stall_patience = 120;
        return c;
    }
    if (name == "mackey_glass_tau") {
        ExperimentConfig c = base_scalar_config();
        c.name = name;
        c.system = "mackey_glass";
        c.params = {{"beta", 6.0}, {"gamma", 3.0}, {"alpha", 10.0}, {"tau", 1.0}};
        c.train = {0.0, 17.0};
        c.test = {17.0, 30.0};
        c.poly_degree = 2;
        c.hill_terms = {{0, 0, 10.0}};
        c.unknowns = {{"tau", UnknownSpec::Kind::Delay, 0,
                       linspace_axis(0.25, 0.01, 450)}};
        c.expected_argmin = {1.0};
        return c;
    }
    if (name == "mackey_glass_tau_alpha_coarse" ||
        name == "mackey_glass_tau_alpha_fine") {
        ExperimentConfig c = base_scalar_config();
        c.name = name;
        c.system = "mackey_glass";
        c.params = {{"beta", 6.0}, {"gamma", 3.0}, {"alpha", 10.0}, {"tau", 1.0}};
        c.train = {0.0, 17.0};
        c.test = {17.0, 30.0};
        c.poly_degree = 2;
        c.hill_terms = {{0, 0, std::nan("")}};
        const auto tau_axis = name == "mackey_glass_tau_alpha_coarse"
                                  ? linspace_axis(0.25, 0.25, 19)
                                  : linspace_axis(0.25, 0.05, 91);
        c.unknowns = {{"tau", UnknownSpec::Kind::Delay, 0, tau_axis},
                      {"alpha", UnknownSpec::Kind::HillAlpha, 0,
                       linspace_axis(0.0, 1.0, 13)}};
        c.expected_argmin = {1.0, 10.0};
        c.bo.initial_design = 10;
        c.bo.budget = 400;
        return c;
    }
    if (name == "two_delay_coarse" || name == "two_delay_mid" ||
        name == "two_delay_fine") {
        ExperimentConfig c = base_scalar_config();
        c.name = name;
        c.system = "two_delay_cubic";
        c.params = {{"a", -1.0}, {"b", -0.5}, {"tau1", 1.0}, {"tau2", 0.5}};
        c.poly_degree = 3;
        c.delayed_vars = {{0}, {0}};
        c.fixed_slot_delays = {std::nan(""), std::nan("")};
        std::vector<double> axis;
        if (name == "two_delay_coarse")
            axis = linspace_axis(0.25, 0.25, 19);
        else if (name == "two_delay_mid")
            axis = linspace_axis(0.20, 0.10, 41);
        else
            axis = linspace_axis(0.25, 0.05, 61);
        c.unknowns = {{"tau1", UnknownSpec::Kind::Delay, 0, axis},
                      {"tau2", UnknownSpec::Kind::Delay, 1, axis}};
        c.constrain_decreasing_delays = true;
        c.expected_argmin = {1.0, 0.5};
        c.bo.initial_design = 10;
        c.bo.budget = 400;
        return c;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
    return {"logistic_1.8",
            "logistic_3.0",
            "sir",
            "mackey_glass_tau",
            "mackey_glass_tau_alpha_coarse",
            "mackey_glass_tau_alpha_fine",
            "two_delay_coarse",
            "two_delay_mid",
            "two_delay_fine"};
}

// ---- config JSON ---------------------------------------------------------

namespace {

std::string mode_name(ExperimentConfig::Mode m) {
    switch (m) {
    case ExperimentConfig::Mode::Bo:
        return "bo";
    case ExperimentConfig::Mode::Grid:
        return "grid";
    case ExperimentConfig::Mode::Both:
        return "both";
    }
    return "both";
}

ExperimentConfig::Mode mode_from_name(const std::string &s) {
    if (s == "bo")
        return ExperimentConfig::Mode::Bo;
    if (s == "grid")
        return ExperimentConfig::Mode::Grid;
    if (s == "both")
        return ExperimentConfig::Mode::Both;
    throw ConfigError("unknown mode '" + s + "' (expected bo|grid|both)");
}

} // namespace

std::string config_to_json(const ExperimentConfig &c) {
    json j;
    j["name"] = c.name;
    j["system"] = c.system;
    j["params"] = c.params;
    j["simulation"] = {{"step", c.step}, {"dt", c.dt}, {"t_end", c.t_end}};
    j["split"] = {{"train", {c.train.lo, c.train.hi}},
                  {"test", {c.test.lo, c.test.hi}}};
    json hills = json::array();
    for (const auto &h : c.hill_terms)
        hills.push_back({{"slot", h.slot},
                         {"var", h.var},
                         {"alpha", std::isnan(h.alpha) ? json("unknown")
                                                       : json(h.alpha)}});
    j["library"] = {{"poly_degree", c.poly_degree},
                    {"include_constant", c.include_constant},
                    {"hill_terms", hills}};
    j["train_vars"] = c.train_vars;
    j["delayed_vars"] = c.delayed_vars;
    j["var_names"] = c.var_names;
    json slots = json::array();
    for (double d : c.fixed_slot_delays)
        slots.push_back(std::isnan(d) ? json("unknown") : json(d));
    j["fixed_slot_delays"] = slots;
    json unknowns = json::array();
    for (const auto &u : c.unknowns)
        unknowns.push_back(
            {{"name", u.name},
             {"kind", u.kind == UnknownSpec::Kind::Delay ? "delay" : "hill_alpha"},
             {"index", u.index},
             {"axis", u.axis}});
    j["unknowns"] = unknowns;
    j["constrain_decreasing_delays"] = c.constrain_decreasing_delays;
    j["stls"] = {{"threshold", c.stls.threshold},
                 {"max_iterations", c.stls.max_iterations},
                 {"rcond", c.stls.rcond},
                 {"normalize_columns", c.stls.normalize_columns}};
    j["bo"] = {{"initial_design", c.bo.initial_design},
               {"budget", c.bo.budget},
               {"stall_patience", c.bo.stall_patience},
               {"seed", c.bo.seed}};
    j["runs"] = c.runs;
    j["mode"] = mode_name(c.mode);
    j["derivative_source"] =
        c.deriv_source == ExperimentConfig::DerivSource::Exact ? "exact" : "numeric";
    j["expected_argmin"] = c.expected_argmin;
    return j.dump(2);
}

namespace {

std::vector<double> axis_from_json(const json &j) {
    if (j.is_array())
        return j.get<std::vector<double>>();
    return linspace_axis(j.at("start").get<double>(), j.at("step").get<double>(),
                         j.at("count").get<int>());
}

ExperimentConfig config_from_jobj(const json &j) {
    ExperimentConfig c;
    try {
        c.name = j.value("name", "custom");
        c.system = j.at("system");
        c.params = j.at("params").get<ParamMap>();
        const auto &sim = j.at("simulation");
        c.step = sim.value("step", 1e-3);
        c.dt = sim.at("dt");
        c.t_end = sim.at("t_end");
        const auto &split = j.at("split");
        c.train = {split.at("train")[0].get<double>(),
                   split.at("train")[1].get<double>()};
        c.test = {split.at("test")[0].get<double>(),
                  split.at("test")[1].get<double>()};
        const auto &lib = j.at("library");
        c.poly_degree = lib.at("poly_degree");
        c.include_constant = lib.value("include_constant", true);
        for (const auto &h : lib.value("hill_terms", json::array()))
            c.hill_terms.push_back({h.at("slot").get<int>(),
                                    h.at("var").get<int>(),
                                    num_from(h.at("alpha"))});
        c.train_vars = j.at("train_vars").get<std::vector<int>>();
        c.delayed_vars = j.at("delayed_vars").get<std::vector<std::vector<int>>>();
        c.var_names = j.value("var_names", std::vector<std::string>{});
        for (const auto &d : j.at("fixed_slot_delays"))
            c.fixed_slot_delays.push_back(num_from(d));
        for (const auto &u : j.at("unknowns")) {
            UnknownSpec spec;
            spec.name = u.at("name");
            const std::string kind = u.at("kind");
            if (kind == "delay")
                spec.kind = UnknownSpec::Kind::Delay;
            else if (kind == "hill_alpha")
                spec.kind = UnknownSpec::Kind::HillAlpha;
            else
                throw ConfigError("unknown unknown-kind '" + kind + "'");
            spec.index = u.at("index");
            spec.axis = axis_from_json(u.at("axis"));
            c.unknowns.push_back(std::move(spec));
        }
        c.constrain_decreasing_delays = j.value("constrain_decreasing_delays", false);
        if (j.contains("stls")) {
            const auto &s = j.at("stls");
            c.stls.threshold = s.value("threshold", 0.1);
            c.stls.max_iterations = s.value("max_iterations", 25);
            c.stls.rcond = s.value("rcond", 1e-12);
            c.stls.normalize_columns = s.value("normalize_columns", false);
        }
        if (j.contains("bo")) {
            const auto &b = j.at("bo");
            c.bo.initial_design = b.value("initial_design", c.bo.initial_design);
            c.bo.budget = b.value("budget", c.bo.budget);
            c.bo.stall_patience = b.value("stall_patience", c.bo.stall_patience);
            c.bo.seed = b.value("seed", static_cast<std::uint64_t>(0));
        }
        c.runs = j.value("runs", 10);
        c.mode = mode_from_name(j.value("mode", "both"));
        const std::string ds = j.value("derivative_source", "exact");
        if (ds == "exact")
            c.deriv_source = ExperimentConfig::DerivSource::Exact;
        else if (ds == "numeric")
            c.deriv_source = ExperimentConfig::DerivSource::Numeric;
        else
            throw ConfigError("unknown derivative_source '" + ds + "'");
        c.expected_argmin = j.value("expected_argmin", std::vector<double>{});
    } catch (const json::exception &e) {
        throw ConfigError(std::string("invalid experiment config: ") + e.what());
    }
    return c;
}

} // namespace

ExperimentConfig config_from_json(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_jobj(j);
}

// ---- report JSON ---------------------------------------------------------

namespace {

json run_to_jobj(const RunResult &run) {
    json j;
    j["mode"] = run.mode;
    j["seed"] = run.seed;
    j["argmin"] = run.argmin;
    j["min_value"] = num_or_tag(run.min_value);
    j["calls"] = run.calls;
    j["grid_size"] = run.grid_size;
    j["reduction"] = run.reduction;
    j["model"] = run.failed ? json() : json::parse(model_to_json(run.model));
    j["model_text"] = run.model_text;
    j["validation_error"] = num_or_tag(run.validation_error);
    j["success"] = run.success;
    j["failed"] = run.failed;
    j["error"] = run.error;
    json entries = json::array();
    for (const auto &e : run.log.entries)
        entries.push_back({{"candidate", e.candidate},
                           {"value", num_or_tag(e.value)},
                           {"iteration", e.iteration},
                           {"phase", e.phase == EvalPhase::Initial ? "initial" : "bo"}});
    json best = json::array();
    for (double b : run.log.best_so_far)
        best.push_back(num_or_tag(b));
    j["log"] = {{"entries", entries}, {"best_so_far", best}};
    j["simulated"] = run.simulated.samples() ? trajectory_to_jobj(run.simulated)
                                             : json();
    return j;
}

RunResult run_from_jobj(const json &j) {
    RunResult run;
    run.mode = j.at("mode");
    run.seed = j.at("seed");
    run.argmin = j.at("argmin").get<std::vector<double>>();
    run.min_value = num_from(j.at("min_value"));
    run.calls = j.at("calls");
    run.grid_size = j.at("grid_size");
    run.reduction = j.at("reduction");
    if (!j.at("model").is_null())
        run.model = model_from_json(j.at("model").dump());
    run.model_text = j.at("model_text");
    run.validation_error = num_from(j.at("validation_error"));
    run.success = j.at("success");
    run.failed = j.at("failed");
    run.error = j.at("error");
    for (const auto &e : j.at("log").at("entries")) {
        LogEntry entry;
        entry.candidate = e.at("candidate").get<std::vector<double>>();
        entry.value = num_from(e.at("value"));
        entry.iteration = e.at("iteration");
        entry.phase = e.at("phase") == "initial" ? EvalPhase::Initial : EvalPhase::Bo;
        run.log.entries.push_back(std::move(entry));
    }
    for (const auto &b : j.at("log").at("best_so_far"))
        run.log.best_so_far.push_back(num_from(b));
    if (!j.at("simulated").is_null())
        run.simulated = trajectory_from_jobj(j.at("simulated"));
    return run;
}

} // namespace

std::string report_to_json(const ExperimentReport &report) {
    json j;
    j["config"] = json::parse(config_to_json(report.config));
    j["timestamp"] = report.timestamp;
    j["seeds"] = report.seeds;
    j["bo_runs"] = json::array();
    for (const auto &run : report.bo_runs)
        j["bo_runs"].push_back(run_to_jobj(run));
    j["grid_run"] = report.grid_run ? run_to_jobj(*report.grid_run) : json();
    j["aggregates"] = {{"mean_calls", report.mean_calls},
                       {"mean_reduction", report.mean_reduction},
                       {"success_count", report.success_count}};
    j["training_data"] = trajectory_to_jobj(report.training_data);
    return j.dump(2);
}

ExperimentReport report_from_json(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("report is not valid JSON: ") + e.what());
    }
    ExperimentReport report;
    try {
        report.config = config_from_jobj(j.at("config"));
        report.timestamp = j.at("timestamp");
        report.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        for (const auto &run : j.at("bo_runs"))
            report.bo_runs.push_back(run_from_jobj(run));
        if (!j.at("grid_run").is_null())
            report.grid_run = run_from_jobj(j.at("grid_run"));
        report.mean_calls = j.at("aggregates").at("mean_calls");
        report.mean_reduction = j.at("aggregates").at("mean_reduction");
        report.success_count = j.at("aggregates").at("success_count");
        report.training_data = trajectory_from_jobj(j.at("training_data"));
    } catch (const json::exception &e) {
        throw ConfigError(std::string("invalid report JSON: ") + e.what());
    }
    return report;
}

namespace {

std::string sim_comparison_csv(const ExperimentReport &report, const RunResult &run) {
    std::ostringstream out;
    const auto &names = report.config.var_names;
    const auto &truth = report.training_data;
    out << "t";
    for (size_t c = 0; c < report.config.train_vars.size(); ++c) {
        const std::string nm = names.empty() ? "x" + std::to_string(c + 1) : names[c];
        out << ",true_" << nm;
    }
    for (size_t c = 0; c < report.config.train_vars.size(); ++c) {
        const std::string nm = names.empty() ? "x" + std::to_string(c + 1) : names[c];
        out << ",sim_" << nm;
    }
    out << "\n";
    int zero_row = 0;
    while (zero_row < truth.samples() && truth.times[zero_row] < -1e-9)
        ++zero_row;
    char buf[40];
    for (int i = 0; i < run.simulated.samples(); ++i) {
        const int r = zero_row + i;
        if (r >= truth.samples())
            break;
        std::snprintf(buf, sizeof(buf), "%.17g", run.simulated.times[i]);
        out << buf;
        for (int c = 0; c < truth.dim(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", truth.states(r, c));
            out << "," << buf;
        }
        for (int c = 0; c < run.simulated.dim(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", run.simulated.states(i, c));
            out << "," << buf;
        }
        out << "\n";
    }
    return out.str();
}

void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
    if (!out.good())
        throw ConfigError("write failed for '" + path.string() + "'");
}

} // namespace

void write_report(const ExperimentReport &report, const std::string &dir) {
    std::filesystem::path base(dir);
    std::error_code ec;
    std::filesystem::create_directories(base, ec);
    if (ec)
        throw ConfigError("cannot create report directory '" + dir + "': " +
                          ec.message());
    write_file(base / "report.json", report_to_json(report));
    {
        Trajectory t = report.training_data;
        write_file(base / "training_data.csv", trajectory_to_csv(t));
    }
    for (size_t i = 0; i < report.bo_runs.size(); ++i) {
        const auto &run = report.bo_runs[i];
        write_file(base / ("bo_run" + std::to_string(i) + "_log.csv"),
                   log_to_csv(run.log));
        if (run.simulated.samples())
            write_file(base / ("bo_run" + std::to_string(i) + "_sim.csv"),
                       sim_comparison_csv(report, run));
    }
    if (report.grid_run) {
        write_file(base / "grid_log.csv", log_to_csv(report.grid_run->log));
        if (report.grid_run->simulated.samples())
            write_file(base / "grid_sim.csv",
                       sim_comparison_csv(report, *report.grid_run));
    }
}

std::string report_summary(const ExperimentReport &report) {
    std::ostringstream out;
    char buf[256];
    out << "experiment: " << report.config.name << " (" << report.config.system
        << ")\n";
    auto print_run = [&](const RunResult &run, const std::string &tag) {
        std::ostringstream arg;
        for (size_t i = 0; i < run.argmin.size(); ++i) {
            if (i)
                arg << ", ";
            arg << run.argmin[i];
        }
        std::snprintf(buf, sizeof(buf),
                      "  %-8s seed=%-4llu argmin=(%s) g=%-10.4g calls=%-5d "
                      "reduction=%5.1f%% val_err=%-10.4g %s\n",
                      tag.c_str(), static_cast<unsigned long long>(run.seed),
                      arg.str().c_str(), run.min_value, run.calls, run.reduction,
                      run.validation_error,
                      run.failed ? "FAILED" : (run.success ? "ok" : "off-target"));
        out << buf;
    };
    if (report.grid_run)
        print_run(*report.grid_run, "grid");
    for (const auto &run : report.bo_runs)
        print_run(run, "bo");
    std::snprintf(buf, sizeof(buf),
                  "aggregates: mean_calls=%.1f mean_reduction=%.1f%% success=%d/%zu\n",
                  report.mean_calls, report.mean_reduction, report.success_count,
                  report.bo_runs.size());
    out << buf;
    if (!report.bo_runs.empty() && !report.bo_runs.front().model_text.empty()) {
        out << "model (first run):\n";
        std::istringstream lines(report.bo_runs.front().model_text);
        std::string line;
        while (std::getline(lines, line))
            out << "  " << line << "\n";
    } else if (report.grid_run && !report.grid_run->model_text.empty()) {
        out << "model (grid):\n";
        std::istringstream lines(report.grid_run->model_text);
        std::string line;
        while (std::getline(lines, line))
            out << "  " << line << "\n";
    }
    return out.str();
}

} // namespace dsy
