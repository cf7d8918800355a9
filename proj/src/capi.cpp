#include "ddesindy.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "core/harness.hpp"

struct dsy_config {
    dsy::ExperimentConfig impl;
};

struct dsy_report {
    dsy::ExperimentReport impl;
};

namespace {

thread_local std::string g_last_error;

char *dup_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (out)
        std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn> dsy_status guarded(Fn &&fn) {
    try {
        fn();
        return DSY_OK;
    } catch (const dsy::ConfigError &e) {
        g_last_error = e.what();
        return DSY_ERR_CONFIG;
    } catch (const dsy::NumericError &e) {
        g_last_error = e.what();
        return DSY_ERR_NUMERIC;
    } catch (const std::exception &e) {
        g_last_error = e.what();
        return DSY_ERR_CONFIG;
    }
}

dsy_status config_error(const char *message) {
    g_last_error = message;
    return DSY_ERR_CONFIG;
}

} // namespace

extern "C" {

const char *dsy_last_error(void) { return g_last_error.c_str(); }

void dsy_string_free(char *s) { std::free(s); }

dsy_status dsy_preset_list(char **out) {
    if (!out)
        return config_error("null output pointer");
    return guarded([&] {
        std::string joined;
        for (const auto &name : dsy::preset_names()) {
            joined += name;
            joined += '\n';
        }
        *out = dup_string(joined);
    });
}

dsy_status dsy_config_preset(const char *name, dsy_config **out) {
    if (!name || !out)
        return config_error("null argument");
    return guarded([&] { *out = new dsy_config{dsy::preset(name)}; });
}

dsy_status dsy_config_parse(const char *json, dsy_config **out) {
    if (!json || !out)
        return config_error("null argument");
    return guarded([&] {
        dsy::ExperimentConfig config = dsy::config_from_json(json);
        config.validate();
        *out = new dsy_config{std::move(config)};
    });
}

dsy_status dsy_config_to_json(const dsy_config *config, char **out) {
    if (!config || !out)
        return config_error("null argument");
    return guarded([&] { *out = dup_string(dsy::config_to_json(config->impl)); });
}

dsy_status dsy_config_set_mode(dsy_config *config, const char *mode) {
    if (!config || !mode)
        return config_error("null argument");
    const std::string m = mode;
    if (m == "bo")
        config->impl.mode = dsy::ExperimentConfig::Mode::Bo;
    else if (m == "grid")
        config->impl.mode = dsy::ExperimentConfig::Mode::Grid;
    else if (m == "both")
        config->impl.mode = dsy::ExperimentConfig::Mode::Both;
    else
        return config_error("mode must be bo, grid or both");
    return DSY_OK;
}

dsy_status dsy_config_set_seed(dsy_config *config, uint64_t seed) {
    if (!config)
        return config_error("null argument");
    config->impl.bo.seed = seed;
    return DSY_OK;
}

dsy_status dsy_config_set_runs(dsy_config *config, int runs) {
    if (!config)
        return config_error("null argument");
    if (runs < 1)
        return config_error("runs must be positive");
    config->impl.runs = runs;
    return DSY_OK;
}

void dsy_config_free(dsy_config *config) { delete config; }

dsy_status dsy_simulate(const char *system, const char *params_json,
                        double t_end, double step, int decimate, char **csv_out) {
    if (!system || !csv_out)
        return config_error("null argument");
    if (decimate < 1)
        return config_error("decimate must be positive");
    return guarded([&] {
        dsy::ParamMap params;
        if (params_json && params_json[0]) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(params_json);
            } catch (const nlohmann::json::exception &e) {
                throw dsy::ConfigError(std::string("invalid params JSON: ") +
                                       e.what());
            }
            if (!j.is_object())
                throw dsy::ConfigError("params JSON must be an object");
            for (auto &[key, value] : j.items())
                params[key] = value.get<double>();
        }
        auto [sys, history] = dsy::benchmark(system, params);
        dsy::Trajectory traj = dsy::integrate(sys, history, t_end, step);
        *csv_out = dup_string(dsy::trajectory_to_csv(dsy::decimate(traj, decimate)));
    });
}

dsy_status dsy_run_experiment(const dsy_config *config, dsy_report **out) {
    if (!config || !out)
        return config_error("null argument");
    return guarded([&] {
        *out = new dsy_report{dsy::run_experiment(config->impl)};
    });
}

dsy_status dsy_report_parse(const char *json, dsy_report **out) {
    if (!json || !out)
        return config_error("null argument");
    return guarded([&] { *out = new dsy_report{dsy::report_from_json(json)}; });
}

dsy_status dsy_report_to_json(const dsy_report *report, char **out) {
    if (!report || !out)
        return config_error("null argument");
    return guarded([&] { *out = dup_string(dsy::report_to_json(report->impl)); });
}

dsy_status dsy_report_summary(const dsy_report *report, char **out) {
    if (!report || !out)
        return config_error("null argument");
    return guarded([&] { *out = dup_string(dsy::report_summary(report->impl)); });
}

dsy_status dsy_report_write(const dsy_report *report, const char *dir) {
    if (!report || !dir)
        return config_error("null argument");
    return guarded([&] { dsy::write_report(report->impl, dir); });
}

void dsy_report_free(dsy_report *report) { delete report; }

dsy_status dsy_validate(const char *model_json, const char *data_csv,
                        double lo, double hi, double step, double *max_dev) {
    if (!model_json || !data_csv || !max_dev)
        return config_error("null argument");
    return guarded([&] {
        dsy::SparseModel model = dsy::model_from_json(model_json);
        dsy::Trajectory traj = dsy::trajectory_from_csv(data_csv);
        dsy::TimeSeries reference;
        reference.times = traj.times;
        reference.values = traj.states;
        reference.validate();
        if (reference.samples() < 2)
            throw dsy::ConfigError("reference data needs at least two rows");
        const dsy::Vector phi = reference.values.row(0).transpose();
        *max_dev = dsy::validate_model(model, reference, phi, step, {lo, hi});
    });
}

} // extern "C"
