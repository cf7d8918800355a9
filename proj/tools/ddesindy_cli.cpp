// Command line front end; talks to the library through the C interface only.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddesindy.h"

namespace {

int fail(dsy_status status) {
    std::cerr << "error: " << dsy_last_error() << "\n";
    return static_cast<int>(status);
}

std::string take(char *s) {
    std::string out = s ? s : "";
    dsy_string_free(s);
    return out;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot read '" << path << "'\n";
        std::exit(1);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string &path, const std::string &content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) {
        std::cerr << "error: cannot write '" << path << "'\n";
        std::exit(1);
    }
    out << content;
}

std::string params_to_json(const std::vector<std::string> &pairs) {
    std::string json = "{";
    for (size_t i = 0; i < pairs.size(); ++i) {
        const auto eq = pairs[i].find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --param expects key=value, got '" << pairs[i]
                      << "'\n";
            std::exit(1);
        }
        if (i)
            json += ",";
        json += "\"" + pairs[i].substr(0, eq) + "\":" + pairs[i].substr(eq + 1);
    }
    return json + "}";
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Sparse discovery of delay differential equations"};
    app.require_subcommand(1);

    // simulate
    auto *simulate = app.add_subcommand("simulate", "Integrate a benchmark system");
    std::string sim_system;
    std::vector<std::string> sim_params;
    double sim_t_end = 30.0, sim_step = 1e-3, sim_dt = 0.01;
    std::string sim_output;
    simulate->add_option("--system", sim_system, "logistic|sir|mackey_glass|two_delay_cubic")
        ->required();
    simulate->add_option("--param", sim_params, "parameter override, key=value");
    simulate->add_option("--t-end", sim_t_end, "final time");
    simulate->add_option("--step", sim_step, "integration step");
    simulate->add_option("--dt", sim_dt, "output sampling interval");
    simulate->add_option("-o,--output", sim_output, "output CSV path (default stdout)");

    // discover
    auto *discover = app.add_subcommand("discover", "Run a discovery experiment");
    std::string dis_preset, dis_config, dis_mode, dis_out, dis_json;
    std::uint64_t dis_seed = 0;
    int dis_runs = 0;
    bool dis_list = false;
    discover->add_option("--preset", dis_preset, "built-in experiment name");
    discover->add_option("--config", dis_config, "experiment config JSON file");
    discover->add_option("--mode", dis_mode, "bo|grid|both");
    discover->add_option("--seed", dis_seed, "base RNG seed");
    discover->add_option("--runs", dis_runs, "number of optimizer runs");
    discover->add_option("--out", dis_out, "directory for report.json and CSVs");
    discover->add_option("--json", dis_json, "write the report JSON to this path");
    discover->add_flag("--list", dis_list, "list built-in experiments and exit");
    std::string dis_dump;
    discover->add_option("--dump-config", dis_dump,
                         "write the resolved config JSON and exit");

    // validate
    auto *validate = app.add_subcommand("validate", "Simulate a fitted model against data");
    std::string val_model, val_data;
    double val_from = 0.0, val_to = 0.0, val_step = 1e-3;
    validate->add_option("--model", val_model, "model JSON file")->required();
    validate->add_option("--data", val_data, "reference trajectory CSV")->required();
    validate->add_option("--from", val_from, "window start")->required();
    validate->add_option("--to", val_to, "window end")->required();
    validate->add_option("--step", val_step, "integration step");

    // report
    auto *report_cmd = app.add_subcommand("report", "Summarize a saved report");
    std::string rep_input, rep_out;
    report_cmd->add_option("--input", rep_input, "report JSON file")->required();
    report_cmd->add_option("--out", rep_out, "re-emit the report and CSVs here");

    CLI11_PARSE(app, argc, argv);

    if (simulate->parsed()) {
        const double ratio = sim_dt / sim_step;
        const int decim = static_cast<int>(std::llround(ratio));
        if (decim < 1 || std::abs(ratio - decim) > 1e-9 * ratio) {
            std::cerr << "error: --dt must be an integer multiple of --step\n";
            return 1;
        }
        char *csv = nullptr;
        const dsy_status st =
            dsy_simulate(sim_system.c_str(), params_to_json(sim_params).c_str(),
                         sim_t_end, sim_step, decim, &csv);
        if (st != DSY_OK)
            return fail(st);
        write_output(sim_output, take(csv));
        return 0;
    }

    if (discover->parsed()) {
        if (dis_list) {
            char *names = nullptr;
            const dsy_status st = dsy_preset_list(&names);
            if (st != DSY_OK)
                return fail(st);
            std::cout << take(names);
            return 0;
        }
        if (dis_preset.empty() == dis_config.empty()) {
            std::cerr << "error: give exactly one of --preset or --config\n";
            return 1;
        }
        dsy_config *config = nullptr;
        dsy_status st = dis_preset.empty()
                            ? dsy_config_parse(read_file(dis_config).c_str(), &config)
                            : dsy_config_preset(dis_preset.c_str(), &config);
        if (st != DSY_OK)
            return fail(st);
        if (!dis_mode.empty())
            st = dsy_config_set_mode(config, dis_mode.c_str());
        if (st == DSY_OK && discover->count("--seed"))
            st = dsy_config_set_seed(config, dis_seed);
        if (st == DSY_OK && dis_runs > 0)
            st = dsy_config_set_runs(config, dis_runs);
        if (st == DSY_OK && discover->count("--dump-config")) {
            char *json = nullptr;
            st = dsy_config_to_json(config, &json);
            dsy_config_free(config);
            if (st != DSY_OK)
                return fail(st);
            write_output(dis_dump, take(json));
            return 0;
        }
        dsy_report *report = nullptr;
        if (st == DSY_OK)
            st = dsy_run_experiment(config, &report);
        dsy_config_free(config);
        if (st != DSY_OK)
            return fail(st);
        if (!dis_out.empty()) {
            st = dsy_report_write(report, dis_out.c_str());
            if (st != DSY_OK) {
                dsy_report_free(report);
                return fail(st);
            }
        }
        if (!dis_json.empty()) {
            char *json = nullptr;
            st = dsy_report_to_json(report, &json);
            if (st != DSY_OK) {
                dsy_report_free(report);
                return fail(st);
            }
            write_output(dis_json, take(json));
        }
        char *summary = nullptr;
        st = dsy_report_summary(report, &summary);
        dsy_report_free(report);
        if (st != DSY_OK)
            return fail(st);
        std::cout << take(summary);
        return 0;
    }

    if (validate->parsed()) {
        double max_dev = 0.0;
        const dsy_status st =
            dsy_validate(read_file(val_model).c_str(), read_file(val_data).c_str(),
                         val_from, val_to, val_step, &max_dev);
        if (st != DSY_OK)
            return fail(st);
        std::printf("max_deviation %.17g\n", max_dev);
        return 0;
    }

    if (report_cmd->parsed()) {
        dsy_report *report = nullptr;
        dsy_status st = dsy_report_parse(read_file(rep_input).c_str(), &report);
        if (st != DSY_OK)
            return fail(st);
        if (!rep_out.empty()) {
            st = dsy_report_write(report, rep_out.c_str());
            if (st != DSY_OK) {
                dsy_report_free(report);
                return fail(st);
            }
        }
        char *summary = nullptr;
        st = dsy_report_summary(report, &summary);
        dsy_report_free(report);
        if (st != DSY_OK)
            return fail(st);
        std::cout << take(summary);
        return 0;
    }
    return 0;
}
