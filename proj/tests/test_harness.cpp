#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/harness.hpp"

using namespace dsy;

namespace {

ExperimentConfig tiny_logistic(ExperimentConfig::Mode mode) {
    ExperimentConfig c = preset("logistic_1.8");
    c.unknowns[0].axis = linspace_axis(0.8, 0.1, 5);
    c.mode = mode;
    c.runs = 2;
    c.bo.initial_design = 3;
    c.bo.budget = 5;
    c.bo.stall_patience = 5;
    return c;
}

double coeff_near(const SparseModel &model, double target) {
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < model.coefficients.rows(); ++c)
        for (int e = 0; e < model.coefficients.cols(); ++e)
            if (model.coefficients(c, e) != 0.0)
                best = std::min(best, std::abs(model.coefficients(c, e) - target));
    return best;
}

} // namespace

TEST_CASE("the preset list covers all nine experiments") {
    const std::vector<std::string> names = preset_names();
    REQUIRE(names.size() == 9);
    for (const char *expect :
         {"logistic_1.8", "logistic_3.0", "sir", "mackey_glass_tau",
          "mackey_glass_tau_alpha_coarse", "mackey_glass_tau_alpha_fine",
          "two_delay_coarse", "two_delay_mid", "two_delay_fine"}) {
        const bool found =
            std::find(names.begin(), names.end(), expect) != names.end();
        CHECK(found);
    }
    for (const auto &name : names)
        CHECK_NOTHROW(preset(name).validate());
    CHECK_THROWS_AS(preset("pendulum"), ConfigError);
}

TEST_CASE("logistic presets search 400 delays between 0.25 and 4.24") {
    for (const char *name : {"logistic_1.8", "logistic_3.0"}) {
        const ExperimentConfig c = preset(name);
        CHECK(c.system == "logistic");
        REQUIRE(c.unknowns.size() == 1);
        REQUIRE(c.unknowns[0].axis.size() == 400);
        CHECK(c.unknowns[0].axis.front() == 0.25);
        CHECK(c.unknowns[0].axis.back() == doctest::Approx(4.24).epsilon(1e-12));
        CHECK(c.expected_argmin == std::vector<double>{1.0});
        CHECK(c.train.lo == 0.0);
        CHECK(c.train.hi == 10.0);
        CHECK(c.test.hi == 30.0);
        CHECK(c.poly_degree == 2);
        CHECK(c.bo.budget == 120);
    }
    CHECK(preset("logistic_1.8").params.at("rho") == 1.8);
    CHECK(preset("logistic_3.0").params.at("rho") == 3.0);
}

TEST_CASE("the sir preset regresses two variables with one delayed column") {
    const ExperimentConfig c = preset("sir");
    CHECK(c.system == "sir");
    CHECK(c.train_vars == std::vector<int>{0, 1});
    REQUIRE(c.delayed_vars.size() == 1);
    CHECK(c.delayed_vars[0] == std::vector<int>{1});
    CHECK(c.var_names == std::vector<std::string>{"s", "i"});
    CHECK(c.unknowns[0].axis.size() == 400);
    CHECK(c.expected_argmin == std::vector<double>{1.0});
}

TEST_CASE("the mackey-glass delay preset fixes the hill exponent at ten") {
    const ExperimentConfig c = preset("mackey_glass_tau");
    CHECK(c.system == "mackey_glass");
    REQUIRE(c.hill_terms.size() == 1);
    CHECK(c.hill_terms[0].alpha == 10.0);
    CHECK(c.unknowns[0].axis.size() == 450);
    CHECK(c.train.hi == 17.0);
    CHECK(c.test.lo == 17.0);
    CHECK(c.test.hi == 30.0);
}

TEST_CASE("the joint mackey-glass presets search delay and exponent") {
    const ExperimentConfig coarse = preset("mackey_glass_tau_alpha_coarse");
    REQUIRE(coarse.unknowns.size() == 2);
    CHECK(coarse.unknowns[0].kind == UnknownSpec::Kind::Delay);
    CHECK(coarse.unknowns[1].kind == UnknownSpec::Kind::HillAlpha);
    CHECK(coarse.unknowns[0].axis.size() == 19);
    CHECK(coarse.unknowns[1].axis.size() == 13);
    CHECK(coarse.unknowns[1].axis.front() == 0.0);
    CHECK(coarse.unknowns[1].axis.back() == 12.0);
    REQUIRE(coarse.hill_terms.size() == 1);
    CHECK(std::isnan(coarse.hill_terms[0].alpha));
    CHECK(coarse.expected_argmin == std::vector<double>{1.0, 10.0});
    CHECK(coarse.bo.initial_design == 10);
    CHECK(coarse.bo.budget == 400);
    CHECK(preset("mackey_glass_tau_alpha_fine").unknowns[0].axis.size() == 91);
}

TEST_CASE("the two-delay presets order delays and refine with resolution") {
    const ExperimentConfig coarse = preset("two_delay_coarse");
    CHECK(coarse.system == "two_delay_cubic");
    CHECK(coarse.poly_degree == 3);
    CHECK(coarse.constrain_decreasing_delays);
    REQUIRE(coarse.unknowns.size() == 2);
    CHECK(coarse.unknowns[0].axis.size() == 19);
    CHECK(coarse.expected_argmin == std::vector<double>{1.0, 0.5});
    CHECK(preset("two_delay_mid").unknowns[0].axis.size() == 41);
    CHECK(preset("two_delay_fine").unknowns[0].axis.size() == 61);
}

TEST_CASE("configs survive a JSON round trip byte for byte") {
    for (const auto &name : preset_names()) {
        const std::string first = config_to_json(preset(name));
        const std::string second = config_to_json(config_from_json(first));
        CHECK(first == second);
    }
}

TEST_CASE("config validation rejects inconsistent settings") {
    ExperimentConfig c = preset("logistic_1.8");
    c.runs = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = preset("logistic_1.8");
    c.expected_argmin = {1.0, 2.0};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = preset("logistic_1.8");
    c.train = {10.0, 0.0};
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("grid discovery on a reduced axis recovers the logistic model") {
    const ExperimentConfig c = tiny_logistic(ExperimentConfig::Mode::Grid);
    const ExperimentReport report = run_experiment(c);
    REQUIRE(report.grid_run.has_value());
    const RunResult &run = *report.grid_run;
    CHECK(run.mode == "grid");
    CHECK(run.calls == 5);
    CHECK(run.grid_size == 5);
    CHECK(run.argmin == std::vector<double>{1.0});
    CHECK(run.success);
    CHECK_FALSE(run.failed);
    CHECK(coeff_near(run.model, 1.8) <= 0.02);
    CHECK(coeff_near(run.model, -1.8) <= 0.02);
    CHECK(run.validation_error <= 0.05);
    CHECK(run.model_text.find("x") != std::string::npos);
    CHECK(report.bo_runs.empty());
    CHECK(report.success_count == 1);
}

TEST_CASE("both modes populate the report consistently") {
    const ExperimentConfig c = tiny_logistic(ExperimentConfig::Mode::Both);
    const ExperimentReport report = run_experiment(c);
    REQUIRE(report.grid_run.has_value());
    REQUIRE(report.bo_runs.size() == 2);
    REQUIRE(report.seeds.size() == 2);
    CHECK(report.seeds[0] == c.bo.seed);
    CHECK(report.seeds[1] == c.bo.seed + 1);
    double calls = 0.0, reduction = 0.0;
    int successes = 0;
    for (const auto &run : report.bo_runs) {
        CHECK(run.mode == "bo");
        CHECK(run.calls <= c.bo.budget);
        CHECK(run.log.entries.size() == static_cast<size_t>(run.calls));
        calls += run.calls;
        reduction += run.reduction;
        successes += run.success ? 1 : 0;
    }
    CHECK(report.mean_calls == calls / 2.0);
    CHECK(report.mean_reduction == reduction / 2.0);
    CHECK(report.success_count == successes);
    CHECK(report.training_data.samples() > 0);
}

TEST_CASE("numeric derivatives still identify the dynamics") {
    ExperimentConfig c = tiny_logistic(ExperimentConfig::Mode::Grid);
    c.deriv_source = ExperimentConfig::DerivSource::Numeric;
    const ExperimentReport report = run_experiment(c);
    REQUIRE(report.grid_run.has_value());
    CHECK(report.grid_run->argmin == std::vector<double>{1.0});
    CHECK(coeff_near(report.grid_run->model, 1.8) <= 0.054);
    CHECK(coeff_near(report.grid_run->model, -1.8) <= 0.054);
}

TEST_CASE("the fitted model does not depend on the test window") {
    ExperimentConfig c = tiny_logistic(ExperimentConfig::Mode::Grid);
    const ExperimentReport a = run_experiment(c);
    c.test = {10.0, 20.0};
    const ExperimentReport b = run_experiment(c);
    REQUIRE(a.grid_run.has_value());
    REQUIRE(b.grid_run.has_value());
    CHECK(a.grid_run->argmin == b.grid_run->argmin);
    CHECK((a.grid_run->model.coefficients - b.grid_run->model.coefficients)
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("reports survive a JSON round trip byte for byte") {
    const ExperimentReport report =
        run_experiment(tiny_logistic(ExperimentConfig::Mode::Both));
    const std::string first = report_to_json(report);
    const std::string second = report_to_json(report_from_json(first));
    CHECK(first == second);
}

TEST_CASE("written reports contain the full artifact set") {
    namespace fs = std::filesystem;
    const ExperimentReport report =
        run_experiment(tiny_logistic(ExperimentConfig::Mode::Both));
    const fs::path dir = fs::temp_directory_path() / "ddesindy_report_test";
    fs::remove_all(dir);
    write_report(report, dir.string());
    for (const char *file :
         {"report.json", "training_data.csv", "grid_log.csv", "grid_sim.csv",
          "bo_run0_log.csv", "bo_run0_sim.csv", "bo_run1_log.csv",
          "bo_run1_sim.csv"})
        CHECK(fs::exists(dir / file));

    std::ifstream in(dir / "training_data.csv");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const Trajectory back = trajectory_from_csv(buffer.str());
    REQUIRE(back.samples() == report.training_data.samples());
    CHECK(back.times[0] == report.training_data.times[0]);
    CHECK(back.states(back.samples() - 1, 0) ==
          report.training_data.states(back.samples() - 1, 0));
    fs::remove_all(dir);
}

TEST_CASE("the summary names the experiment and shows the model") {
    const ExperimentReport report =
        run_experiment(tiny_logistic(ExperimentConfig::Mode::Grid));
    const std::string summary = report_summary(report);
    CHECK(summary.find("logistic_1.8") != std::string::npos);
    CHECK(summary.find("grid") != std::string::npos);
    CHECK(summary.find("'(t) =") != std::string::npos);
}
