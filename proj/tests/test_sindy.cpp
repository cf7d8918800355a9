#include <doctest.h>

#include <cmath>
#include <random>

#include "core/sindy.hpp"

using namespace dsy;

namespace {

struct Pipeline {
    TimeSeries series;
    Matrix derivatives;
};

// Logistic training data on [0,10] at dt=0.01 with exact derivatives,
// including constant-history rows so large candidate delays stay usable.
Pipeline logistic_data(double rho, double hist_extent) {
    auto [sys, hist] = benchmark("logistic", {{"rho", rho}, {"tau", 1.0}});
    Trajectory traj = decimate(integrate(sys, hist, 10.0, 1e-3), 10);
    const int n_hist = static_cast<int>(std::llround(hist_extent / 0.01));
    Pipeline p;
    const int m = n_hist + traj.samples();
    p.series.times.resize(m);
    p.series.values.resize(m, 1);
    p.derivatives.resize(m, 1);
    for (int i = 0; i < n_hist; ++i) {
        p.series.times[i] = -0.01 * (n_hist - i);
        p.series.values(i, 0) = 0.1;
        p.derivatives(i, 0) = 0.0;
    }
    for (int i = 0; i < traj.samples(); ++i) {
        p.series.times[n_hist + i] = traj.times[i];
        p.series.values(n_hist + i, 0) = traj.states(i, 0);
        p.derivatives(n_hist + i, 0) = (*traj.derivatives)(i, 0);
    }
    p.series.names = {"x"};
    return p;
}

DesignMatrix logistic_library(const Pipeline &p, double delay) {
    LibrarySpec spec;
    spec.poly_degree = 2;
    std::vector<char> train(p.series.samples(), 0);
    for (int i = 0; i < p.series.samples(); ++i)
        train[i] = p.series.times[i] >= -1e-9;
    return restrict_rows(
        build_library(spec, p.series, {delayed_samples(p.series, delay)}), train);
}

DesignMatrix random_design(int m, int q, std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    DesignMatrix design;
    design.columns.resize(m, q);
    for (int i = 0; i < m; ++i)
        for (int c = 0; c < q; ++c)
            design.columns(i, c) = g(rng);
    design.row_mask.assign(m, 1);
    design.labels.resize(q);
    design.vars.resize(q);
    design.base_names.resize(q);
    for (int c = 0; c < q; ++c) {
        design.labels[c].powers = {{c, 1}};
        design.vars[c] = {AugVar::Kind::Current, c, -1, 0.0};
        design.base_names[c] = "v" + std::to_string(c);
    }
    return design;
}

} // namespace

TEST_CASE("logistic fit at the true delay recovers the two known terms") {
    const Pipeline p = logistic_data(1.8, 1.0);
    const DesignMatrix design = logistic_library(p, 1.0);
    const SparseModel model = stls_fit(design, p.derivatives, {});
    REQUIRE(model.n_terms() == 6);
    // active terms: X (index 1) and X*X_tau (index 4)
    CHECK(model.coefficients(1, 0) == doctest::Approx(1.8).epsilon(1e-2 / 1.8));
    CHECK(model.coefficients(4, 0) == doctest::Approx(-1.8).epsilon(1e-2 / 1.8));
    for (int c : {0, 2, 3, 5})
        CHECK(model.coefficients(c, 0) == 0.0);
    CHECK_FALSE(model.degenerate);
}

TEST_CASE("zero derivatives give the zero model") {
    const Pipeline p = logistic_data(1.8, 1.0);
    const DesignMatrix design = logistic_library(p, 1.0);
    const Matrix zero = Matrix::Zero(p.derivatives.rows(), 1);
    const SparseModel model = stls_fit(design, zero, {});
    CHECK(model.coefficients.cwiseAbs().maxCoeff() == 0.0);
    CHECK(model.fit_error == 0.0);
    CHECK_FALSE(model.degenerate);
}

TEST_CASE("a single scaled library column is recovered exactly") {
    std::mt19937_64 rng(3);
    DesignMatrix design = random_design(200, 6, rng);
    Matrix target = 2.0 * design.columns.col(3);
    StlsConfig config;
    config.threshold = 0.5;
    const SparseModel model = stls_fit(design, target, config);
    CHECK(model.coefficients(3, 0) == doctest::Approx(2.0).epsilon(1e-12));
    for (int c = 0; c < 6; ++c)
        if (c != 3)
            CHECK(model.coefficients(c, 0) == 0.0);
    CHECK(model.fit_error <= 1e-10);
}

TEST_CASE("reconstruction error matches the fit error and the zero model") {
    const Pipeline p = logistic_data(1.8, 1.0);
    const DesignMatrix design = logistic_library(p, 1.0);
    SparseModel model = stls_fit(design, p.derivatives, {});
    CHECK(reconstruction_error(model, design, p.derivatives) ==
          doctest::Approx(model.fit_error).epsilon(1e-12));

    model.coefficients.setZero();
    double norm = 0.0;
    for (int i = 0; i < design.rows(); ++i)
        if (design.row_mask[i])
            norm += p.derivatives.row(i).squaredNorm();
    CHECK(reconstruction_error(model, design, p.derivatives) ==
          doctest::Approx(std::sqrt(norm)).epsilon(1e-12));
}

TEST_CASE("the objective is smaller at the true delay than at a wrong one") {
    const Pipeline p = logistic_data(1.8, 2.0);
    const SparseModel at_true =
        stls_fit(logistic_library(p, 1.0), p.derivatives, {});
    const SparseModel at_wrong =
        stls_fit(logistic_library(p, 2.0), p.derivatives, {});
    CHECK(at_true.fit_error < at_wrong.fit_error);
}

TEST_CASE("the zero model simulates to a constant trajectory") {
    const Pipeline p = logistic_data(1.8, 1.0);
    const DesignMatrix design = logistic_library(p, 1.0);
    const Matrix zero = Matrix::Zero(p.derivatives.rows(), 1);
    const SparseModel model = stls_fit(design, zero, {});
    DelaySystem sys = model_to_system(model);
    Vector phi(1);
    phi[0] = 0.7;
    const Trajectory traj =
        integrate(sys, HistorySegment::constant(phi, 1.0), 3.0, 1e-3);
    CHECK((traj.states.array() - 0.7).abs().maxCoeff() == 0.0);
}

TEST_CASE("a refit Mackey-Glass model re-simulates the training data") {
    auto [sys, hist] = benchmark(
        "mackey_glass",
        {{"beta", 6.0}, {"gamma", 3.0}, {"alpha", 10.0}, {"tau", 1.0}});
    Trajectory traj = decimate(integrate(sys, hist, 17.0, 1e-3), 10);
    TimeSeries series;
    series.times = traj.times;
    series.values = traj.states;
    series.names = {"x"};
    Matrix deriv = *traj.derivatives;

    LibrarySpec spec;
    spec.poly_degree = 2;
    spec.hill_terms = {{0, 0, 10.0}};
    const DesignMatrix design =
        build_library(spec, series, {delayed_samples(series, 1.0)});
    SparseModel model = stls_fit(design, deriv, {});
    model.var_names = {"x"};

    DelaySystem fitted = model_to_system(model);
    Vector phi(1);
    phi[0] = 0.1;
    const Trajectory sim =
        decimate(integrate(fitted, HistorySegment::constant(phi, 1.0), 17.0, 1e-3),
                 10);
    double worst = 0.0;
    for (int i = 0; i < sim.samples(); ++i)
        worst = std::max(worst, std::abs(sim.states(i, 0) - traj.states(i, 0)));
    CHECK(worst <= 0.05);
}

TEST_CASE("models format as readable equations") {
    SUBCASE("zero model") {
        const Pipeline p = logistic_data(1.8, 1.0);
        const DesignMatrix design = logistic_library(p, 1.0);
        const Matrix zero = Matrix::Zero(p.derivatives.rows(), 1);
        SparseModel model = stls_fit(design, zero, {});
        model.var_names = {"x1"};
        CHECK(format_model(model) == "x1'(t) = 0");
    }
    SUBCASE("two-delay fit") {
        auto [sys, hist] = benchmark(
            "two_delay_cubic",
            {{"a", -1.0}, {"b", -0.5}, {"tau1", 1.0}, {"tau2", 0.5}});
        Trajectory traj = decimate(integrate(sys, hist, 10.0, 1e-3), 10);
        TimeSeries series;
        series.times = traj.times;
        series.values = traj.states;
        series.names = {"x"};
        LibrarySpec spec;
        spec.poly_degree = 3;
        const DesignMatrix design =
            build_library(spec, series,
                          {delayed_samples(series, 1.0),
                           delayed_samples(series, 0.5)});
        SparseModel model = stls_fit(design, *traj.derivatives, {});
        model.var_names = {"x"};
        CHECK(format_model(model) ==
              "x'(t) = -1.000·x(t-1.00)^2 - 0.500·x(t-0.50)^3");
    }
}

TEST_CASE("every surviving coefficient clears the threshold") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        DesignMatrix design = random_design(120, 8, rng);
        Matrix target(120, 2);
        for (int i = 0; i < 120; ++i)
            for (int c = 0; c < 2; ++c)
                target(i, c) = g(rng);
        StlsConfig config;
        config.threshold = 0.05;
        const SparseModel model = stls_fit(design, target, config);
        for (int r = 0; r < model.coefficients.rows(); ++r)
            for (int c = 0; c < model.coefficients.cols(); ++c) {
                const double v = model.coefficients(r, c);
                CHECK((v == 0.0 || std::abs(v) >= config.threshold));
            }
    }
}

TEST_CASE("the sparse residual sits between the full OLS and zero residuals") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 1.0);
    DesignMatrix design = random_design(150, 10, rng);
    Matrix target(150, 1);
    for (int i = 0; i < 150; ++i)
        target(i, 0) = g(rng);
    StlsConfig config;
    config.threshold = 0.08;
    const SparseModel sparse = stls_fit(design, target, config);

    StlsConfig dense = config;
    dense.threshold = 0.0;
    const SparseModel full = stls_fit(design, target, dense);

    CHECK(sparse.fit_error >= full.fit_error - 1e-12);
    CHECK(sparse.fit_error <= target.norm() + 1e-12);
}

TEST_CASE("exact sparse targets are recovered on well-conditioned designs") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> mag(0.2, 1.0);
    int successes = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        const int q = 5 + static_cast<int>(rng() % 6);
        const int m = 10 * q;
        DesignMatrix design = random_design(m, q, rng);
        Eigen::JacobiSVD<Matrix> svd(design.columns);
        if (svd.singularValues()(0) /
                svd.singularValues()(svd.singularValues().size() - 1) >=
            1e6)
            continue;

        const int support = 1 + static_cast<int>(rng() % 3);
        std::vector<int> picked;
        while (static_cast<int>(picked.size()) < support) {
            const int c = static_cast<int>(rng() % q);
            if (std::find(picked.begin(), picked.end(), c) == picked.end())
                picked.push_back(c);
        }
        Vector xi = Vector::Zero(q);
        for (int c : picked)
            xi[c] = (rng() % 2 ? 1.0 : -1.0) * mag(rng);
        const Matrix target = design.columns * xi;

        StlsConfig config;
        config.threshold = 0.1; // true magnitudes >= 2 * threshold
        const SparseModel model = stls_fit(design, target, config);
        bool ok = true;
        for (int c = 0; c < q; ++c) {
            const bool active = model.coefficients(c, 0) != 0.0;
            const bool truth = xi[c] != 0.0;
            if (active != truth)
                ok = false;
        }
        successes += ok ? 1 : 0;
    }
    CHECK(successes >= trials * 95 / 100);
}

TEST_CASE("permuting library columns permutes the coefficients") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    DesignMatrix design = random_design(100, 6, rng);
    Matrix target(100, 1);
    for (int i = 0; i < 100; ++i)
        target(i, 0) = g(rng);
    const SparseModel base = stls_fit(design, target, {});

    const std::vector<int> perm{3, 0, 5, 1, 4, 2};
    DesignMatrix shuffled = design;
    for (int c = 0; c < 6; ++c) {
        shuffled.columns.col(c) = design.columns.col(perm[c]);
        shuffled.labels[c] = design.labels[perm[c]];
    }
    const SparseModel permuted = stls_fit(shuffled, target, {});
    for (int c = 0; c < 6; ++c)
        CHECK(permuted.coefficients(c, 0) == base.coefficients(perm[c], 0));
}

TEST_CASE("model JSON round-trips bit-exactly") {
    const Pipeline p = logistic_data(3.0, 1.0);
    const DesignMatrix design = logistic_library(p, 1.0);
    SparseModel model = stls_fit(design, p.derivatives, {});
    model.var_names = {"x"};
    model.params = {{"tau", 1.0}};
    const std::string json = model_to_json(model);
    const SparseModel back = model_from_json(json);
    CHECK(model_to_json(back) == json);
    CHECK((back.coefficients - model.coefficients).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the recovered support is insensitive to the threshold choice") {
    const Pipeline p = logistic_data(1.8, 1.0);
    const DesignMatrix design = logistic_library(p, 1.0);
    for (double threshold : {0.05, 0.1, 0.2}) {
        StlsConfig config;
        config.threshold = threshold;
        const SparseModel model = stls_fit(design, p.derivatives, config);
        CHECK(model.coefficients(1, 0) == doctest::Approx(1.8).epsilon(1e-6));
        CHECK(model.coefficients(4, 0) == doctest::Approx(-1.8).epsilon(1e-6));
        for (int c : {0, 2, 3, 5})
            CHECK(model.coefficients(c, 0) == 0.0);
    }
}
