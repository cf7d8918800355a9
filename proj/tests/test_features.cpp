#include <doctest.h>

#include <cmath>
#include <random>

#include "core/features.hpp"

using namespace dsy;

namespace {

TimeSeries sample_function(double t0, double dt, int m,
                           const std::function<double(double)> &f) {
    TimeSeries s;
    s.times.resize(m);
    s.values.resize(m, 1);
    for (int i = 0; i < m; ++i) {
        s.times[i] = t0 + dt * i;
        s.values(i, 0) = f(s.times[i]);
    }
    return s;
}

} // namespace

TEST_CASE("integer-multiple delays are exact row shifts") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TimeSeries s;
    const int m = 200;
    s.times.resize(m);
    s.values.resize(m, 2);
    for (int i = 0; i < m; ++i) {
        s.times[i] = 0.01 * i;
        s.values(i, 0) = u(rng);
        s.values(i, 1) = u(rng);
    }
    const DelayedView view = delayed_samples(s, 0.17);
    for (int i = 0; i < 17; ++i)
        CHECK_FALSE(view.valid[i]);
    for (int i = 17; i < m; ++i) {
        CHECK(view.valid[i]);
        CHECK(view.values(i, 0) == s.values(i - 17, 0));
        CHECK(view.values(i, 1) == s.values(i - 17, 1));
    }
}

TEST_CASE("off-grid delays interpolate linearly") {
    const TimeSeries s =
        sample_function(0.0, 0.01, 100, [](double t) { return t; });
    const DelayedView view = delayed_samples(s, 0.005);
    for (int i = 1; i < s.samples(); ++i) {
        CHECK(view.valid[i]);
        CHECK(view.values(i, 0) ==
              doctest::Approx(s.times[i] - 0.005).epsilon(1e-13));
    }
}

TEST_CASE("linear interpolation error on quadratic data is bounded") {
    const TimeSeries s =
        sample_function(0.0, 0.01, 200, [](double t) { return t * t; });
    const DelayedView view = delayed_samples(s, 0.005);
    for (int i = 1; i < s.samples(); ++i) {
        const double t = s.times[i] - 0.005;
        // max|f''| * dt^2 / 8 with f'' = 2
        CHECK(std::abs(view.values(i, 0) - t * t) <= 2.5e-5 + 1e-15);
    }
}

TEST_CASE("derivative estimates are exact on affine data") {
    const TimeSeries s =
        sample_function(0.0, 0.01, 50, [](double t) { return 3.0 * t + 1.0; });
    const Matrix d = estimate_derivatives(s);
    for (int i = 0; i < s.samples(); ++i)
        CHECK(d(i, 0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("derivative estimates vanish on constant data") {
    const TimeSeries s =
        sample_function(0.0, 0.01, 50, [](double) { return 2.5; });
    CHECK(estimate_derivatives(s).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("derivative estimates of sine track cosine at second order") {
    const TimeSeries s =
        sample_function(0.0, 0.01, 1000, [](double t) { return std::sin(t); });
    const Matrix d = estimate_derivatives(s);
    for (int i = 1; i + 1 < s.samples(); ++i)
        CHECK(std::abs(d(i, 0) - std::cos(s.times[i])) <= 2e-5);
}

namespace {

TimeSeries random_series(int m, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    TimeSeries s;
    s.times.resize(m);
    s.values.resize(m, n);
    for (int i = 0; i < m; ++i) {
        s.times[i] = 0.01 * i;
        for (int c = 0; c < n; ++c)
            s.values(i, c) = u(rng);
    }
    return s;
}

} // namespace

TEST_CASE("scalar one-delay quadratic library has the six expected columns") {
    const TimeSeries s = random_series(100, 1, 1);
    const DelayedView view = delayed_samples(s, 0.2);
    LibrarySpec spec;
    spec.poly_degree = 2;
    DesignMatrix design = build_library(spec, s, {view});
    REQUIRE(design.cols() == 6);
    std::vector<std::string> names;
    for (const auto &label : design.labels)
        names.push_back(
            term_name(label, design.vars, design.slot_delays, design.base_names));
    CHECK(names[0] == "1");
    CHECK(names[1] == "x1(t)");
    CHECK(names[2] == "x1(t-0.20)");
    CHECK(names[3] == "x1(t)^2");
    CHECK(names[4] == "x1(t)·x1(t-0.20)");
    CHECK(names[5] == "x1(t-0.20)^2");
}

TEST_CASE("SIR-style library with one delayed column has ten columns") {
    TimeSeries s = random_series(100, 2, 2);
    s.names = {"s", "i"};
    TimeSeries only_i = s.select_columns({1});
    DelayedView view = delayed_samples(only_i, 0.2);
    view.source_cols = {1};
    LibrarySpec spec;
    spec.poly_degree = 2;
    const DesignMatrix design = build_library(spec, s, {view});
    CHECK(design.cols() == 10);
}

TEST_CASE("pure polynomial counts follow the binomial formula") {
    LibrarySpec spec;
    spec.poly_degree = 2;
    CHECK(column_count(spec, 1, 1) == 6);
    CHECK(column_count(spec, 3, 1) == 28);
    spec.poly_degree = 0;
    CHECK(column_count(spec, 4, 2) == 1);
    spec.poly_degree = 2;
    spec.hill_terms = {{0, 0, 10.0}};
    CHECK(column_count(spec, 1, 1) == 10);
}

TEST_CASE("emitted column count equals column_count across random specs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 3);
        const int k = static_cast<int>(rng() % 3);
        const int d = static_cast<int>(rng() % 4);
        LibrarySpec spec;
        spec.poly_degree = d;
        spec.include_constant = (rng() % 2) == 0;
        if (!spec.include_constant && d == 0)
            spec.include_constant = true;
        const int hills = k > 0 ? static_cast<int>(rng() % 2) : 0;
        for (int h = 0; h < hills; ++h)
            spec.hill_terms.push_back(
                {static_cast<int>(rng() % k), static_cast<int>(rng() % n), 4.0});

        const TimeSeries s = random_series(400, n, 100 + trial);
        std::vector<DelayedView> views;
        for (int j = 0; j < k; ++j)
            views.push_back(delayed_samples(s, 0.1 * (j + 1)));
        const DesignMatrix design = build_library(spec, s, views);
        CHECK(design.cols() == column_count(spec, n, k));
    }
}

TEST_CASE("larger delays never have more valid rows") {
    const TimeSeries s = random_series(300, 1, 3);
    int prev = delayed_samples(s, 0.05).valid_rows();
    for (double delay : {0.2, 0.5, 1.0, 2.0}) {
        const int rows = delayed_samples(s, delay).valid_rows();
        CHECK(rows <= prev);
        prev = rows;
    }
}

TEST_CASE("labels reconstruct their columns") {
    const TimeSeries s = random_series(200, 2, 4);
    const DelayedView view = delayed_samples(s, 0.3);
    LibrarySpec spec;
    spec.poly_degree = 3;
    spec.hill_terms = {{0, 1, 5.0}};
    const DesignMatrix design = build_library(spec, s, {view});

    // augmented variable columns in declaration order
    std::vector<Vector> aug;
    aug.push_back(s.values.col(0));
    aug.push_back(s.values.col(1));
    aug.push_back(view.values.col(0));
    aug.push_back(view.values.col(1));
    Vector hill(s.samples());
    for (int i = 0; i < s.samples(); ++i)
        hill[i] = 1.0 / (1.0 + std::pow(view.values(i, 1), 5.0));
    aug.push_back(hill);

    for (int c = 0; c < design.cols(); ++c) {
        const auto &label = design.labels[c];
        REQUIRE(label.kind == TermLabel::Kind::Monomial);
        Vector product = Vector::Ones(s.samples());
        for (const auto &[var, power] : label.powers)
            for (int p = 0; p < power; ++p)
                product = product.cwiseProduct(aug[var]);
        for (int i = 0; i < s.samples(); ++i) {
            if (!design.row_mask[i])
                continue;
            CHECK(design.columns(i, c) ==
                  doctest::Approx(product[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("underdetermined libraries are rejected") {
    const TimeSeries s = random_series(6, 1, 5);
    const DelayedView view = delayed_samples(s, 0.03);
    LibrarySpec spec;
    spec.poly_degree = 3;
    CHECK_THROWS_AS(build_library(spec, s, {view}), ConfigError);
}

TEST_CASE("delays beyond data coverage are rejected") {
    const TimeSeries s = random_series(100, 1, 6);
    CHECK_THROWS_AS(delayed_samples(s, 50.0), ConfigError);
}

TEST_CASE("library CSV carries symbolic headers") {
    const TimeSeries s = random_series(50, 1, 8);
    const DelayedView view = delayed_samples(s, 0.1);
    LibrarySpec spec;
    spec.poly_degree = 2;
    const DesignMatrix design = build_library(spec, s, {view});
    const std::string csv = library_to_csv(design);
    CHECK(csv.rfind("1,", 0) == 0);
    CHECK(csv.find("x1(t)·x1(t-0.10)") != std::string::npos);
}
