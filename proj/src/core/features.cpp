#include "core/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dsy {

namespace {

std::string default_name(int j) { return "x" + std::to_string(j + 1); }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

long binomial(long n, long k) {
    if (k < 0 || k > n)
        return 0;
    long r = 1;
    for (long i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

} // namespace

double TimeSeries::dt() const {
    if (samples() < 2)
        throw ConfigError("time series needs at least 2 samples");
    return (times.back() - times.front()) / static_cast<double>(samples() - 1);
}

void TimeSeries::validate() const {
    if (samples() < 2)
        throw ConfigError("time series needs at least 2 samples");
    if (static_cast<Eigen::Index>(times.size()) != values.rows())
        throw ConfigError("time series rows do not match times");
    const double step = dt();
    if (!(step > 0.0))
        throw ConfigError("time series times must be increasing");
    for (int i = 1; i < samples(); ++i) {
        const double d = times[i] - times[i - 1];
        if (std::abs(d - step) > 1e-9 * std::abs(step))
            throw ConfigError("time series spacing is not uniform");
    }
    if (!names.empty() && static_cast<int>(names.size()) != dim())
        throw ConfigError("time series names do not match the dimension");
}

TimeSeries TimeSeries::select_columns(const std::vector<int> &cols) const {
    TimeSeries out;
    out.times = times;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] < 0 || cols[j] >= dim())
            throw ConfigError("column selection out of range");
        out.values.col(static_cast<Eigen::Index>(j)) = values.col(cols[j]);
        out.names.push_back(names.empty() ? default_name(cols[j]) : names[cols[j]]);
    }
    return out;
}

TimeSeries series_from_trajectory(const Trajectory &traj) {
    TimeSeries s;
    s.times = traj.times;
    s.values = traj.states;
    return s;
}

int DelayedView::valid_rows() const {
    return static_cast<int>(std::count(valid.begin(), valid.end(), char(1)));
}

DelayedView delayed_samples(const TimeSeries &series, double delay) {
    series.validate();
    if (!(delay > 0.0))
        throw ConfigError("delay must be positive");
    const double step = series.dt();
    const int m = series.samples();
    const int n = series.dim();

    DelayedView view;
    view.delay = delay;
    view.values = Matrix::Zero(m, n);
    view.valid.assign(m, 0);
    view.names = series.names;
    if (view.names.empty())
        for (int j = 0; j < n; ++j)
            view.names.push_back(default_name(j));
    for (int j = 0; j < n; ++j)
        view.source_cols.push_back(j);

    const double ratio = delay / step;
    const auto shift = static_cast<long>(std::llround(ratio));
    const bool grid_hit = std::abs(ratio - static_cast<double>(shift)) <=
                          1e-9 * (1.0 + std::abs(ratio));

    if (grid_hit) {
        for (long i = shift; i < m; ++i) {
            view.values.row(i) = series.values.row(i - shift);
            view.valid[i] = 1;
        }
    } else {
        const double t0 = series.times.front();
        for (int i = 0; i < m; ++i) {
            const double tq = series.times[i] - delay;
            if (tq < t0 - 1e-12 * std::max(1.0, std::abs(t0)))
                continue;
            double pos = (tq - t0) / step;
            auto j = static_cast<long>(std::floor(pos));
            if (j < 0)
                j = 0;
            if (j > m - 2)
                j = m - 2;
            const double w = pos - static_cast<double>(j);
            view.values.row(i) = (1.0 - w) * series.values.row(j) +
                                 w * series.values.row(j + 1);
            view.valid[i] = 1;
        }
    }
    if (view.valid_rows() == 0)
        throw ConfigError("delay " + std::to_string(delay) +
                          " leaves no valid rows");
    return view;
}

Matrix estimate_derivatives(const TimeSeries &series) {
    series.validate();
    const int m = series.samples();
    if (m < 3)
        throw ConfigError("derivative estimation needs at least 3 samples");
    const double step = series.dt();
    const Matrix &v = series.values;
    Matrix d(m, series.dim());
    d.row(0) = (-3.0 * v.row(0) + 4.0 * v.row(1) - v.row(2)) / (2.0 * step);
    for (int i = 1; i < m - 1; ++i)
        d.row(i) = (v.row(i + 1) - v.row(i - 1)) / (2.0 * step);
    d.row(m - 1) =
        (3.0 * v.row(m - 1) - 4.0 * v.row(m - 2) + v.row(m - 3)) / (2.0 * step);
    return d;
}

void LibrarySpec::validate() const {
    if (poly_degree < 0)
        throw ConfigError("polynomial degree must be nonnegative");
    for (const auto &h : hill_terms)
        if (!std::isnan(h.alpha) && h.alpha < 0.0)
            throw ConfigError("Hill exponent must be nonnegative");
    if (!include_constant && poly_degree == 0 && hill_terms.empty() &&
        sin_vars.empty() && cos_vars.empty())
        throw ConfigError("library spec enables no term class");
}

int DesignMatrix::valid_rows() const {
    return static_cast<int>(std::count(row_mask.begin(), row_mask.end(), char(1)));
}

namespace {

void enumerate_monomials(int n_vars, int degree,
                         const std::function<void(const std::vector<int> &)> &emit) {
    std::vector<int> combo; // nondecreasing variable indices, one per factor
    std::function<void(int, int)> rec = [&](int start, int remaining) {
        if (remaining == 0) {
            emit(combo);
            return;
        }
        for (int v = start; v < n_vars; ++v) {
            combo.push_back(v);
            rec(v, remaining - 1);
            combo.pop_back();
        }
    };
    for (int g = 1; g <= degree; ++g)
        rec(0, g);
}

TermLabel label_from_combo(const std::vector<int> &combo) {
    TermLabel label;
    for (int v : combo) {
        if (!label.powers.empty() && label.powers.back().first == v)
            ++label.powers.back().second;
        else
            label.powers.emplace_back(v, 1);
    }
    return label;
}

} // namespace

DesignMatrix build_library(const LibrarySpec &spec, const TimeSeries &current,
                           const std::vector<DelayedView> &delayed,
                           const ParamMap &extra_params) {
    spec.validate();
    current.validate();
    const int m = current.samples();
    const int n = current.dim();

    DesignMatrix design;
    design.row_mask.assign(m, 1);
    for (const auto &view : delayed) {
        if (view.values.rows() != m)
            throw ConfigError("delayed view row count does not match the series");
        for (int i = 0; i < m; ++i)
            design.row_mask[i] = design.row_mask[i] && view.valid[i];
        design.slot_delays.push_back(view.delay);
    }

    // Augmented variables: current columns, each view's columns, Hill columns.
    Matrix aug(m, 0);
    auto add_var = [&](const AugVar &v, const Eigen::VectorXd &col,
                       const std::string &name) {
        aug.conservativeResize(Eigen::NoChange, aug.cols() + 1);
        aug.col(aug.cols() - 1) = col;
        design.vars.push_back(v);
        design.base_names.push_back(name);
    };

    for (int j = 0; j < n; ++j) {
        const std::string nm =
            (current.names.empty() ? default_name(j) : current.names[j]) + "(t)";
        add_var({AugVar::Kind::Current, j, -1, 0.0}, current.values.col(j), nm);
    }
    for (size_t s = 0; s < delayed.size(); ++s) {
        const auto &view = delayed[s];
        for (int j = 0; j < view.values.cols(); ++j) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "(t-%.2f)", view.delay);
            const int src = view.source_cols.empty() ? j : view.source_cols[j];
            add_var({AugVar::Kind::Delayed, src, static_cast<int>(s), 0.0},
                    view.values.col(j), view.names[j] + buf);
        }
    }
    for (const auto &h : spec.hill_terms) {
        if (h.slot < 0 || h.slot >= static_cast<int>(delayed.size()))
            throw ConfigError("Hill term references a missing delay slot");
        const auto &view = delayed[h.slot];
        if (h.var < 0 || h.var >= view.values.cols())
            throw ConfigError("Hill term references a missing variable");
        double alpha = h.alpha;
        if (std::isnan(alpha)) {
            auto it = extra_params.find("alpha");
            if (it == extra_params.end())
                throw ConfigError("Hill exponent left unset and no 'alpha' "
                                  "parameter supplied");
            alpha = it->second;
        }
        Eigen::VectorXd col =
            (1.0 + view.values.col(h.var).array().pow(alpha)).inverse();
        char buf[96];
        std::snprintf(buf, sizeof(buf), "1/(1+%s(t-%.2f)^%g)",
                      view.names[h.var].c_str(), view.delay, alpha);
        const int src = view.source_cols.empty() ? h.var : view.source_cols[h.var];
        add_var({AugVar::Kind::Hill, src, h.slot, alpha}, col, buf);
    }

    const int n_aug = static_cast<int>(aug.cols());
    std::vector<TermLabel> labels;
    std::vector<Eigen::VectorXd> cols;
    if (spec.include_constant) {
        labels.push_back(TermLabel{});
        cols.push_back(Eigen::VectorXd::Ones(m));
    }
    enumerate_monomials(n_aug, spec.poly_degree, [&](const std::vector<int> &combo) {
        Eigen::VectorXd col = Eigen::VectorXd::Ones(m);
        for (int v : combo)
            col = col.cwiseProduct(aug.col(v));
        labels.push_back(label_from_combo(combo));
        cols.push_back(std::move(col));
    });
    for (int v : spec.sin_vars) {
        if (v < 0 || v >= n)
            throw ConfigError("sin term references a missing variable");
        TermLabel label;
        label.kind = TermLabel::Kind::Sin;
        label.trig_var = v;
        labels.push_back(label);
        cols.push_back(current.values.col(v).array().sin());
    }
    for (int v : spec.cos_vars) {
        if (v < 0 || v >= n)
            throw ConfigError("cos term references a missing variable");
        TermLabel label;
        label.kind = TermLabel::Kind::Cos;
        label.trig_var = v;
        labels.push_back(label);
        cols.push_back(current.values.col(v).array().cos());
    }

    design.labels = std::move(labels);
    design.columns.resize(m, static_cast<Eigen::Index>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j)
        design.columns.col(static_cast<Eigen::Index>(j)) = cols[j];

    if (design.valid_rows() < design.cols())
        throw ConfigError("library is underdetermined: " +
                          std::to_string(design.valid_rows()) + " valid rows for " +
                          std::to_string(design.cols()) + " columns");
    return design;
}

long column_count(const LibrarySpec &spec, int n, int k) {
    spec.validate();
    if (n < 1 || k < 0)
        throw ConfigError("column_count needs n >= 1 and k >= 0");
    const long n_aug = static_cast<long>(k + 1) * n +
                       static_cast<long>(spec.hill_terms.size());
    long count = binomial(n_aug + spec.poly_degree, spec.poly_degree) - 1;
    if (spec.include_constant)
        ++count;
    count += static_cast<long>(spec.sin_vars.size() + spec.cos_vars.size());
    return count;
}

DesignMatrix restrict_rows(DesignMatrix design, const std::vector<char> &keep) {
    if (keep.size() != design.row_mask.size())
        throw ConfigError("row restriction mask size mismatch");
    for (size_t i = 0; i < keep.size(); ++i)
        design.row_mask[i] = design.row_mask[i] && keep[i];
    return design;
}

std::string term_name(const TermLabel &label, const std::vector<AugVar> &vars,
                      const std::vector<double> &slot_delays,
                      const std::vector<std::string> &base_names) {
    (void)vars;
    (void)slot_delays;
    switch (label.kind) {
    case TermLabel::Kind::Sin:
        return "sin(" + base_names[label.trig_var] + ")";
    case TermLabel::Kind::Cos:
        return "cos(" + base_names[label.trig_var] + ")";
    case TermLabel::Kind::Monomial:
        break;
    }
    if (label.powers.empty())
        return "1";
    std::string out;
    for (const auto &[v, p] : label.powers) {
        if (!out.empty())
            out += "·";
        out += base_names[v];
        if (p > 1)
            out += "^" + std::to_string(p);
    }
    return out;
}

std::string library_to_csv(const DesignMatrix &design) {
    std::ostringstream out;
    for (int j = 0; j < design.cols(); ++j) {
        if (j)
            out << ",";
        out << term_name(design.labels[j], design.vars, design.slot_delays,
                         design.base_names);
    }
    out << "\n";
    for (int i = 0; i < design.rows(); ++i) {
        if (!design.row_mask[i])
            continue;
        for (int j = 0; j < design.cols(); ++j) {
            if (j)
                out << ",";
            out << format_double(design.columns(i, j));
        }
        out << "\n";
    }
    return out.str();
}

} // namespace dsy
