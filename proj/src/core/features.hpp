#pragma once

#include <string>
#include <vector>

#include "core/dde_sim.hpp"

namespace dsy {

/// Uniformly sampled multivariate series. Samples may start at negative times
/// to encode history (extends coverage for delayed lookups).
struct TimeSeries {
    std::vector<double> times;
    Matrix values;
    std::vector<std::string> names; // optional; defaults to x1..xn

    int samples() const { return static_cast<int>(times.size()); }
    int dim() const { return static_cast<int>(values.cols()); }
    double dt() const;
    void validate() const;
    TimeSeries select_columns(const std::vector<int> &cols) const;
};

TimeSeries series_from_trajectory(const Trajectory &traj);

/// X_tau: the series retarded by `delay`. Rows whose delayed time precedes
/// data coverage are masked invalid.
struct DelayedView {
    double delay = 0.0;
    Matrix values;
    std::vector<char> valid;
    std::vector<std::string> names; // copied from the source series
    // Mapping from view columns back to state-variable indices; defaults to
    // the identity. Set it when the view was built from a column subset.
    std::vector<int> source_cols;

    int valid_rows() const;
};

/// Value at t_i - delay: exact row shift when delay is an integer multiple of
/// dt, linear interpolation between neighboring samples otherwise.
DelayedView delayed_samples(const TimeSeries &series, double delay);

/// Central differences on interior rows, 2nd-order one-sided at the ends.
Matrix estimate_derivatives(const TimeSeries &series);

/// A Hill response 1/(1+x^alpha) evaluated on one variable of one delayed
/// slot; enters the polynomial products as an extra augmented variable.
struct HillTerm {
    int slot = 0; // index into the delayed-view list
    int var = 0;  // variable within that view
    double alpha = 1.0;
};

struct LibrarySpec {
    int poly_degree = 2;
    bool include_constant = true;
    std::vector<HillTerm> hill_terms;
    std::vector<int> sin_vars; // current-variable indices, appended columns
    std::vector<int> cos_vars;

    void validate() const;
};

/// One augmented variable: a current state, a delayed state, or a Hill column.
struct AugVar {
    enum class Kind { Current, Delayed, Hill };
    Kind kind = Kind::Current;
    int var = 0;
    int slot = -1;       // delayed/hill only
    double alpha = 0.0;  // hill only
};

/// A library column: a monomial over augmented variables (sorted variable
/// indices with exponents; empty means the constant 1), or a trig column.
struct TermLabel {
    enum class Kind { Monomial, Sin, Cos };
    Kind kind = Kind::Monomial;
    std::vector<std::pair<int, int>> powers; // (aug var index, exponent)
    int trig_var = -1;
};

struct DesignMatrix {
    Matrix columns;
    std::vector<TermLabel> labels;
    std::vector<AugVar> vars;
    std::vector<double> slot_delays; // delay per slot, from the views
    std::vector<std::string> base_names; // display name per augmented variable
    std::vector<char> row_mask;

    int cols() const { return static_cast<int>(labels.size()); }
    int rows() const { return static_cast<int>(row_mask.size()); }
    int valid_rows() const;
};

/// Theta(X, X_tau1, ...): all monomials of total degree <= d over the
/// augmented variables (current columns, each view's columns, Hill columns),
/// plus requested trig columns. Row mask is the AND of all view masks.
DesignMatrix build_library(const LibrarySpec &spec, const TimeSeries &current,
                           const std::vector<DelayedView> &delayed,
                           const ParamMap &extra_params = {});

/// Exact column count build_library would produce.
long column_count(const LibrarySpec &spec, int n, int k);

/// Keep only rows flagged in `keep` (applied on top of the existing mask).
DesignMatrix restrict_rows(DesignMatrix design, const std::vector<char> &keep);

/// Symbolic name of a term, e.g. "x(t)·x(t-1.00)" or "1/(1+x(t-1.00)^10)".
std::string term_name(const TermLabel &label, const std::vector<AugVar> &vars,
                      const std::vector<double> &slot_delays,
                      const std::vector<std::string> &base_names);

/// Library dump as CSV with symbolic header labels (valid rows only).
std::string library_to_csv(const DesignMatrix &design);

} // namespace dsy
