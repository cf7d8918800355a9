#pragma once

#include "core/features.hpp"

namespace dsy {

struct StlsConfig {
    double threshold = 0.1; // coefficients below this magnitude are zeroed
    int max_iterations = 25;
    double rcond = 1e-12;            // rank cutoff for the least-squares solves
    bool normalize_columns = false;  // raw fits by default

    void validate() const;
};

/// The fitted coefficient matrix Xi plus the library metadata needed to print
/// the model as equations and re-execute it as a DDE right-hand side.
struct SparseModel {
    Matrix coefficients; // q x n
    std::vector<TermLabel> labels;
    std::vector<AugVar> vars;
    std::vector<double> slot_delays;
    std::vector<std::string> base_names;
    std::vector<std::string> var_names; // output variables; defaults x1..xn
    ParamMap params;
    double fit_error = 0.0;
    bool degenerate = false; // some output column ended with an empty support

    int n_terms() const { return static_cast<int>(labels.size()); }
    int dim() const { return static_cast<int>(coefficients.cols()); }
};

/// Sequential thresholded least squares, solved per output column: alternate
/// least-squares on the active support with hard thresholding until the
/// support is stable.
SparseModel stls_fit(const DesignMatrix &design, const Matrix &derivatives,
                     const StlsConfig &config);

/// Frobenius norm of X' - Theta * Xi over the design's valid rows (the
/// objective g minimized over candidate delays).
double reconstruction_error(const SparseModel &model, const DesignMatrix &design,
                            const Matrix &derivatives);

/// Executable DDE built from the fitted terms; delays are the model's slot
/// delays (sorted into the DelaySystem convention).
DelaySystem model_to_system(const SparseModel &model);

/// One equation per state variable, zero coefficients omitted.
std::string format_model(const SparseModel &model, int decimals = 3);

std::string model_to_json(const SparseModel &model);
SparseModel model_from_json(const std::string &json);

} // namespace dsy
