#include "core/surrogate.hpp"

#include <cmath>

namespace dsy {

void KernelParams::validate() const {
    if (!(signal_sigma > 0.0))
        throw ConfigError("kernel sigma must be positive");
    if (!(length_scale > 0.0))
        throw ConfigError("kernel length scale must be positive");
    if (jitter < 0.0)
        throw ConfigError("kernel jitter must be nonnegative");
}

void ObservationSet::validate() const {
    if (size() < 1)
        throw ConfigError("observation set is empty");
    if (inputs.rows() != targets.size())
        throw ConfigError("observation inputs and targets disagree in length");
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j)
            if ((inputs.row(i) - inputs.row(j)).norm() < 1e-12)
                throw ConfigError("duplicate observation inputs");
}

Matrix kernel_matrix(const Matrix &a, const Matrix &b, const KernelParams &params) {
    params.validate();
    if (a.cols() != b.cols())
        throw ConfigError("kernel inputs disagree in dimension");
    const double s2 = params.signal_sigma * params.signal_sigma;
    const double inv = 1.0 / (2.0 * params.length_scale * params.length_scale);
    Matrix k(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            k(i, j) = s2 * std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv);
    return k;
}

GpPosterior::GpPosterior(ObservationSet obs, KernelParams params)
    : obs_(std::move(obs)), params_(params) {
    obs_.validate();
    params_.validate();
    Matrix k = kernel_matrix(obs_.inputs, obs_.inputs, params_);
    const double s2 = params_.signal_sigma * params_.signal_sigma;
    k.diagonal().array() += params_.jitter * s2;
    factor_.compute(k);
    if (factor_.info() != Eigen::Success)
        throw NumericError("GP kernel matrix factorization failed (smallest "
                           "diagonal entry " +
                           std::to_string(k.diagonal().minCoeff()) +
                           "); consider raising the jitter");
    alpha_ = factor_.solve(obs_.targets);
}

std::pair<Vector, Vector> GpPosterior::predict(const Matrix &queries) const {
    if (queries.cols() != obs_.inputs.cols())
        throw ConfigError("query dimension does not match training inputs");
    const Matrix kq = kernel_matrix(queries, obs_.inputs, params_);
    Vector mean = kq * alpha_;
    // var_i = sigma^2 - |L^-1 k_i|^2, clamped at zero
    const Matrix v = factor_.matrixL().solve(kq.transpose());
    const double s2 = params_.signal_sigma * params_.signal_sigma;
    Vector stddev(queries.rows());
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        const double var = s2 - v.col(i).squaredNorm();
        stddev[i] = std::sqrt(std::max(var, 0.0));
    }
    return {std::move(mean), std::move(stddev)};
}

GpPosterior gp_fit(ObservationSet obs, const KernelParams &params) {
    return GpPosterior(std::move(obs), params);
}

double log_marginal_likelihood(const ObservationSet &obs, const KernelParams &params) {
    obs.validate();
    params.validate();
    Matrix k = kernel_matrix(obs.inputs, obs.inputs, params);
    const double s2 = params.signal_sigma * params.signal_sigma;
    k.diagonal().array() += params.jitter * s2;
    Eigen::LLT<Matrix> llt(k);
    if (llt.info() != Eigen::Success)
        throw NumericError("GP kernel matrix factorization failed in likelihood");
    const Vector alpha = llt.solve(obs.targets);
    double logdet = 0.0;
    const auto &l = llt.matrixLLT();
    for (int i = 0; i < obs.size(); ++i)
        logdet += std::log(l(i, i));
    const double l2pi = std::log(2.0 * M_PI);
    return -0.5 * obs.targets.dot(alpha) - logdet -
           0.5 * static_cast<double>(obs.size()) * l2pi;
}

KernelParams select_hyperparams(const ObservationSet &obs,
                                const std::vector<double> &sigma_grid,
                                const std::vector<double> &ell_grid,
                                double jitter) {
    if (sigma_grid.empty() || ell_grid.empty())
        throw ConfigError("empty hyperparameter grid");
    if (obs.size() < 2)
        throw ConfigError("hyperparameter selection needs >= 2 observations");

    bool found = false;
    KernelParams best;
    double best_lml = 0.0;
    for (double sigma : sigma_grid) {
        for (double ell : ell_grid) {
            KernelParams cand{sigma, ell, jitter};
            double lml;
            try {
                lml = log_marginal_likelihood(obs, cand);
            } catch (const NumericError &) {
                continue;
            }
            if (!std::isfinite(lml))
                continue;
            const bool better =
                !found || lml > best_lml ||
                (lml == best_lml &&
                 (ell > best.length_scale ||
                  (ell == best.length_scale && sigma < best.signal_sigma)));
            if (better) {
                best = cand;
                best_lml = lml;
                found = true;
            }
        }
    }
    if (!found)
        throw NumericError("all hyperparameter candidates failed factorization");
    return best;
}

} // namespace dsy
