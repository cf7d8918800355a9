#pragma once

#include "core/dde_sim.hpp"

namespace dsy {

/// Exponential quadratic kernel k(y,y*) = sigma^2 exp(-|y-y*|^2 / 2 ell^2).
struct KernelParams {
    double signal_sigma = 1.0;
    double length_scale = 1.0;
    double jitter = 1e-8; // added to the diagonal as jitter * sigma^2

    void validate() const;
};

struct ObservationSet {
    Matrix inputs; // l x s
    Vector targets;

    int size() const { return static_cast<int>(targets.size()); }
    void validate() const;
};

Matrix kernel_matrix(const Matrix &a, const Matrix &b, const KernelParams &params);

/// Noise-free GP posterior: Cholesky factor of K(Y,Y) + jitter*sigma^2*I and
/// the cached weights K^-1 u. Immutable after fit; predicts are const.
class GpPosterior {
  public:
    GpPosterior(ObservationSet obs, KernelParams params);

    const KernelParams &params() const { return params_; }
    const Matrix &inputs() const { return obs_.inputs; }

    /// Posterior mean and standard deviation at each query row; variance is
    /// clamped at zero.
    std::pair<Vector, Vector> predict(const Matrix &queries) const;

  private:
    ObservationSet obs_;
    KernelParams params_;
    Eigen::LLT<Matrix> factor_;
    Vector alpha_;
};

GpPosterior gp_fit(ObservationSet obs, const KernelParams &params);

double log_marginal_likelihood(const ObservationSet &obs, const KernelParams &params);

/// Grid search maximizing the log marginal likelihood; ties broken toward
/// larger length scale, then smaller sigma.
KernelParams select_hyperparams(const ObservationSet &obs,
                                const std::vector<double> &sigma_grid,
                                const std::vector<double> &ell_grid,
                                double jitter = 1e-8);

} // namespace dsy
