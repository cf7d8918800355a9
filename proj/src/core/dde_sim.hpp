#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace dsy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

using ParamMap = std::map<std::string, double>;

/// A delay differential equation x'(t) = f(x(t), x(t-tau_1), ..., x(t-tau_k))
/// with constant discrete delays 0 < tau_1 < ... < tau_k.
struct DelaySystem {
    int dim = 1;
    std::vector<double> delays; // strictly increasing, strictly positive
    // rhs(current state, delayed states ordered as `delays`, params) -> derivative
    std::function<Vector(const Vector &, const std::vector<Vector> &, const ParamMap &)> rhs;
    ParamMap params;

    Vector eval_rhs(const Vector &x, const std::vector<Vector> &xdel) const {
        return rhs(x, xdel, params);
    }
    void validate() const;
};

/// Initial history phi on [-extent, 0]: either a constant state or a sampled
/// sub-trajectory (piecewise-linear between samples).
class HistorySegment {
  public:
    static HistorySegment constant(Vector state, double extent);
    static HistorySegment sampled(std::vector<double> times, Matrix states);

    bool is_constant() const { return constant_; }
    double extent() const { return extent_; }
    int dim() const { return static_cast<int>(state_.size() ? state_.size() : states_.cols()); }

    /// Value at t in [-extent, 0]; queries slightly outside are clamped.
    Vector at(double t) const;

  private:
    HistorySegment() = default;
    bool constant_ = true;
    double extent_ = 0.0;
    Vector state_;               // constant case
    std::vector<double> times_;  // sampled case, increasing, times_.back() == 0
    Matrix states_;              // sampled case, rows align with times_
};

/// Uniformly sampled solution: times, states (one row per sample) and
/// optionally exact rhs evaluations at each sample.
struct Trajectory {
    std::vector<double> times;
    Matrix states;
    std::optional<Matrix> derivatives;

    int samples() const { return static_cast<int>(times.size()); }
    int dim() const { return static_cast<int>(states.cols()); }
};

/// Fixed-step RK4 with method of steps. Delayed states are read from the
/// cubic Hermite dense output of the already-computed solution, or from the
/// history segment for query times below zero. Requires step <= min delay so
/// no stage ever needs a value ahead of the completed grid.
Trajectory integrate(const DelaySystem &system, const HistorySegment &history,
                     double t_end, double step);

/// Keep every `every`-th sample (always including the first).
Trajectory decimate(const Trajectory &traj, int every);

/// X' filled by evaluating the true rhs at every sample; delayed states come
/// from Hermite interpolation of the trajectory (or the history for t < 0).
Matrix exact_derivatives(const DelaySystem &system, const Trajectory &traj,
                         const HistorySegment &history);

/// The four benchmark systems with their default constant initial functions.
/// Names: logistic, sir, mackey_glass, two_delay_cubic.
std::pair<DelaySystem, HistorySegment> benchmark(const std::string &name,
                                                 const ParamMap &params);

/// CSV with header t,x1,...,xn[,dx1,...,dxn], 17 significant digits.
std::string trajectory_to_csv(const Trajectory &traj);
Trajectory trajectory_from_csv(const std::string &csv);

} // namespace dsy
