#include "core/dde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dsy {

namespace {

double require_param(const ParamMap &params, const std::string &name) {
    auto it = params.find(name);
    if (it == params.end())
        throw ConfigError("missing parameter '" + name + "'");
    return it->second;
}

double require_positive(const ParamMap &params, const std::string &name) {
    double v = require_param(params, name);
    if (!(v > 0.0))
        throw ConfigError("parameter '" + name + "' must be positive, got " +
                          std::to_string(v));
    return v;
}

// Cubic Hermite on [t0, t0+h] from endpoint states and derivatives.
Vector hermite(double s, double h, const Vector &x0, const Vector &x1,
               const Vector &f0, const Vector &f1) {
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * x0 + (h10 * h) * f0 + h01 * x1 + (h11 * h) * f1;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void DelaySystem::validate() const {
    if (dim < 1)
        throw ConfigError("system dimension must be positive");
    if (!rhs)
        throw ConfigError("system has no right-hand side");
    double prev = 0.0;
    for (double tau : delays) {
        if (!(tau > prev))
            throw ConfigError("delays must be strictly increasing and positive");
        prev = tau;
    }
}

HistorySegment HistorySegment::constant(Vector state, double extent) {
    if (!(extent >= 0.0))
        throw ConfigError("history extent must be nonnegative");
    HistorySegment h;
    h.constant_ = true;
    h.extent_ = extent;
    h.state_ = std::move(state);
    return h;
}

HistorySegment HistorySegment::sampled(std::vector<double> times, Matrix states) {
    if (times.size() < 2 || static_cast<Eigen::Index>(times.size()) != states.rows())
        throw ConfigError("sampled history needs >= 2 rows aligned with times");
    if (!std::is_sorted(times.begin(), times.end()))
        throw ConfigError("sampled history times must be increasing");
    if (times.back() > 1e-12 || times.back() < -1e-12)
        throw ConfigError("sampled history must end at t = 0");
    HistorySegment h;
    h.constant_ = false;
    h.extent_ = -times.front();
    h.times_ = std::move(times);
    h.states_ = std::move(states);
    return h;
}

Vector HistorySegment::at(double t) const {
    if (constant_)
        return state_;
    if (t <= times_.front())
        return states_.row(0);
    if (t >= times_.back())
        return states_.row(states_.rows() - 1);
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto j = static_cast<Eigen::Index>(it - times_.begin()) - 1;
    const double t0 = times_[j], t1 = times_[j + 1];
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * states_.row(j).transpose() + w * states_.row(j + 1).transpose();
}

namespace {

// Evaluates the solution at any past time: history for t <= 0, Hermite dense
// output over the nodes computed so far otherwise.
class DenseSolution {
  public:
    DenseSolution(const HistorySegment &history, double step, int dim)
        : history_(history), step_(step) {
        states_.reserve(1024);
        derivs_.reserve(1024);
        (void)dim;
    }

    void push(const Vector &state, const Vector &deriv) {
        states_.push_back(state);
        derivs_.push_back(deriv);
    }

    int nodes() const { return static_cast<int>(states_.size()); }
    const Vector &state(int i) const { return states_[i]; }
    const Vector &deriv(int i) const { return derivs_[i]; }

    Vector at(double t) const {
        if (t <= 0.0)
            return history_.at(t);
        double pos = t / step_;
        auto j = static_cast<long>(std::floor(pos));
        const long last = static_cast<long>(states_.size()) - 1;
        if (j >= last)
            j = last - 1;
        if (j < 0)
            j = 0;
        const double s = pos - static_cast<double>(j);
        if (s <= 1e-13)
            return states_[j];
        return hermite(s, step_, states_[j], states_[j + 1], derivs_[j], derivs_[j + 1]);
    }

  private:
    const HistorySegment &history_;
    double step_;
    std::vector<Vector> states_;
    std::vector<Vector> derivs_;
};

} // namespace

Trajectory integrate(const DelaySystem &system, const HistorySegment &history,
                     double t_end, double step) {
    system.validate();
    if (!(step > 0.0))
        throw ConfigError("step must be positive");
    if (!(t_end > 0.0))
        throw ConfigError("t_end must be positive");
    if (!system.delays.empty() && step > system.delays.front() + 1e-12)
        throw ConfigError("step exceeds the smallest delay; dense output would "
                          "need future values");
    if (!system.delays.empty() &&
        history.extent() + 1e-12 < system.delays.back())
        throw ConfigError("history span does not cover the largest delay");
    if (history.dim() != system.dim)
        throw ConfigError("history dimension does not match the system");

    const auto n_steps = static_cast<long>(std::llround(t_end / step));
    if (n_steps < 1)
        throw ConfigError("t_end shorter than one step");

    DenseSolution dense(history, step, system.dim);

    auto delayed_at = [&](double t) {
        std::vector<Vector> xdel(system.delays.size());
        for (size_t j = 0; j < system.delays.size(); ++j)
            xdel[j] = dense.at(t - system.delays[j]);
        return xdel;
    };

    Vector x = history.at(0.0);
    Vector f = system.eval_rhs(x, delayed_at(0.0));
    dense.push(x, f);

    for (long i = 0; i < n_steps; ++i) {
        const double t = static_cast<double>(i) * step;
        const double h = step;
        const auto del_mid = delayed_at(t + 0.5 * h);
        const auto del_end = delayed_at(t + h);

        const Vector k1 = dense.deriv(static_cast<int>(i));
        const Vector k2 = system.eval_rhs(x + 0.5 * h * k1, del_mid);
        const Vector k3 = system.eval_rhs(x + 0.5 * h * k2, del_mid);
        const Vector k4 = system.eval_rhs(x + h * k3, del_end);

        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite())
            throw NumericError("integration diverged at t = " + format_double(t + h) +
                               " (last valid t = " + format_double(t) + ")");
        f = system.eval_rhs(x, del_end);
        dense.push(x, f);
    }

    Trajectory traj;
    traj.times.resize(n_steps + 1);
    traj.states.resize(n_steps + 1, system.dim);
    Matrix derivs(n_steps + 1, system.dim);
    for (long i = 0; i <= n_steps; ++i) {
        traj.times[i] = static_cast<double>(i) * step;
        traj.states.row(i) = dense.state(static_cast<int>(i)).transpose();
        derivs.row(i) = dense.deriv(static_cast<int>(i)).transpose();
    }
    traj.derivatives = std::move(derivs);
    return traj;
}

Trajectory decimate(const Trajectory &traj, int every) {
    if (every < 1)
        throw ConfigError("decimation factor must be >= 1");
    const int m = (traj.samples() - 1) / every + 1;
    Trajectory out;
    out.times.resize(m);
    out.states.resize(m, traj.dim());
    if (traj.derivatives)
        out.derivatives = Matrix(m, traj.dim());
    for (int i = 0; i < m; ++i) {
        const int src = i * every;
        out.times[i] = traj.times[src];
        out.states.row(i) = traj.states.row(src);
        if (traj.derivatives)
            out.derivatives->row(i) = traj.derivatives->row(src);
    }
    return out;
}

namespace {

// Interpolates a sampled trajectory (cubic Hermite when derivatives are
// available, linear otherwise) with history fallback for t < times.front().
Vector sample_solution(const Trajectory &traj, const HistorySegment &history,
                       double t) {
    const double t0 = traj.times.front();
    if (t < t0 - 1e-12) {
        if (t < -history.extent() - 1e-9)
            throw ConfigError("delayed query at t = " + format_double(t) +
                              " outside history and trajectory coverage");
        return history.at(t);
    }
    const double dt = traj.times[1] - traj.times[0];
    double pos = (t - t0) / dt;
    auto j = static_cast<long>(std::floor(pos + 1e-12));
    const long last = static_cast<long>(traj.times.size()) - 1;
    if (j > last)
        throw ConfigError("delayed query beyond the trajectory end");
    if (j == last)
        j = last - 1;
    const double s = (t - traj.times[j]) / dt;
    if (std::abs(s) <= 1e-12)
        return traj.states.row(j);
    if (traj.derivatives) {
        return hermite(s, dt, traj.states.row(j).transpose(),
                       traj.states.row(j + 1).transpose(),
                       traj.derivatives->row(j).transpose(),
                       traj.derivatives->row(j + 1).transpose());
    }
    return (1.0 - s) * traj.states.row(j).transpose() +
           s * traj.states.row(j + 1).transpose();
}

} // namespace

Matrix exact_derivatives(const DelaySystem &system, const Trajectory &traj,
                         const HistorySegment &history) {
    system.validate();
    Matrix out(traj.samples(), system.dim);
    std::vector<Vector> xdel(system.delays.size());
    for (int i = 0; i < traj.samples(); ++i) {
        const double t = traj.times[i];
        for (size_t j = 0; j < system.delays.size(); ++j)
            xdel[j] = sample_solution(traj, history, t - system.delays[j]);
        out.row(i) = system.eval_rhs(traj.states.row(i), xdel).transpose();
    }
    return out;
}

std::pair<DelaySystem, HistorySegment> benchmark(const std::string &name,
                                                 const ParamMap &params) {
    DelaySystem sys;
    sys.params = params;
    if (name == "logistic") {
        const double tau = require_positive(params, "tau");
        require_positive(params, "rho");
        sys.dim = 1;
        sys.delays = {tau};
        sys.rhs = [](const Vector &x, const std::vector<Vector> &xd, const ParamMap &p) {
            Vector out(1);
            out[0] = p.at("rho") * x[0] * (1.0 - xd[0][0]);
            return out;
        };
        Vector phi(1);
        phi << 0.1;
        return {sys, HistorySegment::constant(phi, tau)};
    }
    if (name == "sir") {
        const double tau = require_positive(params, "tau");
        require_positive(params, "beta");
        require_positive(params, "mu");
        sys.dim = 3;
        sys.delays = {tau};
        sys.rhs = [](const Vector &x, const std::vector<Vector> &xd, const ParamMap &p) {
            const double beta = p.at("beta"), mu = p.at("mu");
            Vector out(3);
            out[0] = -beta * x[0] * x[1];
            out[1] = beta * x[0] * x[1] - mu * xd[0][1];
            out[2] = mu * xd[0][1];
            return out;
        };
        Vector phi(3);
        phi << 0.9, 0.1, 0.0;
        return {sys, HistorySegment::constant(phi, tau)};
    }
    if (name == "mackey_glass") {
        const double tau = require_positive(params, "tau");
        require_positive(params, "beta");
        require_positive(params, "gamma");
        require_positive(params, "alpha");
        sys.dim = 1;
        sys.delays = {tau};
        sys.rhs = [](const Vector &x, const std::vector<Vector> &xd, const ParamMap &p) {
            const double xt = xd[0][0];
            Vector out(1);
            out[0] = p.at("beta") * xt / (1.0 + std::pow(xt, p.at("alpha"))) -
                     p.at("gamma") * x[0];
            return out;
        };
        Vector phi(1);
        phi << 0.1;
        return {sys, HistorySegment::constant(phi, tau)};
    }
    if (name == "two_delay_cubic") {
        const double tau1 = require_positive(params, "tau1");
        const double tau2 = require_positive(params, "tau2");
        require_param(params, "a");
        require_param(params, "b");
        if (std::abs(tau1 - tau2) < 1e-12)
            throw ConfigError("two_delay_cubic requires distinct delays");
        sys.dim = 1;
        sys.delays = {std::min(tau1, tau2), std::max(tau1, tau2)};
        // slot of tau1 (the squared term) in the sorted delay list
        const int i1 = tau1 < tau2 ? 0 : 1;
        const int i2 = 1 - i1;
        sys.rhs = [i1, i2](const Vector &, const std::vector<Vector> &xd, const ParamMap &p) {
            const double x1 = xd[i1][0], x2 = xd[i2][0];
            Vector out(1);
            out[0] = p.at("a") * x1 * x1 + p.at("b") * x2 * x2 * x2;
            return out;
        };
        Vector phi(1);
        phi << 1.2;
        return {sys, HistorySegment::constant(phi, std::max(tau1, tau2))};
    }
    throw ConfigError("unknown benchmark '" + name + "'");
}

std::string trajectory_to_csv(const Trajectory &traj) {
    std::ostringstream out;
    const int n = traj.dim();
    out << "t";
    for (int j = 0; j < n; ++j)
        out << ",x" << (j + 1);
    if (traj.derivatives)
        for (int j = 0; j < n; ++j)
            out << ",dx" << (j + 1);
    out << "\n";
    for (int i = 0; i < traj.samples(); ++i) {
        out << format_double(traj.times[i]);
        for (int j = 0; j < n; ++j)
            out << "," << format_double(traj.states(i, j));
        if (traj.derivatives)
            for (int j = 0; j < n; ++j)
                out << "," << format_double((*traj.derivatives)(i, j));
        out << "\n";
    }
    return out.str();
}

Trajectory trajectory_from_csv(const std::string &csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("empty trajectory CSV");
    int n_state = 0, n_deriv = 0;
    {
        std::istringstream hs(line);
        std::string field;
        bool first = true;
        while (std::getline(hs, field, ',')) {
            if (first) {
                if (field != "t")
                    throw ConfigError("trajectory CSV must start with a 't' column");
                first = false;
            } else if (field.rfind("dx", 0) == 0) {
                ++n_deriv;
            } else if (field.rfind('x', 0) == 0) {
                ++n_state;
            } else {
                throw ConfigError("unexpected trajectory CSV column '" + field + "'");
            }
        }
    }
    if (n_state == 0)
        throw ConfigError("trajectory CSV has no state columns");
    if (n_deriv != 0 && n_deriv != n_state)
        throw ConfigError("trajectory CSV derivative columns do not match states");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<double> row;
        while (std::getline(ls, field, ','))
            row.push_back(std::stod(field));
        if (static_cast<int>(row.size()) != 1 + n_state + n_deriv)
            throw ConfigError("trajectory CSV row width mismatch");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ConfigError("trajectory CSV has no samples");

    Trajectory traj;
    traj.times.resize(rows.size());
    traj.states.resize(static_cast<Eigen::Index>(rows.size()), n_state);
    if (n_deriv)
        traj.derivatives = Matrix(static_cast<Eigen::Index>(rows.size()), n_state);
    for (size_t i = 0; i < rows.size(); ++i) {
        traj.times[i] = rows[i][0];
        for (int j = 0; j < n_state; ++j)
            traj.states(static_cast<Eigen::Index>(i), j) = rows[i][1 + j];
        if (n_deriv)
            for (int j = 0; j < n_state; ++j)
                (*traj.derivatives)(static_cast<Eigen::Index>(i), j) =
                    rows[i][1 + n_state + j];
    }
    return traj;
}

} // namespace dsy
