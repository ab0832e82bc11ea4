#include "lumpkit/integrator.hpp"

#include "lumpkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lumpkit {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner, dopri5).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

std::string describe_state(double t, const Eigen::VectorXd &x) {
    std::ostringstream out;
    out.precision(6);
    out << " at t=" << t << ", x=(";
    for (Eigen::Index i = 0; i < x.size(); ++i)
        out << (i ? ", " : "") << x[i];
    out << ')';
    return out.str();
}

} // namespace

void SolverConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw NumericError("solver tolerances must be positive");
    if (!(initial_step > 0.0) || !(max_step >= initial_step))
        throw NumericError("solver needs max_step >= initial_step > 0");
    if (max_steps == 0)
        throw NumericError("max_steps must be positive");
}

Eigen::VectorXd Trajectory::at(double t) const {
    if (t <= times_.front())
        return states_.front();
    if (t >= times_.back())
        return states_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double h = times_[k + 1] - times_[k];
    const double theta = (t - times_[k]) / h;
    const double theta1 = 1.0 - theta;
    const auto &r = dense_[k];
    return r[0] + theta * (r[1] + theta1 * (r[2] + theta * (r[3] + theta1 * r[4])));
}

std::vector<Eigen::VectorXd> Trajectory::sample(const std::vector<double> &grid) const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(grid.size());
    for (double t : grid)
        out.push_back(at(t));
    return out;
}

Trajectory integrate(const VectorField &drift, const Eigen::VectorXd &x0, double horizon, const SolverConfig &cfg) {
    cfg.validate();
    if (!(horizon > 0.0))
        throw NumericError("integration horizon must be positive");

    double t = 0.0;
    Eigen::VectorXd x = x0;
    auto eval = [&](double at_t, const Eigen::VectorXd &state) {
        try {
            Eigen::VectorXd dx = drift(state);
            if (!dx.allFinite())
                throw NumericError("drift is not finite" + describe_state(at_t, state));
            return dx;
        } catch (const EvaluationError &e) {
            throw EvaluationError(e.what() + describe_state(at_t, state), e.component());
        }
    };

    Trajectory traj;
    traj.times_.push_back(t);
    traj.states_.push_back(x);

    Eigen::VectorXd k1 = eval(t, x);
    double h = std::min({cfg.initial_step, cfg.max_step, horizon});
    std::size_t consecutive_rejects = 0;
    bool last_rejected = false;
    const auto n = static_cast<double>(x0.size());

    for (std::size_t step = 0; t < horizon; ++step) {
        if (step >= cfg.max_steps)
            throw NumericError("step budget of " + std::to_string(cfg.max_steps) + " exhausted at t=" +
                               std::to_string(t));
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw NumericError("step size underflow at t=" + std::to_string(t) + " (stiff or singular system?)");
        const bool final_step = t + h >= horizon;
        if (final_step)
            h = horizon - t;

        const Eigen::VectorXd k2 = eval(t + c2 * h, x + h * (a21 * k1));
        const Eigen::VectorXd k3 = eval(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
        const Eigen::VectorXd k4 = eval(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Eigen::VectorXd k5 = eval(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Eigen::VectorXd k6 =
            eval(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Eigen::VectorXd x_new = x + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const Eigen::VectorXd k7 = eval(t + h, x_new);

        const Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < err.size(); ++i) {
            const double scale = std::max(cfg.abs_tol, cfg.rel_tol * std::max(std::abs(x[i]), std::abs(x_new[i])));
            acc += (err[i] / scale) * (err[i] / scale);
        }
        const double err_norm = n > 0 ? std::sqrt(acc / n) : 0.0;

        if (err_norm <= 1.0) {
            const Eigen::VectorXd diff = x_new - x;
            const Eigen::VectorXd bspl = h * k1 - diff;
            traj.dense_.push_back({x, diff, bspl, diff - h * k7 - bspl,
                                   h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7)});
            t = final_step ? horizon : t + h;
            x = x_new;
            k1 = k7;
            traj.times_.push_back(t);
            traj.states_.push_back(x);
            consecutive_rejects = 0;
            double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
            if (last_rejected)
                factor = std::min(factor, 1.0);
            last_rejected = false;
            h = std::min(h * factor, cfg.max_step);
        } else {
            ++traj.rejected_;
            last_rejected = true;
            if (++consecutive_rejects >= cfg.stiffness_rejections)
                throw NumericError("suspected stiffness: " + std::to_string(consecutive_rejects) +
                                   " consecutive step rejections at t=" + std::to_string(t));
            h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
        }
    }
    return traj;
}

std::vector<double> uniform_grid(double horizon, std::size_t n) {
    if (n < 2)
        throw NumericError("output grid needs at least two points");
    std::vector<double> grid(n);
    for (std::size_t k = 0; k < n; ++k)
        grid[k] = horizon * static_cast<double>(k) / static_cast<double>(n - 1);
    grid.back() = horizon;
    return grid;
}

} // namespace lumpkit
