#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace lumpkit {

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd &)>;

struct SolverConfig {
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    double initial_step = 1e-4;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 1'000'000;
    /// Consecutive rejected steps after which stiffness is suspected.
    std::size_t stiffness_rejections = 50;

    void validate() const;
};

/// Accepted steps of a Dormand-Prince 5(4) integration with the pair's
/// continuous extension, so the solution can be read at any t in [0, T].
class Trajectory {
  public:
    const std::vector<double> &times() const noexcept { return times_; }
    const std::vector<Eigen::VectorXd> &states() const noexcept { return states_; }
    double final_time() const { return times_.back(); }
    std::size_t dimension() const { return static_cast<std::size_t>(states_.front().size()); }
    std::size_t rejected_steps() const noexcept { return rejected_; }

    /// Dense output at t (clamped to the integration interval).
    Eigen::VectorXd at(double t) const;

    /// Dense output on an ascending grid of times.
    std::vector<Eigen::VectorXd> sample(const std::vector<double> &grid) const;

  private:
    friend Trajectory integrate(const VectorField &, const Eigen::VectorXd &, double, const SolverConfig &);

    std::vector<double> times_;
    std::vector<Eigen::VectorXd> states_;
    // Interpolation coefficients of step k (between times_[k] and times_[k+1]).
    std::vector<std::array<Eigen::VectorXd, 5>> dense_;
    std::size_t rejected_ = 0;
};

/// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with proportional step
/// control on the mixed error scale max(abs_tol, rel_tol*|x_i|).
///
/// Throws NumericError on step-size underflow, suspected stiffness or the step
/// budget running out, and EvaluationError (annotated with t and the state)
/// when the drift cannot be evaluated.
Trajectory integrate(const VectorField &drift, const Eigen::VectorXd &x0, double horizon, const SolverConfig &cfg);

/// `n` equally spaced times from 0 to `horizon` inclusive.
std::vector<double> uniform_grid(double horizon, std::size_t n);

} // namespace lumpkit
